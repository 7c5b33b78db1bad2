"""Uniform-grid realization of the chain H^q subset L^2 subset (H^q)' on (0,1).

The fine grid carries the interior hat basis b_1..b_N with homogeneous
Dirichlet ends.  Primal elements are stored by coefficients in that basis,
dual elements by their action <f, b_i> on it.  The two representations are
deliberately never interconverted by the core algorithms: converting
requires the H^q Riesz map, which this module exposes only as a test
oracle (riesz_image / riesz_preimage).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, DomainError
from .numerics import SymMatrix, generalized_eig_pairs, spd_solver

# Piecewise-linear hats belong to H^t only for t < 3/2.
GAMMA = 1.5


def _frozen_vector(values) -> np.ndarray:
    v = np.array(values, dtype=float)
    if v.ndim != 1:
        raise ValueError("expected a 1-d array of values")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class PrimalVector:
    """Element of H, stored by coefficients in the reference hat basis."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen_vector(self.coeffs))

    def __len__(self) -> int:
        return self.coeffs.shape[0]


@dataclass(frozen=True, eq=False)
class DualVector:
    """Element of H', stored by its action on the reference hat basis.

    action_i = <f, b_i>, the duality pairing extended from the L^2 inner
    product.  This is the only representation of a functional computable
    without a Riesz map.
    """

    action: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "action", _frozen_vector(self.action))

    def __len__(self) -> int:
        return self.action.shape[0]


@dataclass(frozen=True, eq=False)
class DiscreteGelfandTriple:
    """Fine-grid model of H^q subset L^2 subset (H^q)'.

    ``mass`` is the L^2 Gram matrix of the hats, ``stiffness`` the H^1
    seminorm matrix, ``inner`` the Gram matrix of the H^q inner product
    actually used for primal/dual norms.  Synthetic triples (used by
    hand-checkable fixtures) carry explicit matrices and leave the grid
    metadata unset.
    """

    n: int
    mass: SymMatrix
    inner: SymMatrix
    stiffness: Optional[SymMatrix] = None
    j_fine: Optional[int] = None
    h: Optional[float] = None
    q: Optional[float] = None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def nodes(self) -> np.ndarray:
        """Interior node coordinates (grid triples only)."""
        if self.h is None:
            raise DomainError("synthetic triple has no grid")
        return self.h * np.arange(1, self.n + 1)

    def inner_solve(self, rhs: np.ndarray) -> np.ndarray:
        if "inner" not in self._cache:
            self._cache["inner"] = spd_solver(self.inner)
        return self._cache["inner"](rhs)

    def mass_solve(self, rhs: np.ndarray) -> np.ndarray:
        if "mass" not in self._cache:
            self._cache["mass"] = spd_solver(self.mass)
        return self._cache["mass"](rhs)


def _tridiagonal(n: int, diag: float, off: float) -> np.ndarray:
    a = np.zeros((n, n))
    np.fill_diagonal(a, diag)
    idx = np.arange(n - 1)
    a[idx, idx + 1] = off
    a[idx + 1, idx] = off
    return a


def spectral_inner_matrix(stiffness, mass, q: float) -> SymMatrix:
    """H^q Gram matrix built from the (stiffness, mass) pencil.

    With W the mass-orthonormal eigenvectors and lambda the pencil
    eigenvalues, the matrix is M W diag(lambda^q) W^T M.  For q = 0 this
    reproduces the mass matrix, for q = 1 the stiffness matrix, and the
    interpolation inequality between the three norms is exact per
    eigenvector.
    """
    lam, w = generalized_eig_pairs(stiffness, mass)
    lam = np.maximum(lam, 0.0)
    mw = np.asarray(mass.a if isinstance(mass, SymMatrix) else mass, dtype=float) @ w
    return SymMatrix((mw * lam**q) @ mw.T)


def build_triple(j_fine: int, q: float) -> DiscreteGelfandTriple:
    """Assemble the triple on the dyadic grid of level ``j_fine``.

    N = 2^j_fine - 1 interior nodes, mesh width h = 2^-j_fine.  The hat
    matrices have the exact closed-form tridiagonal entries
    mass = h * (1/6, 2/3, 1/6) and stiffness = (-1, 2, -1)/h.  The H^q
    Gram matrix is the mass matrix for q = 0, the stiffness matrix for
    q = 1, and the spectral construction otherwise.
    """
    if not 1 <= int(j_fine) == j_fine <= 14:
        raise DomainError(f"j_fine must be an integer in [1, 14], got {j_fine}")
    if not 0.0 <= q < GAMMA:
        raise DomainError(f"q must lie in [0, 3/2) for piecewise-linear hats, got {q}")
    n = 2**j_fine - 1
    h = 2.0**-j_fine
    mass = SymMatrix(_tridiagonal(n, 2.0 * h / 3.0, h / 6.0))
    stiffness = SymMatrix(_tridiagonal(n, 2.0 / h, -1.0 / h))
    if q == 0.0:
        inner = mass
    elif q == 1.0:
        inner = stiffness
    else:
        inner = spectral_inner_matrix(stiffness, mass, q)
    return DiscreteGelfandTriple(
        n=n, mass=mass, inner=inner, stiffness=stiffness, j_fine=j_fine, h=h, q=float(q)
    )


def synthetic_triple(inner, mass=None) -> DiscreteGelfandTriple:
    """Triple from explicit Gram matrices (no grid attached).

    Used by the hand-checkable fixtures; ``mass`` defaults to the
    identity, giving the plain Euclidean pairing.
    """
    inner_m = inner if isinstance(inner, SymMatrix) else SymMatrix(inner)
    if mass is None:
        mass_m = SymMatrix(np.eye(inner_m.n))
    else:
        mass_m = mass if isinstance(mass, SymMatrix) else SymMatrix(mass)
    if mass_m.n != inner_m.n:
        raise DimensionMismatch("mass and inner sizes differ")
    return DiscreteGelfandTriple(n=inner_m.n, mass=mass_m, inner=inner_m)


def _check_primal(t: DiscreteGelfandTriple, f: PrimalVector) -> np.ndarray:
    if not isinstance(f, PrimalVector):
        raise TypeError(f"expected PrimalVector, got {type(f).__name__}")
    if len(f) != t.n:
        raise DimensionMismatch(f"vector has size {len(f)}, triple has {t.n}")
    return f.coeffs


def _check_dual(t: DiscreteGelfandTriple, g: DualVector) -> np.ndarray:
    if not isinstance(g, DualVector):
        raise TypeError(f"expected DualVector, got {type(g).__name__}")
    if len(g) != t.n:
        raise DimensionMismatch(f"vector has size {len(g)}, triple has {t.n}")
    return g.action


def primal_norm(t: DiscreteGelfandTriple, f: PrimalVector) -> float:
    """H-norm of a primal element: sqrt(c^T inner c)."""
    c = _check_primal(t, f)
    return float(np.sqrt(max(c @ (t.inner.a @ c), 0.0)))


def dual_norm(t: DiscreteGelfandTriple, g: DualVector) -> float:
    """H'-norm of a functional: sqrt(a^T inner^-1 a).

    This is the discrete version of the sup characterization
    sup_v <g, v> / ||v||_H, attained at v = inner^-1 a.
    """
    a = _check_dual(t, g)
    return float(np.sqrt(max(a @ t.inner_solve(a), 0.0)))


def pairing(g: DualVector, f: PrimalVector) -> float:
    """Duality pairing <g, f>; plain dot of action against coefficients."""
    if not isinstance(g, DualVector):
        raise TypeError(f"pairing needs a DualVector first, got {type(g).__name__}")
    if not isinstance(f, PrimalVector):
        raise TypeError(f"pairing needs a PrimalVector second, got {type(f).__name__}")
    if len(g) != len(f):
        raise DimensionMismatch(f"sizes differ: {len(g)} vs {len(f)}")
    return float(g.action @ f.coeffs)


def riesz_image(t: DiscreteGelfandTriple, f: PrimalVector) -> DualVector:
    """TEST ORACLE ONLY: the H-Riesz image of a primal element.

    Core algorithms must not call this; it exists so tests can contrast
    the identification-free calculus with the identified one.
    """
    c = _check_primal(t, f)
    return DualVector(t.inner.a @ c)


def riesz_preimage(t: DiscreteGelfandTriple, g: DualVector) -> PrimalVector:
    """TEST ORACLE ONLY: inverse of riesz_image."""
    a = _check_dual(t, g)
    return PrimalVector(t.inner_solve(a))
