"""Nested dyadic hat spaces on (0,1) and the scaled multilevel frame.

Level j of a hierarchy holds the interior hats on the mesh of width
2^-(j+1), so dim V_j = 2^(j+1) - 1 and V_0 is the single hat at 1/2.
Prolongation is exact linear interpolation (stencil 1/2, 1, 1/2), which
makes the nesting V_j subset V_{j+1} hold without discretization error.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, DomainError
from .frames import ColumnLabel, FrameSpec
from .numerics import generalized_eigs
from .spaces import GAMMA, DiscreteGelfandTriple, DualVector, PrimalVector, build_triple

APPROXIMATION_ORDER = 2  # piecewise-linear hats reproduce polynomials up to degree 1


@dataclass(frozen=True, eq=False)
class MultiscaleHierarchy:
    """Levels 0..j_max of nested hat spaces with their prolongations."""

    j_max: int
    dims: tuple[int, ...]
    prolongations: tuple[np.ndarray, ...]  # prolongations[j]: V_j -> V_{j+1}
    gamma: float = GAMMA
    order: int = APPROXIMATION_ORDER
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def levels(self) -> range:
        return range(self.j_max + 1)

    def level_fine_index(self, j: int) -> int:
        """Grid level of V_j (mesh width 2^-(j+1))."""
        return j + 1

    def level_h(self, j: int) -> float:
        return 2.0 ** -(j + 1)

    def fine_triple(self, q: float = 0.0) -> DiscreteGelfandTriple:
        """Triple on the finest grid, memoized per Sobolev exponent."""
        key = ("fine", float(q))
        if key not in self._cache:
            self._cache[key] = build_triple(self.level_fine_index(self.j_max), q)
        return self._cache[key]

    def level_triple(self, j: int, q: float = 0.0) -> DiscreteGelfandTriple:
        self._check_level(j)
        key = ("level", j, float(q))
        if key not in self._cache:
            self._cache[key] = build_triple(self.level_fine_index(j), q)
        return self._cache[key]

    def embed_matrix(self, j: int) -> np.ndarray:
        """Composite prolongation E_j taking V_j coefficients to the fine grid."""
        self._check_level(j)
        key = ("embed", j)
        if key not in self._cache:
            e = np.eye(self.dims[self.j_max])
            for level in range(self.j_max - 1, j - 1, -1):
                e = e @ self.prolongations[level]
            self._cache[key] = e
        return self._cache[key]

    def _check_level(self, j: int) -> None:
        if not 0 <= j <= self.j_max:
            raise DomainError(f"level {j} outside 0..{self.j_max}")


def prolongation_matrix(coarse_dim: int) -> np.ndarray:
    """Interpolation from a dyadic hat space into its refinement.

    Coarse node k sits at fine node 2k; the column of a coarse hat puts 1
    there and 1/2 on the two fine neighbours.
    """
    fine_dim = 2 * coarse_dim + 1
    p = np.zeros((fine_dim, coarse_dim))
    for k in range(coarse_dim):
        p[2 * k, k] = 0.5
        p[2 * k + 1, k] = 1.0
        p[2 * k + 2, k] = 0.5
    return p


def build_hierarchy(j_max: int) -> MultiscaleHierarchy:
    """Assemble levels 0..j_max (dims 1, 3, ..., 2^(j_max+1) - 1)."""
    if not 1 <= int(j_max) == j_max <= 10:
        raise DomainError(f"j_max must be an integer in [1, 10], got {j_max}")
    dims = tuple(2 ** (j + 1) - 1 for j in range(j_max + 1))
    prolongations = tuple(prolongation_matrix(dims[j]) for j in range(j_max))
    return MultiscaleHierarchy(j_max=j_max, dims=dims, prolongations=prolongations)


def l2_project(hy: MultiscaleHierarchy, j: int, f: PrimalVector) -> PrimalVector:
    """L^2-orthogonal projection of a fine-grid function onto V_j.

    Solves the level-j mass system M_j c = E_j^T M_fine f.  Projecting a
    function already in V_j returns it (idempotence up to rounding).
    """
    hy._check_level(j)
    fine = hy.fine_triple()
    if len(f) != fine.n:
        raise DimensionMismatch(f"vector has size {len(f)}, fine grid has {fine.n}")
    e = hy.embed_matrix(j)
    rhs = e.T @ (fine.mass.a @ f.coeffs)
    return PrimalVector(hy.level_triple(j).mass_solve(rhs))


def prolong_to_fine(hy: MultiscaleHierarchy, j: int, v: PrimalVector) -> PrimalVector:
    """Exact fine-grid representation of a level-j function."""
    e = hy.embed_matrix(j)
    if len(v) != e.shape[1]:
        raise DimensionMismatch(f"vector has size {len(v)}, level {j} has {e.shape[1]}")
    return PrimalVector(e @ v.coeffs)


def sample_on_fine_grid(hy: MultiscaleHierarchy, f: Callable[[np.ndarray], np.ndarray]) -> PrimalVector:
    """Nodal interpolation of a function onto the fine grid."""
    return PrimalVector(np.asarray(f(hy.fine_triple().nodes), dtype=float))


def telescope(hy: MultiscaleHierarchy, f: PrimalVector) -> list[PrimalVector]:
    """Increments (P_j - P_{j-1}) f on the fine grid, with P_{-1} = 0.

    The increments are mutually L^2-orthogonal and sum to P_{j_max} f.
    """
    pieces = []
    prev = np.zeros(hy.fine_triple().n)
    for j in hy.levels:
        proj = prolong_to_fine(hy, j, l2_project(hy, j, f)).coeffs
        pieces.append(PrimalVector(proj - prev))
        prev = proj
    return pieces


@dataclass(frozen=True, eq=False)
class RateReport:
    """Per-level quantities with a least-squares log2 slope over a fit window."""

    levels: tuple[int, ...]
    values: tuple[float, ...]
    slope: float
    constant: float
    fit_window: tuple[int, int]

    def to_json_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "values": list(self.values),
            "slope": self.slope,
            "constant": self.constant,
            "fit_window": list(self.fit_window),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("level,value,slope\n")
        for j, v in zip(self.levels, self.values):
            buf.write(f"{j},{v!r},{self.slope!r}\n")
        return buf.getvalue()


def _fit_report(levels, values, fit_lo: int, fit_hi: int) -> RateReport:
    levels = tuple(int(j) for j in levels)
    values = tuple(float(v) for v in values)
    window = [(j, v) for j, v in zip(levels, values) if fit_lo <= j <= fit_hi]
    if len(window) < 2:
        window = list(zip(levels, values))
    xs = np.array([j for j, _ in window], dtype=float)
    ys = np.log2([max(v, 1e-300) for _, v in window])
    slope, intercept = np.polyfit(xs, ys, 1)
    return RateReport(
        levels=levels,
        values=values,
        slope=float(slope),
        constant=float(2.0**intercept),
        fit_window=(fit_lo, fit_hi),
    )


def jackson_rate(
    hy: MultiscaleHierarchy,
    f: Callable[[np.ndarray], np.ndarray],
    fit_lo: int = 2,
    fit_hi: Optional[int] = None,
) -> RateReport:
    """Measured projection errors ||f - P_j f||_{L^2} per level.

    For f with two square-integrable derivatives the errors decay like
    2^(-2j), i.e. the fitted slope is -2 (the approximation order of the
    hats).  The fit window keeps a buffer of two levels below the fine
    grid so the measured rate is not polluted by saturation.
    """
    if fit_hi is None:
        fit_hi = hy.j_max - 2
    fine = hy.fine_triple()
    fv = sample_on_fine_grid(hy, f)
    mass = fine.mass.a
    values = []
    for j in hy.levels:
        err = fv.coeffs - prolong_to_fine(hy, j, l2_project(hy, j, fv)).coeffs
        values.append(float(np.sqrt(max(err @ (mass @ err), 0.0))))
    return _fit_report(hy.levels, values, fit_lo, fit_hi)


def bernstein_rate(hy: MultiscaleHierarchy, q: float, fit_lo: int = 2) -> RateReport:
    """Largest Rayleigh quotient ||v||_{H^q}^2 / ||v||_{L^2}^2 over V_j, per level.

    Grows like 2^(2jq): factor 4 per level for q = 1, factor 2 for
    q = 1/2, and identically 1 for q = 0.
    """
    if not 0.0 <= q < hy.gamma:
        raise DomainError(f"q must lie in [0, {hy.gamma}), got {q}")
    values = []
    for j in hy.levels:
        t = hy.level_triple(j, q)
        spectrum = generalized_eigs(t.inner, t.mass)
        values.append(spectrum.max)
    return _fit_report(hy.levels, values, fit_lo, hy.j_max)


def single_scale_system(hy: MultiscaleHierarchy, j: int) -> FrameSpec:
    """L^2-normalized level-j hats embedded into the fine grid.

    Interior hats on mesh h have squared L^2 norm 2h/3; dividing by it
    makes the level Gramians uniformly well conditioned across levels,
    which is exactly what the scaled multilevel frame needs.
    """
    hy._check_level(j)
    e = hy.embed_matrix(j)
    scale = (2.0 * hy.level_h(j) / 3.0) ** -0.5
    labels = tuple(
        ColumnLabel(level=j, position=k, weight=1.0) for k in range(e.shape[1])
    )
    return FrameSpec(hy.fine_triple(), scale * e, labels)


def single_scale_stability(hy: MultiscaleHierarchy, j: int) -> tuple[float, float]:
    """Extreme eigenvalues of the normalized level-j mass Gramian.

    These are the stability constants of the level system as a frame for
    its own span; they stay inside a level-independent interval.
    """
    spec = single_scale_system(hy, j)
    gram = spec.elements.T @ hy.fine_triple().mass.a @ spec.elements
    w = np.linalg.eigvalsh(0.5 * (gram + gram.T))
    return float(w[0]), float(w[-1])


def norm_equivalence_ratio(hy: MultiscaleHierarchy, q: float, g: DualVector) -> float:
    """Telescoped-sum-to-dual-norm ratio for a functional g.

    Numerator: sum_j 2^(-2jq) ||(P_j - P_{j-1}) f||_{L^2}^2, where f is
    obtained from g by the pivot identification on L^2 (a mass solve;
    functionals cannot be projected directly, and the pivot identification
    is the one identification the calculus allows).  Denominator: the
    squared (H^q)' norm of g.  The ratio stays inside a fixed interval
    over all g; degree-2 homogeneity makes it invariant under scaling g.
    """
    if not 0.0 < q < hy.gamma:
        raise DomainError(f"q must lie in (0, {hy.gamma}), got {q}")
    fine_q = hy.fine_triple(q)
    fine_l2 = hy.fine_triple()
    if len(g) != fine_l2.n:
        raise DimensionMismatch(f"vector has size {len(g)}, fine grid has {fine_l2.n}")
    f = PrimalVector(fine_l2.mass_solve(g.action))
    mass = fine_l2.mass.a
    numerator = 0.0
    for j, piece in enumerate(telescope(hy, f)):
        d = piece.coeffs
        numerator += 4.0 ** (-j * q) * float(d @ (mass @ d))
    from .spaces import dual_norm  # local import keeps module load cheap

    denominator = dual_norm(fine_q, g) ** 2
    return numerator / denominator


def bpx_frame(hy: MultiscaleHierarchy, q: float) -> FrameSpec:
    """The scaled multilevel collection {2^(-jq) phi_{j,k} : j = 0..j_max}.

    Columns are the L^2-normalized level hats embedded into the fine grid
    and damped by 2^(-jq).  For 0 < q < 3/2 the bound ratio of the
    resulting frame stays bounded as j_max grows; at q = 0 it does not
    (the collection is kept available as a negative control).
    """
    if not 0.0 <= q < hy.gamma:
        raise DomainError(f"q must lie in [0, {hy.gamma}), got {q}")
    triple = hy.fine_triple(q)
    blocks = []
    labels: list[ColumnLabel] = []
    for j in hy.levels:
        weight = 2.0 ** (-j * q)
        level = single_scale_system(hy, j)
        blocks.append(weight * level.elements)
        labels.extend(
            ColumnLabel(level=j, position=k, weight=weight) for k in range(level.k)
        )
    return FrameSpec(triple, np.hstack(blocks), tuple(labels))
