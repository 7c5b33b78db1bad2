"""Dense symmetric linear-algebra kernels used by every other module.

Everything here is deliberately dense: problem sizes stay at desk scale
(around 10^4 unknowns or less), and transparent kernels are easier to
cross-check than sparse ones.  All operations are pure functions of
immutable inputs and are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, Inconsistent, NoConvergence, NotPositiveDefinite

# Relative cutoffs used throughout: an eigenvalue or singular value counts
# as nonzero above max * RANK_RTOL; the pseudo-inverse drops singular
# values below sigma_max * PINV_CUTOFF.
RANK_RTOL = 1e-10
PINV_CUTOFF = 1e-12


def as_dense(a) -> np.ndarray:
    """Plain float ndarray view of a matrix-like object (SymMatrix or array)."""
    if isinstance(a, SymMatrix):
        return a.a
    return np.asarray(a, dtype=float)


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Dense symmetric matrix; storage is symmetrized exactly on construction.

    Construction rejects inputs whose asymmetry exceeds assembly noise
    (1e-8 relative), then stores (A + A^T)/2 so the stored entries satisfy
    a_ij == a_ji bit for bit.
    """

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("SymMatrix requires a square 2-d array")
        if a.size:
            scale = max(1.0, float(np.abs(a).max()))
            if float(np.abs(a - a.T).max()) > 1e-8 * scale:
                raise ValueError("input matrix is not symmetric")
        sym = 0.5 * (a + a.T)
        sym.setflags(write=False)
        object.__setattr__(self, "a", sym)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def asymmetry(self) -> float:
        return float(np.abs(self.a - self.a.T).max()) if self.a.size else 0.0


@dataclass(frozen=True, eq=False)
class PencilSpectrum:
    """Eigenvalues of a symmetric-definite pencil A x = lambda B x.

    Eigenvalues are ascending; ``rank`` counts those above
    lambda_max * RANK_RTOL (a scale-invariant cutoff).
    """

    eigenvalues: np.ndarray
    rank: int

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "eigenvalues", w)

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def min_nonzero(self) -> float:
        """Smallest eigenvalue above the rank cutoff."""
        if self.rank == 0:
            raise ValueError("spectrum has rank 0, no nonzero eigenvalue")
        return float(self.eigenvalues[self.n - self.rank])


def spd_solver(a) -> Callable[[np.ndarray], np.ndarray]:
    """Factor an SPD matrix once and return the solve closure.

    The closure applies one or two steps of iterative refinement, which
    pushes the relative residual to ~1e-13 even for the stiffest desk-scale
    matrices.  Raises NotPositiveDefinite when a pivot fails.
    """
    mat = as_dense(a)
    try:
        factor = scipy.linalg.cho_factor(mat, lower=True, check_finite=False)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NotPositiveDefinite(str(exc)) from None

    def solve(rhs: np.ndarray) -> np.ndarray:
        b = np.asarray(rhs, dtype=float)
        x = scipy.linalg.cho_solve(factor, b, check_finite=False)
        nb = np.linalg.norm(b)
        if nb > 0.0:
            best_x, best_r = x, float(np.linalg.norm(b - mat @ x))
            for _ in range(4):
                if best_r <= 1e-13 * nb:
                    break
                x = x + scipy.linalg.cho_solve(factor, b - mat @ x, check_finite=False)
                res = float(np.linalg.norm(b - mat @ x))
                if res >= 0.5 * best_r:  # stagnated at the precision floor
                    if res < best_r:
                        best_x, best_r = x, res
                    break
                best_x, best_r = x, res
            x = best_x
        return x

    return solve


def solve_spd(a, b) -> np.ndarray:
    """Solve A x = b for symmetric positive definite A via Cholesky.

    Accepts a vector or a matrix right-hand side.  The result carries a
    relative residual of at most ~1e-12.
    """
    mat = as_dense(a)
    rhs = np.asarray(b, dtype=float)
    if rhs.shape[0] != mat.shape[0]:
        raise DimensionMismatch(
            f"matrix is {mat.shape[0]}x{mat.shape[1]}, rhs has leading size {rhs.shape[0]}"
        )
    return spd_solver(mat)(rhs)


def generalized_eig_pairs(a, b) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of the pencil A x = lambda B x with B symmetric positive definite.

    Solved by Cholesky of B plus a symmetric eigendecomposition of the
    congruence-transformed A.  Eigenvalues come back ascending; the
    eigenvector columns are B-orthonormal (V^T B V = I).
    """
    am = as_dense(a)
    bm = as_dense(b)
    if am.shape != bm.shape:
        raise DimensionMismatch(f"pencil shapes differ: {am.shape} vs {bm.shape}")
    try:
        w, v = scipy.linalg.eigh(am, bm, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"pencil B-factor failed: {exc}") from None
    return w, v


def generalized_eigs(a, b) -> PencilSpectrum:
    """Spectrum of the pencil A x = lambda B x (see generalized_eig_pairs)."""
    w, _ = generalized_eig_pairs(a, b)
    wmax = float(w[-1]) if w.size else 0.0
    cutoff = max(wmax, 0.0) * RANK_RTOL
    rank = int(np.count_nonzero(w > cutoff))
    return PencilSpectrum(eigenvalues=w, rank=rank)


def cg_solve(
    apply_op: Callable[[np.ndarray], np.ndarray],
    b,
    tol: float = 1e-10,
    maxit: int = 10_000,
) -> tuple[np.ndarray, int]:
    """Plain conjugate gradients from the zero vector.

    ``apply_op`` must realize a symmetric positive semidefinite map and
    ``b`` must be in its range (a consistent system).  Starting from zero
    keeps every iterate inside the range of the map, so singular but
    consistent systems converge to the minimal-norm solution.

    Returns (x, iterations) with ||apply_op(x) - b|| <= tol * ||b||;
    raises NoConvergence when maxit is exhausted.
    """
    rhs = np.asarray(b, dtype=float)
    nb = float(np.linalg.norm(rhs))
    x = np.zeros_like(rhs)
    if nb == 0.0:
        return x, 0
    r = rhs.copy()
    p = r.copy()
    rs = float(r @ r)
    for k in range(1, maxit + 1):
        ap = apply_op(p)
        pap = float(p @ ap)
        if pap <= 0.0:
            # breakdown: direction fell into the numerical kernel
            if np.sqrt(rs) <= tol * nb:
                return x, k - 1
            raise NoConvergence(k - 1, float(np.sqrt(rs) / nb))
        alpha = rs / pap
        x += alpha * p
        r -= alpha * ap
        rs_new = float(r @ r)
        if np.sqrt(rs_new) <= tol * nb:
            true_r = rhs - apply_op(x)
            if np.linalg.norm(true_r) <= tol * nb:
                return x, k
            # recursion drifted from the true residual: restart from it
            r = true_r
            rs = float(r @ r)
            p = r.copy()
            continue
        beta = rs_new / rs
        p = r + beta * p
        rs = rs_new
    raise NoConvergence(maxit, float(np.sqrt(rs) / nb))


def min_norm_solve(a, b) -> np.ndarray:
    """Minimal-l2-norm solution of a consistent system A x = b via SVD.

    Singular values below sigma_max * 1e-12 are treated as zero.  Serves
    as the pseudo-inverse oracle for the rest of the library.  Raises
    Inconsistent when the post-solve residual exceeds 1e-8 * ||b||.
    """
    mat = np.atleast_2d(np.asarray(a, dtype=float))
    rhs = np.asarray(b, dtype=float)
    if mat.shape[0] != rhs.shape[0]:
        raise DimensionMismatch(
            f"matrix has {mat.shape[0]} rows, rhs has size {rhs.shape[0]}"
        )
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    if s.size and s[0] > 0.0:
        keep = s > s[0] * PINV_CUTOFF
        x = vt[keep].T @ ((u[:, keep].T @ rhs) / s[keep])
    else:
        x = np.zeros(mat.shape[1])
    nb = float(np.linalg.norm(rhs))
    if nb > 0.0 and float(np.linalg.norm(mat @ x - rhs)) > 1e-8 * nb:
        raise Inconsistent(
            f"rhs not in range: residual {np.linalg.norm(mat @ x - rhs):.3e} vs ||b|| {nb:.3e}"
        )
    return x


def pseudo_inverse(a, cutoff: float = PINV_CUTOFF) -> np.ndarray:
    """Moore-Penrose inverse with relative singular-value cutoff."""
    mat = np.atleast_2d(np.asarray(a, dtype=float))
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    if not s.size or s[0] == 0.0:
        return np.zeros((mat.shape[1], mat.shape[0]))
    keep = s > s[0] * cutoff
    return vt[keep].T @ (u[:, keep] / s[keep]).T


def null_space(a, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the numerical null space (columns)."""
    mat = np.atleast_2d(np.asarray(a, dtype=float))
    _, s, vt = np.linalg.svd(mat)
    cutoff = (s[0] * rtol) if s.size else 0.0
    num_rank = int(np.count_nonzero(s > cutoff))
    return vt[num_rank:].T


def matrix_rank(a, rtol: float = RANK_RTOL) -> int:
    """Numerical rank with the library-wide relative cutoff."""
    s = np.linalg.svd(np.atleast_2d(np.asarray(a, dtype=float)), compute_uv=False)
    if not s.size or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > s[0] * rtol))


def write_matrix_market(target, a, comment: str = "") -> None:
    """Export a dense matrix in Matrix Market (.mtx) format for external tools."""
    from scipy.io import mmwrite

    mmwrite(target, as_dense(a), comment=comment)
