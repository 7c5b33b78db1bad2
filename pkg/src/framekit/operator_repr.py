"""Matrix representation of operators in frame coordinates and the
frame-Galerkin solution pipeline.

An operator O : H -> H' is stored as the matrix mapping primal
coefficients to dual actions, entry (i, j) = <O b_j, b_i>.  Its
representation in a frame is M = E_test^T L E_ansatz; solving the
(possibly singular but consistent) system M u = C_Psi b by zero-start
conjugate gradients recovers the minimal-norm coefficient vector, i.e.
the analysis of the solution with the canonical dual frame.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, DomainError, NotAFrame, SingularOperator
from .frames import (
    AnySpec,
    DualFrameSpec,
    FrameSpec,
    analysis,
    cross_gramian,
    dual_frame,
    frame_bounds,
    frame_operator_matrix,
    synthesis,
)
from .numerics import (
    PINV_CUTOFF,
    RANK_RTOL,
    SymMatrix,
    cg_solve,
    generalized_eigs,
    null_space,
    pseudo_inverse,
    solve_spd,
)
from .spaces import DiscreteGelfandTriple, DualVector, PrimalVector


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """Discretized operator O : H -> H' with its form constants.

    ``continuity`` is the best constant in a(u, v) <= C ||u|| ||v||,
    ``ellipticity`` the best constant in a(u, u) >= C ||u||^2, both
    measured against the triple's H^q norm.
    """

    triple: DiscreteGelfandTriple
    matrix: np.ndarray
    symmetric: bool
    elliptic: bool
    continuity: float
    ellipticity: float
    _cache: dict = field(default_factory=dict, repr=False)

    def apply(self, f: PrimalVector) -> DualVector:
        if len(f) != self.triple.n:
            raise DimensionMismatch(f"vector has size {len(f)}, operator has {self.triple.n}")
        return DualVector(self.matrix @ f.coeffs)

    def inverse_apply(self, g: DualVector) -> PrimalVector:
        """Solve O u = g; available only for nonsingular operator matrices."""
        return PrimalVector(_solve_nonsingular(self, g.action))


def _solve_nonsingular(op: "OperatorSpec", rhs: np.ndarray) -> np.ndarray:
    """LU solve against the operator matrix, refusing singular pivots."""
    if "lu" not in op._cache:
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            try:
                op._cache["lu"] = scipy.linalg.lu_factor(op.matrix)
            except (scipy.linalg.LinAlgError, ValueError) as exc:
                raise SingularOperator(str(exc)) from None
    lu, piv = op._cache["lu"]
    diag = np.abs(np.diag(lu))
    if diag.min() <= 1e-14 * max(diag.max(), 1e-300):
        raise SingularOperator("operator matrix is numerically singular")
    return scipy.linalg.lu_solve((lu, piv), rhs)


def make_operator(triple: DiscreteGelfandTriple, matrix) -> OperatorSpec:
    """Wrap a coefficient-to-action matrix, measuring its form constants.

    For a symmetric matrix the constants are the extreme eigenvalues of
    the (L, inner) pencil; the ellipticity flag requires the smallest one
    to be positive.
    """
    mat = np.array(matrix, dtype=float)
    if mat.shape != (triple.n, triple.n):
        raise DimensionMismatch(
            f"operator matrix {mat.shape} does not match triple dimension {triple.n}"
        )
    mat.setflags(write=False)
    scale = max(1.0, float(np.abs(mat).max()))
    symmetric = float(np.abs(mat - mat.T).max()) <= 1e-12 * scale
    if symmetric:
        spectrum = generalized_eigs(SymMatrix(mat), triple.inner)
        low, high = spectrum.min, spectrum.max
        continuity = max(abs(low), abs(high))
        ellipticity = low
        elliptic = low > RANK_RTOL * max(abs(high), 1.0)
    else:
        hinv_l = np.linalg.solve(triple.inner.a, mat)
        sq = generalized_eigs(SymMatrix(mat.T @ hinv_l), triple.inner)
        continuity = float(np.sqrt(max(sq.max, 0.0)))
        sym_part = 0.5 * (mat + mat.T)
        low = generalized_eigs(SymMatrix(sym_part), triple.inner).min
        ellipticity = low
        elliptic = low > 0.0
    return OperatorSpec(
        triple=triple,
        matrix=mat,
        symmetric=symmetric,
        elliptic=elliptic,
        continuity=float(continuity),
        ellipticity=float(ellipticity),
    )


def poisson_operator(triple: DiscreteGelfandTriple) -> OperatorSpec:
    """The Dirichlet Laplacian as an operator H^1_0 -> H^-1.

    Requires a triple built with q = 1 so that the energy norm is the
    space norm; then continuity and ellipticity are both exactly 1.
    """
    if triple.q != 1.0:
        raise DomainError(f"poisson_operator needs a q = 1 triple, got q = {triple.q}")
    return make_operator(triple, triple.stiffness.a)


def operator_norm(op: OperatorSpec) -> float:
    """||O||, the H -> H' operator norm, from the (L^T inner^-1 L, inner) pencil."""
    if "norms" not in op._cache:
        hinv_l = np.linalg.solve(op.triple.inner.a, op.matrix)
        spectrum = generalized_eigs(SymMatrix(op.matrix.T @ hinv_l), op.triple.inner)
        op._cache["norms"] = spectrum
    spectrum = op._cache["norms"]
    return float(np.sqrt(max(spectrum.max, 0.0)))


def inverse_operator_norm(op: OperatorSpec) -> float:
    """||O^-1||, the H' -> H norm of the inverse."""
    operator_norm(op)
    spectrum = op._cache["norms"]
    if spectrum.rank < spectrum.n:
        raise SingularOperator("operator matrix is singular, no inverse norm")
    return float(1.0 / np.sqrt(spectrum.min))


def matrix_representation(
    f_test: FrameSpec, f_ansatz: FrameSpec, op: OperatorSpec
) -> np.ndarray:
    """Frame matrix M[m, n] = <O psi_n, phi_m> = Phi^T L Psi.

    Symmetric operators give symmetric matrices when the same frame is
    used on both sides, and non-negative operators give non-negative
    matrices; the operator norm of M is at most sqrt(B_Phi B_Psi) ||O||.
    """
    if not isinstance(f_test, FrameSpec) or not isinstance(f_ansatz, FrameSpec):
        raise TypeError("matrix_representation pairs two primal frames around O : H -> H'")
    if f_test.n != op.triple.n or f_ansatz.n != op.triple.n:
        raise DimensionMismatch("frames and operator live on different dimensions")
    return f_test.elements.T @ (op.matrix @ f_ansatz.elements)


def inverse_representation(f: FrameSpec, op: OperatorSpec) -> np.ndarray:
    """Dual-frame matrix of the inverse: entries <O^-1 dual_j, dual_k>.

    This is the matrix that multiplies the primal representation of O to
    the cross-Gramian projector, and it coincides with the Moore-Penrose
    inverse of that primal representation.
    """
    dual = dual_frame(f)
    cols = _solve_nonsingular(op, dual.elements)
    return dual.elements.T @ cols


@dataclass(frozen=True, eq=False)
class RepresentedOperator:
    """Operator D_syn M C_ana rebuilt from a coefficient-space matrix.

    The analysis side fixes the input representation (a primal frame
    analyzes dual actions, a dual frame analyzes primal coefficients),
    the synthesis side fixes the output; ``matrix`` maps input
    representation to output representation.
    """

    matrix: np.ndarray
    input_kind: str  # "dual" or "primal"
    output_kind: str

    def __call__(self, vec):
        if self.input_kind == "dual":
            if not isinstance(vec, DualVector):
                raise TypeError(f"expected DualVector, got {type(vec).__name__}")
            data = vec.action
        else:
            if not isinstance(vec, PrimalVector):
                raise TypeError(f"expected PrimalVector, got {type(vec).__name__}")
            data = vec.coeffs
        out = self.matrix @ data
        return PrimalVector(out) if self.output_kind == "primal" else DualVector(out)


def operator_from_matrix(f_syn: AnySpec, f_ana: AnySpec, m) -> RepresentedOperator:
    """Rebuild an operator from its frame matrix: h -> D_syn (M (C_ana h)).

    With a frame and its canonical dual around the identity matrix this
    reproduces the identity map; with the dual frame on both sides around
    the primal representation of O it reconstructs O itself.
    """
    mat = np.asarray(m, dtype=float)
    if mat.shape != (f_syn.k, f_ana.k):
        raise DimensionMismatch(
            f"matrix shape {mat.shape} does not match frame sizes ({f_syn.k}, {f_ana.k})"
        )
    full = f_syn.elements @ (mat @ f_ana.elements.T)
    return RepresentedOperator(
        matrix=full,
        input_kind="dual" if isinstance(f_ana, FrameSpec) else "primal",
        output_kind="primal" if isinstance(f_syn, FrameSpec) else "dual",
    )


def composition_check(
    f: FrameSpec, xi: FrameSpec, op_outer: OperatorSpec, op_inner: OperatorSpec
) -> float:
    """Relative residual of the frame-insertion composition rule.

    Two coefficient-to-action operators cannot be chained directly, so
    the inner one is carried back into the primal space through the
    frame operator of the inserted frame: T = S_Xi O_inner maps H -> H.
    The rule under test is then

        M^(F,F)(O_outer T)  =  M^(F,Xi)(O_outer) * M^(dual Xi,F)(T),

    whose two sides agree up to rounding because synthesis against Xi
    followed by analysis with its canonical dual is the identity on H.
    """
    s_xi = frame_operator_matrix(xi)
    t_matrix = s_xi @ op_inner.matrix  # primal coeffs -> primal coeffs
    lhs = f.elements.T @ (op_outer.matrix @ (t_matrix @ f.elements))
    xi_dual = dual_frame(xi)
    m_outer = f.elements.T @ (op_outer.matrix @ xi.elements)
    m_inner = xi_dual.elements.T @ (t_matrix @ f.elements)
    rhs = m_outer @ m_inner
    scale = max(float(np.linalg.norm(lhs)), 1e-300)
    return float(np.linalg.norm(lhs - rhs)) / scale


@dataclass(frozen=True)
class GramIdentityReport:
    """Residuals of the inverse-representation product identities."""

    left_residual: float   # || M(O^-1)_dual M(O) - G || / ||G||
    right_residual: float  # || M(O) M(O^-1)_dual - G || / ||G||
    kernel_angle: float    # largest principal angle between ker M(O^-1)_dual and ker D_Psi


def gram_identity_check(f: FrameSpec, op: OperatorSpec) -> GramIdentityReport:
    """Check that the inverse's dual matrix undoes the primal matrix.

    Both orderings of the product must reproduce the cross-Gramian of the
    dual pair, and the kernel of the dual-represented operator must equal
    the synthesis kernel.
    """
    m = matrix_representation(f, f, op)
    m_inv = inverse_representation(f, op)
    g = cross_gramian(dual_frame(f), f)
    gn = max(float(np.linalg.norm(g)), 1e-300)
    left = float(np.linalg.norm(m_inv @ m - g)) / gn
    right = float(np.linalg.norm(m @ m_inv - g)) / gn
    ker_m = null_space(m_inv)
    ker_d = null_space(f.elements)
    if ker_m.shape[1] != ker_d.shape[1]:
        angle = float(np.pi / 2)
    elif ker_m.shape[1] == 0:
        angle = 0.0
    else:
        angle = float(np.max(scipy.linalg.subspace_angles(ker_m, ker_d)))
    return GramIdentityReport(left_residual=left, right_residual=right, kernel_angle=angle)


def pseudo_inverse_identity_check(f: FrameSpec, op: OperatorSpec) -> float:
    """Residual of pinv(M(O)) == dual matrix of O^-1, compared on the range.

    Both sides are projected by the cross-Gramian projector before the
    comparison so that noise in the numerical kernel cannot contribute.
    """
    m = matrix_representation(f, f, op)
    p = pseudo_inverse(m, cutoff=PINV_CUTOFF)
    m_inv = inverse_representation(f, op)
    g = cross_gramian(f, dual_frame(f))
    lhs = g @ p @ g
    rhs = g @ m_inv @ g
    scale = max(float(np.linalg.norm(rhs)), 1e-300)
    return float(np.linalg.norm(lhs - rhs)) / scale


@dataclass(frozen=True, eq=False)
class GalerkinSolution:
    """Solution of O u = b in frame coordinates."""

    coefficients: np.ndarray
    solution: PrimalVector
    iterations: int
    residual: float


def galerkin_solve(
    f: FrameSpec, op: OperatorSpec, b: DualVector, tol: float = 1e-8, maxit: int = 10_000
) -> GalerkinSolution:
    """Solve O u = b by testing and expanding in the same frame.

    Assembles M = Psi^T L Psi and the load vector C_Psi b, then runs
    zero-start conjugate gradients.  The system is singular whenever the
    frame is redundant, but it is consistent, and the zero start makes CG
    converge to the minimal-norm coefficients <u, dual_k>.
    """
    if not (op.symmetric and op.elliptic):
        raise DomainError("galerkin_solve requires a symmetric elliptic operator")
    if not f.spans:
        raise NotAFrame(f"collection has rank {f.rank} < dimension {f.n}")
    m = matrix_representation(f, f, op)
    rhs = analysis(f, b)
    coeffs, iterations = cg_solve(lambda v: m @ v, rhs, tol=tol, maxit=maxit)
    nb = float(np.linalg.norm(rhs))
    residual = float(np.linalg.norm(m @ coeffs - rhs)) / nb if nb > 0 else 0.0
    u = synthesis(f, coeffs)
    return GalerkinSolution(
        coefficients=coeffs, solution=u, iterations=iterations, residual=residual
    )


# -- manufactured Poisson problem ---------------------------------------------


def manufactured_sine_load(triple: DiscreteGelfandTriple) -> DualVector:
    """Exact load actions for -u'' = pi^2 sin(pi x): <f, b_i> in closed form."""
    if triple.h is None:
        raise DomainError("manufactured load needs a grid triple")
    x = triple.nodes
    h = triple.h
    coeff = 2.0 * (1.0 - np.cos(np.pi * h)) / h
    return DualVector(coeff * np.sin(np.pi * x))


def manufactured_sine_solution(triple: DiscreteGelfandTriple) -> PrimalVector:
    """Nodal interpolant of the exact solution u = sin(pi x)."""
    if triple.h is None:
        raise DomainError("manufactured solution needs a grid triple")
    return PrimalVector(np.sin(np.pi * triple.nodes))


def sample_table(triple: DiscreteGelfandTriple, f: PrimalVector) -> np.ndarray:
    """(x, u(x)) rows over the closed grid, boundary zeros included."""
    if triple.h is None:
        raise DomainError("sample tables need a grid triple")
    if len(f) != triple.n:
        raise DimensionMismatch(f"vector has size {len(f)}, triple has {triple.n}")
    x = np.concatenate(([0.0], triple.nodes, [1.0]))
    u = np.concatenate(([0.0], f.coeffs, [0.0]))
    return np.column_stack([x, u])


def write_sample_table(path, triple: DiscreteGelfandTriple, f: PrimalVector) -> None:
    """CSV export of a solution for external plotting."""
    rows = sample_table(triple, f)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,u\n")
        for x, u in rows:
            fh.write(f"{float(x)!r},{float(u)!r}\n")


# -- conditioning study --------------------------------------------------------


@dataclass(frozen=True)
class ConditioningRow:
    level: int
    fine_dim: int
    columns: int
    lower: float
    upper: float
    ratio: float
    kappa_single: float
    iterations_multilevel: int
    iterations_single: int


@dataclass(frozen=True, eq=False)
class ConditioningStudy:
    """Per-level comparison of the multilevel frame system with the plain one."""

    q: float
    tol: float
    rows: tuple[ConditioningRow, ...]

    def to_json_dict(self) -> dict:
        return {
            "q": self.q,
            "tol": self.tol,
            "rows": [
                {
                    "J": r.level,
                    "fine_dim": r.fine_dim,
                    "columns": r.columns,
                    "lower": r.lower,
                    "upper": r.upper,
                    "ratio": r.ratio,
                    "kappa_single": r.kappa_single,
                    "iterations_multilevel": r.iterations_multilevel,
                    "iterations_single": r.iterations_single,
                }
                for r in self.rows
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(
            "J,fine_dim,columns,lower,upper,ratio,kappa_single,"
            "iterations_multilevel,iterations_single\n"
        )
        for r in self.rows:
            buf.write(
                f"{r.level},{r.fine_dim},{r.columns},{r.lower!r},{r.upper!r},"
                f"{r.ratio!r},{r.kappa_single!r},"
                f"{r.iterations_multilevel},{r.iterations_single}\n"
            )
        return buf.getvalue()


# Iteration counts are probed with a seeded Gaussian load: a smooth load can
# be (nearly) an eigenvector of the discrete Laplacian, collapsing the
# single-level count to 1 and telling us nothing about conditioning.
PROBE_SEED = 2718281


def conditioning_row(j_max: int, q: float = 1.0, tol: float = 1e-8) -> ConditioningRow:
    """One study row: bounds and CG counts at a single hierarchy depth."""
    from .multiscale import bpx_frame, build_hierarchy

    hy = build_hierarchy(j_max)
    frame = bpx_frame(hy, q)
    triple = hy.fine_triple(q)
    op = poisson_operator(triple)
    bounds = frame_bounds(frame)
    stiff_w = np.linalg.eigvalsh(triple.stiffness.a)
    kappa_single = float(stiff_w[-1] / stiff_w[0])
    probe = DualVector(
        np.random.default_rng(PROBE_SEED + j_max).standard_normal(triple.n)
    )
    sol = galerkin_solve(frame, op, probe, tol=tol)
    _, iters_single = cg_solve(lambda v: triple.stiffness.a @ v, probe.action, tol=tol)
    return ConditioningRow(
        level=j_max,
        fine_dim=triple.n,
        columns=frame.k,
        lower=bounds.lower,
        upper=bounds.upper,
        ratio=bounds.ratio,
        kappa_single=kappa_single,
        iterations_multilevel=sol.iterations,
        iterations_single=iters_single,
    )


def conditioning_study(j_values, q: float = 1.0, tol: float = 1e-8) -> ConditioningStudy:
    """Conditioning and iteration-count sequences over hierarchy depths.

    For q = 1 the ratio column equals the effective condition number of
    the multilevel system matrix (largest over smallest nonzero
    eigenvalue) and stays bounded, while kappa of the single-level
    stiffness grows by a factor of about 4 per level.
    """
    if q != 1.0:
        raise DomainError("conditioning_study is defined for q = 1")
    rows = tuple(conditioning_row(j, q=q, tol=tol) for j in j_values)
    return ConditioningStudy(q=q, tol=tol, rows=rows)


def effective_condition_number(m) -> float:
    """Largest over smallest nonzero eigenvalue of a PSD system matrix."""
    w = np.linalg.eigvalsh(0.5 * (np.asarray(m, float) + np.asarray(m, float).T))
    cutoff = max(float(w[-1]), 0.0) * RANK_RTOL
    nonzero = w[w > cutoff]
    if nonzero.size == 0:
        raise SingularOperator("matrix has no nonzero eigenvalues")
    return float(nonzero[-1] / nonzero[0])


def direct_solution(op: OperatorSpec, b: DualVector) -> PrimalVector:
    """Reference fine-grid solve of O u = b (SPD path)."""
    if not (op.symmetric and op.elliptic):
        raise DomainError("direct_solution requires a symmetric elliptic operator")
    return PrimalVector(solve_spd(SymMatrix(op.matrix), b.action))
