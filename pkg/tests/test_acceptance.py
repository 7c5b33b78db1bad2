"""Acceptance suite: one test and one printed pass/fail line per criterion.

Run with `pytest -s tests/test_acceptance.py -v` to see the lines.  Every
tolerance is pinned here, not computed; criteria are numbered 1-11.
"""

import json

import numpy as np
import pytest

import framekit as fk
from framekit.cli import RunConfig, run
from framekit.fixtures import by_name, random_spanning_frame
from framekit.operator_repr import conditioning_study, inverse_representation


def report(number: int, name: str, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {number:02d} {name}: {status} ({detail})", flush=True)


@pytest.fixture(scope="module")
def study_rows():
    return conditioning_study(range(2, 8)).rows


@pytest.fixture(scope="module")
def poisson_j6():
    hy = fk.build_hierarchy(6)
    triple = hy.fine_triple(1.0)
    frame = fk.bpx_frame(hy, 1.0)
    op = fk.poisson_operator(triple)
    b = fk.manufactured_sine_load(triple)
    sol = fk.galerkin_solve(frame, op, b, tol=1e-8)
    direct = fk.direct_solution(op, b)
    return triple, frame, sol, direct


def test_criterion_01_frame_bound_fixtures():
    b2 = fk.frame_bounds(by_name("F2"))
    tight_ok = abs(b2.lower - 2.0) <= 1e-12 and abs(b2.upper - 2.0) <= 1e-12
    b1 = fk.frame_bounds(by_name("F1"))
    f1_ok = abs(b1.lower - 1.0) <= 1e-10 and abs(b1.upper - 2.0) <= 1e-10
    b3 = fk.frame_bounds(by_name("F3"))
    f3_ok = abs(b3.lower - 0.5) <= 1e-10 and abs(b3.upper - 8.0) <= 1e-10
    from framekit.fixtures import FIXTURE_NOTES

    note_ok = "(1/2, 8)" in FIXTURE_NOTES["F3"]
    b4 = fk.frame_bounds(by_name("F4"))
    d4 = fk.frame_bounds(fk.dual_frame(by_name("F4")))
    f4_ok = (
        abs(b4.lower - 1.0) <= 1e-10
        and abs(b4.upper - 2.0) <= 1e-10
        and abs(d4.lower - 0.5) <= 1e-10
        and abs(d4.upper - 1.0) <= 1e-10
    )
    passed = tight_ok and f1_ok and f3_ok and note_ok and f4_ok
    report(
        1,
        "frame-bound fixtures",
        passed,
        f"F2=({b2.lower:g},{b2.upper:g}) F1=({b1.lower:g},{b1.upper:g}) "
        f"F3=({b3.lower:g},{b3.upper:g}) F4 dual=({d4.lower:g},{d4.upper:g})",
    )
    assert passed


def test_criterion_02_dual_frame_theorem():
    rng = np.random.default_rng(424242)
    qs = (0.0, 0.5, 1.0)
    fines = (2, 3, 4)  # N in {3, 7, 15} <= 30
    worst_bounds = worst_sop = worst_recon = 0.0
    for i in range(20):
        j_fine = fines[i % 3]
        q = qs[i % 3]
        n = 2**j_fine - 1
        k = min(n + int(rng.integers(1, n + 5)), 60)
        frame = random_spanning_frame(rng, j_fine, q, k)
        b = fk.frame_bounds(frame)
        dual = fk.dual_frame(frame)
        db = fk.frame_bounds(dual)
        worst_bounds = max(
            worst_bounds, abs(db.lower - 1 / b.upper), abs(db.upper - 1 / b.lower)
        )
        s = fk.frame_operator_matrix(frame)
        s_dual = fk.frame_operator_matrix(dual)
        s_inv = np.linalg.inv(s)
        worst_sop = max(
            worst_sop, np.linalg.norm(s_dual - s_inv) / np.linalg.norm(s_inv)
        )
        f = fk.PrimalVector(rng.standard_normal(frame.n))
        g = fk.DualVector(rng.standard_normal(frame.n))
        rf = fk.reconstruct_primal(frame, dual, f)
        rg = fk.reconstruct_dual(frame, dual, g)
        worst_recon = max(
            worst_recon,
            np.linalg.norm(rf.coeffs - f.coeffs) / np.linalg.norm(f.coeffs),
            np.linalg.norm(rg.action - g.action) / np.linalg.norm(g.action),
        )
    passed = worst_bounds <= 1e-8 and worst_sop <= 1e-9 and worst_recon <= 1e-10
    report(
        2,
        "dual-frame theorem",
        passed,
        f"bounds dev {worst_bounds:.2e} <= 1e-8, S~ vs S^-1 {worst_sop:.2e} <= 1e-9, "
        f"reconstruction {worst_recon:.2e} <= 1e-10",
    )
    assert passed


def test_criterion_03_decomposition_and_projector():
    rng = np.random.default_rng(333)
    frames = [by_name("F1"), by_name("F2")]
    frames.append(random_spanning_frame(rng, 3, 1.0, 15))
    frames.append(fk.bpx_frame(fk.build_hierarchy(3), 1.0))
    worst = 0.0
    for frame in frames:
        dual = fk.dual_frame(frame)
        g = fk.cross_gramian(frame, dual)
        g_rev = fk.cross_gramian(dual, frame)
        worst = max(worst, float(np.linalg.norm(g @ g - g)))
        worst = max(worst, float(np.linalg.norm(g - g.T)))
        worst = max(worst, float(np.linalg.norm(g - g_rev)))
        u, s, _ = np.linalg.svd(frame.elements.T, full_matrices=False)
        keep = s > s[0] * 1e-10
        worst = max(worst, float(np.linalg.norm(g - u[:, keep] @ u[:, keep].T)))
        for _ in range(25):
            c = rng.standard_normal(frame.k)
            kernel_part = c - g @ c
            worst = max(
                worst,
                float(np.linalg.norm(frame.elements @ kernel_part))
                / max(np.linalg.norm(c), 1.0),
            )
    passed = worst <= 1e-10
    report(3, "decomposition and projector", passed, f"worst residual {worst:.2e} <= 1e-10")
    assert passed


def test_criterion_04_min_norm_theorem():
    rng = np.random.default_rng(444)
    worst_match = 0.0
    minimality_ok = True
    for j_fine, q, k in ((2, 1.0, 8), (3, 0.5, 12), (4, 0.0, 40)):
        frame = random_spanning_frame(rng, j_fine, q, k)
        from framekit.numerics import min_norm_solve, null_space

        f = fk.PrimalVector(rng.standard_normal(frame.n))
        c = fk.min_norm_coefficients(frame, f)
        oracle = min_norm_solve(frame.elements, f.coeffs)
        worst_match = max(
            worst_match, np.linalg.norm(c - oracle) / max(np.linalg.norm(oracle), 1.0)
        )
        kernel = null_space(frame.elements)
        for _ in range(100):
            d = c + kernel @ rng.standard_normal(kernel.shape[1])
            if np.linalg.norm(c) > np.linalg.norm(d) + 1e-12:
                minimality_ok = False
    passed = worst_match <= 1e-8 and minimality_ok
    report(
        4,
        "min-norm theorem",
        passed,
        f"SVD-oracle match {worst_match:.2e} <= 1e-8, minimality over 100 "
        f"kernel perturbations per frame: {minimality_ok}",
    )
    assert passed


def test_criterion_05_jackson():
    hy = fk.build_hierarchy(8)  # fine grid level 9
    rep = fk.jackson_rate(hy, lambda x: np.sin(np.pi * x), fit_lo=2, fit_hi=6)
    passed = abs(rep.slope + 2.0) <= 0.15
    report(5, "Jackson rate", passed, f"slope {rep.slope:.4f} within -2 +/- 0.15 over j=2..6")
    assert passed


def test_criterion_06_bernstein():
    hy = fk.build_hierarchy(6)
    results = {}
    passed = True
    for q, center in ((1.0, 4.0), (0.5, 2.0)):
        values = fk.bernstein_rate(hy, q).values
        growth = [values[j + 1] / values[j] for j in range(3, len(values) - 1)]
        results[q] = growth
        for g in growth:
            if not (0.8 * center <= g <= 1.2 * center):
                passed = False
    report(
        6,
        "Bernstein growth",
        passed,
        f"q=1 factors {[f'{g:.3f}' for g in results[1.0]]} in 4 +/- 20%, "
        f"q=1/2 factors {[f'{g:.3f}' for g in results[0.5]]} in 2 +/- 20%",
    )
    assert passed


def test_criterion_07_norm_equivalence():
    hy = fk.build_hierarchy(6)
    rng = np.random.default_rng(777)
    n = hy.fine_triple().n
    ratios = np.array(
        [
            fk.norm_equivalence_ratio(hy, 1.0, fk.DualVector(rng.standard_normal(n)))
            for _ in range(200)
        ]
    )
    spread = float(ratios.max() / ratios.min())
    g = fk.DualVector(rng.standard_normal(n))
    r1 = fk.norm_equivalence_ratio(hy, 1.0, g)
    r2 = fk.norm_equivalence_ratio(hy, 1.0, fk.DualVector(2.0 * g.action))
    homo = abs(r2 - r1) / r1
    passed = spread <= 20.0 and homo <= 1e-12
    report(
        7,
        "norm equivalence",
        passed,
        f"ratios in [{ratios.min():.3f}, {ratios.max():.3f}], spread {spread:.2f} <= 20, "
        f"homogeneity {homo:.2e} <= 1e-12",
    )
    assert passed


def test_criterion_08_bpx_stevenson_frame(study_rows):
    ratios = [r.ratio for r in study_rows]
    ratio_ok = max(ratios) <= 60.0
    kappas = [r.kappa_single for r in study_rows]
    growth = [b / a for a, b in zip(kappas, kappas[1:])]
    kappa_ok = all(3.2 <= g <= 4.8 for g in growth)
    control = [
        fk.frame_bounds(fk.bpx_frame(fk.build_hierarchy(j), 0.0)).ratio
        for j in range(2, 8)
    ]
    control_ok = all(b > a for a, b in zip(control, control[1:]))
    passed = ratio_ok and kappa_ok and control_ok
    report(
        8,
        "scaled multilevel frame",
        passed,
        f"q=1 ratios max {max(ratios):.2f} <= 60; kappa growth "
        f"{[f'{g:.2f}' for g in growth]} in 4 +/- 20%; q=0 control ratios "
        f"{[f'{c:.1f}' for c in control]} strictly increasing",
    )
    assert passed


def test_criterion_09a_solution_matches_direct(poisson_j6):
    triple, frame, sol, direct = poisson_j6
    err = fk.primal_norm(
        triple, fk.PrimalVector(sol.solution.coeffs - direct.coeffs)
    ) / fk.primal_norm(triple, direct)
    passed = err <= 1e-7
    report(
        9,
        "frame-Galerkin Poisson / H1 match",
        passed,
        f"J=6 tol 1e-8: H1 deviation from direct solve {err:.2e} <= 1e-7",
    )
    assert passed


def test_criterion_09b_iteration_variation(study_rows):
    counts = [r.iterations_multilevel for r in study_rows]
    variation = max(counts) / min(counts)
    passed = variation <= 2.0
    report(
        9,
        "frame-Galerkin Poisson / CG iteration variation",
        passed,
        f"counts J=2..7 {counts}, max/min {variation:.2f} vs <= 2.0",
    )
    # Structurally unattainable as stated: the depth-2 system matrix has a
    # 7-dimensional range with only 4 distinct nonzero eigenvalues
    # (12, 13.61, 24, 34.39), so CG terminates there in ~4 iterations,
    # while the saturated count at depth 7 is ~19 for any generic load.
    # max/min therefore sits near 4-5 for every correct plain CG.  The
    # substantive property (bounded multilevel counts vs single-level
    # counts doubling per level) is verified in criterion 8 and by the
    # saturation check below.
    saturated = [c for r, c in zip(study_rows, counts) if r.level >= 4]
    assert max(saturated) / min(saturated) <= 1.5, "multilevel counts failed to saturate"
    assert passed, (
        f"iteration variation {variation:.2f} > 2 across J=2..7:"
        " rank caps coarse counts at 2^(J+1)-1 while saturated counts are ~19"
    )


def test_criterion_09c_min_norm_coefficients(poisson_j6):
    triple, frame, sol, direct = poisson_j6
    oracle = fk.min_norm_coefficients(frame, direct)
    diff = float(np.linalg.norm(sol.coefficients - oracle) / np.linalg.norm(oracle))
    passed = diff <= 1e-7
    report(
        9,
        "frame-Galerkin Poisson / min-norm coefficients",
        passed,
        f"coefficient deviation {diff:.2e} <= 1e-7",
    )
    assert passed


def test_criterion_10_operator_representation_identities():
    instances = []
    f1 = by_name("F1")
    instances.append(("F1", f1, fk.make_operator(f1.triple, np.diag([3.0, 5.0]))))
    t = fk.build_triple(3, 1.0)
    instances.append(("Riesz", fk.reference_frame(t), fk.poisson_operator(t)))
    hy = fk.build_hierarchy(3)
    instances.append(("BPX-J3", fk.bpx_frame(hy, 1.0), fk.poisson_operator(hy.fine_triple(1.0))))
    worst = 0.0
    ritz_ok = True
    for name, frame, op in instances:
        m = fk.matrix_representation(frame, frame, op)
        worst = max(worst, float(np.abs(m - m.T).max()) / max(np.abs(m).max(), 1.0))
        if np.linalg.eigvalsh(0.5 * (m + m.T))[0] < -1e-10:
            ritz_ok = False
        g = fk.gram_identity_check(frame, op)
        worst = max(worst, g.left_residual, g.right_residual, g.kernel_angle)
        worst = max(worst, fk.composition_check(frame, frame, op, op))
        worst = max(worst, fk.pseudo_inverse_identity_check(frame, op))
        m_inv = inverse_representation(frame, op)
        rec_inv = fk.operator_from_matrix(frame, frame, m_inv).matrix
        l_inv = np.linalg.inv(op.matrix)
        worst = max(
            worst, float(np.linalg.norm(rec_inv - l_inv) / np.linalg.norm(l_inv))
        )
        dual = fk.dual_frame(frame)
        rec_fwd = fk.operator_from_matrix(dual, dual, m).matrix
        worst = max(
            worst,
            float(np.linalg.norm(rec_fwd - op.matrix) / np.linalg.norm(op.matrix)),
        )
    passed = worst <= 1e-8 and ritz_ok
    report(
        10,
        "operator-representation identities",
        passed,
        f"worst residual {worst:.2e} <= 1e-8 over F1/Riesz/BPX-J3, "
        f"non-negativity preserved: {ritz_ok}",
    )
    assert passed


def test_criterion_11_cli_determinism(tmp_path):
    payloads = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        cfg = RunConfig(
            command="norm-equiv",
            j_levels=(4,),
            q=1.0,
            seed=123,
            samples=30,
            output=str(path),
        )
        code = run(cfg)
        payloads.append(path.read_bytes())
        assert code == 0
    passed = payloads[0] == payloads[1]
    detail = "byte-identical payloads" if passed else "payloads differ"
    json.loads(payloads[0])  # well-formed
    report(11, "CLI determinism", passed, detail)
    assert passed
