import numpy as np
import pytest
from numpy.testing import assert_allclose

from framekit.errors import (
    DimensionMismatch,
    Inconsistent,
    NoConvergence,
    NotPositiveDefinite,
)
from framekit.numerics import (
    PencilSpectrum,
    SymMatrix,
    cg_solve,
    generalized_eig_pairs,
    generalized_eigs,
    matrix_rank,
    min_norm_solve,
    null_space,
    pseudo_inverse,
    solve_spd,
    write_matrix_market,
)


def random_spd(rng, n):
    a = rng.standard_normal((n, n))
    return a @ a.T + n * np.eye(n)


class TestSymMatrix:
    def test_storage_is_exactly_symmetric(self):
        rng = np.random.default_rng(0)
        a = random_spd(rng, 6)
        a[0, 1] += 1e-12  # assembly-level noise is tolerated and removed
        m = SymMatrix(a)
        assert m.asymmetry() == 0.0
        assert m.n == 6

    def test_rejects_asymmetric_input(self):
        a = np.eye(3)
        a[0, 2] = 0.5
        with pytest.raises(ValueError):
            SymMatrix(a)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            SymMatrix(np.zeros((2, 3)))

    def test_entries_read_only(self):
        m = SymMatrix(np.eye(2))
        with pytest.raises(ValueError):
            m.a[0, 0] = 2.0


class TestSolveSpd:
    def test_identity(self):
        assert_allclose(solve_spd(np.eye(2), [3.0, 4.0]), [3.0, 4.0])

    def test_diagonal(self):
        assert_allclose(solve_spd(np.diag([2.0, 4.0]), [2.0, 8.0]), [1.0, 2.0])

    @pytest.mark.parametrize("n", [8, 50, 200])
    def test_random_spd_residual(self, n):
        rng = np.random.default_rng(n)
        a = random_spd(rng, n)
        b = rng.standard_normal(n)
        x = solve_spd(a, b)
        assert np.linalg.norm(a @ x - b) <= 1e-12 * np.linalg.norm(b)

    def test_ill_conditioned_stiffness_still_meets_contract(self):
        # 1D Laplacian on a 255-node mesh: condition number ~ 1e5
        n, h = 255, 1.0 / 256
        a = (np.diag(np.full(n, 2.0)) + np.diag(np.full(n - 1, -1.0), 1)
             + np.diag(np.full(n - 1, -1.0), -1)) / h
        b = np.random.default_rng(7).standard_normal(n)
        x = solve_spd(a, b)
        assert np.linalg.norm(a @ x - b) <= 1e-12 * np.linalg.norm(b)

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            solve_spd(np.diag([1.0, -1.0]), [1.0, 1.0])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            solve_spd(np.eye(3), [1.0, 2.0])

    def test_matrix_rhs(self):
        rng = np.random.default_rng(3)
        a = random_spd(rng, 5)
        b = rng.standard_normal((5, 4))
        x = solve_spd(a, b)
        assert np.linalg.norm(a @ x - b) <= 1e-12 * np.linalg.norm(b)


class TestGeneralizedEigs:
    def test_diagonal_against_identity(self):
        s = generalized_eigs(np.diag([2.0, 1.0]), np.eye(2))
        assert_allclose(s.eigenvalues, [1.0, 2.0])
        assert s.rank == 2

    def test_identical_pencil_is_all_ones(self):
        rng = np.random.default_rng(1)
        m = random_spd(rng, 7)
        s = generalized_eigs(m, m)
        assert_allclose(s.eigenvalues, np.ones(7), atol=1e-12)

    def test_against_characteristic_polynomial_oracle(self):
        # independent oracle: roots of det(A - lambda I) for A = diag(8, 1/2)
        a = np.diag([8.0, 0.5])
        oracle = np.sort(np.roots([1.0, -np.trace(a), np.linalg.det(a)]))
        s = generalized_eigs(a, np.eye(2))
        assert_allclose(s.eigenvalues, oracle, atol=1e-12)
        assert_allclose(s.eigenvalues, [0.5, 8.0], atol=1e-12)

    def test_congruence_invariance(self):
        # eigenvalues of (A, B) equal those of (C^T A C, C^T B C) for invertible C
        rng = np.random.default_rng(42)
        for _ in range(20):
            n = 6
            r = rng.standard_normal((n, n))
            a = r @ r.T  # PSD
            b = random_spd(rng, n)
            c = rng.standard_normal((n, n)) + n * np.eye(n)
            w1, _ = generalized_eig_pairs(a, b)
            w2, _ = generalized_eig_pairs(c.T @ a @ c, c.T @ b @ c)
            assert_allclose(w1, w2, rtol=1e-8, atol=1e-10)

    def test_eigenvectors_are_b_orthonormal(self):
        rng = np.random.default_rng(9)
        a = random_spd(rng, 6)
        b = random_spd(rng, 6)
        _, v = generalized_eig_pairs(a, b)
        assert_allclose(v.T @ b @ v, np.eye(6), atol=1e-10)

    def test_indefinite_b_raises(self):
        with pytest.raises(NotPositiveDefinite):
            generalized_eigs(np.eye(2), np.diag([1.0, -1.0]))

    def test_rank_uses_relative_cutoff(self):
        s = generalized_eigs(np.diag([1.0, 1e-15, 0.0]), np.eye(3))
        assert s.rank == 1
        assert s.min_nonzero == pytest.approx(1.0)

    def test_spectrum_sorted(self):
        rng = np.random.default_rng(5)
        s = generalized_eigs(random_spd(rng, 8), random_spd(rng, 8))
        assert np.all(np.diff(s.eigenvalues) >= 0)


class TestCgSolve:
    def test_identity_one_iteration(self):
        x, its = cg_solve(lambda v: v, np.array([1.0, 1.0]), tol=1e-10)
        assert_allclose(x, [1.0, 1.0])
        assert its == 1

    def test_zero_rhs(self):
        x, its = cg_solve(lambda v: v, np.zeros(3))
        assert its == 0
        assert_allclose(x, np.zeros(3))

    def test_singular_consistent_matches_min_norm_oracle(self):
        a = np.diag([1.0, 2.0, 0.0])
        b = np.array([1.0, 2.0, 0.0])
        x, _ = cg_solve(lambda v: a @ v, b, tol=1e-12)
        oracle = min_norm_solve(a, b)
        assert_allclose(x, oracle, atol=1e-10)
        assert_allclose(x, [1.0, 1.0, 0.0], atol=1e-10)

    def test_random_singular_consistent_matches_min_norm(self):
        rng = np.random.default_rng(11)
        for trial in range(10):
            n, r = 12, 7
            base = rng.standard_normal((n, r))
            a = base @ base.T  # PSD, rank r
            b = a @ rng.standard_normal(n)  # consistent by construction
            x, _ = cg_solve(lambda v: a @ v, b, tol=1e-12)
            oracle = min_norm_solve(a, b)
            assert np.linalg.norm(x - oracle) <= 1e-8 * max(np.linalg.norm(oracle), 1.0)

    def test_agrees_with_direct_solve(self):
        rng = np.random.default_rng(2)
        a = random_spd(rng, 20)
        b = rng.standard_normal(20)
        x, _ = cg_solve(lambda v: a @ v, b, tol=1e-12)
        assert_allclose(x, solve_spd(a, b), atol=1e-9)

    def test_no_convergence_raises_with_state(self):
        rng = np.random.default_rng(4)
        a = random_spd(rng, 30) + np.diag(np.logspace(0, 8, 30))
        b = rng.standard_normal(30)
        with pytest.raises(NoConvergence) as err:
            cg_solve(lambda v: a @ v, b, tol=1e-14, maxit=2)
        assert err.value.iterations == 2
        assert err.value.residual > 0


class TestMinNormSolve:
    def test_wide_symmetric_split(self):
        assert_allclose(min_norm_solve(np.array([[1.0, 1.0]]), [2.0]), [1.0, 1.0])

    def test_identity(self):
        b = np.array([3.0, -1.0, 2.0])
        assert_allclose(min_norm_solve(np.eye(3), b), b)

    def test_duplicated_column_splits_evenly(self):
        # matrix of the {e1, e1, e2} fixture: pinv sends e1 to (1/2, 1/2, 0)
        a = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        assert_allclose(min_norm_solve(a, [1.0, 0.0]), [0.5, 0.5, 0.0], atol=1e-14)

    def test_minimality_against_perturbations(self):
        rng = np.random.default_rng(8)
        a = rng.standard_normal((4, 9))
        x = min_norm_solve(a, a @ rng.standard_normal(9))
        kernel = null_space(a)
        for _ in range(50):
            d = x + kernel @ rng.standard_normal(kernel.shape[1])
            assert np.linalg.norm(x) <= np.linalg.norm(d) + 1e-12

    def test_inconsistent_raises(self):
        a = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(Inconsistent):
            min_norm_solve(a, [1.0, 1.0])


class TestHelpers:
    def test_pseudo_inverse_penrose_conditions(self):
        rng = np.random.default_rng(12)
        a = rng.standard_normal((4, 7))
        p = pseudo_inverse(a)
        assert_allclose(a @ p @ a, a, atol=1e-12)
        assert_allclose(p @ a @ p, p, atol=1e-12)
        assert_allclose((a @ p).T, a @ p, atol=1e-12)
        assert_allclose((p @ a).T, p @ a, atol=1e-12)

    def test_null_space_and_rank(self):
        a = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        assert matrix_rank(a) == 2
        k = null_space(a)
        assert k.shape == (3, 1)
        assert np.linalg.norm(a @ k) <= 1e-12

    def test_matrix_market_round_trip(self, tmp_path):
        from scipy.io import mmread

        rng = np.random.default_rng(6)
        a = random_spd(rng, 5)
        path = tmp_path / "matrix.mtx"
        write_matrix_market(str(path), SymMatrix(a), comment="test export")
        back = np.asarray(mmread(str(path)))
        assert_allclose(back, 0.5 * (a + a.T), atol=1e-12)

    def test_pencil_spectrum_invariants(self):
        s = PencilSpectrum(eigenvalues=np.array([0.0, 1.0, 2.0]), rank=2)
        assert s.n == 3
        assert s.min == 0.0
        assert s.max == 2.0
        assert s.min_nonzero == 1.0
