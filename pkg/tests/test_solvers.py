import numpy as np
import pytest

from taxonet import SolverError, graphical_lasso, lasso_from_gram


def random_spd(rng, p, jitter=0.5):
    a = rng.normal(size=(p, p))
    return a @ a.T / p + jitter * np.eye(p)


class TestLasso:
    def test_unpenalized_solves_linear_system(self, rng):
        v = random_spd(rng, 6)
        b = rng.normal(size=6)
        beta = lasso_from_gram(v, b, lam=0.0)
        np.testing.assert_allclose(beta, np.linalg.solve(v, b), atol=1e-6)

    def test_orthogonal_design_soft_thresholds(self, rng):
        # with V = I the minimizer is coordinatewise soft thresholding of b
        b = rng.normal(size=8) * 2.0
        lam = 0.7
        beta = lasso_from_gram(np.eye(8), b, lam)
        expected = np.sign(b) * np.maximum(np.abs(b) - lam, 0.0)
        np.testing.assert_allclose(beta, expected, atol=1e-9)

    def test_large_penalty_gives_zero(self, rng):
        v = random_spd(rng, 5)
        b = rng.normal(size=5)
        beta = lasso_from_gram(v, b, lam=float(np.abs(b).max()) + 1.0)
        np.testing.assert_array_equal(beta, 0.0)

    def test_kkt_conditions_hold(self, rng):
        for _ in range(20):
            p = int(rng.integers(3, 9))
            v = random_spd(rng, p)
            b = rng.normal(size=p)
            lam = float(rng.uniform(0.05, 0.5))
            beta = lasso_from_gram(v, b, lam, tol=1e-12)
            grad = v @ beta - b
            for k in range(p):
                if beta[k] > 0:
                    assert grad[k] == pytest.approx(-lam, abs=1e-6)
                elif beta[k] < 0:
                    assert grad[k] == pytest.approx(lam, abs=1e-6)
                else:
                    assert abs(grad[k]) <= lam + 1e-6

    def test_warm_start_reaches_same_solution(self, rng):
        v = random_spd(rng, 6)
        b = rng.normal(size=6)
        cold = lasso_from_gram(v, b, 0.2)
        warm = lasso_from_gram(v, b, 0.2, beta0=rng.normal(size=6))
        np.testing.assert_allclose(warm, cold, atol=1e-6)


class TestGraphicalLasso:
    def test_zero_penalty_inverts_covariance(self, rng):
        for _ in range(20):
            s = random_spd(rng, 5)
            est = graphical_lasso(s, lam=0.0)
            np.testing.assert_allclose(est.omega, np.linalg.inv(s), atol=1e-5)

    def test_huge_penalty_gives_diagonal(self, rng):
        s = random_spd(rng, 6)
        lam_max = np.abs(s - np.diag(np.diag(s))).max()
        est = graphical_lasso(s, lam=lam_max * 1.05)
        off = est.omega[~np.eye(6, dtype=bool)]
        np.testing.assert_allclose(off, 0.0, atol=1e-10)
        np.testing.assert_allclose(np.diag(est.omega), 1.0 / np.diag(s), atol=1e-8)

    def test_identity_input_is_fixed_point(self):
        est = graphical_lasso(np.eye(4), lam=0.1)
        np.testing.assert_allclose(est.omega, np.eye(4), atol=1e-10)

    def test_output_symmetric_positive_definite(self, rng):
        s = random_spd(rng, 8)
        est = graphical_lasso(s, lam=0.15)
        np.testing.assert_allclose(est.omega, est.omega.T, atol=1e-12)
        assert np.linalg.eigvalsh(est.omega).min() > 0

    def test_objective_beats_nearby_perturbations(self, rng):
        # the returned iterate should be at least as good as random feasible
        # perturbations of itself under the penalized log-likelihood
        s = random_spd(rng, 5)
        lam = 0.2
        est = graphical_lasso(s, lam, tol=1e-7)

        def objective(om):
            sign, logdet = np.linalg.slogdet(om)
            if sign <= 0:
                return -np.inf
            pen = np.abs(om).sum() - np.trace(np.abs(om))
            return logdet - np.sum(s * om) - lam * pen

        base = objective(est.omega)
        assert est.objective == pytest.approx(base, abs=1e-10)
        for _ in range(50):
            d = rng.normal(size=(5, 5)) * 1e-3
            d = 0.5 * (d + d.T)
            assert objective(est.omega + d) <= base + 1e-6

    def test_penalty_shrinks_offdiagonals_monotonically(self, rng):
        s = random_spd(rng, 6)
        norms = []
        for lam in (0.0, 0.1, 0.3, 0.8):
            est = graphical_lasso(s, lam)
            off = est.omega[~np.eye(6, dtype=bool)]
            norms.append(np.abs(off).sum())
        assert all(a >= b - 1e-8 for a, b in zip(norms, norms[1:]))

    def test_sparsity_increases_with_penalty(self, rng):
        s = np.corrcoef(rng.normal(size=(40, 7)), rowvar=False)
        low = graphical_lasso(s, 0.05)
        high = graphical_lasso(s, 0.5)
        nz = lambda e: (np.abs(e.omega[~np.eye(7, dtype=bool)]) > 1e-8).sum()
        assert nz(high) <= nz(low)

    def test_rejects_asymmetric_input(self, rng):
        s = random_spd(rng, 4)
        s[0, 1] += 1.0
        with pytest.raises(SolverError, match="symmetric"):
            graphical_lasso(s, 0.1)

    def test_rejects_negative_penalty(self, rng):
        with pytest.raises(SolverError, match="nonnegative"):
            graphical_lasso(np.eye(3), -0.1)

    def test_reports_iteration_count_and_path(self, rng):
        s = random_spd(rng, 5)
        est = graphical_lasso(s, 0.1)
        assert est.converged
        assert est.n_iter >= 1
        assert len(est.objective_path) == est.n_iter
        # outer sweeps should not degrade the objective materially
        path = est.objective_path
        assert all(b >= a - 1e-6 for a, b in zip(path, path[1:]))
