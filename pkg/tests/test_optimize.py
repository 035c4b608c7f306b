import numpy as np
import pytest

from sparsedyn.core import (
    ConditioningWarning,
    NotConvergedWarning,
    ShapeMismatchError,
)
from sparsedyn.optimize import (
    Sr3Config,
    StlsqConfig,
    prox,
    ridge_solve,
    sr3,
    stlsq,
    unbias,
)


def planted_problem(seed, m=200, l=8, n=1, sparsity=3, min_coef=1.0):
    """Random well-conditioned regression with a known sparse solution."""
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal((m, l))
    xi = np.zeros((l, n))
    for j in range(n):
        rows = rng.choice(l, size=sparsity, replace=False)
        xi[rows, j] = rng.choice([-1.0, 1.0], size=sparsity) \
            * rng.uniform(min_coef, 3.0, size=sparsity)
    return theta, theta @ xi, xi


class TestRidgeSolve:
    def test_identity_system(self):
        theta = np.eye(3)
        xi = np.array([[1.0], [2.0], [3.0]])
        assert np.allclose(ridge_solve(theta, theta @ xi, 0.0), xi,
                           atol=1e-12)

    def test_matches_closed_form(self):
        # dual route: normal-equations closed form
        rng = np.random.default_rng(1)
        theta = rng.standard_normal((50, 5))
        xdot = rng.standard_normal((50, 2))
        alpha = 0.1
        want = np.linalg.solve(theta.T @ theta + alpha * np.eye(5),
                               theta.T @ xdot)
        assert np.allclose(ridge_solve(theta, xdot, alpha), want, atol=1e-8)

    def test_huge_alpha_shrinks_to_zero(self):
        rng = np.random.default_rng(2)
        theta = rng.standard_normal((30, 4))
        xdot = rng.standard_normal((30, 1))
        assert np.max(np.abs(ridge_solve(theta, xdot, 1e12))) < 1e-9

    def test_rank_deficient_minimum_norm(self):
        # duplicated column: the minimum-norm solution splits the weight
        theta = np.column_stack([np.ones(10), np.ones(10)])
        xdot = 2 * np.ones((10, 1))
        with pytest.warns(ConditioningWarning):
            xi = ridge_solve(theta, xdot, 0.0)
        assert np.allclose(xi, [[1.0], [1.0]], atol=1e-10)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            ridge_solve(np.ones((5, 2)), np.ones((4, 1)), 0.0)

    def test_conditioning_warning_with_alpha(self):
        theta = np.column_stack([np.ones(10), np.ones(10) + 1e-14])
        with pytest.warns(ConditioningWarning):
            ridge_solve(theta, np.ones((10, 1)), 0.05)


class TestStlsq:
    def test_planted_recovery(self):
        theta, xdot, xi_true = planted_problem(seed=0)
        got = stlsq(theta, xdot, StlsqConfig(threshold=0.5))
        assert np.array_equal(got.support, xi_true != 0)
        assert np.allclose(got.values, xi_true, atol=1e-8)

    def test_threshold_above_everything(self):
        theta, xdot, _ = planted_problem(seed=3)
        got = stlsq(theta, xdot, StlsqConfig(threshold=1e6))
        assert got.n_active == 0
        assert np.all(got.values == 0.0)

    def test_support_never_grows(self):
        theta, xdot, _ = planted_problem(seed=4, l=10, n=2)
        history = []
        stlsq(theta, xdot, StlsqConfig(threshold=0.3),
              callback=lambda k, xi, active: history.append(active))
        for before, after in zip(history, history[1:]):
            assert np.all(before | ~after), "a dropped column came back"
        assert len(history) <= theta.shape[1] + 1

    def test_pre_unbias_magnitudes_exceed_threshold(self):
        theta, xdot, _ = planted_problem(seed=5)
        cfg = StlsqConfig(threshold=0.5, unbias=False)
        got = stlsq(theta, xdot, cfg)
        live = got.values[got.support]
        assert np.all(np.abs(live) >= cfg.threshold)

    def test_unbias_restores_exact_coefficients(self):
        # ridge shrinkage biases the kept coefficients; the refit removes it
        theta, xdot, xi_true = planted_problem(seed=6)
        biased = stlsq(theta, xdot, StlsqConfig(threshold=0.5, alpha=5.0,
                                                unbias=False))
        refit = stlsq(theta, xdot, StlsqConfig(threshold=0.5, alpha=5.0,
                                               unbias=True))
        assert np.max(np.abs(refit.values - xi_true)) < 1e-8
        assert np.max(np.abs(biased.values - xi_true)) > 1e-4

    def test_empty_column_is_zero_not_error(self):
        rng = np.random.default_rng(7)
        theta = rng.standard_normal((40, 4))
        xdot = np.column_stack([theta @ np.array([2.0, 0, 0, 0]),
                                1e-4 * rng.standard_normal(40)])
        got = stlsq(theta, xdot, StlsqConfig(threshold=0.5))
        assert np.all(got.values[:, 1] == 0.0)
        assert got.values[0, 0] == pytest.approx(2.0, abs=1e-8)

    def test_defaults(self):
        cfg = StlsqConfig()
        assert (cfg.threshold, cfg.alpha, cfg.max_iter, cfg.unbias) == \
            (0.1, 0.05, 20, True)


class TestSr3:
    def test_zero_xdot(self):
        rng = np.random.default_rng(8)
        theta = rng.standard_normal((30, 5))
        got = sr3(theta, np.zeros((30, 2)))
        assert np.all(got.values == 0.0)

    def test_planted_recovery(self):
        theta, xdot, xi_true = planted_problem(seed=9)
        got = sr3(theta, xdot, Sr3Config(threshold=0.5))
        assert np.array_equal(got.support, xi_true != 0)
        assert np.allclose(got.values, xi_true, atol=1e-6)

    def test_vanishing_threshold_approaches_least_squares(self):
        # with the prox nearly the identity the alternation's fixed point
        # collapses to plain least squares
        rng = np.random.default_rng(10)
        theta = rng.standard_normal((20, 3))
        xdot = rng.standard_normal((20, 2))
        ols = np.linalg.lstsq(theta, xdot, rcond=None)[0]
        got = sr3(theta, xdot, Sr3Config(threshold=1e-10, thresholder="L1",
                                         max_iter=500, tol=1e-14,
                                         unbias=False))
        assert np.allclose(got.values, ols, atol=1e-6)

    def test_objective_monotone_for_l1(self):
        theta, xdot, _ = planted_problem(seed=11, l=10, n=2)
        cfg = Sr3Config(threshold=0.3, nu=0.5, thresholder="L1",
                        unbias=False)
        lam = cfg.threshold / cfg.nu
        values = []

        def objective(_, xi, w):
            fit = 0.5 * np.linalg.norm(xdot - theta @ xi) ** 2
            reg = lam * np.abs(w).sum()
            couple = np.linalg.norm(xi - w) ** 2 / (2 * cfg.nu)
            values.append(fit + reg + couple)

        sr3(theta, xdot, cfg, callback=objective)
        diffs = np.diff(values)
        assert np.all(diffs <= 1e-10)

    def test_not_converged_warning(self):
        theta, xdot, _ = planted_problem(seed=12)
        with pytest.warns(NotConvergedWarning):
            got = sr3(theta, xdot, Sr3Config(threshold=0.5, max_iter=1,
                                             tol=1e-15))
        assert got.values.shape == (8, 1)

    def test_defaults(self):
        cfg = Sr3Config()
        assert (cfg.threshold, cfg.nu, cfg.tol, cfg.thresholder,
                cfg.unbias) == (0.1, 1.0, 1e-6, "L0", True)


class TestProx:
    def test_l0_below_cutoff(self):
        assert prox(np.array([[0.05]]), "L0", 0.1) == 0.0

    def test_l0_above_cutoff_untouched(self):
        assert prox(np.array([[0.3]]), "L0", 0.1) == 0.3

    def test_l1_soft_shrink(self):
        assert prox(np.array([[1.0]]), "L1", 0.1) == pytest.approx(0.9)

    def test_cad_identity_region(self):
        assert prox(np.array([[0.3]]), "CAD", 0.1) == 0.3

    def test_cad_piecewise(self):
        thr = 0.1
        w = np.array([0.05, 0.15, 0.19, 0.2, 0.5, -0.15])
        got = prox(w, "CAD", thr)
        want = np.array([0.0, 0.05, 0.09, 0.2, 0.5, -0.05])
        assert np.allclose(got, want, atol=1e-12)

    @pytest.mark.parametrize("thresholder", ["L0", "L1", "CAD"])
    def test_odd_and_nonexpansive(self, thresholder):
        rng = np.random.default_rng(13)
        w = rng.uniform(-3, 3, size=(50, 4))
        thr = 0.7
        got = prox(w, thresholder, thr)
        assert np.allclose(prox(-w, thresholder, thr), -got, atol=1e-15)
        assert np.all(np.abs(got) <= np.abs(w) + 1e-15)
        big = np.abs(w) >= 2 * thr
        if thresholder in ("L0", "CAD"):
            assert np.array_equal(got[big], w[big])

    def test_unknown_thresholder(self):
        with pytest.raises(ValueError):
            prox(np.zeros((1, 1)), "SCAD", 0.1)

    def test_nonpositive_threshold(self):
        with pytest.raises(ValueError):
            prox(np.zeros((1, 1)), "L0", 0.0)


class TestUnbias:
    def test_full_support_equals_least_squares(self):
        rng = np.random.default_rng(14)
        theta = rng.standard_normal((40, 5))
        xdot = rng.standard_normal((40, 2))
        full = np.ones((5, 2), dtype=bool)
        assert np.allclose(unbias(theta, xdot, full).values,
                           ridge_solve(theta, xdot, 0.0), atol=1e-12)

    def test_empty_support(self):
        got = unbias(np.ones((10, 3)), np.ones((10, 2)),
                     np.zeros((3, 2), dtype=bool))
        assert np.all(got.values == 0.0)

    def test_planted_two_sparse(self):
        # dual route: direct solve of the 2-column subproblem
        rng = np.random.default_rng(15)
        theta = rng.standard_normal((60, 6))
        support = np.zeros((6, 1), dtype=bool)
        support[[1, 4], 0] = True
        xdot = theta[:, [1, 4]] @ np.array([[2.0], [-3.0]]) \
            + 0.01 * rng.standard_normal((60, 1))
        sub = theta[:, [1, 4]]
        want = np.linalg.solve(sub.T @ sub, sub.T @ xdot)
        got = unbias(theta, xdot, support)
        assert np.allclose(got.values[[1, 4], 0], want[:, 0], atol=1e-10)
        assert np.all(got.values[[0, 2, 3, 5], 0] == 0.0)

    def test_residual_optimality(self):
        # perturbing any active coefficient cannot reduce the residual
        theta, xdot, xi_true = planted_problem(seed=16)
        support = xi_true != 0
        got = unbias(theta, xdot + 0.01, support)
        base = np.linalg.norm(xdot + 0.01 - theta @ got.values)
        for i in np.flatnonzero(support[:, 0]):
            for delta in (1e-4, -1e-4):
                tweaked = got.values.copy()
                tweaked[i, 0] += delta
                assert np.linalg.norm(xdot + 0.01 - theta @ tweaked) >= base

    def test_support_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            unbias(np.ones((10, 3)), np.ones((10, 1)),
                   np.zeros((4, 1), dtype=bool))


class TestConfigValidation:
    @pytest.mark.parametrize("kwargs", [
        {"threshold": -0.1}, {"alpha": -1.0}, {"max_iter": 0},
    ])
    def test_stlsq_invalid(self, kwargs):
        with pytest.raises(ValueError):
            StlsqConfig(**kwargs)

    @pytest.mark.parametrize("kwargs", [
        {"threshold": 0.0}, {"nu": 0.0}, {"tol": 0.0},
        {"thresholder": "hard"}, {"max_iter": 0},
    ])
    def test_sr3_invalid(self, kwargs):
        with pytest.raises(ValueError):
            Sr3Config(**kwargs)
