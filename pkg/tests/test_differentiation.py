import numpy as np
import pytest

from sparsedyn.core import TooFewSamplesError, Trajectory, WindowTooLargeError
from sparsedyn.differentiation import (
    DifferentiatorSpec,
    differentiate,
    finite_difference,
    smooth,
    smoothed_finite_difference,
)


def _traj(times, values):
    return Trajectory(np.asarray(times, dtype=float),
                      np.asarray(values, dtype=float))


class TestSpec:
    def test_defaults(self):
        spec = DifferentiatorSpec()
        assert spec.kind == "finite_difference"
        assert spec.order == 2
        assert spec.window == 11
        assert spec.smooth_degree == 3

    @pytest.mark.parametrize("kwargs", [
        {"kind": "spectral"},
        {"order": 3},
        {"order": 0},
        {"window": 4},        # even
        {"window": 1},
        {"smooth_degree": 0},
        {"smooth_degree": 11},  # must stay below window
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            DifferentiatorSpec(**kwargs)


class TestFiniteDifference:
    @pytest.mark.parametrize("order", [1, 2])
    def test_constant_is_zero(self, order):
        traj = _traj([0, 0.3, 0.7, 1.0], np.full((4, 2), 5.0))
        assert np.max(np.abs(finite_difference(traj, order))) == 0.0

    def test_quadratic_exact_interior(self):
        t = np.arange(0.0, 1.01, 0.1)
        traj = _traj(t, t ** 2)
        got = finite_difference(traj, order=2)[:, 0]
        assert np.max(np.abs(got[1:-1] - 2 * t[1:-1])) < 1e-12

    def test_quadratic_exact_everywhere_nonuniform(self):
        # the one-sided 3-point endpoint stencils are also exact on
        # quadratics, and the weights adapt to the uneven grid
        rng = np.random.default_rng(5)
        t = np.cumsum(rng.uniform(0.05, 0.2, size=12))
        traj = _traj(t, 3 * t ** 2 - t + 4)
        got = finite_difference(traj, order=2)[:, 0]
        assert np.max(np.abs(got - (6 * t - 1))) < 1e-10

    def test_order1_forward_stencil(self):
        # order-1 uses the forward difference, so on x=t^2 the value at
        # t_i is exactly 2 t_i + h (backward at the last point: 2 t_m - h)
        h = 0.1
        t = np.arange(0.0, 1.01, h)
        traj = _traj(t, t ** 2)
        got = finite_difference(traj, order=1)[:, 0]
        want = 2 * t + h
        want[-1] = 2 * t[-1] - h
        assert np.max(np.abs(got - want)) < 1e-12

    def test_order1_exact_on_linear(self):
        t = np.array([0.0, 0.2, 0.5, 0.6, 1.3])
        traj = _traj(t, np.column_stack([2 * t - 1, -t]))
        got = finite_difference(traj, order=1)
        assert np.allclose(got, np.column_stack([np.full(5, 2.0),
                                                 np.full(5, -1.0)]),
                           atol=1e-12)

    def test_convergence_order_two(self):
        errors = []
        for h in (0.1, 0.05, 0.025):
            t = np.arange(0.0, 10.0 + h / 2, h)
            traj = _traj(t, np.sin(t))
            got = finite_difference(traj, order=2)[:, 0]
            errors.append(np.max(np.abs(got[1:-1] - np.cos(t[1:-1]))))
        for coarse, fine in zip(errors, errors[1:]):
            assert 3.5 <= coarse / fine <= 4.5

    def test_linearity(self):
        rng = np.random.default_rng(2)
        t = np.sort(rng.uniform(0, 1, 15))
        X = rng.standard_normal((15, 2))
        Y = rng.standard_normal((15, 2))
        a, b = 2.5, -1.25
        combined = finite_difference(_traj(t, a * X + b * Y), order=2)
        separate = (a * finite_difference(_traj(t, X), order=2)
                    + b * finite_difference(_traj(t, Y), order=2))
        assert np.max(np.abs(combined - separate)) < 1e-12

    def test_output_shape(self):
        traj = _traj([0, 1, 2, 3], np.zeros((4, 3)))
        assert finite_difference(traj, order=1).shape == (4, 3)
        assert finite_difference(traj, order=2).shape == (4, 3)

    def test_too_few_samples(self):
        # m=2 cannot support the 3-point second-order stencil; Trajectory
        # construction itself allows two rows
        traj = Trajectory([0.0, 1.0], np.zeros((2, 1)))
        with pytest.raises(TooFewSamplesError):
            finite_difference(traj, order=2)


class TestSmooth:
    def test_low_degree_polynomial_unchanged(self):
        t = np.linspace(0, 1, 30)
        X = np.column_stack([t ** 3 - t, 2 * t ** 2 + 1])
        assert np.max(np.abs(smooth(X, 11, 3) - X)) < 1e-10

    def test_variance_reduction(self):
        wins = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            noise = rng.normal(0, 0.1, size=(200, 1))
            X = 3.0 + noise
            smoothed = smooth(X, 11, 3)
            if np.var(smoothed[:, 0]) < np.var(X[:, 0]):
                wins += 1
        assert wins == 100

    def test_window_too_large(self):
        with pytest.raises(WindowTooLargeError):
            smooth(np.zeros((5, 1)), 11, 3)


class TestSmoothedFiniteDifference:
    def test_noiseless_cubic_matches_plain(self):
        t = np.linspace(0, 2, 50)
        traj = _traj(t, t ** 3 - 2 * t)
        spec = DifferentiatorSpec(kind="smoothed_finite_difference")
        plain = finite_difference(traj, order=2)
        assert np.max(np.abs(smoothed_finite_difference(traj, spec) - plain)) \
            < 1e-9

    def test_zero_input(self):
        traj = _traj(np.linspace(0, 1, 20), np.zeros((20, 2)))
        spec = DifferentiatorSpec(kind="smoothed_finite_difference")
        assert np.max(np.abs(smoothed_finite_difference(traj, spec))) == 0.0

    def test_beats_plain_on_noisy_sine(self):
        h = 0.01
        t = np.arange(0.0, 4.0, h)
        truth = np.cos(t)
        spec = DifferentiatorSpec(kind="smoothed_finite_difference")
        wins = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            noisy = _traj(t, np.sin(t) + rng.normal(0, 0.01, size=t.size))
            err_plain = _rms(finite_difference(noisy, 2)[:, 0] - truth)
            err_smooth = _rms(
                smoothed_finite_difference(noisy, spec)[:, 0] - truth)
            if err_smooth < err_plain:
                wins += 1
        assert wins >= 95


class TestDispatch:
    def test_plain_kind(self):
        t = np.linspace(0, 1, 10)
        traj = _traj(t, t ** 2)
        spec = DifferentiatorSpec(order=2)
        assert np.array_equal(differentiate(traj, spec),
                              finite_difference(traj, 2))

    def test_smoothed_kind(self):
        t = np.linspace(0, 1, 20)
        traj = _traj(t, t ** 2)
        spec = DifferentiatorSpec(kind="smoothed_finite_difference")
        assert np.array_equal(differentiate(traj, spec),
                              smoothed_finite_difference(traj, spec))


def _rms(v):
    return float(np.sqrt(np.mean(v ** 2)))
