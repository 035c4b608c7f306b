"""Pure-numpy reference kernels.

These implement the same operations as the compiled module ``_ckern`` and
serve as the fallback when it is not built: monomial evaluation and an
adaptive Dormand-Prince 4(5) integrator with quartic dense output.
"""
from __future__ import annotations

import math

import numpy as np

from ..core import IntegrationBlowupError

# Dormand-Prince 4(5) tableau, error weights, and the Shampine quartic
# interpolation coefficients (the de-facto standard dense output for this
# pair; the same constants back MATLAB's ode45 and scipy's RK45).
DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
DP_E = (-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40)
DP_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ERR_EXP = -0.2  # -1 / (embedded order + 1)


def poly_eval(states: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """Evaluate monomials row-wise: out[i, k] = prod_j states[i, j]**exponents[k, j]."""
    states = np.asarray(states, dtype=float)
    exponents = np.asarray(exponents)
    out = np.ones((states.shape[0], exponents.shape[0]))
    for k in range(exponents.shape[0]):
        col = out[:, k]
        for j in range(exponents.shape[1]):
            e = exponents[k, j]
            if e == 1:
                col *= states[:, j]
            elif e > 1:
                col *= states[:, j] ** int(e)
    return out


def _rms(v: np.ndarray) -> float:
    return math.sqrt(float(np.mean(v * v)))


def _initial_step(f, y0, f0, span, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = np.asarray(f(y0 + h0 * f0), dtype=float)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def integrate_adaptive(f, x0, times, rtol=1e-6, atol=1e-9, max_norm=1e10):
    """Integrate dx/dt = f(x) and report the state at every requested time.

    Parameters
    ----------
    f : callable
        Right-hand side, mapping a state vector to its derivative.
    x0 : ndarray, shape (n,)
        Initial state at ``times[0]``.
    times : ndarray, shape (nt,)
        Strictly increasing report times; the first entry is the start time.
    rtol, atol : float
        Local error tolerances of the embedded 4th-order estimate.
    max_norm : float
        Abort once any state component exceeds this magnitude.

    Returns
    -------
    ndarray, shape (nt, n)
        Row 0 equals ``x0`` exactly; later rows come from the quartic
        dense-output interpolant of the accepted steps.
    """
    times = np.asarray(times, dtype=float)
    y = np.array(x0, dtype=float).ravel()
    out = np.empty((times.shape[0], y.shape[0]))
    out[0] = y
    if times.shape[0] == 1:
        return out

    t = times[0]
    t_bound = times[-1]
    k1 = np.asarray(f(y), dtype=float)
    if not np.all(np.isfinite(k1)):
        raise IntegrationBlowupError(
            f"right-hand side not finite at t={t:g}", last_valid_time=t)
    h = _initial_step(f, y, k1, t_bound - t, rtol, atol)
    a2, a3, a4, a5, a6 = DP_A[1:]
    b = DP_B
    e = DP_E
    idx = 1
    rejected = False
    while idx < times.shape[0]:
        min_step = 10.0 * abs(np.nextafter(t, math.inf) - t)
        h = max(h, min_step)
        t_new = t + h
        if t_new > t_bound:
            t_new = t_bound
            h = t_new - t

        k2 = np.asarray(f(y + h * (a2[0] * k1)), dtype=float)
        k3 = np.asarray(f(y + h * (a3[0] * k1 + a3[1] * k2)), dtype=float)
        k4 = np.asarray(f(y + h * (a4[0] * k1 + a4[1] * k2 + a4[2] * k3)),
                        dtype=float)
        k5 = np.asarray(f(y + h * (a5[0] * k1 + a5[1] * k2 + a5[2] * k3
                                   + a5[3] * k4)), dtype=float)
        k6 = np.asarray(f(y + h * (a6[0] * k1 + a6[1] * k2 + a6[2] * k3
                                   + a6[3] * k4 + a6[4] * k5)), dtype=float)
        dy = h * (b[0] * k1 + b[2] * k3 + b[3] * k4 + b[4] * k5 + b[5] * k6)
        y_new = y + dy
        k7 = np.asarray(f(y_new), dtype=float)
        err = h * (e[0] * k1 + e[2] * k3 + e[3] * k4 + e[4] * k5 + e[5] * k6
                   + e[6] * k7)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = _rms(err / scale)

        if not err_norm < 1.0:  # also catches NaN
            if h <= min_step:
                raise IntegrationBlowupError(
                    f"step size underflow at t={t:g}", last_valid_time=t)
            h *= max(_MIN_FACTOR,
                     _SAFETY * err_norm ** _ERR_EXP if math.isfinite(err_norm)
                     else _MIN_FACTOR)
            rejected = True
            continue

        if not np.all(np.isfinite(y_new)) or np.max(np.abs(y_new)) > max_norm:
            raise IntegrationBlowupError(
                f"state escaped beyond {max_norm:g} at t={t_new:g}",
                last_valid_time=t)

        # Dense output for every requested time inside the accepted step.
        stop = np.searchsorted(times, t_new, side="right")
        if stop > idx:
            theta = (times[idx:stop] - t) / h
            powers = np.vstack([theta, theta**2, theta**3, theta**4])
            K = np.vstack([k1, k2, k3, k4, k5, k6, k7])
            out[idx:stop] = y + h * (powers.T @ (DP_P.T @ K))
            idx = stop

        if err_norm == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = min(_MAX_FACTOR, _SAFETY * err_norm ** _ERR_EXP)
        if rejected:
            factor = min(1.0, factor)
        rejected = False
        t = t_new
        y = y_new
        k1 = k7  # first-same-as-last
        h *= factor
    return out


def poly_rhs(exponents: np.ndarray, coeffs: np.ndarray):
    """Right-hand side of a polynomial vector field: f(x) = monomials(x) @ coeffs."""
    exponents = np.asarray(exponents)
    coeffs = np.asarray(coeffs, dtype=float)

    def f(x):
        return poly_eval(x[None, :], exponents)[0] @ coeffs

    return f


def dopri5_poly(exponents, coeffs, x0, times, rtol=1e-6, atol=1e-9,
                max_norm=1e10):
    """Integrate a polynomial vector field (fallback for the compiled kernel)."""
    return integrate_adaptive(poly_rhs(exponents, coeffs), x0, times,
                              rtol=rtol, atol=atol, max_norm=max_norm)
