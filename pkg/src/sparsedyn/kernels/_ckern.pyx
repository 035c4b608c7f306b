# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: monomial evaluation and the Dormand-Prince loop.

Mirrors ``_pykern`` operation for operation; the tableau constants are
imported from there so the two backends can never drift apart.
"""
import numpy as np

from libc.math cimport fabs, isfinite, nextafter, pow, sqrt

from ..core import IntegrationBlowupError

from ._pykern import DP_A, DP_B, DP_E, DP_P

_A = np.zeros((7, 6))
for _i, _row in enumerate(DP_A):
    _A[_i, :len(_row)] = _row
_B = np.asarray(DP_B)
_E = np.asarray(DP_E)
_P = np.ascontiguousarray(DP_P)

cdef Py_ssize_t MAXSTAGE = 7

cdef double _SAFETY = 0.9
cdef double _MIN_FACTOR = 0.2
cdef double _MAX_FACTOR = 10.0
cdef double _INF = float("inf")


def poly_eval(states, exponents):
    """Evaluate monomials row-wise; same contract as ``_pykern.poly_eval``."""
    cdef const double[:, ::1] X = np.ascontiguousarray(states, dtype=np.float64)
    cdef const long long[:, ::1] E = np.ascontiguousarray(exponents, dtype=np.int64)
    cdef Py_ssize_t m = X.shape[0], n = X.shape[1], l = E.shape[0]
    if E.shape[1] != n:
        raise ValueError("exponent table width must match state dimension")
    out_arr = np.empty((m, l))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef long long e
    cdef double term
    for i in range(m):
        for k in range(l):
            term = 1.0
            for j in range(n):
                e = E[k, j]
                while e > 0:
                    term *= X[i, j]
                    e -= 1
            out[i, k] = term
    return out_arr


cdef inline void _poly_rhs(const long long[:, ::1] E, const double[:, ::1] C,
                           double* y, double* out,
                           Py_ssize_t l, Py_ssize_t n) noexcept:
    cdef Py_ssize_t k, j
    cdef long long e
    cdef double term
    for j in range(n):
        out[j] = 0.0
    for k in range(l):
        term = 1.0
        for j in range(n):
            e = E[k, j]
            while e > 0:
                term *= y[j]
                e -= 1
        for j in range(n):
            out[j] += term * C[k, j]


def dopri5_poly(exponents, coeffs, x0, times, double rtol=1e-6,
                double atol=1e-9, double max_norm=1e10):
    """Integrate a polynomial vector field; same contract as the fallback."""
    cdef const long long[:, ::1] E = np.ascontiguousarray(exponents, dtype=np.int64)
    cdef const double[:, ::1] C = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef const double[::1] ts = np.ascontiguousarray(times, dtype=np.float64)
    y0_arr = np.array(x0, dtype=np.float64).ravel()
    cdef Py_ssize_t l = E.shape[0], n = y0_arr.shape[0], nt = ts.shape[0]
    if C.shape[0] != l or C.shape[1] != n or E.shape[1] != n:
        raise ValueError("inconsistent exponent/coefficient/state shapes")

    out_arr = np.empty((nt, n))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] y0 = y0_arr
    cdef Py_ssize_t j
    for j in range(n):
        out[0, j] = y0[j]
    if nt == 1:
        return out_arr

    cdef const double[:, ::1] A = _A
    cdef const double[::1] B = _B
    cdef const double[::1] Ew = _E
    cdef const double[:, ::1] P = _P

    # work buffers: current state, stage states, stage derivatives
    work_arr = np.empty((3 + MAXSTAGE, n))
    cdef double[:, ::1] work = work_arr
    cdef double* y = &work[0, 0]
    cdef double* ystage = &work[1, 0]
    cdef double* ynew = &work[2, 0]
    cdef double* K0 = &work[3, 0]

    cdef double t = ts[0], t_bound = ts[nt - 1]
    cdef double h, t_new, err_norm, scale, acc, term, factor, theta
    cdef double th1, th2, th3, th4, q, min_step, d0, d1, d2, h0, h1
    cdef Py_ssize_t i, k, s, idx = 1
    cdef bint rejected = False

    for j in range(n):
        y[j] = y0[j]
    _poly_rhs(E, C, y, K0, l, n)
    for j in range(n):
        if not isfinite(K0[j]):
            raise IntegrationBlowupError(
                f"right-hand side not finite at t={t:g}", last_valid_time=t)

    # initial step selection (same heuristic as the fallback)
    d0 = 0.0
    d1 = 0.0
    for j in range(n):
        scale = atol + rtol * fabs(y[j])
        d0 += (y[j] / scale) ** 2
        d1 += (K0[j] / scale) ** 2
    d0 = sqrt(d0 / n)
    d1 = sqrt(d1 / n)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    if h0 > t_bound - t:
        h0 = t_bound - t
    for j in range(n):
        ystage[j] = y[j] + h0 * K0[j]
    _poly_rhs(E, C, ystage, ynew, l, n)
    d2 = 0.0
    for j in range(n):
        scale = atol + rtol * fabs(y[j])
        d2 += ((ynew[j] - K0[j]) / scale) ** 2
    d2 = sqrt(d2 / n) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = pow(0.01 / max(d1, d2), 0.2)
    h = min(100 * h0, h1)
    if h > t_bound - t:
        h = t_bound - t

    while idx < nt:
        min_step = 10.0 * fabs(nextafter(t, _INF) - t)
        if h < min_step:
            h = min_step
        t_new = t + h
        if t_new > t_bound:
            t_new = t_bound
            h = t_new - t

        # stages 2..7 (stage 1 carried over, first-same-as-last)
        for s in range(1, MAXSTAGE - 1):
            for j in range(n):
                acc = 0.0
                for k in range(s):
                    acc += A[s, k] * work[3 + k, j]
                ystage[j] = y[j] + h * acc
            _poly_rhs(E, C, ystage, &work[3 + s, 0], l, n)
        for j in range(n):
            acc = 0.0
            for k in range(6):
                acc += B[k] * work[3 + k, j]
            ynew[j] = y[j] + h * acc
        _poly_rhs(E, C, ynew, &work[3 + 6, 0], l, n)

        err_norm = 0.0
        for j in range(n):
            acc = 0.0
            for k in range(MAXSTAGE):
                acc += Ew[k] * work[3 + k, j]
            acc *= h
            scale = atol + rtol * max(fabs(y[j]), fabs(ynew[j]))
            err_norm += (acc / scale) ** 2
        err_norm = sqrt(err_norm / n)

        if not err_norm < 1.0:
            if h <= min_step:
                raise IntegrationBlowupError(
                    f"step size underflow at t={t:g}", last_valid_time=t)
            factor = _SAFETY * pow(err_norm, -0.2)
            if not isfinite(factor) or factor < _MIN_FACTOR:
                factor = _MIN_FACTOR
            h *= factor
            rejected = True
            continue

        for j in range(n):
            if not isfinite(ynew[j]) or fabs(ynew[j]) > max_norm:
                raise IntegrationBlowupError(
                    f"state escaped beyond {max_norm:g} at t={t_new:g}",
                    last_valid_time=t)

        while idx < nt and ts[idx] <= t_new:
            theta = (ts[idx] - t) / h
            th1 = theta
            th2 = theta * theta
            th3 = th2 * theta
            th4 = th3 * theta
            for j in range(n):
                acc = 0.0
                for s in range(MAXSTAGE):
                    q = P[s, 0] * th1 + P[s, 1] * th2 + P[s, 2] * th3 \
                        + P[s, 3] * th4
                    acc += q * work[3 + s, j]
                out[idx, j] = y[j] + h * acc
            idx += 1

        if err_norm == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = _SAFETY * pow(err_norm, -0.2)
            if factor > _MAX_FACTOR:
                factor = _MAX_FACTOR
        if rejected and factor > 1.0:
            factor = 1.0
        rejected = False
        t = t_new
        for j in range(n):
            y[j] = ynew[j]
            K0[j] = work[3 + 6, j]
        h *= factor
    return out_arr
