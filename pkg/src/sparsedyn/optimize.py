"""Sparse regression solvers for xdot ~ Theta(x) Xi.

Two built-in algorithms: sequentially thresholded least squares (STLSQ),
which alternates ridge regression with hard magnitude cuts, and the
relax-and-split scheme SR3, which alternates a coupled linear solve with
a proximal step on a relaxed copy of the coefficients.  Both can finish
with an unregularized refit on the discovered support.

Feature matrices are never normalized here: the threshold acts on raw
coefficient magnitudes, so rescaling columns would silently change what
the hyperparameter means.  Badly scaled libraries surface instead as a
ConditioningWarning; counter with ``alpha`` or by rescaling the data.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import (
    CoefficientMatrix,
    ConditioningWarning,
    FeatureMatrix,
    NotConvergedWarning,
    ShapeMismatchError,
)

_COND_LIMIT = 1e10
_RCOND = 1e-12

THRESHOLDERS = ("L0", "L1", "CAD")


@dataclass(frozen=True)
class StlsqConfig:
    """Knobs for sequentially thresholded least squares."""

    threshold: float = 0.1
    alpha: float = 0.05
    max_iter: int = 20
    unbias: bool = True

    def __post_init__(self):
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class Sr3Config:
    """Knobs for the relax-and-split solver."""

    threshold: float = 0.1
    nu: float = 1.0
    tol: float = 1e-6
    thresholder: str = "L0"
    max_iter: int = 30
    unbias: bool = True

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("threshold must be > 0")
        if self.nu <= 0:
            raise ValueError("nu must be > 0")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.thresholder not in THRESHOLDERS:
            raise ValueError(
                f"thresholder must be one of {THRESHOLDERS}, "
                f"got {self.thresholder!r}"
            )
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


# --------------------------------------------------------------------------- #
# Inner linear solver
# --------------------------------------------------------------------------- #

def ridge_solve(theta, xdot, alpha: float = 0.0) -> np.ndarray:
    """Solve min ||xdot - theta @ xi||_F^2 + alpha * ||xi||_F^2.

    alpha=0 gives the minimum-norm least-squares solution (SVD based, so
    rank-deficient theta is handled without forming normal equations).
    alpha>0 is solved as least squares on the matrix stacked with
    sqrt(alpha) * I, which is the ridge solution without squaring the
    condition number.
    """
    A = _as_array(theta)
    b = np.asarray(xdot, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    if A.shape[0] != b.shape[0]:
        raise ShapeMismatchError(
            f"{A.shape[0]} feature rows vs {b.shape[0]} derivative rows"
        )
    m, l = A.shape
    if alpha > 0:
        stacked = np.vstack([A, np.sqrt(alpha) * np.eye(l)])
        rhs = np.vstack([b, np.zeros((l, b.shape[1]))])
        xi, _, _, _ = np.linalg.lstsq(stacked, rhs, rcond=_RCOND)
        # the stacked system is always well conditioned, so its singular
        # values say nothing about theta; measure theta itself
        _check_conditioning(np.linalg.svd(A, compute_uv=False))
    else:
        xi, _, _, sing = np.linalg.lstsq(A, b, rcond=_RCOND)
        _check_conditioning(sing)
    return xi


def _check_conditioning(sing: np.ndarray) -> None:
    if sing.size == 0:
        return
    smin = sing[-1]
    cond = np.inf if smin == 0.0 else sing[0] / smin
    if cond > _COND_LIMIT:
        warnings.warn(
            f"feature matrix condition estimate {cond:.2e} exceeds "
            f"{_COND_LIMIT:.0e}; coefficients may be unreliable "
            "(consider increasing alpha or rescaling the data)",
            ConditioningWarning,
            stacklevel=3,
        )


# --------------------------------------------------------------------------- #
# STLSQ
# --------------------------------------------------------------------------- #

def stlsq(theta, xdot, cfg: Optional[StlsqConfig] = None,
          callback: Optional[Callable] = None) -> CoefficientMatrix:
    """Sequentially thresholded least squares, one active set per equation.

    Each sweep re-solves every equation on its current active columns and
    drops coefficients below ``cfg.threshold`` in magnitude.  Supports only
    shrink, so the loop terminates on its own; ``max_iter`` is a backstop.
    An equation whose support empties is returned as the zero column.

    ``callback(sweep, xi, active)`` is invoked after each sweep, mainly
    for instrumentation and tests.
    """
    cfg = cfg or StlsqConfig()
    A = _as_array(theta)
    b = _as_xdot(xdot, A)
    m, l = A.shape
    n = b.shape[1]

    xi = np.zeros((l, n))
    active = np.ones((l, n), dtype=bool)
    for sweep in range(cfg.max_iter):
        xi[:] = 0.0
        for j in range(n):
            cols = np.flatnonzero(active[:, j])
            if cols.size == 0:
                continue
            xi[cols, j] = ridge_solve(A[:, cols], b[:, j], cfg.alpha)[:, 0]
        survivors = active & (np.abs(xi) >= cfg.threshold)
        xi[~survivors] = 0.0
        if callback is not None:
            callback(sweep, xi.copy(), survivors.copy())
        if np.array_equal(survivors, active):
            break
        active = survivors

    if cfg.unbias:
        return unbias(A, b, active)
    return CoefficientMatrix(xi, active)


# --------------------------------------------------------------------------- #
# SR3
# --------------------------------------------------------------------------- #

def sr3(theta, xdot, cfg: Optional[Sr3Config] = None,
        callback: Optional[Callable] = None) -> CoefficientMatrix:
    """Relax-and-split sparse regression.

    Minimizes 0.5*||xdot - theta xi||^2 + lam*R(w) + ||xi - w||^2 / (2 nu)
    over (xi, w) by exact alternating minimization: a linear solve against
    the Cholesky factor of (theta' theta + I/nu) for xi, then a proximal
    step for w.  ``cfg.threshold`` is the prox cutoff; the corresponding
    penalty weight is threshold^2/(2 nu) for L0 and threshold/nu for L1.

    Converged when ||w_k - w_{k-1}||_F / max(1, ||w_k||_F) < cfg.tol.
    Hitting ``max_iter`` first emits NotConvergedWarning but still returns
    the current iterate.  ``callback(iteration, xi, w)`` runs per iteration.
    """
    cfg = cfg or Sr3Config()
    A = _as_array(theta)
    b = _as_xdot(xdot, A)
    l = A.shape[1]

    gram = A.T @ A + np.eye(l) / cfg.nu
    factor = cho_factor(gram)
    atb = A.T @ b

    w = np.zeros((l, b.shape[1]))
    converged = False
    for iteration in range(cfg.max_iter):
        xi = cho_solve(factor, atb + w / cfg.nu)
        w_new = prox(xi, cfg.thresholder, cfg.threshold)
        step = np.linalg.norm(w_new - w) / max(1.0, np.linalg.norm(w_new))
        w = w_new
        if callback is not None:
            callback(iteration, xi.copy(), w.copy())
        if step < cfg.tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"relax-and-split did not reach tol={cfg.tol:g} within "
            f"{cfg.max_iter} iterations (last relative step {step:.2e})",
            NotConvergedWarning,
            stacklevel=2,
        )

    support = w != 0.0
    if cfg.unbias:
        return unbias(A, b, support)
    return CoefficientMatrix(w, support)


# --------------------------------------------------------------------------- #
# Proximal operators
# --------------------------------------------------------------------------- #

def prox(w: np.ndarray, thresholder: str, threshold: float) -> np.ndarray:
    """Elementwise proximal/thresholding map.

    L0: hard threshold (0 below the cutoff, untouched above).
    L1: soft threshold (shrink every entry toward 0 by the cutoff).
    CAD: hard below the cutoff, identity at or above twice the cutoff,
    soft-thresholded in the band between.
    """
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    w = np.asarray(w, dtype=float)
    mag = np.abs(w)
    if thresholder == "L0":
        return np.where(mag < threshold, 0.0, w)
    if thresholder == "L1":
        return np.sign(w) * np.maximum(mag - threshold, 0.0)
    if thresholder == "CAD":
        soft = np.sign(w) * (mag - threshold)
        mid = np.where(mag < threshold, 0.0, soft)
        return np.where(mag >= 2.0 * threshold, w, mid)
    raise ValueError(
        f"thresholder must be one of {THRESHOLDERS}, got {thresholder!r}"
    )


# --------------------------------------------------------------------------- #
# Support-restricted refit
# --------------------------------------------------------------------------- #

def unbias(theta, xdot, support: np.ndarray) -> CoefficientMatrix:
    """Plain least squares per equation, restricted to the given support.

    Entries outside the support stay exactly zero; an all-false column
    yields the zero column.  This removes the shrinkage the regularized
    solvers introduce on the coefficients they keep.
    """
    A = _as_array(theta)
    b = _as_xdot(xdot, A)
    support = np.asarray(support, dtype=bool)
    if support.shape != (A.shape[1], b.shape[1]):
        raise ShapeMismatchError(
            f"support shape {support.shape} does not match "
            f"({A.shape[1]}, {b.shape[1]})"
        )
    xi = np.zeros(support.shape)
    for j in range(support.shape[1]):
        cols = np.flatnonzero(support[:, j])
        if cols.size == 0:
            continue
        xi[cols, j] = ridge_solve(A[:, cols], b[:, j], 0.0)[:, 0]
    return CoefficientMatrix(xi, support)


# --------------------------------------------------------------------------- #
# Helpers
# --------------------------------------------------------------------------- #

def _as_array(theta) -> np.ndarray:
    values = theta.values if isinstance(theta, FeatureMatrix) else theta
    A = np.asarray(values, dtype=float)
    if A.ndim != 2:
        raise ShapeMismatchError("feature matrix must be 2-D")
    return A


def _as_xdot(xdot, A: np.ndarray) -> np.ndarray:
    b = np.asarray(xdot, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    if b.ndim != 2 or A.shape[0] != b.shape[0]:
        raise ShapeMismatchError(
            f"{A.shape[0]} feature rows vs shape {b.shape} derivatives"
        )
    return b
