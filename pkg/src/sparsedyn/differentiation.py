"""Numerical differentiation of trajectory data.

Derivatives are the regression targets, so every method returns a full
m-by-n matrix: interior stencils plus one-sided boundary stencils of the
same accuracy order, never dropped rows. Grids may be nonuniform; stencil
weights are computed from the local time gaps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter

from .core import (
    TooFewSamplesError,
    Trajectory,
    WindowTooLargeError,
)

DEFAULT_WINDOW = 11
DEFAULT_SMOOTH_DEGREE = 3


@dataclass(frozen=True)
class DifferentiatorSpec:
    """Configuration of a built-in differentiation method.

    ``order`` is the accuracy order of the finite-difference stencil
    (error O(h^order)); ``window`` and ``smooth_degree`` configure the
    Savitzky-Golay presmoother used by the smoothed variant.
    """

    kind: str = "finite_difference"
    order: int = 2
    window: int = DEFAULT_WINDOW
    smooth_degree: int = DEFAULT_SMOOTH_DEGREE

    def __post_init__(self):
        if self.kind not in ("finite_difference", "smoothed_finite_difference"):
            raise ValueError(f"unknown differentiator kind {self.kind!r}")
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be an odd integer >= 3")
        if not 1 <= self.smooth_degree < self.window:
            raise ValueError("smooth_degree must satisfy 1 <= degree < window")


def finite_difference(traj: Trajectory, order: int = 2) -> np.ndarray:
    """Differentiate each state column with respect to time.

    order=2 uses centered three-point stencils at interior samples and
    one-sided three-point stencils at both endpoints, all second-order
    accurate on arbitrary (nonuniform) grids. order=1 uses forward
    differences, with a backward difference at the final sample.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    t = traj.times
    x = traj.states
    m = t.shape[0]
    if m < order + 1:
        raise TooFewSamplesError(
            f"order-{order} stencil needs at least {order + 1} samples, got {m}"
        )
    dx = np.empty_like(x)
    if order == 1:
        steps = np.diff(t)[:, None]
        dx[:-1] = (x[1:] - x[:-1]) / steps
        dx[-1] = (x[-1] - x[-2]) / steps[-1]
        return dx

    # Stencil weights sum to zero, so the stencil can be applied to the
    # offsets from the center sample; constants then differentiate to
    # exactly zero even in floating point.
    h1 = np.diff(t)[:-1, None]  # t[i] - t[i-1] for interior i
    h2 = np.diff(t)[1:, None]   # t[i+1] - t[i]
    w_prev = -h2 / (h1 * (h1 + h2))
    w_next = h1 / (h2 * (h1 + h2))
    dx[1:-1] = w_prev * (x[:-2] - x[1:-1]) + w_next * (x[2:] - x[1:-1])
    # one-sided three-point stencils, still second order
    a, b = t[1] - t[0], t[2] - t[1]
    dx[0] = ((a + b) / (a * b) * (x[1] - x[0])
             - a / (b * (a + b)) * (x[2] - x[0]))
    a, b = t[-1] - t[-2], t[-2] - t[-3]
    dx[-1] = (-(a + b) / (a * b) * (x[-2] - x[-1])
              + a / (b * (a + b)) * (x[-3] - x[-1]))
    return dx


def smooth(states: np.ndarray, window: int = DEFAULT_WINDOW,
           degree: int = DEFAULT_SMOOTH_DEGREE) -> np.ndarray:
    """Savitzky-Golay smoothing of each column.

    Each sample is replaced by the value of a local least-squares
    polynomial fit of ``degree`` over the centered window; near the ends
    the fit over the nearest full window is evaluated at the sample's
    position.
    """
    states = np.asarray(states, dtype=float)
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 3")
    if not 1 <= degree < window:
        raise ValueError("degree must satisfy 1 <= degree < window")
    if window > states.shape[0]:
        raise WindowTooLargeError(
            f"window {window} exceeds sample count {states.shape[0]}"
        )
    return savgol_filter(states, window, degree, axis=0, mode="interp")


def smoothed_finite_difference(traj: Trajectory,
                               spec: DifferentiatorSpec) -> np.ndarray:
    """Smooth the states, then apply the finite-difference stencil."""
    smoothed = smooth(traj.states, spec.window, spec.smooth_degree)
    return finite_difference(
        Trajectory(traj.times, smoothed, traj.variable_names), spec.order
    )


def differentiate(traj: Trajectory, spec: DifferentiatorSpec) -> np.ndarray:
    """Dispatch on the spec kind; returns the m-by-n derivative matrix."""
    if spec.kind == "finite_difference":
        return finite_difference(traj, spec.order)
    return smoothed_finite_difference(traj, spec)
