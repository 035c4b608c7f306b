"""Shared data model: trajectories, feature/coefficient matrices, errors.

Everything downstream (differentiation, library evaluation, regression)
assumes the row/column convention fixed here: rows index time samples,
columns index state variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


# --------------------------------------------------------------------------- #
# Errors and warnings
# --------------------------------------------------------------------------- #

class SparseDynError(Exception):
    """Base class for all sparsedyn errors."""


class NonMonotonicTimeError(SparseDynError):
    """Time stamps are not strictly increasing."""


class NonFiniteError(SparseDynError):
    """Input data contains NaN or Inf."""


class ShapeMismatchError(SparseDynError):
    """Array shapes are inconsistent."""


class DimensionMismatchError(ShapeMismatchError):
    """Input dimensionality does not match the model or trajectory."""


class TooFewSamplesError(SparseDynError):
    """Not enough samples for the requested stencil."""


class WindowTooLargeError(SparseDynError):
    """Smoothing window exceeds the number of samples."""


class ArityExceedsDimensionError(SparseDynError):
    """A custom library function takes more arguments than there are variables."""


class NonFiniteFeatureError(SparseDynError):
    """A library function produced NaN or Inf on the data."""


class IntegrationBlowupError(SparseDynError):
    """The integrated state escaped to infinity or the step size underflowed."""

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class MissingTimeError(SparseDynError):
    """No usable time column and no uniform step supplied."""


class ParseError(SparseDynError):
    """Malformed input file; the message carries the offending line number."""


class UnserializableLibraryError(SparseDynError):
    """The model holds user callables that cannot be written to JSON."""


class VersionMismatchError(SparseDynError):
    """Model document format version is not supported."""


class ConditioningWarning(UserWarning):
    """The regression matrix is ill-conditioned; consider more regularization."""


class NotConvergedWarning(UserWarning):
    """An iterative solver hit its iteration cap before meeting tolerance."""


# --------------------------------------------------------------------------- #
# Data types
# --------------------------------------------------------------------------- #

def _as_float_array(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped state measurements.

    Attributes
    ----------
    times : ndarray, shape (m,)
        Strictly increasing time stamps.
    states : ndarray, shape (m, n)
        Row i is the state at ``times[i]``; column j is variable j.
    variable_names : tuple of str
        One name per state variable, default ``x0 .. x{n-1}``.
    """

    times: np.ndarray
    states: np.ndarray
    variable_names: tuple = ()

    def __post_init__(self):
        times = _as_float_array(self.times, "times")
        if times.ndim != 1:
            raise ShapeMismatchError("times must be one-dimensional")
        states = _as_float_array(self.states, "states")
        if states.ndim == 1:
            states = states[:, None]
        if states.ndim != 2:
            raise ShapeMismatchError("states must be a 2-D matrix")
        if states.shape[0] != times.shape[0]:
            raise ShapeMismatchError(
                f"times has length {times.shape[0]} but states has "
                f"{states.shape[0]} rows"
            )
        if states.shape[1] < 1:
            raise ShapeMismatchError("states needs at least one column")
        if times.shape[0] >= 2 and np.any(np.diff(times) <= 0):
            raise NonMonotonicTimeError("times must be strictly increasing")
        names = tuple(self.variable_names) or tuple(
            f"x{j}" for j in range(states.shape[1])
        )
        if len(names) != states.shape[1]:
            raise ShapeMismatchError(
                f"{len(names)} variable names for {states.shape[1]} variables"
            )
        times.flags.writeable = False
        states.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "variable_names", names)

    @property
    def n_samples(self) -> int:
        return self.states.shape[0]

    @property
    def n_variables(self) -> int:
        return self.states.shape[1]


@dataclass(frozen=True)
class FeatureMatrix:
    """Candidate library evaluated on the data: values (m, l) plus l names."""

    values: np.ndarray
    names: tuple

    def __post_init__(self):
        values = _as_float_array(self.values, "feature matrix")
        names = tuple(self.names)
        if values.ndim != 2:
            raise ShapeMismatchError("feature matrix must be 2-D")
        if values.shape[1] < 1:
            raise ShapeMismatchError("feature matrix needs at least one column")
        if len(names) != values.shape[1]:
            raise ShapeMismatchError(
                f"{len(names)} names for {values.shape[1]} feature columns"
            )
        if len(set(names)) != len(names):
            raise ShapeMismatchError("feature names must be unique")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", names)

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class CoefficientMatrix:
    """Sparse regression result: values (l, n) with its active-entry pattern.

    Column k holds the coefficients of the k-th state equation.  ``support``
    covers every nonzero entry (it defaults to the nonzero pattern); an
    on-support value may still be 0.0 if the refit landed there.
    """

    values: np.ndarray
    support: np.ndarray = field(default=None)

    def __post_init__(self):
        values = _as_float_array(self.values, "coefficients")
        if values.ndim != 2:
            raise ShapeMismatchError("coefficient matrix must be 2-D")
        support = self.support
        if support is None:
            support = values != 0.0
        support = np.asarray(support, dtype=bool)
        if support.shape != values.shape:
            raise ShapeMismatchError("support shape must match coefficient shape")
        if np.any(values[~support] != 0.0):
            raise ShapeMismatchError("coefficients must vanish off the support")
        values.flags.writeable = False
        support.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "support", support)

    @property
    def n_active(self) -> int:
        return int(np.count_nonzero(self.support))


# --------------------------------------------------------------------------- #
# Construction and validation
# --------------------------------------------------------------------------- #

def time_grid(times, n_samples: int) -> np.ndarray:
    """Expand a time specification into a full vector.

    ``times`` may be the full vector of stamps or a single uniform step h,
    which expands to ``[0, h, 2h, ...]`` of length ``n_samples``.
    """
    arr = np.asarray(times, dtype=float)
    if arr.ndim == 0:
        if arr <= 0:
            raise NonMonotonicTimeError("uniform step must be positive")
        return float(arr) * np.arange(n_samples)
    return arr


def validate_trajectory(times, states, variable_names: Optional[Sequence[str]] = None) -> Trajectory:
    """Validate raw arrays and return a fit-ready :class:`Trajectory`.

    Raises
    ------
    NonMonotonicTimeError
        If times are not strictly increasing.
    NonFiniteError
        If any entry of times or states is NaN or Inf.
    ShapeMismatchError
        If times length and states row count disagree.
    TooFewSamplesError
        If fewer than 3 samples are supplied.
    """
    states = np.asarray(states, dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    times = time_grid(times, states.shape[0])
    traj = Trajectory(times, states, tuple(variable_names or ()))
    if traj.n_samples < 3:
        raise TooFewSamplesError(
            f"need at least 3 samples to fit, got {traj.n_samples}"
        )
    return traj


def uniform_step(times) -> Optional[float]:
    """Return the common step of a uniform grid, or None.

    The grid counts as uniform when the largest deviation of the successive
    differences from their mean is below ``1e-10`` times the mean.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.shape[0] < 2:
        raise ShapeMismatchError("need a 1-D time vector of length >= 2")
    if np.any(np.diff(times) <= 0):
        raise NonMonotonicTimeError("times must be strictly increasing")
    steps = np.diff(times)
    mean = float(steps.mean())
    if np.max(np.abs(steps - mean)) < 1e-10 * mean:
        return mean
    return None
