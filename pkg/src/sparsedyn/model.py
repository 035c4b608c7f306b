"""End-to-end estimator: differentiate, featurize, regress, and use the result.

``fit`` wires the three pipeline stages together and returns an immutable
FittedModel.  The learned right-hand side can be evaluated (``predict``,
``rhs``), integrated forward (``simulate``), rendered as equation strings
(``equations``), or scored against reference derivatives (``score``).
All verbs exist both as module functions and as thin methods on
FittedModel.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import differentiation, features, kernels
from .core import (
    CoefficientMatrix,
    DimensionMismatchError,
    NonFiniteError,
    NonMonotonicTimeError,
    Trajectory,
)
from .differentiation import DifferentiatorSpec
from .features import LibrarySpec
from .optimize import Sr3Config, StlsqConfig, sr3, stlsq

RTOL = 1e-6
ATOL = 1e-9


@dataclass(frozen=True)
class ModelConfig:
    """One choice per pipeline slot.

    ``differentiator`` may be a DifferentiatorSpec or any callable
    ``(states, times) -> xdot``.  ``optimizer`` may be an StlsqConfig, an
    Sr3Config, or any object implementing ``fit(theta, xdot) ->
    (coefficients, support)``.
    """

    library: LibrarySpec = LibrarySpec()
    differentiator: Union[DifferentiatorSpec, Callable] = DifferentiatorSpec()
    optimizer: Union[StlsqConfig, Sr3Config, object] = StlsqConfig()
    variable_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        if self.variable_names is not None:
            object.__setattr__(self, "variable_names",
                               tuple(self.variable_names))


@dataclass(frozen=True)
class FittedModel:
    """A discovered dynamical system: coefficients plus naming and config."""

    config: ModelConfig
    coefficients: CoefficientMatrix
    feature_names: tuple
    variable_names: tuple

    @property
    def n_variables(self) -> int:
        return len(self.variable_names)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def predict(self, states):
        return predict(self, states)

    def rhs(self, x):
        return rhs(self, x)

    def differentiate(self, traj):
        return differentiate(self, traj)

    def simulate(self, x0, times):
        return simulate(self, x0, times)

    def equations(self, precision: int = 3):
        return equations(self, precision)

    def score(self, traj, xdot_override=None):
        return score(self, traj, xdot_override)


# --------------------------------------------------------------------------- #
# Fitting
# --------------------------------------------------------------------------- #

def fit(traj: Trajectory, cfg: Optional[ModelConfig] = None,
        xdot_override=None) -> FittedModel:
    """Learn sparse dynamics from one trajectory.

    ``xdot_override`` supplies exact or pre-computed derivatives and skips
    the numerical differentiation stage entirely.
    """
    cfg = cfg or ModelConfig()
    variable_names = _resolve_variable_names(cfg, traj)

    if xdot_override is not None:
        xdot = np.asarray(xdot_override, dtype=float)
        if xdot.shape != traj.states.shape:
            raise DimensionMismatchError(
                f"xdot_override shape {xdot.shape} does not match "
                f"states shape {traj.states.shape}"
            )
    elif isinstance(cfg.differentiator, DifferentiatorSpec):
        xdot = differentiation.differentiate(traj, cfg.differentiator)
    else:
        xdot = np.asarray(cfg.differentiator(traj.states, traj.times),
                          dtype=float)

    theta = features.transform(traj.states, cfg.library, variable_names)

    if isinstance(cfg.optimizer, StlsqConfig):
        coeffs = stlsq(theta, xdot, cfg.optimizer)
    elif isinstance(cfg.optimizer, Sr3Config):
        coeffs = sr3(theta, xdot, cfg.optimizer)
    else:
        values, support = cfg.optimizer.fit(theta.values, xdot)
        coeffs = CoefficientMatrix(np.asarray(values, dtype=float),
                                   np.asarray(support, dtype=bool))

    return FittedModel(config=cfg, coefficients=coeffs,
                       feature_names=theta.names,
                       variable_names=variable_names)


def _resolve_variable_names(cfg: ModelConfig, traj: Trajectory) -> tuple:
    if cfg.variable_names is None:
        return traj.variable_names
    names = tuple(cfg.variable_names)
    if len(names) != traj.n_variables:
        raise DimensionMismatchError(
            f"{len(names)} variable names for {traj.n_variables} variables"
        )
    return names


# --------------------------------------------------------------------------- #
# Evaluation
# --------------------------------------------------------------------------- #

def predict(model: FittedModel, states) -> np.ndarray:
    """Learned derivatives Theta(states) @ Xi, one row per input row."""
    states = np.asarray(states, dtype=float)
    if states.ndim == 1:
        states = states[None, :]
    if states.ndim != 2 or states.shape[1] != model.n_variables:
        raise DimensionMismatchError(
            f"states shape {states.shape} incompatible with a "
            f"{model.n_variables}-variable model"
        )
    theta = features.transform(states, model.config.library,
                               model.variable_names)
    return theta.values @ model.coefficients.values


def rhs(model: FittedModel, x) -> np.ndarray:
    """Evaluate the learned vector field at a single state."""
    x = np.asarray(x, dtype=float).ravel()
    return predict(model, x[None, :])[0]


def differentiate(model: FittedModel, traj: Trajectory) -> np.ndarray:
    """Apply the model's differentiation stage to a new trajectory."""
    diff = model.config.differentiator
    if isinstance(diff, DifferentiatorSpec):
        return differentiation.differentiate(traj, diff)
    return np.asarray(diff(traj.states, traj.times), dtype=float)


def simulate(model: FittedModel, x0, times) -> np.ndarray:
    """Integrate the learned dynamics from ``x0``, reporting at ``times``.

    Polynomial and identity libraries run through the compiled kernel on
    their exponent tables; other libraries fall back to evaluating the
    library row-by-row inside the generic adaptive integrator.
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape != (model.n_variables,):
        raise DimensionMismatchError(
            f"x0 has length {x0.size}, model has {model.n_variables} "
            "variables"
        )
    if not np.all(np.isfinite(x0)):
        raise NonFiniteError("x0 contains NaN or Inf")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise NonMonotonicTimeError("times must be a nonempty 1-D vector")
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise NonMonotonicTimeError("times must be strictly increasing")

    spec = model.config.library
    if spec.kind in ("polynomial", "identity"):
        if spec.kind == "polynomial":
            exponents = features.monomial_exponents(
                model.n_variables, spec.degree, spec.include_bias,
                spec.include_interaction)
        else:
            exponents = np.eye(model.n_variables, dtype=np.int64)
        return kernels.dopri5_poly(exponents, model.coefficients.values,
                                   x0, times, rtol=RTOL, atol=ATOL)

    def f(x):
        theta = features.transform(x[None, :], spec, model.variable_names)
        return (theta.values @ model.coefficients.values)[0]

    return kernels.integrate_adaptive(f, x0, times, rtol=RTOL, atol=ATOL)


def equations(model: FittedModel, precision: int = 3) -> list:
    """Render one "<name>' = ..." string per state equation.

    Terms appear in library column order with coefficients printed to
    ``precision`` decimals; zero coefficients are omitted and an equation
    with no surviving terms prints as "<name>' = 0.000"-style zero.
    """
    if precision < 1:
        raise ValueError("precision must be >= 1")
    values = model.coefficients.values
    lines = []
    for j, vname in enumerate(model.variable_names):
        terms = [
            f"{values[i, j]:.{precision}f} {fname}"
            for i, fname in enumerate(model.feature_names)
            if values[i, j] != 0.0
        ]
        body = " + ".join(terms) if terms else f"{0.0:.{precision}f}"
        lines.append(f"{vname}' = {body}")
    return lines


def score(model: FittedModel, traj: Trajectory, xdot_override=None) -> float:
    """Coefficient of determination between predicted and reference xdot.

    Pooled over every entry of the derivative matrix: 1 - SS_res/SS_tot
    with SS_tot taken around the per-column means of the reference.
    """
    if xdot_override is not None:
        ref = np.asarray(xdot_override, dtype=float)
        if ref.shape != traj.states.shape:
            raise DimensionMismatchError(
                f"xdot_override shape {ref.shape} does not match "
                f"states shape {traj.states.shape}"
            )
    else:
        ref = differentiate(model, traj)
    pred = predict(model, traj.states)
    ss_res = float(np.sum((ref - pred) ** 2))
    ss_tot = float(np.sum((ref - ref.mean(axis=0)) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot
