"""Benchmark dynamical systems and the reference trajectory generator.

Every built-in system carries both a plain callable right-hand side and
an equivalent exponent/coefficient table of its polynomial vector field,
so data generation runs through the same compiled integration kernel the
fitted models use — simulated and generated trajectories are directly
comparable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from . import kernels
from .core import Trajectory

RTOL = 1e-6
ATOL = 1e-9


def lorenz_rhs(x, sigma: float = 10.0, rho: float = 28.0,
               beta: float = 8.0 / 3.0) -> np.ndarray:
    """Lorenz vector field (sigma*(x1-x0), x0*(rho-x2)-x1, x0*x1-beta*x2)."""
    x = np.asarray(x, dtype=float)
    return np.array([
        sigma * (x[1] - x[0]),
        x[0] * (rho - x[2]) - x[1],
        x[0] * x[1] - beta * x[2],
    ])


@dataclass(frozen=True)
class BenchmarkSystem:
    """A named ODE with its polynomial term table.

    ``exponents`` (l, n) and ``coefficients`` (l, n) encode the same
    vector field as ``rhs``: dx_k/dt = sum_i coefficients[i, k] *
    prod_j x_j ** exponents[i, j].
    """

    name: str
    parameters: Dict[str, float]
    default_x0: np.ndarray
    rhs: Callable[[np.ndarray], np.ndarray]
    exponents: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)

    @property
    def n_variables(self) -> int:
        return len(self.default_x0)


def lorenz(sigma: float = 10.0, rho: float = 28.0,
           beta: float = 8.0 / 3.0) -> BenchmarkSystem:
    """The chaotic benchmark used throughout; defaults are 10, 28, 8/3."""
    exponents = np.array(
        [[1, 0, 0],
         [0, 1, 0],
         [0, 0, 1],
         [1, 0, 1],
         [1, 1, 0]], dtype=np.int64)
    coefficients = np.array(
        [[-sigma, rho, 0.0],
         [sigma, -1.0, 0.0],
         [0.0, 0.0, -beta],
         [0.0, -1.0, 0.0],
         [0.0, 0.0, 1.0]])
    return BenchmarkSystem(
        name="lorenz",
        parameters={"sigma": sigma, "rho": rho, "beta": beta},
        default_x0=np.array([-8.0, 8.0, 27.0]),
        rhs=lambda x, s=sigma, r=rho, b=beta: lorenz_rhs(x, s, r, b),
        exponents=exponents,
        coefficients=coefficients,
    )


def linear2d() -> BenchmarkSystem:
    """Damped rotation: dx/dt = -0.1x + 2y, dy/dt = -2x - 0.1y."""
    A = np.array([[-0.1, 2.0], [-2.0, -0.1]])
    return BenchmarkSystem(
        name="linear2d",
        parameters={},
        default_x0=np.array([2.0, 0.0]),
        rhs=lambda x: A @ np.asarray(x, dtype=float),
        exponents=np.array([[1, 0], [0, 1]], dtype=np.int64),
        coefficients=A.T.copy(),
    )


def decay1d() -> BenchmarkSystem:
    """Exponential decay dx/dt = -x; solution x0 * exp(-t)."""
    return BenchmarkSystem(
        name="decay1d",
        parameters={},
        default_x0=np.array([1.0]),
        rhs=lambda x: -np.asarray(x, dtype=float),
        exponents=np.array([[1]], dtype=np.int64),
        coefficients=np.array([[-1.0]]),
    )


SYSTEMS: Dict[str, Callable[[], BenchmarkSystem]] = {
    "lorenz": lorenz,
    "linear2d": linear2d,
    "decay1d": decay1d,
}


def generate(system: BenchmarkSystem, x0=None, times=None,
             rtol: float = RTOL, atol: float = ATOL) -> Trajectory:
    """Integrate ``system`` and report the state at the requested times.

    ``x0`` defaults to the system's canonical initial condition.  Raises
    IntegrationBlowupError (carrying the last valid time) if the state
    escapes or the step size underflows.
    """
    if times is None:
        raise TypeError("generate() requires a time vector")
    x0 = system.default_x0 if x0 is None else np.asarray(x0, dtype=float)
    if x0.shape != (system.n_variables,):
        raise ValueError(
            f"x0 has shape {x0.shape}, system {system.name!r} expects "
            f"({system.n_variables},)"
        )
    times = np.asarray(times, dtype=float)
    states = kernels.dopri5_poly(system.exponents, system.coefficients,
                                 x0, times, rtol=rtol, atol=atol)
    return Trajectory(times, states)
