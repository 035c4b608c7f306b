"""sparsedyn: discover sparse governing equations from time-series data.

Measure a trajectory, numerically differentiate it, evaluate a library of
candidate functions on the states, and sparse-regress the derivatives onto
the library — the surviving terms are the discovered dynamics, which can
be printed, evaluated, and integrated forward.

Quick start::

    import numpy as np
    import sparsedyn as sd

    traj = sd.generate(sd.lorenz(), times=np.arange(0, 10, 0.002))
    m = sd.fit(traj)
    for line in m.equations():
        print(line)
"""
from .core import (
    CoefficientMatrix,
    FeatureMatrix,
    IntegrationBlowupError,
    SparseDynError,
    Trajectory,
    validate_trajectory,
)
from .differentiation import (
    DifferentiatorSpec,
    finite_difference,
    smooth,
    smoothed_finite_difference,
)
from .dynamics import SYSTEMS, BenchmarkSystem, decay1d, generate, linear2d, lorenz
from .features import CustomFunction, LibrarySpec
from .kernels import COMPILED
from .model import (
    FittedModel,
    ModelConfig,
    equations,
    fit,
    predict,
    rhs,
    score,
    simulate,
)
from .optimize import Sr3Config, StlsqConfig, prox, ridge_solve, sr3, stlsq, unbias

__version__ = "0.1.0"

__all__ = [
    "BenchmarkSystem",
    "COMPILED",
    "CoefficientMatrix",
    "CustomFunction",
    "DifferentiatorSpec",
    "FeatureMatrix",
    "FittedModel",
    "IntegrationBlowupError",
    "LibrarySpec",
    "ModelConfig",
    "SYSTEMS",
    "SparseDynError",
    "Sr3Config",
    "StlsqConfig",
    "Trajectory",
    "decay1d",
    "equations",
    "finite_difference",
    "fit",
    "generate",
    "linear2d",
    "lorenz",
    "predict",
    "prox",
    "rhs",
    "ridge_solve",
    "score",
    "simulate",
    "smooth",
    "smoothed_finite_difference",
    "sr3",
    "stlsq",
    "unbias",
    "validate_trajectory",
    "__version__",
]
