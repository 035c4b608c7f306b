"""Candidate function libraries: polynomial, Fourier, custom, identity.

Column order is a contract: coefficient rows are interpreted by position
across save/load, so every transform documents and fixes its ordering.
Monomials come in graded lexicographic order with the bias column first.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .core import (
    ArityExceedsDimensionError,
    FeatureMatrix,
    NonFiniteFeatureError,
)


@dataclass(frozen=True)
class CustomFunction:
    """A user-supplied library function.

    ``func`` is applied to ``arity`` state columns at a time (it must accept
    and broadcast over numpy arrays); ``name`` maps the chosen variable
    names to the printed feature name, e.g. ``lambda u: f"exp({u})"``.
    """

    func: Callable
    arity: int = 1
    name: Callable[..., str] = None

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        if self.name is None:
            label = getattr(self.func, "__name__", "f")
            object.__setattr__(
                self, "name",
                lambda *args, _label=label: f"{_label}({', '.join(args)})",
            )


@dataclass(frozen=True)
class LibrarySpec:
    """Declarative description of how the feature matrix is built."""

    kind: str = "polynomial"
    degree: int = 2
    include_bias: bool = True
    include_interaction: bool = True
    n_frequencies: int = 1
    include_sin: bool = True
    include_cos: bool = True
    custom_functions: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("polynomial", "fourier", "custom", "identity"):
            raise ValueError(f"unknown library kind {self.kind!r}")
        if self.kind == "polynomial":
            if self.degree < 0:
                raise ValueError("degree must be >= 0")
            if self.degree == 0 and not self.include_bias:
                raise ValueError("degree 0 without bias leaves an empty library")
        if self.kind == "fourier":
            if self.n_frequencies < 1:
                raise ValueError("n_frequencies must be >= 1")
            if not (self.include_sin or self.include_cos):
                raise ValueError("need at least one of sin/cos")
        if self.kind == "custom" and not self.custom_functions:
            raise ValueError("custom library needs at least one function")
        object.__setattr__(self, "custom_functions",
                           tuple(self.custom_functions))


# --------------------------------------------------------------------------- #
# Polynomial library
# --------------------------------------------------------------------------- #

def monomial_exponents(n: int, degree: int, include_bias: bool = True,
                       include_interaction: bool = True) -> np.ndarray:
    """Exponent table of the monomial basis, one row per feature column.

    Rows are graded lexicographic: total degree ascending, then by the
    variable-index multiset, so for n=2, degree=2 the order is
    1, x0, x1, x0^2, x0 x1, x1^2.
    """
    rows = []
    start = 0 if include_bias else 1
    for total in range(start, degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), total):
            if not include_interaction and len(set(combo)) > 1:
                continue
            exp = np.zeros(n, dtype=np.int64)
            for j in combo:
                exp[j] += 1
            rows.append(exp)
    if not rows:
        raise ValueError("polynomial specification yields an empty library")
    return np.vstack(rows)


def _monomial_name(exponents: np.ndarray, variable_names: Sequence[str]) -> str:
    parts = []
    for name, e in zip(variable_names, exponents):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return " ".join(parts) if parts else "1"


def polynomial_transform(states: np.ndarray, degree: int = 2,
                         include_bias: bool = True,
                         include_interaction: bool = True,
                         variable_names: Optional[Sequence[str]] = None,
                         ) -> FeatureMatrix:
    """All monomials of total degree <= ``degree`` evaluated on the rows."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    names = _resolve_names(variable_names, states.shape[1])
    table = monomial_exponents(states.shape[1], degree, include_bias,
                               include_interaction)
    values = kernels.poly_eval(states, table)
    return FeatureMatrix(values, tuple(_monomial_name(row, names)
                                       for row in table))


# --------------------------------------------------------------------------- #
# Fourier library
# --------------------------------------------------------------------------- #

def fourier_transform(states: np.ndarray, n_frequencies: int = 1,
                      include_sin: bool = True, include_cos: bool = True,
                      variable_names: Optional[Sequence[str]] = None,
                      ) -> FeatureMatrix:
    """sin(k x_j) and cos(k x_j) for k = 1..n_frequencies, per variable.

    Columns are variable-major, frequency ascending, sin before cos.
    """
    if not (include_sin or include_cos):
        raise ValueError("need at least one of sin/cos")
    states = np.atleast_2d(np.asarray(states, dtype=float))
    var_names = _resolve_names(variable_names, states.shape[1])
    columns = []
    names = []
    for j, vname in enumerate(var_names):
        for k in range(1, n_frequencies + 1):
            if include_sin:
                columns.append(np.sin(k * states[:, j]))
                names.append(f"sin({k} {vname})")
            if include_cos:
                columns.append(np.cos(k * states[:, j]))
                names.append(f"cos({k} {vname})")
    return FeatureMatrix(np.column_stack(columns), tuple(names))


# --------------------------------------------------------------------------- #
# Custom and identity libraries
# --------------------------------------------------------------------------- #

def custom_transform(states: np.ndarray, spec: "LibrarySpec",
                     variable_names: Optional[Sequence[str]] = None,
                     ) -> FeatureMatrix:
    """Apply each function to every ascending combination of state columns."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    n = states.shape[1]
    var_names = _resolve_names(variable_names, n)
    columns = []
    names = []
    for fn in spec.custom_functions:
        if fn.arity > n:
            raise ArityExceedsDimensionError(
                f"function of arity {fn.arity} on {n} variables"
            )
        for combo in itertools.combinations(range(n), fn.arity):
            # non-finite output becomes a typed error below, so numpy's
            # own numeric warnings would only be noise
            with np.errstate(all="ignore"):
                col = np.asarray(
                    fn.func(*(states[:, j] for j in combo)), dtype=float)
            name = fn.name(*(var_names[j] for j in combo))
            if not np.all(np.isfinite(col)):
                raise NonFiniteFeatureError(
                    f"feature {name!r} produced NaN or Inf on the data"
                )
            columns.append(col)
            names.append(name)
    return FeatureMatrix(np.column_stack(columns), tuple(names))


def identity_transform(states: np.ndarray,
                       variable_names: Optional[Sequence[str]] = None,
                       ) -> FeatureMatrix:
    """Pass the states through unchanged (features precomputed by the user)."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    return FeatureMatrix(states,
                         _resolve_names(variable_names, states.shape[1]))


# --------------------------------------------------------------------------- #
# Dispatch
# --------------------------------------------------------------------------- #

def transform(states: np.ndarray, spec: LibrarySpec,
              variable_names: Optional[Sequence[str]] = None) -> FeatureMatrix:
    """Evaluate the library described by ``spec`` on the state matrix."""
    if spec.kind == "polynomial":
        return polynomial_transform(states, spec.degree, spec.include_bias,
                                    spec.include_interaction, variable_names)
    if spec.kind == "fourier":
        return fourier_transform(states, spec.n_frequencies, spec.include_sin,
                                 spec.include_cos, variable_names)
    if spec.kind == "custom":
        return custom_transform(states, spec, variable_names)
    return identity_transform(states, variable_names)


def feature_names(spec: LibrarySpec, variable_names: Sequence[str],
                  n: Optional[int] = None) -> tuple:
    """Column names of ``transform`` without evaluating any data."""
    variable_names = tuple(variable_names)
    if n is None:
        n = len(variable_names)
    elif n != len(variable_names):
        raise ValueError(f"{len(variable_names)} names for {n} variables")
    if spec.kind == "polynomial":
        table = monomial_exponents(n, spec.degree, spec.include_bias,
                                   spec.include_interaction)
        return tuple(_monomial_name(row, variable_names) for row in table)
    if spec.kind == "fourier":
        names = []
        for vname in variable_names:
            for k in range(1, spec.n_frequencies + 1):
                if spec.include_sin:
                    names.append(f"sin({k} {vname})")
                if spec.include_cos:
                    names.append(f"cos({k} {vname})")
        return tuple(names)
    if spec.kind == "custom":
        names = []
        for fn in spec.custom_functions:
            if fn.arity > n:
                raise ArityExceedsDimensionError(
                    f"function of arity {fn.arity} on {n} variables"
                )
            for combo in itertools.combinations(range(n), fn.arity):
                names.append(fn.name(*(variable_names[j] for j in combo)))
        return tuple(names)
    return tuple(variable_names)


def n_features(spec: LibrarySpec, n_variables: int) -> int:
    """Library size as a function of the spec and the state dimension."""
    return len(feature_names(
        spec, tuple(f"x{j}" for j in range(n_variables))))


def _resolve_names(variable_names, n: int) -> tuple:
    if variable_names is None or len(tuple(variable_names)) == 0:
        return tuple(f"x{j}" for j in range(n))
    names = tuple(variable_names)
    if len(names) != n:
        raise ValueError(f"{len(names)} names for {n} variables")
    return names
