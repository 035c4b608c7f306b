"""Command-line workflow: generate data, fit models, simulate, predict.

Subcommands mirror the library pipeline.  ``generate`` writes a benchmark
trajectory CSV, ``fit`` learns a model from a CSV and optionally saves it
as JSON, ``simulate`` integrates a saved model forward, and ``predict``
evaluates a saved model's derivatives against numerically computed ones.

Exit codes: 0 success, 1 runtime/pipeline error, 2 usage error.  All data
files are plain CSV with a header row; numbers are emitted with 17
significant digits so a written file reloads to the exact same floats.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from typing import Optional

import numpy as np

from . import dynamics, model
from .core import (
    CoefficientMatrix,
    MissingTimeError,
    ParseError,
    SparseDynError,
    Trajectory,
    UnserializableLibraryError,
    VersionMismatchError,
    validate_trajectory,
)
from .differentiation import DifferentiatorSpec
from .features import LibrarySpec
from .model import FittedModel, ModelConfig
from .optimize import Sr3Config, StlsqConfig

FORMAT_VERSION = 1
_FMT = "%.17g"

# Flags whose values may start with "-" (e.g. --x0 -8,8,27); argparse would
# otherwise read the value as an option, so main() folds them into --flag=value.
_VALUE_FLAGS = ("--x0", "--t0", "--t1")


class UsageError(Exception):
    """Bad flag combination detected after argument parsing (exit 2)."""


# --------------------------------------------------------------------------- #
# CSV input/output
# --------------------------------------------------------------------------- #

def load_csv(path: str, dt: Optional[float] = None) -> Trajectory:
    """Read a header-first CSV into a validated Trajectory.

    A column named "t" supplies the times; otherwise the first column
    does.  With ``dt`` given (for files that carry no time axis at all),
    every column is a state and the times are the uniform grid dt * k.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = [(reader.line_num, row) for row in reader
                if any(cell.strip() for cell in row)]
    if not rows:
        raise ParseError(f"{path}: empty file")

    header = [cell.strip() for cell in rows[0][1]]
    if all(_is_number(cell) for cell in header):
        raise ParseError(
            f"{path}: line 1: file starts with numbers; a header row naming "
            "the columns is required"
        )
    ncol = len(header)
    data = np.empty((len(rows) - 1, ncol))
    for r, (lineno, cells) in enumerate(rows[1:]):
        if len(cells) != ncol:
            raise ParseError(
                f"{path}: line {lineno}: expected {ncol} fields, "
                f"got {len(cells)}"
            )
        for c, cell in enumerate(cells):
            try:
                data[r, c] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: line {lineno}: {cell.strip()!r} is not a number"
                ) from None

    if "t" in header:
        if dt is not None:
            raise UsageError(
                f"--dt conflicts with the 't' column in {path}"
            )
        k = header.index("t")
        times = data[:, k]
        states = np.delete(data, k, axis=1)
        names = [h for i, h in enumerate(header) if i != k]
    elif dt is not None:
        times = dt * np.arange(data.shape[0])
        states = data
        names = header
    elif ncol >= 2:
        times = data[:, 0]
        states = data[:, 1:]
        names = header[1:]
    else:
        raise MissingTimeError(
            f"{path}: single column with no 't' header; pass --dt to supply "
            "a uniform time step"
        )
    return validate_trajectory(times, states, names)


def write_csv(path: Optional[str], times, values, names) -> None:
    """Write "t,<names>" rows with full float precision; path None = stdout."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    out = ["t," + ",".join(names)]
    for t, row in zip(times, values):
        out.append(",".join(_FMT % v for v in (t, *row)))
    _write_lines(path, out)


def _write_tidy(path: str, times, groups: dict, names) -> None:
    # Long-form emission for plotting: one (t, series, value) row per entry.
    out = ["t,series,value"]
    for label, values in groups.items():
        for t, row in zip(times, np.asarray(values, dtype=float)):
            for name, v in zip(names, row):
                out.append(f"{_FMT % t},{label}:{name},{_FMT % v}")
    _write_lines(path, out)


def _write_lines(path: Optional[str], lines) -> None:
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


# --------------------------------------------------------------------------- #
# Model document (JSON serialization)
# --------------------------------------------------------------------------- #

def save_model(m: FittedModel, path: str) -> None:
    """Write the model as a JSON document; floats round-trip bit-exactly."""
    doc = model_document(m)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def model_document(m: FittedModel) -> dict:
    """The JSON-ready dict form of a fitted model."""
    lib = m.config.library
    if lib.kind == "custom":
        raise UnserializableLibraryError(
            "custom library functions cannot be written to JSON"
        )
    diff = m.config.differentiator
    if not isinstance(diff, DifferentiatorSpec):
        raise UnserializableLibraryError(
            "external differentiator callables cannot be written to JSON"
        )
    opt = m.config.optimizer
    if isinstance(opt, StlsqConfig):
        opt_record = {"kind": "stlsq", **dataclasses.asdict(opt)}
    elif isinstance(opt, Sr3Config):
        opt_record = {"kind": "sr3", **dataclasses.asdict(opt)}
    else:
        raise UnserializableLibraryError(
            "external optimizer objects cannot be written to JSON"
        )
    lib_record = dataclasses.asdict(lib)
    del lib_record["custom_functions"]
    return {
        "format_version": FORMAT_VERSION,
        "library": lib_record,
        "differentiator": dataclasses.asdict(diff),
        "optimizer": opt_record,
        "coefficients": [list(row) for row in m.coefficients.values],
        "feature_names": list(m.feature_names),
        "variable_names": list(m.variable_names),
    }


def load_model(path: str) -> FittedModel:
    """Reconstruct a fitted model from its JSON document."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path}: model format_version {version!r} is not supported "
            f"(this build reads version {FORMAT_VERSION})"
        )
    opt_record = dict(doc["optimizer"])
    kind = opt_record.pop("kind")
    if kind == "stlsq":
        optimizer = StlsqConfig(**opt_record)
    elif kind == "sr3":
        optimizer = Sr3Config(**opt_record)
    else:
        raise ParseError(f"{path}: unknown optimizer kind {kind!r}")
    variable_names = tuple(doc["variable_names"])
    cfg = ModelConfig(
        library=LibrarySpec(**doc["library"]),
        differentiator=DifferentiatorSpec(**doc["differentiator"]),
        optimizer=optimizer,
        variable_names=variable_names,
    )
    return FittedModel(
        config=cfg,
        coefficients=CoefficientMatrix(
            np.array(doc["coefficients"], dtype=float)),
        feature_names=tuple(doc["feature_names"]),
        variable_names=variable_names,
    )


# --------------------------------------------------------------------------- #
# Subcommands
# --------------------------------------------------------------------------- #

def cmd_generate(args) -> int:
    system = dynamics.SYSTEMS[args.system]()
    x0 = _parse_vector(args.x0) if args.x0 else None
    traj = dynamics.generate(system, x0, _time_grid(args))
    write_csv(args.out, traj.times, traj.states, traj.variable_names)
    return 0


def cmd_fit(args) -> int:
    traj = load_csv(args.data, dt=args.dt)
    names = args.names.split(",") if args.names else None
    cfg = ModelConfig(
        library=_library_spec(args),
        differentiator=_differentiator_spec(args),
        optimizer=_optimizer_config(args),
        variable_names=names,
    )
    m = model.fit(traj, cfg)
    for line in model.equations(m, args.precision):
        print(line)
    if args.out:
        save_model(m, args.out)
    return 0


def cmd_simulate(args) -> int:
    m = load_model(args.model)
    x0 = _parse_vector(args.x0)
    times = _time_grid(args)
    sim = model.simulate(m, x0, times)
    write_csv(args.out, times, sim, m.variable_names)
    groups = {"simulated": sim}
    if args.reference_system:
        system = dynamics.SYSTEMS[args.reference_system]()
        ref = dynamics.generate(system, x0, times).states
        groups["reference"] = ref
        if args.reference_out:
            write_csv(args.reference_out, times, ref, m.variable_names)
    elif args.reference_out:
        raise UsageError("--reference-out requires --reference-system")
    if args.fig_out:
        _write_tidy(args.fig_out, times, groups, m.variable_names)
    return 0


def cmd_predict(args) -> int:
    m = load_model(args.model)
    traj = load_csv(args.data, dt=args.dt)
    predicted = model.predict(m, traj.states)
    write_csv(args.out, traj.times, predicted, m.variable_names)
    groups = {"predicted": predicted}
    if args.computed_out or args.fig_out:
        computed = model.differentiate(m, traj)
        groups["computed"] = computed
        if args.computed_out:
            write_csv(args.computed_out, traj.times, computed,
                      m.variable_names)
    if args.fig_out:
        _write_tidy(args.fig_out, traj.times, groups, m.variable_names)
    return 0


# --------------------------------------------------------------------------- #
# Flag plumbing
# --------------------------------------------------------------------------- #

def _library_spec(args) -> LibrarySpec:
    if args.library == "polynomial":
        return LibrarySpec(kind="polynomial", degree=args.degree,
                           include_bias=args.bias,
                           include_interaction=args.interaction)
    if args.library == "fourier":
        return LibrarySpec(kind="fourier", n_frequencies=args.n_frequencies)
    return LibrarySpec(kind="identity")


def _differentiator_spec(args) -> DifferentiatorSpec:
    kind = ("finite_difference" if args.diff == "fd"
            else "smoothed_finite_difference")
    kwargs = {"kind": kind}
    for key, value in (("order", args.order), ("window", args.window),
                       ("smooth_degree", args.smooth_degree)):
        if value is not None:
            kwargs[key] = value
    return DifferentiatorSpec(**kwargs)


def _optimizer_config(args):
    if args.optimizer == "stlsq":
        fields = (("threshold", args.threshold), ("alpha", args.alpha),
                  ("max_iter", args.max_iter))
        cls = StlsqConfig
    else:
        fields = (("threshold", args.threshold), ("nu", args.nu),
                  ("tol", args.tol), ("thresholder", args.thresholder),
                  ("max_iter", args.max_iter))
        cls = Sr3Config
    kwargs = {key: value for key, value in fields if value is not None}
    kwargs["unbias"] = args.unbias
    return cls(**kwargs)


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",")])
    except ValueError:
        raise UsageError(
            f"{text!r} is not a comma-separated list of numbers"
        ) from None


def _time_grid(args) -> np.ndarray:
    if args.t1 <= args.t0:
        raise UsageError("--t1 must be greater than --t0")
    if args.dt <= 0:
        raise UsageError("--dt must be positive")
    return np.arange(args.t0, args.t1, args.dt)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsedyn",
        description="Discover sparse governing equations from time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="integrate a benchmark system to CSV")
    g.add_argument("--system", choices=sorted(dynamics.SYSTEMS),
                   default="lorenz")
    g.add_argument("--x0", help="comma-separated initial state "
                               "(default: the system's canonical one)")
    g.add_argument("--t0", type=float, default=0.0)
    g.add_argument("--t1", type=float, required=True,
                   help="end time (exclusive)")
    g.add_argument("--dt", type=float, required=True)
    g.add_argument("--out", help="output CSV (default: stdout)")
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("fit", help="fit a sparse model to a trajectory CSV")
    f.add_argument("data", help="input CSV with a header row")
    f.add_argument("--out", help="write the fitted model JSON here")
    f.add_argument("--dt", type=float,
                   help="uniform time step for files without a 't' column")
    f.add_argument("--library", choices=["polynomial", "fourier", "identity"],
                   default="polynomial")
    f.add_argument("--degree", type=int, default=2)
    f.add_argument("--bias", dest="bias", action="store_true", default=True,
                   help="include the constant feature (default)")
    f.add_argument("--no-bias", dest="bias", action="store_false")
    f.add_argument("--interaction", dest="interaction", action="store_true",
                   default=True, help="include cross terms (default)")
    f.add_argument("--no-interaction", dest="interaction",
                   action="store_false")
    f.add_argument("--n-frequencies", type=int, default=1)
    f.add_argument("--optimizer", choices=["stlsq", "sr3"], default="stlsq")
    f.add_argument("--threshold", type=float)
    f.add_argument("--alpha", type=float, help="ridge penalty (stlsq)")
    f.add_argument("--max-iter", type=int)
    f.add_argument("--no-unbias", dest="unbias", action="store_false",
                   default=True,
                   help="skip the least-squares refit on the found support")
    f.add_argument("--nu", type=float, help="relaxation weight (sr3)")
    f.add_argument("--tol", type=float, help="convergence tolerance (sr3)")
    f.add_argument("--thresholder", choices=["L0", "L1", "CAD"])
    f.add_argument("--diff", choices=["fd", "smoothed"], default="fd")
    f.add_argument("--order", type=int, help="finite difference order (1 or 2)")
    f.add_argument("--window", type=int, help="smoothing window length (odd)")
    f.add_argument("--smooth-degree", type=int,
                   help="smoothing polynomial degree")
    f.add_argument("--names", help="comma-separated variable names")
    f.add_argument("--precision", type=int, default=3,
                   help="decimals in printed equations")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("simulate", help="integrate a saved model forward")
    s.add_argument("model", help="model JSON from `fit --out`")
    s.add_argument("--x0", required=True,
                   help="comma-separated initial state")
    s.add_argument("--t0", type=float, default=0.0)
    s.add_argument("--t1", type=float, required=True)
    s.add_argument("--dt", type=float, required=True)
    s.add_argument("--out", help="simulated trajectory CSV (default: stdout)")
    s.add_argument("--reference-system", choices=sorted(dynamics.SYSTEMS),
                   help="also integrate this true system from the same x0")
    s.add_argument("--reference-out",
                   help="reference trajectory CSV (needs --reference-system)")
    s.add_argument("--fig-out",
                   help="long-form CSV (t,series,value) of all series")
    s.set_defaults(func=cmd_simulate)

    p = sub.add_parser("predict",
                       help="predicted vs numerically computed derivatives")
    p.add_argument("model", help="model JSON from `fit --out`")
    p.add_argument("data", help="trajectory CSV to evaluate on")
    p.add_argument("--dt", type=float,
                   help="uniform time step for files without a 't' column")
    p.add_argument("--out", help="predicted derivatives CSV (default: stdout)")
    p.add_argument("--computed-out",
                   help="numerically differentiated derivatives CSV")
    p.add_argument("--fig-out",
                   help="long-form CSV (t,series,value) of both series")
    p.set_defaults(func=cmd_predict)
    return parser


def _fold_value_flags(argv) -> list:
    # Rewrite ["--x0", "-8,8,27"] as ["--x0=-8,8,27"] so argparse does not
    # mistake the negative value for an option string.
    folded = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            folded.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            folded.append(tok)
            i += 1
    return folded


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_fold_value_flags(argv))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SparseDynError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
