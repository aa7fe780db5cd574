"""Command-line entry point: ``specbound <command> --config <file> ...``.

Commands write their results into ``--out`` (default ``specbound-out``):

=========  ==============================================
estimate   ``density.csv`` and ``summary.json``
maxent     ``density.csv`` and ``summary.json``
bounds     ``report.json``
simulate   ``series.csv``
validate   ``validation.json``
=========  ==============================================

Exit codes are 0 on success, 2 for invalid input, 3 when a solver fails
and 4 when a validation run exceeds its violation allowance.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._newton import SolverOptions
from .bounds import (
    CONVENTIONS,
    finite_sample_tv_upper_bound,
    kl_lower_bound,
    noise_tv_upper_bound,
)
from .errors import SolverError, SpecboundError, ValidationError
from .estimator import EstimatorProblem, solve_dual
from .maxent import LagBox, solve_maxent
from .multivariate import (
    MultiBasis,
    MultiGrid,
    MultiGridDensity,
    multi_assess_box,
    multi_compute_moments,
    multi_entropy,
    multi_estimate_moments,
    multi_finite_sample_bound,
    multi_kl_lower_bound,
    multi_noise_tv_bound,
    multi_simulate,
    multi_solve_dual,
    multi_solve_maxent,
    multi_true_moments,
)
from .sampling import ProcessModel, SampleSeries, add_noise, assess_box, estimate_lags, simulate
from .trig import AngularGrid, TrigPolynomial, compute_lags, entropy
from .validation import SCENARIO_DEFAULTS, model_from_dict, run_scenario

__all__ = [
    "main",
    "cmd_estimate",
    "cmd_maxent",
    "cmd_bounds",
    "cmd_simulate",
    "cmd_validate",
    "read_density_csv",
    "read_lags_csv",
    "load_config",
]

SUMMARY_SCHEMA = "specbound-summary/1"
EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_BREACH = 0, 2, 3, 4

MAX_GRID = 1 << 16
MAX_ORDER = 64
MAX_LENGTH = 10_000_000

_SOLVER_KEYS = {"grid_size", "tol", "max_iterations", "step_tol"}
_COMMON = {"out", "seed"}
ALLOWED_KEYS = {
    "estimate": _COMMON | _SOLVER_KEYS | {"lags", "input", "input_kind", "order", "prior", "basis"},
    "maxent": _COMMON | _SOLVER_KEYS | {"lags", "input", "input_kind", "order", "basis"},
    "bounds": _COMMON | _SOLVER_KEYS | {"kind", "model", "models", "clean_lags", "noise_lags",
                                         "noise_sigma2", "prior", "box", "delta", "N", "method",
                                         "basis", "order"},
    "simulate": _COMMON | {"model", "models", "length", "noise_sigma2"},
    "validate": _COMMON | set(SCENARIO_DEFAULTS),
}

_GRID_NOTE = "theta_j = -pi + 2*pi*j/M, j = 0..M-1, quadrature weight 2*pi/M"
_MULTI_NORM_NOTE = ("r_alpha = (2pi)^-d * integral prod_i cos(alpha_i theta_i) Phi dtheta, "
                    "paired with weight 2^(number of nonzero alpha_i)")
_NORM_NOTE = "r_k = (1/2pi) * integral cos(k theta) Phi dtheta, so Phi = r_0 + 2 sum_k r_k cos(k theta)"


# -- configuration ------------------------------------------------------------

def load_config(path) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValidationError("config file must hold a JSON object")
    return cfg


def _check_keys(command, cfg):
    unknown = set(cfg) - ALLOWED_KEYS[command]
    if unknown:
        raise ValidationError(f"unknown config keys for {command}: {sorted(unknown)}")


def _int(cfg, key, default, low, high):
    v = cfg.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool) or not low <= v <= high:
        raise ValidationError(f"{key} must be an integer in [{low}, {high}]")
    return v


def _options(cfg) -> SolverOptions:
    base = SolverOptions()
    return SolverOptions(
        tol=float(cfg.get("tol", base.tol)),
        max_iterations=_int(cfg, "max_iterations", base.max_iterations, 1, 10_000),
        grid_size=_int(cfg, "grid_size", base.grid_size, 8, MAX_GRID),
        step_tol=float(cfg.get("step_tol", base.step_tol)),
    )


def _multi_grid(cfg, basis) -> MultiGrid:
    size = _int(cfg, "grid_size", 128, 8, 256)
    return MultiGrid((size,) * basis.dimension)


def _basis(cfg):
    raw = cfg.get("basis")
    return None if raw is None else MultiBasis(raw)


def _out_dir(cfg) -> Path:
    out = Path(cfg.get("out", "specbound-out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- input parsers ------------------------------------------------------------

def _parse_numbers(text: str) -> list[float]:
    values = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            values.extend(float(x) for x in line.replace(";", ",").split(",") if x.strip())
    return values


def read_lags_csv(path) -> np.ndarray:
    """Lags from a CSV file, one or more per line; ``#`` starts a comment."""
    values = _parse_numbers(Path(path).read_text(encoding="utf-8"))
    if not values:
        raise ValidationError(f"no lags found in {path}")
    return np.array(values)


def read_density_csv(path):
    """Columns of a density CSV written by this tool (``theta ..., phi``)."""
    rows, header = [], None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#") or not line.strip():
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append([float(x) for x in line.split(",")])
    data = np.array(rows)
    return {name: data[:, i] for i, name in enumerate(header)}


def _write_density_csv(path, columns, title, grid_desc, norm=_NORM_NOTE):
    buf = io.StringIO()
    buf.write(f"# specbound {title}\n# grid: {grid_desc}\n# normalization: {norm}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(columns))
    for row in zip(*columns.values()):
        w.writerow([repr(float(x)) for x in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n",
                          encoding="utf-8")


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")


def _input_moments(cfg, basis=None):
    """Lags (or basis moments) from inline values, a lags CSV or raw samples."""
    if "lags" in cfg and "input" in cfg:
        raise ValidationError("give either lags or input, not both")
    if "lags" in cfg:
        lags = cfg["lags"]
        if isinstance(lags, str):
            lags = _parse_numbers(lags)
        return np.asarray(lags, dtype=float), "inline"
    if "input" not in cfg:
        raise ValidationError("no input: set lags (inline) or input (CSV path)")
    kind = cfg.get("input_kind", "samples")
    if kind == "lags":
        return read_lags_csv(cfg["input"]), "lags-csv"
    if kind != "samples":
        raise ValidationError("input_kind must be 'samples' or 'lags'")
    series = SampleSeries.from_csv(Path(cfg["input"]).read_text(encoding="utf-8"))
    if basis is not None:
        return multi_estimate_moments(series, basis), "samples"
    if series.values.ndim != 1:
        raise ValidationError("univariate estimation needs a single-column series")
    if "order" not in cfg:
        raise ValidationError("order is required when estimating lags from samples")
    return estimate_lags(series, _int(cfg, "order", 0, 0, MAX_ORDER)), "samples"


def _check_order(lags):
    if lags.size - 1 > MAX_ORDER:
        raise ValidationError(f"order {lags.size - 1} exceeds the cap {MAX_ORDER}")


# -- commands -----------------------------------------------------------------

def _summary(command, source, **fields):
    return {"schema": SUMMARY_SCHEMA, "command": command, "version": __version__,
            "conventions": dict(CONVENTIONS), "lags_source": source, **fields}


def _run_density(command, cfg):
    _check_keys(command, cfg)
    opts = _options(cfg)
    basis = _basis(cfg)
    r, source = _input_moments(cfg, basis)
    out = _out_dir(cfg)
    if basis is not None:
        return _run_multi_density(command, cfg, basis, r, source, opts, out)
    _check_order(r)
    grid = AngularGrid(opts.grid_size)
    if command == "estimate":
        prior = TrigPolynomial(cfg.get("prior", [1.0]))
        dens = solve_dual(EstimatorProblem(r, prior, grid), opts)
        coeffs = {"prior": list(prior.coeffs), "denominator": list(dens.denominator.coeffs)}
        title = "rational estimate P/Q"
    else:
        dens = solve_maxent(r, grid, opts)
        coeffs = {"lambdas": [float(x) for x in dens.lambdas]}
        title = "maximum-entropy density exp(-1 - lam_0 - 2 sum lam_k cos k theta)"
    g = dens.on_grid(grid)
    residual = float(np.max(np.abs(compute_lags(g, r.size - 1) - r)))
    _write_density_csv(out / "density.csv", {"theta": grid.nodes, "phi": g.values}, title,
                       f"{_GRID_NOTE}, M={grid.size}")
    _write_json(out / "summary.json", _summary(
        command, source, order=int(r.size - 1), lags=[float(x) for x in r], grid_size=grid.size,
        moment_residual=residual, iterations=int(dens.iterations),
        gradient_norm=float(dens.gradient_norm), hessian_pd=bool(all(dens.hessian_pd)),
        entropy=_finite(entropy(g)), density_csv="density.csv", **coeffs))
    print(f"wrote {out / 'density.csv'} and {out / 'summary.json'}")
    return EXIT_OK


def _run_multi_density(command, cfg, basis, r, source, opts, out):
    grid = _multi_grid(cfg, basis)
    if command == "estimate":
        dens = multi_solve_dual(r, cfg.get("prior"), basis, grid, opts)
        coeffs = {"prior": [float(x) for x in dens.numerator],
                  "denominator": [float(x) for x in dens.denominator]}
    else:
        dens = multi_solve_maxent(r, basis, grid, opts)
        coeffs = {"lambdas": [float(x) for x in dens.lambdas]}
    g = dens.on_grid(grid)
    residual = float(np.max(np.abs(multi_compute_moments(g, basis) - r)))
    columns = {f"theta{i + 1}": m.ravel() for i, m in enumerate(grid.mesh())}
    _write_density_csv(out / "density.csv", {**columns, "phi": g.flat},
                       f"{command} on the product grid",
                       f"{_GRID_NOTE} on each axis, sizes={list(grid.sizes)}", _MULTI_NORM_NOTE)
    _write_json(out / "summary.json", _summary(
        command, source, order=basis.order, lags=[float(x) for x in r],
        basis=[list(a) for a in basis.exponents], grid_size=grid.sizes[0],
        moment_residual=residual, iterations=int(dens.iterations),
        gradient_norm=float(dens.gradient_norm), hessian_pd=bool(all(dens.hessian_pd)),
        entropy=_finite(multi_entropy(g)), density_csv="density.csv", **coeffs))
    print(f"wrote {out / 'density.csv'} and {out / 'summary.json'}")
    return EXIT_OK


def _box_for(cfg, clean):
    if "box" in cfg:
        b = cfg["box"]
        if not isinstance(b, dict) or set(b) != {"lower", "upper"}:
            raise ValidationError("box must be an object with lower and upper")
        box = LagBox(b["lower"], b["upper"])
        if box.order != clean.size - 1:
            raise ValidationError("box and lag window differ in length")
        return box
    return LagBox.around(clean, float(cfg.get("delta", 0.05)))


def _bounds_univariate(cfg, kind, opts):
    grid = AngularGrid(opts.grid_size)
    model = model_from_dict(cfg["model"]) if "model" in cfg else None
    order = cfg.get("order")
    if "clean_lags" in cfg:
        clean = np.asarray(cfg["clean_lags"], dtype=float)
    elif model is not None:
        clean = model.lags(_int(cfg, "order", 2, 0, MAX_ORDER))
    else:
        raise ValidationError("bounds need clean_lags or a model")
    _check_order(clean)
    if order is not None and order != clean.size - 1:
        raise ValidationError("order disagrees with the clean lag window")
    if kind == "noise":
        if "noise_lags" in cfg:
            noise = np.asarray(cfg["noise_lags"], dtype=float)
        else:
            noise = np.zeros_like(clean)
            noise[0] = float(cfg.get("noise_sigma2", 0.0))
        return noise_tv_upper_bound(clean, noise, cfg.get("prior"), grid, opts)
    box = _box_for(cfg, clean)
    prob = None
    if model is not None and "N" in cfg:
        prob = assess_box(model, box, _int(cfg, "N", 0, 1, MAX_LENGTH), cfg.get("method", "marginal"))
    if kind == "finite_sample":
        return finite_sample_tv_upper_bound(box, clean, grid, opts, prob)
    if model is None:
        raise ValidationError("the KL lower bound needs the true model")
    return kl_lower_bound(model.on_grid(grid), box, clean.size - 1, prob)


def _bounds_multi(cfg, kind, basis, opts):
    grid = _multi_grid(cfg, basis)
    models = [model_from_dict(m) for m in cfg["models"]] if "models" in cfg else None
    if models is not None and len(models) != basis.dimension:
        raise ValidationError(f"need {basis.dimension} component models")
    if "clean_lags" in cfg:
        clean = np.asarray(cfg["clean_lags"], dtype=float)
    elif models is not None:
        clean = multi_true_moments(models, basis)
    else:
        raise ValidationError("bounds need clean_lags or models")
    if kind == "noise":
        if "noise_lags" not in cfg:
            raise ValidationError("multivariate noise bounds need explicit noise_lags")
        return multi_noise_tv_bound(clean, cfg["noise_lags"], cfg.get("prior"), basis, grid, opts)
    box = _box_for(cfg, clean)
    prob = None
    if models is not None and "N" in cfg:
        prob = multi_assess_box(models, box, basis, _int(cfg, "N", 0, 1, MAX_LENGTH))
    if kind == "finite_sample":
        return multi_finite_sample_bound(box, clean, basis, grid, opts, prob)
    if models is None:
        raise ValidationError("the KL lower bound needs the true component models")
    truth = _product_density(models, grid)
    return multi_kl_lower_bound(truth, box, basis, prob)


def _product_density(models, grid):
    factors = [m.spectral_density(a) for m, a in zip(models, grid.axes())]
    vals = factors[0]
    for f in factors[1:]:
        vals = np.multiply.outer(vals, f)
    return MultiGridDensity(grid, vals)


def cmd_estimate(config, json_errors=False) -> int:
    """Rational estimate ``P/Q`` from lags or samples."""
    return _guard(lambda: _run_density("estimate", config), json_errors)


def cmd_maxent(config, json_errors=False) -> int:
    """Maximum-entropy density matching the lags."""
    return _guard(lambda: _run_density("maxent", config), json_errors)


def cmd_bounds(config, json_errors=False) -> int:
    """Bound report selected by ``kind`` (``noise``, ``finite_sample`` or ``kl_lower``)."""
    def run():
        _check_keys("bounds", config)
        kind = config.get("kind", "noise")
        if kind not in ("noise", "finite_sample", "kl_lower"):
            raise ValidationError("kind must be noise, finite_sample or kl_lower")
        opts = _options(config)
        basis = _basis(config)
        if basis is None:
            report = _bounds_univariate(config, kind, opts)
        else:
            report = _bounds_multi(config, kind, basis, opts)
        out = _out_dir(config)
        _write_json(out / "report.json", report.to_dict())
        print(f"{report.kind}: bound_value={report.bound_value!r}; wrote {out / 'report.json'}")
        return EXIT_OK

    return _guard(run, json_errors)


def cmd_simulate(config, json_errors=False) -> int:
    """Seed-pinned sample path of one model (or two independent ones) as CSV."""
    def run():
        _check_keys("simulate", config)
        length = _int(config, "length", 1000, 2, MAX_LENGTH)
        seed = _int(config, "seed", 0, 0, 2**64 - 1)
        if "models" in config:
            models = [model_from_dict(m) for m in config["models"]]
            if not 1 <= len(models) <= 2:
                raise ValidationError("one or two component models are supported")
            series = multi_simulate(models, length, seed)
        else:
            series = simulate(model_from_dict(config.get("model", {"kind": "white"})), length, seed)
        s2 = float(config.get("noise_sigma2", 0.0))
        if s2 < 0:
            raise ValidationError("noise_sigma2 must be nonnegative")
        if s2 > 0:
            if series.values.ndim != 1:
                raise ValidationError("additive noise is supported for single series only")
            series = add_noise(series, ProcessModel.white(s2), np.random.SeedSequence(seed).spawn(1)[0])
        out = _out_dir(config)
        (out / "series.csv").write_text(series.to_csv(), encoding="utf-8")
        print(f"wrote {length} samples to {out / 'series.csv'}")
        return EXIT_OK

    return _guard(run, json_errors)


def cmd_validate(config, json_errors=False) -> int:
    """Monte Carlo check of a bound; exit 4 when violations exceed the allowance."""
    def run():
        _check_keys("validate", config)
        scenario = {k: v for k, v in config.items() if k != "out"}
        result = run_scenario(scenario)
        out = _out_dir(config)
        _write_json(out / "validation.json", result)
        verdict = "within" if result["passed"] else "EXCEEDS"
        print(f"{result['violations']}/{result['evaluated']} violations, {verdict} allowance "
              f"{result['allowance']}; wrote {out / 'validation.json'}")
        return EXIT_OK if result["passed"] else EXIT_BREACH

    return _guard(run, json_errors)


def _guard(run, json_errors):
    try:
        return run()
    except (SolverError, FloatingPointError) as exc:
        payload = _error_payload(exc, EXIT_SOLVER)
    except (SpecboundError, ValueError, TypeError, KeyError, OSError) as exc:
        payload = _error_payload(exc, EXIT_VALIDATION)
    return _report_error(payload, json_errors)


def _error_payload(exc, code):
    message = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
    return {"error": type(exc).__name__, "message": str(message), "exit_code": code}


def _report_error(payload, json_errors):
    if json_errors:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"specbound: {payload['error']}: {payload['message']}", file=sys.stderr)
    return payload["exit_code"]


COMMANDS = {
    "estimate": cmd_estimate,
    "maxent": cmd_maxent,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specbound",
                                description="Lag-matching spectral estimates and their error bounds.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--lags", help="comma-separated lags r_0,...,r_n (overrides the config)")
    p.add_argument("--input", help="CSV of samples, or of lags with input_kind=lags")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    p.add_argument("--json-errors", action="store_true", help="print errors as one JSON object")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    def config():
        cfg = load_config(args.config)
        if args.lags is not None:
            cfg["lags"] = _parse_numbers(args.lags)
        if args.input is not None:
            cfg["input"] = args.input
        if args.out is not None:
            cfg["out"] = args.out
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ValidationError("seed must be an unsigned 64-bit integer")
            cfg["seed"] = args.seed
        return cfg

    holder = {}

    def load():
        holder["cfg"] = config()
        return EXIT_OK

    code = _guard(load, args.json_errors)
    if code:
        return code
    return COMMANDS[args.command](holder["cfg"], args.json_errors)


if __name__ == "__main__":
    sys.exit(main())
