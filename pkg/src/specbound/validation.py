"""Monte Carlo checks of the bounds against simulated processes.

A scenario is a plain dict (see :data:`SCENARIO_DEFAULTS`). Trials draw
from child seeds of one ``SeedSequence`` and are merged in trial order,
so the report depends only on the scenario, whatever the worker count.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ._newton import SolverOptions
from .bounds import (
    _jsonable,
    finite_sample_tv_upper_bound,
    kl_lower_bound,
    log_inequality_holds,
    noise_tv_upper_bound,
)
from .errors import SolverError, ValidationError
from .estimator import EstimatorProblem, solve_dual
from .maxent import LagBox
from .sampling import (
    ProcessModel,
    SampleSeries,
    assess_box,
    estimate_lags,
    simulate,
    wilson_interval,
)
from .trig import AngularGrid, TrigPolynomial, kl_divergence, toeplitz_positive_definite, tv_distance

__all__ = ["SCHEMA", "SCENARIO_DEFAULTS", "QUANTILES", "normalize_scenario", "run_scenario"]

SCHEMA = "specbound-validation/1"
QUANTILES = (0.5, 0.9, 0.95, 0.99, 1.0)
SCENARIO_KINDS = ("noise", "finite_sample", "kl_lower")

SCENARIO_DEFAULTS = {
    "kind": "noise",
    "model": {"kind": "ar", "ar": [0.5], "ma": [], "sigma2": 1.0},
    "noise_sigma2": 0.0,
    "order": 2,
    "N": 100000,
    "trials": 500,
    "grid_size": 2048,
    "delta": 0.05,
    "method": "marginal",
    "prior": [1.0],
    "allowance": 0.01,
    "slack": 1e-9,
    "seed": 0,
    "workers": 1,
    "tol": 1e-10,
    "max_iterations": 200,
}

# desk-scale caps
MAX_TRIALS = 100_000
MAX_SAMPLES = 10_000_000
MAX_GRID = 1 << 16
MAX_ORDER = 64


def model_from_dict(d) -> ProcessModel:
    unknown = set(d) - {"kind", "ar", "ma", "sigma2"}
    if unknown:
        raise ValidationError(f"unknown model keys: {sorted(unknown)}")
    return ProcessModel(d.get("kind", "white"), tuple(d.get("ar", ())), tuple(d.get("ma", ())),
                        float(d.get("sigma2", 1.0)))


def normalize_scenario(scenario) -> dict:
    """Fill defaults, reject unknown keys and enforce caps."""
    unknown = set(scenario) - set(SCENARIO_DEFAULTS)
    if unknown:
        raise ValidationError(f"unknown scenario keys: {sorted(unknown)}")
    s = {**SCENARIO_DEFAULTS, **scenario}
    if s["kind"] not in SCENARIO_KINDS:
        raise ValidationError(f"scenario kind must be one of {SCENARIO_KINDS}")
    s["model"] = model_from_dict(s["model"]).to_dict()
    for key, low, top in (("order", 0, MAX_ORDER), ("N", 0, MAX_SAMPLES), ("trials", 1, MAX_TRIALS),
                          ("grid_size", 8, MAX_GRID), ("workers", 1, 64)):
        v = s[key]
        if not isinstance(v, int) or isinstance(v, bool) or not low <= v <= top:
            raise ValidationError(f"{key} must be an integer in [{low}, {top}]")
    if 0 < s["N"] <= s["order"]:
        raise ValidationError("N must exceed the order (or be 0 for exact lags)")
    if s["N"] == 0 and s["kind"] != "noise":
        raise ValidationError("exact lags (N = 0) only make sense for the noise scenario")
    if not s["noise_sigma2"] >= 0:
        raise ValidationError("noise_sigma2 must be nonnegative")
    if not s["slack"] >= 0:
        raise ValidationError("slack must be nonnegative")
    if not 0 <= s["allowance"] <= 1:
        raise ValidationError("allowance must lie in [0, 1]")
    if not s["delta"] > 0:
        raise ValidationError("delta must be positive")
    if not isinstance(s["seed"], int) or s["seed"] < 0:
        raise ValidationError("seed must be a nonnegative integer")
    s["prior"] = [float(x) for x in s["prior"]]
    return s


def _trial(args):
    s, seed = args
    model = model_from_dict(s["model"])
    if s["N"] == 0:
        # population lags: only the noise is at work
        r = model.lags(s["order"])
        r[0] += s["noise_sigma2"]
    else:
        clean_seed, noise_seed = seed.spawn(2)
        y = simulate(model, s["N"] + 1, clean_seed).values
        if s["kind"] == "noise" and s["noise_sigma2"] > 0:
            y = y + simulate(ProcessModel.white(s["noise_sigma2"]), y.size, noise_seed).values
        r = estimate_lags(SampleSeries(y), s["order"])
    if not toeplitz_positive_definite(r):
        return {"status": "not_pd"}
    if s["kind"] != "noise" and not LagBox(*s["_box"]).contains(r):
        return {"status": "outside_box"}
    grid = AngularGrid(s["grid_size"])
    opts = SolverOptions(tol=s["tol"], max_iterations=s["max_iterations"], grid_size=s["grid_size"])
    try:
        est = solve_dual(EstimatorProblem(r, TrigPolynomial(s["prior"]), grid), opts).on_grid(grid)
    except SolverError:
        return {"status": "solver_failure"}
    truth = model.on_grid(grid)
    metric = kl_divergence(truth, est) if s["kind"] == "kl_lower" else tv_distance(est, truth)
    return {"status": "ok", "metric": metric, "log_ok": log_inequality_holds(est)}


def _bound(s):
    model = model_from_dict(s["model"])
    grid = AngularGrid(s["grid_size"])
    opts = SolverOptions(tol=s["tol"], max_iterations=s["max_iterations"], grid_size=s["grid_size"])
    clean = model.lags(s["order"])
    if s["kind"] == "noise":
        noise = np.zeros_like(clean)
        noise[0] = s["noise_sigma2"]
        return noise_tv_upper_bound(clean, noise, s["prior"], grid, opts), None
    box = LagBox.around(clean, s["delta"])
    prob = assess_box(model, box, s["N"], s["method"])
    if s["kind"] == "finite_sample":
        return finite_sample_tv_upper_bound(box, clean, grid, opts, prob), box
    return kl_lower_bound(model.on_grid(grid), box, prob=prob), box


def _quantiles(x):
    if not x:
        return {str(q): None for q in QUANTILES}
    return {str(q): float(np.quantile(x, q)) for q in QUANTILES}


def run_scenario(scenario) -> dict:
    """Run all trials of a scenario and summarise them.

    Returns
    -------
    dict
        JSON-ready validation report. ``passed`` is true iff the violation
        rate among evaluated trials does not exceed ``allowance``. A trial
        violates the bound when it misses it by more than ``slack``.
    """
    s = normalize_scenario(scenario)
    report, box = _bound(s)
    bound = report.bound_value
    work = dict(s)
    if box is not None:
        work["_box"] = (box.lower, box.upper)
    seeds = np.random.SeedSequence(s["seed"]).spawn(s["trials"])
    jobs = [(work, sq) for sq in seeds]
    if s["workers"] > 1:
        with ProcessPoolExecutor(s["workers"]) as pool:
            results = list(pool.map(_trial, jobs, chunksize=max(1, len(jobs) // (4 * s["workers"]))))
    else:
        results = [_trial(j) for j in jobs]

    skipped = {"not_pd": 0, "outside_box": 0, "solver_failure": 0}
    values, log_failures = [], 0
    for res in results:
        if res["status"] != "ok":
            skipped[res["status"]] += 1
            continue
        values.append(res["metric"])
        log_failures += not res["log_ok"]
    evaluated = len(values)
    v = np.array(values)
    vacuous = s["kind"] == "kl_lower" and bound <= 0
    if vacuous:
        violations = 0
    elif s["kind"] == "kl_lower":
        violations = int(np.sum(v < bound - s["slack"]))
    else:
        violations = int(np.sum(v > bound + s["slack"]))
    rate = violations / evaluated if evaluated else 0.0

    if box is None:
        hits, level = evaluated - violations, report.probability_level
        coverage_of = "trials satisfying the bound"
    else:
        hits, level = s["trials"] - skipped["outside_box"] - skipped["not_pd"], report.probability_level
        coverage_of = "trials with sample lags in the box"
    ci = wilson_interval(hits, s["trials"])
    metric = "kl(true||estimate)" if s["kind"] == "kl_lower" else "tv(estimate, true)"
    out = {
        "schema": SCHEMA,
        "scenario": {k: v for k, v in s.items() if k != "workers"},
        "metric": metric,
        "bound_value": bound,
        "bound_vacuous": bool(vacuous),
        "bound_report": report.to_dict(),
        "trials": s["trials"],
        "evaluated": evaluated,
        "skipped": skipped,
        "quantiles": _quantiles(values),
        "max_metric": float(v.max()) if evaluated else None,
        "violations": violations,
        "violation_rate": rate,
        "allowance": s["allowance"],
        "passed": bool(rate <= s["allowance"]),
        "coverage": {
            "of": coverage_of,
            "empirical": hits / s["trials"],
            "ci95": list(ci),
            "probability_level": level,
        },
        "log_inequality_failures": log_failures,
    }
    if vacuous:
        out["notes"] = ["bound is vacuous (<= 0); no trial counts as a violation"]
    return _jsonable(out)
