"""Error bounds for lag-matching spectral estimates, packaged as reports.

Three constructions are provided:

* :func:`noise_tv_upper_bound` -- total-variation bound when the lags are
  corrupted by an independent additive noise process;
* :func:`finite_sample_tv_upper_bound` -- total-variation bound when the
  lags come from a finite sample and are only known to lie in a box;
* :func:`kl_lower_bound` -- a KL lower bound from the cosine expansion of
  a known true density and the upper edges of a lag box.

Each returns a :class:`BoundReport` whose ``bound_value`` is recomputed
from its stored terms.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._newton import SolverOptions
from .errors import NegativeKL, NegativeMu, NonPositiveDensity
from .estimator import EstimatorProblem, solve_dual
from .maxent import LagBox, solve_maxent, solve_maxent_box
from .trig import (
    AngularGrid,
    CovarianceSequence,
    GridDensity,
    TrigPolynomial,
    compute_lags,
    entropy,
    pairing_weights,
    tv_distance,
)

__all__ = [
    "SCHEMA",
    "Term",
    "BoundReport",
    "tv_from_kl",
    "noise_tv_upper_bound",
    "finite_sample_tv_upper_bound",
    "kl_lower_bound",
    "log_inequality_holds",
]

SCHEMA = "specbound-report/1"
KINDS = ("NoiseTVUpper", "FiniteSampleTVUpper", "KLLower")

CONVENTIONS = {
    "lags": "r_k = (1/2pi) * integral cos(k theta) Phi(theta) dtheta",
    "expansion": "Phi = r_0 + 2 * sum_k r_k cos(k theta)",
    "entropy": "H[Phi] = -integral Phi log Phi dtheta (0 log 0 = 0)",
    "tv": "V(p, q) = sup_theta |integral_{-pi}^{theta} (p - q)|",
    "kl": "KL(p || q) = integral p log(p/q) dtheta, densities unnormalized",
    "maxent": "Phi = exp(-1 - lam_0 - 2 * sum_k lam_k cos(k theta))",
}

TV_KL_CAVEAT = (
    "KL-to-TV inequality is stated for probability densities; spectral "
    "densities here carry mass 2*pi*r_0"
)

# tolerance on entropy gaps that should be nonnegative
_GAP_TOL = 1e-8


@dataclass(frozen=True)
class Term:
    """One named quantity of a bound.

    ``role`` is ``"+"`` or ``"-"`` for terms entering the bound and
    ``"info"`` for auxiliary values kept for auditing.
    """

    name: str
    value: float
    formula: str
    role: str = "+"

    def to_dict(self):
        return {"name": self.name, "value": _num(self.value), "formula": self.formula, "role": self.role}


def _combine(terms) -> float:
    total = 0.0
    for t in terms:
        if t.role == "+":
            total = total + t.value
        elif t.role == "-":
            total = total - t.value
    return total


@dataclass(frozen=True)
class BoundReport:
    kind: str
    terms: tuple
    probability_level: float = 1.0
    caveats: tuple = ()
    probability: dict | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown report kind {self.kind!r}")
        if not 0.0 <= self.probability_level <= 1.0:
            raise ValueError("probability_level must lie in [0, 1]")

    @property
    def bound_value(self) -> float:
        return _combine(self.terms)

    def recompute(self) -> float:
        return _combine(self.terms)

    def term(self, name: str) -> float:
        for t in self.terms:
            if t.name == name:
                return t.value
        raise KeyError(name)

    @property
    def vacuous(self) -> bool:
        return self.kind == "KLLower" and self.bound_value <= 0.0

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "kind": self.kind,
            "bound_value": _num(self.bound_value),
            "probability_level": self.probability_level,
            "terms": [t.to_dict() for t in self.terms],
            "caveats": list(self.caveats),
            "conventions": dict(CONVENTIONS),
            "probability": _jsonable(self.probability),
            "details": _jsonable(self.details),
        }

    def to_json(self, **kw) -> str:
        kw.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d) -> "BoundReport":
        terms = tuple(Term(t["name"], _unnum(t["value"]), t["formula"], t["role"]) for t in d["terms"])
        return cls(d["kind"], terms, d["probability_level"], tuple(d["caveats"]),
                   d.get("probability"), d.get("details") or {})


def _num(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _unnum(x):
    return float(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def tv_from_kl(kl: float) -> float:
    """``3 * sqrt(sqrt(1 + 4 kl / 9) - 1)``, the TV bound implied by a KL value.

    Raises
    ------
    NegativeKL
        For ``kl < 0``, which can only come from unnormalized densities or
        numerical noise.
    """
    kl = float(kl)
    if kl < 0:
        raise NegativeKL(f"KL divergence {kl:.3e} is negative")
    return 3.0 * math.sqrt(math.sqrt(1.0 + 4.0 * kl / 9.0) - 1.0)


def _clamped_tv(gap, label, caveats):
    if gap < 0:
        caveats.append(f"{label} = {gap:.6g} < 0; clamped to 0 before the KL-to-TV map")
        gap = 0.0
    return tv_from_kl(gap)


def _as_lags(x):
    return x if isinstance(x, CovarianceSequence) else CovarianceSequence(x)


def _grid_of(grid, opts):
    return grid or AngularGrid(opts.grid_size)


def noise_tv_upper_bound(clean_lags, noise_lags, prior=None, grid: AngularGrid | None = None,
                         opts: SolverOptions | None = None) -> BoundReport:
    """TV bound between the estimate from noisy lags and the clean density.

    The bound is ``V1 + V2 + V3`` with

    * ``V1 = tv_from_kl(H[maxent(noisy)] - H[estimate(noisy)])``,
    * ``V2 = tv_distance(maxent(noisy), maxent(clean))``,
    * ``V3 = tv_from_kl(H[maxent(clean)])``, which relaxes the unknown
      entropy of the clean density to zero.

    A negative relaxed entropy in ``V3`` is clamped to zero and recorded
    in the caveats.
    """
    opts = opts or SolverOptions()
    grid = _grid_of(grid, opts)
    clean = _as_lags(clean_lags)
    noise = np.asarray(noise_lags, dtype=float)
    if noise.shape != clean.lags.shape:
        raise ValueError("clean and noise lag windows differ in length")
    noisy = _as_lags(clean.lags + noise)
    prior = prior if isinstance(prior, TrigPolynomial) else TrigPolynomial([1.0] if prior is None else prior)

    estimate = solve_dual(EstimatorProblem(noisy, prior, grid), opts)
    est_g = estimate.on_grid(grid)
    me_noisy = solve_maxent(noisy, grid, opts).on_grid(grid)
    me_clean = solve_maxent(clean, grid, opts).on_grid(grid)
    h_est, h_noisy, h_clean = entropy(est_g), entropy(me_noisy), entropy(me_clean)

    caveats = [TV_KL_CAVEAT]
    gap = h_noisy - h_est
    scale = max(1.0, abs(h_noisy), abs(h_est))
    if gap < -_GAP_TOL * scale:
        raise NegativeKL(
            f"maximum-entropy density has lower entropy than the estimate ({gap:.3e})"
        )
    gap = max(gap, 0.0)
    v1 = tv_from_kl(gap)
    v2 = tv_distance(me_noisy, me_clean)
    v3 = _clamped_tv(h_clean, "relaxed entropy H[maxent(clean)]", caveats)
    if h_clean >= 0:
        caveats.append("V3 relaxes H[Phi] >= 0 for the unknown clean density")
    if np.any(noise[1:] != 0):
        caveats.append("noise is not white; noisy lags differ beyond r_0")

    terms = (
        Term("V1", v1, "tv_from_kl(H[maxent(noisy)] - H[estimate(noisy)])"),
        Term("V2", v2, "tv_distance(maxent(noisy), maxent(clean))"),
        Term("V3", v3, "tv_from_kl(max(H[maxent(clean)], 0))"),
        Term("H_estimate_noisy", h_est, "H[P/Q from noisy lags]", "info"),
        Term("H_maxent_noisy", h_noisy, "H[maxent(noisy lags)]", "info"),
        Term("H_maxent_clean", h_clean, "H[maxent(clean lags)]", "info"),
    )
    details = {
        "clean_lags": clean.lags,
        "noise_lags": noise,
        "noisy_lags": noisy.lags,
        "prior": list(prior.coeffs),
        "denominator": list(estimate.denominator.coeffs),
        "grid_size": grid.size,
        "solver_iterations": estimate.iterations,
    }
    return BoundReport("NoiseTVUpper", terms, 1.0, tuple(caveats), None, details)


def finite_sample_tv_upper_bound(box: LagBox, clean_lags, grid: AngularGrid | None = None,
                                 opts: SolverOptions | None = None, prob=None) -> BoundReport:
    """TV bound for an estimate whose lags lie somewhere in ``box``.

    With ``Hb`` the largest maximum-entropy value over the box and ``Hc``
    the maximum entropy of the clean lags, the bound is
    ``tv_from_kl(Hb) + tv_from_kl(Hb - Hc) + tv_from_kl(Hc)``; negative
    arguments are clamped to zero and listed in the caveats. It holds with
    the probability carried by ``prob`` (a ``ProbabilityAssessment``).
    """
    opts = opts or SolverOptions()
    grid = _grid_of(grid, opts)
    clean = _as_lags(clean_lags)
    if box.order != clean.order:
        raise ValueError("box and lag window differ in order")
    sol = solve_maxent_box(box, grid, opts)
    h_box = sol.entropy
    h_clean = entropy(solve_maxent(clean, grid, opts).on_grid(grid))

    caveats = [TV_KL_CAVEAT,
               "first term uses H[maxent(box)] in place of the unavailable entropy gap of the estimate"]
    t1 = _clamped_tv(h_box, "H[maxent(box)]", caveats)
    t2 = _clamped_tv(h_box - h_clean, "H[maxent(box)] - H[maxent(clean)]", caveats)
    t3 = _clamped_tv(h_clean, "H[maxent(clean)]", caveats)
    if not sol.certified:
        caveats.append("box optimum not certified by the coordinate step test")

    if prob is None:
        level, prob_dict = 1.0, None
        caveats.append("no probability assessment supplied; level reported as 1")
    else:
        level, prob_dict = prob.product, prob.to_dict()
        caveats.append("probability level multiplies per-lag assessments as if sample lags were independent")
    terms = (
        Term("T1", t1, "tv_from_kl(max(H[maxent(box)], 0))"),
        Term("T2", t2, "tv_from_kl(max(H[maxent(box)] - H[maxent(clean)], 0))"),
        Term("T3", t3, "tv_from_kl(max(H[maxent(clean)], 0))"),
        Term("H_maxent_box", h_box, "max over box of H[maxent(r)]", "info"),
        Term("H_maxent_clean", h_clean, "H[maxent(clean lags)]", "info"),
    )
    details = {
        "box_lower": list(box.lower),
        "box_upper": list(box.upper),
        "box_optimum_lags": sol.lags,
        "box_optimum_certified": sol.certified,
        "clean_lags": clean.lags,
        "grid_size": grid.size,
    }
    return BoundReport("FiniteSampleTVUpper", terms, level, tuple(caveats), prob_dict, details)


def kl_lower_bound(true_density: GridDensity, box: LagBox, order: int | None = None, prob=None) -> BoundReport:
    """KL lower bound ``-sum_k mu_k b_k - H[Phi]`` for a known true density.

    ``mu`` are the cosine coefficients of the true density
    (``mu_0 = r_0``, ``mu_k = 2 r_k``) and ``b`` the upper box edges.

    Raises
    ------
    NegativeMu
        If some cosine coefficient is negative.
    """
    order = box.order if order is None else order
    if order > box.order:
        raise ValueError("box has fewer lags than the requested order")
    if np.any(true_density.values <= 0):
        raise NonPositiveDensity("true density must be strictly positive")
    r = compute_lags(true_density, order)
    mu = pairing_weights(order) * r
    # roundoff around exact zeros is not a sign violation
    floor = -1e-12 * max(abs(mu[0]), 1.0)
    if np.any(mu < floor):
        bad = [int(k) for k in np.flatnonzero(mu < floor)]
        raise NegativeMu(f"cosine coefficients at k={bad} are negative")
    mu = np.maximum(mu, 0.0)
    b = np.asarray(box.upper[: order + 1])
    h = entropy(true_density)
    mu_b = float(mu @ b)
    caveats = []
    terms = (
        Term("mu_dot_b", mu_b, "sum_k mu_k b_k", "-"),
        Term("H_true", h, "H[Phi_true]", "-"),
    )
    value = _combine(terms)
    if value <= 0:
        caveats.append("trivial bound: value <= 0 and KL is nonnegative")
    caveats.append(TV_KL_CAVEAT.replace("KL-to-TV inequality is", "KL bounds are"))
    if prob is None:
        level, prob_dict = 1.0, None
        caveats.append("no probability assessment supplied; level reported as 1")
    else:
        level, prob_dict = prob.product, prob.to_dict()
    details = {"mu": mu, "box_upper": b, "order": order, "grid_size": true_density.grid.size}
    return BoundReport("KLLower", terms, level, tuple(caveats), prob_dict, details)


def log_inequality_holds(density: GridDensity, slack: float = 1e-12) -> bool:
    """``log Phi <= Phi - 1 + slack`` at every node with ``Phi > 0``."""
    v = density.values
    pos = v > 0
    return bool(np.all(np.log(v[pos]) <= v[pos] - 1.0 + slack))
