"""Simulated stationary processes, sample lags and interval probabilities.

Processes follow the difference equation

    y_t = sum_i ar[i] y_{t-1-i} + e_t + sum_j ma[j] e_{t-1-j},

driven by Gaussian innovations of variance ``sigma2``, so that

    Phi(theta) = sigma2 |1 + sum_j ma[j] e^{-i(j+1)theta}|^2
                        / |1 - sum_i ar[i] e^{-i(i+1)theta}|^2

has lags ``r_k = (1/2pi) integral(cos(k theta) Phi)``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, signal, stats

from .errors import (
    InvalidMoments,
    NonStationaryModel,
    OrderTooLarge,
    UnknownDistribution,
    ValidationError,
)
from .trig import AngularGrid, GridDensity, compute_lags

__all__ = [
    "ProcessModel",
    "SampleSeries",
    "GaussianProduct",
    "LagProbability",
    "ProbabilityAssessment",
    "simulate",
    "add_noise",
    "estimate_lags",
    "marginal_interval_probability",
    "moment_interval_probability",
    "gaussian_product_moments",
    "assess_box",
    "monte_carlo_interval_probability",
    "wilson_interval",
]

KINDS = ("white", "ar", "ma", "arma")


@dataclass(frozen=True)
class ProcessModel:
    """Gaussian ARMA model; ``kind`` is one of ``white``, ``ar``, ``ma``, ``arma``."""

    kind: str = "white"
    ar: tuple = ()
    ma: tuple = ()
    sigma2: float = 1.0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in KINDS:
            raise ValidationError(f"unknown process kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "ar", tuple(float(x) for x in self.ar))
        object.__setattr__(self, "ma", tuple(float(x) for x in self.ma))
        if kind == "white" and (self.ar or self.ma):
            raise ValidationError("white noise takes no coefficients")
        if kind == "ar" and self.ma:
            raise ValidationError("AR model takes no MA coefficients")
        if kind == "ma" and self.ar:
            raise ValidationError("MA model takes no AR coefficients")
        if not self.sigma2 > 0:
            raise ValidationError("innovation variance must be positive")
        if self.ar:
            # roots of z^p - ar1 z^{p-1} - ... must lie inside the unit disc
            roots = np.roots(np.r_[1.0, -np.array(self.ar)])
            if np.any(np.abs(roots) >= 1.0):
                raise NonStationaryModel(
                    f"AR polynomial {self.ar} has a root on or outside the unit circle"
                )

    @classmethod
    def white(cls, sigma2=1.0):
        return cls("white", sigma2=sigma2)

    @classmethod
    def ar1(cls, a, sigma2=1.0):
        return cls("ar", ar=(a,), sigma2=sigma2)

    @property
    def order(self) -> int:
        return max(len(self.ar), len(self.ma))

    @property
    def ident(self) -> str:
        parts = [self.kind]
        if self.ar:
            parts.append("ar=" + ";".join(repr(x) for x in self.ar))
        if self.ma:
            parts.append("ma=" + ";".join(repr(x) for x in self.ma))
        parts.append(f"sigma2={self.sigma2!r}")
        return "|".join(parts)

    def spectral_density(self, theta):
        z = np.exp(-1j * np.asarray(theta, dtype=float))
        num = np.polyval(np.r_[self.ma[::-1], 1.0], z) if self.ma else 1.0
        den = np.polyval(np.r_[-np.array(self.ar[::-1]), 1.0], z) if self.ar else 1.0
        return np.broadcast_to(self.sigma2 * np.abs(num) ** 2 / np.abs(den) ** 2, z.shape).copy()

    def on_grid(self, grid: AngularGrid) -> GridDensity:
        return GridDensity(grid, self.spectral_density(grid.nodes))

    def lags(self, order: int, grid_size: int = 1 << 14) -> np.ndarray:
        """Exact lags up to ``order`` (quadrature on a fine grid is spectrally accurate)."""
        grid = AngularGrid(max(grid_size, 8 * (order + 1)))
        return compute_lags(self.on_grid(grid), order)

    def pair_distribution(self, k: int) -> "GaussianProduct":
        r = self.lags(k)
        return GaussianProduct(float(r[0]), float(r[k] / r[0]))

    def to_dict(self):
        return {"kind": self.kind, "ar": list(self.ar), "ma": list(self.ma), "sigma2": self.sigma2}


@dataclass(frozen=True, eq=False)
class SampleSeries:
    values: np.ndarray
    model: str = ""
    seed: object = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim not in (1, 2) or v.shape[0] < 2:
            raise ValidationError("a series needs at least two samples")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.shape[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# seed={'' if self.seed is None else self.seed}, model={self.model}\n")
        w = csv.writer(buf, lineterminator="\n")
        rows = self.values if self.values.ndim == 2 else self.values[:, None]
        for row in rows:
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SampleSeries":
        seed, model = None, ""
        rows = []
        for line in text.splitlines():
            if line.startswith("#"):
                for part in line[1:].split(", "):
                    key, _, val = part.strip().partition("=")
                    if key == "seed" and val:
                        seed = int(val) if val.lstrip("-").isdigit() else val
                    elif key == "model":
                        model = val
                continue
            if line.strip():
                rows.append([float(x) for x in line.split(",")])
        values = np.array(rows)
        if values.ndim == 2 and values.shape[1] == 1:
            values = values[:, 0]
        return cls(values, model, seed)


def simulate(model: ProcessModel, length: int, seed=None) -> SampleSeries:
    """Draw ``length`` consecutive samples after a burn-in of ``max(1000, 50*order)``."""
    if length < 2:
        raise ValidationError("length must be at least 2")
    rng = np.random.default_rng(seed)
    burn = max(1000, 50 * model.order)
    e = rng.standard_normal(length + burn) * math.sqrt(model.sigma2)
    b = np.r_[1.0, model.ma]
    a = np.r_[1.0, -np.array(model.ar)]
    y = signal.lfilter(b, a, e)[burn:]
    return SampleSeries(y, model.ident, seed if isinstance(seed, (int, np.integer)) else None)


def add_noise(series: SampleSeries, noise: ProcessModel, seed=None) -> SampleSeries:
    w = simulate(noise, len(series), seed)
    return SampleSeries(series.values + w.values, f"{series.model}+{noise.ident}", series.seed)


def estimate_lags(series, order: int) -> np.ndarray:
    """Sample lags ``sum_t y_t y_{t+k} / (N + 1 - k)``, no mean removal."""
    y = np.asarray(series.values if isinstance(series, SampleSeries) else series, dtype=float)
    L = y.shape[0]
    if order < 0:
        raise ValidationError("order must be nonnegative")
    if order >= L:
        raise OrderTooLarge(f"order {order} needs more than {L} samples")
    return np.array([y[: L - k] @ y[k:] / (L - k) for k in range(order + 1)])


@dataclass(frozen=True)
class GaussianProduct:
    """Law of ``X * Y`` for centred jointly Gaussian ``X, Y`` with equal variance."""

    variance: float
    correlation: float

    def __post_init__(self):
        if not self.variance > 0 or not -1 <= self.correlation <= 1:
            raise ValidationError("need variance > 0 and |correlation| <= 1")

    def cdf(self, a: float) -> float:
        if a == -math.inf:
            return 0.0
        if a == math.inf:
            return 1.0
        t = a / self.variance
        rho = self.correlation
        if abs(rho) >= 1.0 - 1e-15:
            # X*Y = rho * Z^2
            if rho > 0:
                return float(stats.chi2.cdf(t, 1)) if t > 0 else 0.0
            return float(stats.chi2.sf(-t, 1)) if t < 0 else 1.0
        s = math.sqrt(1.0 - rho * rho)
        if t == 0.0:
            # P{XY <= 0}: opposite signs
            return 0.5 - math.asin(rho) / math.pi

        def pos(x):
            return stats.norm.pdf(x) * stats.norm.cdf((t / x - rho * x) / s)

        def neg(x):
            return stats.norm.pdf(x) * stats.norm.sf((t / x - rho * x) / s)

        p1 = integrate.quad(pos, 0.0, math.inf, limit=200, epsabs=1e-13)[0]
        p2 = integrate.quad(neg, -math.inf, 0.0, limit=200, epsabs=1e-13)[0]
        return float(min(1.0, max(0.0, p1 + p2)))

    def sf(self, b: float) -> float:
        return 1.0 - self.cdf(b)

    def moments(self):
        m1 = self.correlation * self.variance
        m2 = self.variance ** 2 * (1.0 + 2.0 * self.correlation ** 2)
        return m1, m2


def gaussian_product_moments(r0: float, rk: float):
    """First two raw moments of ``y_t y_{t+k}`` for a Gaussian process."""
    return rk, r0 * r0 + 2.0 * rk * rk


def _chain(p_low, p_high, m):
    return 1.0 - p_low ** m - p_high ** m


def marginal_interval_probability(pair_distribution, a: float, b: float, N: int, k: int) -> float:
    """Interval assessment ``1 - P{X<=a}^m - P{X>=b}^m`` with ``m = N + 1 - k``.

    ``pair_distribution`` is the law of one product ``y_t y_{t+k}``; any
    object with ``cdf`` and ``sf`` methods works (e.g. a frozen scipy
    distribution or :class:`GaussianProduct`).
    """
    if not (callable(getattr(pair_distribution, "cdf", None))
            and callable(getattr(pair_distribution, "sf", None))):
        raise UnknownDistribution(
            f"cannot evaluate tail probabilities of {type(pair_distribution).__name__}"
        )
    m = N + 1 - k
    if m < 1:
        raise OrderTooLarge(f"lag {k} exceeds the sample size {N + 1}")
    p_low = 0.0 if a == -math.inf else float(pair_distribution.cdf(a))
    p_high = 0.0 if b == math.inf else float(pair_distribution.sf(b))
    return _chain(p_low, p_high, m)


def moment_interval_probability(moments, a: float, b: float, N: int, k: int,
                                method: str = "cantelli") -> float:
    """Interval assessment from the mean and second moment of ``y_t y_{t+k}``.

    Tail probabilities are replaced by their Cantelli bounds
    ``var / (var + d^2)``; ``method="markov"`` instead uses ``m1 / b`` for the
    upper tail of a nonnegative product (``k = 0``) and no information on
    the lower tail unless ``a < 0``.
    """
    m1, m2 = (float(x) for x in moments[:2])
    if not (math.isfinite(m1) and math.isfinite(m2)):
        raise InvalidMoments("moments must be finite")
    var = m2 - m1 * m1
    if var < -1e-12 * max(1.0, m2):
        raise InvalidMoments(f"second moment {m2} is below the squared mean {m1 * m1}")
    var = max(var, 0.0)
    m = N + 1 - k
    if m < 1:
        raise OrderTooLarge(f"lag {k} exceeds the sample size {N + 1}")
    if method == "cantelli":
        p_high = _cantelli(var, b - m1)
        p_low = _cantelli(var, m1 - a)
    elif method == "markov":
        if m1 < 0:
            raise InvalidMoments("Markov bound needs a nonnegative variable")
        p_high = 0.0 if b == math.inf else (min(1.0, m1 / b) if b > 0 else 1.0)
        p_low = 0.0 if a < 0 else 1.0
    else:
        raise ValidationError(f"unknown method {method!r}")
    return _chain(p_low, p_high, m)


def _cantelli(var, d):
    if d == math.inf:
        return 0.0
    if d <= 0:
        return 1.0
    return var / (var + d * d)


@dataclass(frozen=True)
class LagProbability:
    k: int
    lower: float
    upper: float
    p: float
    method: str
    ci: tuple | None = None

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"probability {self.p} outside [0, 1]")
        if self.method not in ("Marginal", "MomentMarkov", "MomentCantelli", "MonteCarlo"):
            raise ValidationError(f"unknown method {self.method!r}")

    def to_dict(self):
        d = {"k": self.k, "lower": self.lower, "upper": self.upper, "p": self.p, "method": self.method}
        if self.ci is not None:
            d["ci95"] = list(self.ci)
        return d


@dataclass(frozen=True)
class ProbabilityAssessment:
    """Per-lag interval probabilities and their product.

    The product treats the sample lags as independent, a modelling
    assumption rather than a fact; ``joint`` carries the empirical joint
    frequency when it is known.
    """

    per_lag: tuple
    joint: float | None = None
    joint_ci: tuple | None = None
    trials: int | None = None
    label: str = "assessment (upper bound)"
    notes: tuple = field(default=(
        "product assumes independent sample lags",
    ))

    @property
    def product(self) -> float:
        return float(np.prod([lp.p for lp in self.per_lag]))

    def to_dict(self):
        d = {
            "label": self.label,
            "per_lag": [lp.to_dict() for lp in self.per_lag],
            "product": self.product,
            "notes": list(self.notes),
        }
        if self.joint is not None:
            d["joint_frequency"] = self.joint
            d["joint_ci95"] = list(self.joint_ci)
            d["trials"] = self.trials
        return d

    @classmethod
    def certain(cls, order: int):
        return cls(tuple(LagProbability(k, -math.inf, math.inf, 1.0, "Marginal")
                         for k in range(order + 1)), label="deterministic")


def assess_box(model: ProcessModel, box, N: int, method: str = "marginal") -> ProbabilityAssessment:
    """Analytic per-lag assessments for a Gaussian model and a lag box."""
    lo, hi = np.asarray(box.lower), np.asarray(box.upper)
    r = model.lags(len(lo) - 1)
    out = []
    for k in range(len(lo)):
        if method == "marginal":
            dist = GaussianProduct(float(r[0]), float(r[k] / r[0]))
            p = marginal_interval_probability(dist, lo[k], hi[k], N, k)
            tag = "Marginal"
        elif method == "cantelli":
            p = moment_interval_probability(gaussian_product_moments(r[0], r[k]), lo[k], hi[k], N, k)
            tag = "MomentCantelli"
        elif method == "markov":
            # Markov needs a nonnegative product, which only k = 0 guarantees
            inner = "markov" if k == 0 else "cantelli"
            p = moment_interval_probability(gaussian_product_moments(r[0], r[k]), lo[k], hi[k], N, k,
                                            method=inner)
            tag = "MomentMarkov" if k == 0 else "MomentCantelli"
        else:
            raise ValidationError(f"unknown assessment method {method!r}")
        out.append(LagProbability(k, float(lo[k]), float(hi[k]), min(1.0, max(0.0, p)), tag))
    return ProbabilityAssessment(tuple(out))


def wilson_interval(successes: int, trials: int, level: float = 0.95):
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(level, method="wilson")
    return float(ci.low), float(ci.high)


def monte_carlo_interval_probability(model: ProcessModel, box, n: int, N: int,
                                     trials: int, seed=0) -> ProbabilityAssessment:
    """Empirical frequency of sample lags landing in ``box``.

    Each trial draws ``N + 1`` samples from its own child seed, so the
    result depends only on ``seed`` and not on evaluation order.
    """
    if trials < 100:
        raise ValidationError("Monte Carlo assessment needs at least 100 trials")
    lo, hi = np.asarray(box.lower)[: n + 1], np.asarray(box.upper)[: n + 1]
    inside = np.zeros((trials, n + 1), dtype=bool)
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        r = estimate_lags(simulate(model, N + 1, child), n)
        inside[i] = (r >= lo) & (r <= hi)
    per = []
    for k in range(n + 1):
        hits = int(inside[:, k].sum())
        per.append(LagProbability(k, float(lo[k]), float(hi[k]), hits / trials, "MonteCarlo",
                                  wilson_interval(hits, trials)))
    joint_hits = int(inside.all(axis=1).sum())
    return ProbabilityAssessment(tuple(per), joint_hits / trials, wilson_interval(joint_hits, trials),
                                 trials, label="empirical frequency")
