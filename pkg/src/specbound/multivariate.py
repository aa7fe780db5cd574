"""Multidimensional lag problems on the product grid ``[-pi, pi)^d``.

A basis function is a product of cosines, ``prod_i cos(alpha_i theta_i)``,
indexed by an exponent vector ``alpha``. Moments are normalized averages

    r_k = (2 pi)^{-d} integral alpha_k(theta) Phi(theta) dtheta,

and coefficient vectors pair with moments through the weights
``2 ** (number of nonzero exponents)``, which reduces to ``(1, 2, ..., 2)``
when ``d = 1``. Desk-scale limits apply: ``d <= 2``, at most 9 basis
functions and at most 256 nodes per axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._newton import SolverOptions
from .bounds import TV_KL_CAVEAT, BoundReport, Term, _clamped_tv, _GAP_TOL
from .errors import (
    AliasingError,
    GridMismatch,
    NegativeKL,
    NegativeMu,
    NonPositiveDensity,
    OrderTooLarge,
    ValidationError,
)
from .estimator import _solve_rational
from .maxent import LagBox, _BoxObjective, _search_box, _solve_exponential
from .sampling import (
    LagProbability,
    ProbabilityAssessment,
    ProcessModel,
    SampleSeries,
    moment_interval_probability,
    simulate,
    wilson_interval,
)

__all__ = [
    "MAX_DIMENSION",
    "MAX_BASIS",
    "MAX_AXIS_NODES",
    "MultiBasis",
    "MultiGrid",
    "MultiGridDensity",
    "MultiRationalDensity",
    "MultiMaxEntDensity",
    "multi_compute_moments",
    "multi_entropy",
    "multi_tv_distance",
    "multi_kl_divergence",
    "multi_solve_dual",
    "multi_solve_maxent",
    "multi_solve_maxent_box",
    "multi_noise_tv_bound",
    "multi_finite_sample_bound",
    "multi_kl_lower_bound",
    "multi_simulate",
    "multi_estimate_moments",
    "multi_true_moments",
    "multi_assess_box",
    "multi_monte_carlo_interval_probability",
    "tensor_basis",
]

MAX_DIMENSION = 2
MAX_BASIS = 9
MAX_AXIS_NODES = 256


@dataclass(frozen=True)
class MultiBasis:
    """Exponent vectors ``alpha_0..alpha_n``; ``alpha_0`` must be all zeros."""

    exponents: tuple

    def __init__(self, exponents):
        ex = tuple(tuple(int(a) for a in row) for row in exponents)
        if not ex:
            raise ValidationError("basis must not be empty")
        d = len(ex[0])
        if not 1 <= d <= MAX_DIMENSION:
            raise ValidationError(f"dimension must lie in 1..{MAX_DIMENSION}, got {d}")
        if any(len(row) != d for row in ex):
            raise ValidationError("exponent vectors differ in length")
        if any(a < 0 for row in ex for a in row):
            raise ValidationError("exponents must be nonnegative integers")
        if any(a != 0 for a in ex[0]):
            raise ValidationError("the first basis function must be the constant")
        if len(set(ex)) != len(ex):
            raise ValidationError("duplicate exponent vectors")
        if len(ex) > MAX_BASIS:
            raise ValidationError(f"at most {MAX_BASIS} basis functions (n <= {MAX_BASIS - 1})")
        object.__setattr__(self, "exponents", ex)
        tops = self.max_exponents()
        if any(4 * (t + 1) > MAX_AXIS_NODES for t in tops):
            raise ValidationError(f"exponents above {MAX_AXIS_NODES // 4 - 1} need more than "
                                  f"{MAX_AXIS_NODES} nodes per axis")
        if not self.check_independent(MultiGrid([4 * (t + 1) for t in tops])):
            raise ValidationError("basis functions are linearly dependent")

    @property
    def dimension(self) -> int:
        return len(self.exponents[0])

    @property
    def order(self) -> int:
        return len(self.exponents) - 1

    def __len__(self):
        return len(self.exponents)

    @property
    def weights(self) -> np.ndarray:
        return np.array([2.0 ** sum(a != 0 for a in row) for row in self.exponents])

    def max_exponents(self):
        return [max(row[i] for row in self.exponents) for i in range(self.dimension)]

    def matrix(self, grid: "MultiGrid") -> np.ndarray:
        """Basis values at the flattened product-grid nodes."""
        if grid.dimension != self.dimension:
            raise GridMismatch("basis and grid dimensions differ")
        for size, top in zip(grid.sizes, self.max_exponents()):
            if size < 4 * (top + 1):
                raise AliasingError(f"axis with {size} nodes cannot resolve exponent {top}")
        axes = grid.axes()
        cols = []
        for row in self.exponents:
            f = np.ones(grid.shape)
            for i, a in enumerate(row):
                if a:
                    shape = [1] * grid.dimension
                    shape[i] = -1
                    f = f * np.cos(a * axes[i]).reshape(shape)
            cols.append(f.ravel())
        return np.stack(cols, axis=1)

    def gram(self, grid: "MultiGrid") -> np.ndarray:
        B = self.matrix(grid)
        return B.T @ B / B.shape[0]

    def check_independent(self, grid: "MultiGrid") -> bool:
        return bool(np.all(np.linalg.eigvalsh(self.gram(grid)) > 1e-12))


def tensor_basis(order1: int, order2: int) -> MultiBasis:
    """All exponent pairs ``(i, j)`` with ``i <= order1`` and ``j <= order2``."""
    return MultiBasis([(i, j) for i in range(order1 + 1) for j in range(order2 + 1)])


@dataclass(frozen=True)
class MultiGrid:
    sizes: tuple = (128, 128)

    def __init__(self, sizes=(128, 128)):
        sizes = tuple(int(s) for s in np.atleast_1d(sizes))
        if not 1 <= len(sizes) <= MAX_DIMENSION:
            raise ValidationError(f"dimension must lie in 1..{MAX_DIMENSION}")
        if any(s < 2 or s > MAX_AXIS_NODES for s in sizes):
            raise ValidationError(f"per-axis grid size must lie in 2..{MAX_AXIS_NODES}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def dimension(self) -> int:
        return len(self.sizes)

    @property
    def shape(self):
        return self.sizes

    @property
    def size(self) -> int:
        return int(np.prod(self.sizes))

    @property
    def cell(self) -> float:
        return float(np.prod([2.0 * math.pi / s for s in self.sizes]))

    def axes(self):
        return [-math.pi + 2.0 * math.pi * np.arange(s) / s for s in self.sizes]

    def mesh(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def integrate(self, values) -> float:
        return self.cell * float(np.sum(values))


@dataclass(frozen=True, eq=False)
class MultiGridDensity:
    grid: MultiGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValidationError("density values must be finite")
        if np.any(v < 0):
            raise NonPositiveDensity("density values must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, func, grid: MultiGrid):
        return cls(grid, func(*grid.mesh()))

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()


def _same_grid(p, q):
    if p.grid.sizes != q.grid.sizes:
        raise GridMismatch("densities live on different grids")


def multi_compute_moments(density: MultiGridDensity, basis: MultiBasis) -> np.ndarray:
    B = basis.matrix(density.grid)
    return B.T @ density.flat / B.shape[0]


def multi_entropy(density: MultiGridDensity) -> float:
    v = density.flat
    pos = v > 0
    return -density.grid.cell * float(np.sum(v[pos] * np.log(v[pos])))


def multi_kl_divergence(p: MultiGridDensity, q: MultiGridDensity) -> float:
    _same_grid(p, q)
    pv, qv = p.flat, q.flat
    pos = pv > 0
    if np.any(qv[pos] <= 0):
        return math.inf
    return p.grid.cell * float(np.sum(pv[pos] * np.log(pv[pos] / qv[pos])))


def multi_tv_distance(p: MultiGridDensity, q: MultiGridDensity) -> float:
    """Largest absolute cumulative difference over lexicographic prefixes."""
    _same_grid(p, q)
    partial = p.grid.cell * np.cumsum(p.flat - q.flat)
    return float(np.max(np.abs(partial), initial=0.0))


@dataclass(frozen=True, eq=False)
class MultiRationalDensity:
    basis: MultiBasis
    numerator: np.ndarray
    denominator: np.ndarray
    iterations: int = 0
    gradient_norm: float = 0.0
    hessian_pd: tuple = ()

    def on_grid(self, grid: MultiGrid) -> MultiGridDensity:
        B = self.basis.matrix(grid)
        c = self.basis.weights
        return MultiGridDensity(grid, (B @ (c * self.numerator)) / (B @ (c * self.denominator)))


@dataclass(frozen=True, eq=False)
class MultiMaxEntDensity:
    basis: MultiBasis
    lambdas: np.ndarray
    iterations: int = 0
    gradient_norm: float = 0.0
    hessian_pd: tuple = ()

    def on_grid(self, grid: MultiGrid) -> MultiGridDensity:
        B = self.basis.matrix(grid)
        return MultiGridDensity(grid, np.exp(-1.0 - B @ (self.basis.weights * self.lambdas)))


def _moments_array(moments, basis):
    r = np.asarray(moments, dtype=float)
    if r.shape != (len(basis),):
        raise ValidationError(f"expected {len(basis)} moments, got shape {r.shape}")
    if not r[0] > 0:
        raise ValidationError("the constant moment r_0 must be positive")
    return r


def _prior_values(prior, basis, B):
    p = np.zeros(len(basis))
    if prior is None:
        p[0] = 1.0
    else:
        prior = np.asarray(prior, dtype=float)
        p[: prior.size] = prior
    P = B @ (basis.weights * p)
    if np.min(P) <= 0:
        raise NonPositiveDensity("prior must be strictly positive on the grid")
    return p, P


def multi_solve_dual(moments, prior, basis: MultiBasis, grid: MultiGrid,
                     opts: SolverOptions | None = None) -> MultiRationalDensity:
    """``P/Q`` on the product grid whose basis moments equal ``moments``.

    ``prior`` holds coefficients of ``P`` in the same basis (``None`` for
    ``P = 1``). Admissibility of the moments is only certified by the
    solver converging.
    """
    opts = opts or SolverOptions()
    r = _moments_array(moments, basis)
    B = basis.matrix(grid)
    p, P = _prior_values(prior, basis, B)
    res = _solve_rational(B, basis.weights, r, P, opts)
    return MultiRationalDensity(basis, p, res.x, res.iterations, res.gradient_norm, tuple(res.hessian_pd))


def multi_solve_maxent(moments, basis: MultiBasis, grid: MultiGrid,
                       opts: SolverOptions | None = None) -> MultiMaxEntDensity:
    opts = opts or SolverOptions()
    r = _moments_array(moments, basis)
    res = _solve_exponential(basis.matrix(grid), basis.weights, r, opts)
    return MultiMaxEntDensity(basis, res.x, res.iterations, res.gradient_norm, tuple(res.hessian_pd))


def multi_solve_maxent_box(box: LagBox, basis: MultiBasis, grid: MultiGrid,
                           opts: SolverOptions | None = None):
    """Moment vector in ``box`` maximizing the maximum-entropy value.

    Returns ``(density, moments, entropy, certified)``.
    """
    opts = opts or SolverOptions()
    if box.order != basis.order:
        raise ValidationError("box and basis differ in size")
    B = basis.matrix(grid)
    if np.all(box.width == 0):
        dens = multi_solve_maxent(box.lo, basis, grid, opts)
        return dens, box.lo.copy(), multi_entropy(dens.on_grid(grid)), True
    obj = _BoxObjective(B, basis.weights, grid.cell, opts)
    x, fx, certified = _search_box(obj, box, opts.step_tol, max_corner_order=6)
    _, res = obj.solve(x)
    dens = MultiMaxEntDensity(basis, res.x, res.iterations, res.gradient_norm, tuple(res.hessian_pd))
    return dens, x, fx, certified


def multi_noise_tv_bound(clean_moments, noise_moments, prior, basis: MultiBasis, grid: MultiGrid,
                         opts: SolverOptions | None = None) -> BoundReport:
    """Product-grid counterpart of :func:`specbound.bounds.noise_tv_upper_bound`."""
    opts = opts or SolverOptions()
    clean = _moments_array(clean_moments, basis)
    noise = np.asarray(noise_moments, dtype=float)
    noisy = _moments_array(clean + noise, basis)
    est = multi_solve_dual(noisy, prior, basis, grid, opts).on_grid(grid)
    me_noisy = multi_solve_maxent(noisy, basis, grid, opts).on_grid(grid)
    me_clean = multi_solve_maxent(clean, basis, grid, opts).on_grid(grid)
    h_est, h_noisy, h_clean = multi_entropy(est), multi_entropy(me_noisy), multi_entropy(me_clean)

    caveats = [TV_KL_CAVEAT, "TV on the product grid uses lexicographic prefixes of the flattened grid"]
    gap = h_noisy - h_est
    if gap < -_GAP_TOL * max(1.0, abs(h_noisy), abs(h_est)):
        raise NegativeKL(f"maximum-entropy density has lower entropy than the estimate ({gap:.3e})")
    v1 = _clamped_tv(max(gap, 0.0), "entropy gap", caveats)
    v2 = multi_tv_distance(me_noisy, me_clean)
    v3 = _clamped_tv(h_clean, "relaxed entropy H[maxent(clean)]", caveats)
    terms = (
        Term("V1", v1, "tv_from_kl(H[maxent(noisy)] - H[estimate(noisy)])"),
        Term("V2", v2, "tv_distance(maxent(noisy), maxent(clean))"),
        Term("V3", v3, "tv_from_kl(max(H[maxent(clean)], 0))"),
        Term("H_estimate_noisy", h_est, "H[P/Q from noisy moments]", "info"),
        Term("H_maxent_noisy", h_noisy, "H[maxent(noisy moments)]", "info"),
        Term("H_maxent_clean", h_clean, "H[maxent(clean moments)]", "info"),
    )
    details = {"basis": [list(a) for a in basis.exponents], "grid_sizes": list(grid.sizes),
               "clean_moments": clean, "noise_moments": noise}
    return BoundReport("NoiseTVUpper", terms, 1.0, tuple(caveats), None, details)


def multi_finite_sample_bound(box: LagBox, clean_moments, basis: MultiBasis, grid: MultiGrid,
                              opts: SolverOptions | None = None, prob=None) -> BoundReport:
    opts = opts or SolverOptions()
    clean = _moments_array(clean_moments, basis)
    _, x, h_box, certified = multi_solve_maxent_box(box, basis, grid, opts)
    h_clean = multi_entropy(multi_solve_maxent(clean, basis, grid, opts).on_grid(grid))
    caveats = [TV_KL_CAVEAT,
               "first term uses H[maxent(box)] in place of the unavailable entropy gap of the estimate"]
    t1 = _clamped_tv(h_box, "H[maxent(box)]", caveats)
    t2 = _clamped_tv(h_box - h_clean, "H[maxent(box)] - H[maxent(clean)]", caveats)
    t3 = _clamped_tv(h_clean, "H[maxent(clean)]", caveats)
    if not certified:
        caveats.append("box optimum not certified by the coordinate step test")
    if prob is None:
        level, pd = 1.0, None
        caveats.append("no probability assessment supplied; level reported as 1")
    else:
        level, pd = prob.product, prob.to_dict()
        caveats.append("probability level multiplies per-moment assessments as if they were independent")
    terms = (
        Term("T1", t1, "tv_from_kl(max(H[maxent(box)], 0))"),
        Term("T2", t2, "tv_from_kl(max(H[maxent(box)] - H[maxent(clean)], 0))"),
        Term("T3", t3, "tv_from_kl(max(H[maxent(clean)], 0))"),
        Term("H_maxent_box", h_box, "max over box of H[maxent(r)]", "info"),
        Term("H_maxent_clean", h_clean, "H[maxent(clean moments)]", "info"),
    )
    details = {"basis": [list(a) for a in basis.exponents], "grid_sizes": list(grid.sizes),
               "box_lower": list(box.lower), "box_upper": list(box.upper),
               "box_optimum_moments": x, "box_optimum_certified": certified}
    return BoundReport("FiniteSampleTVUpper", terms, level, tuple(caveats), pd, details)


def multi_kl_lower_bound(true_density: MultiGridDensity, box: LagBox, basis: MultiBasis,
                         prob=None) -> BoundReport:
    """``-sum_k mu_k b_k - H[Phi]`` with ``mu`` the least-squares projection of ``Phi``.

    Raises
    ------
    NegativeMu
        If a projection coefficient is negative.
    """
    if np.any(true_density.flat <= 0):
        raise NonPositiveDensity("true density must be strictly positive")
    if box.order != basis.order:
        raise ValidationError("box and basis differ in size")
    B = basis.matrix(true_density.grid)
    M = B.shape[0]
    mu = np.linalg.solve(B.T @ B / M, B.T @ true_density.flat / M)
    floor = -1e-10 * max(1.0, abs(mu[0]))
    if np.any(mu < floor):
        raise NegativeMu(f"projection coefficients {np.flatnonzero(mu < floor).tolist()} are negative")
    mu = np.maximum(mu, 0.0)
    residual = float(np.max(np.abs(true_density.flat - B @ mu)))
    h = multi_entropy(true_density)
    b = box.hi
    terms = (
        Term("mu_dot_b", float(mu @ b), "sum_k mu_k b_k", "-"),
        Term("H_true", h, "H[Phi_true]", "-"),
    )
    caveats = []
    if terms[0].value + h >= 0:
        caveats.append("trivial bound: value <= 0 and KL is nonnegative")
    if residual > 1e-8 * max(1.0, float(np.max(true_density.flat))):
        caveats.append(f"true density is not in the span of the basis (sup residual {residual:.3g})")
    if prob is None:
        level, pd = 1.0, None
        caveats.append("no probability assessment supplied; level reported as 1")
    else:
        level, pd = prob.product, prob.to_dict()
    details = {"mu": mu, "projection_residual_sup": residual,
               "basis": [list(a) for a in basis.exponents]}
    return BoundReport("KLLower", terms, level, tuple(caveats), pd, details)


# -- sampling ---------------------------------------------------------------

def multi_simulate(models, length: int, seed=None) -> SampleSeries:
    """Independent component processes stacked as columns."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(len(models))
    cols = [simulate(m, length, c).values for m, c in zip(models, children)]
    ident = " & ".join(m.ident for m in models)
    return SampleSeries(np.column_stack(cols), ident, seed if isinstance(seed, (int, np.integer)) else None)


def multi_estimate_moments(series, basis: MultiBasis) -> np.ndarray:
    """Sample moments ``mean_t prod_i y[t, i] * y[t + alpha_i, i]``.

    For each basis function the average runs over every ``t`` for which
    all shifted samples exist, i.e. ``N + 1 - max_i alpha_i`` terms.
    """
    y = np.asarray(series.values if isinstance(series, SampleSeries) else series, dtype=float)
    if y.ndim != 2 or y.shape[1] != basis.dimension:
        raise ValidationError(f"series must have {basis.dimension} columns")
    L = y.shape[0]
    out = []
    for row in basis.exponents:
        s = max(row)
        if s >= L:
            raise OrderTooLarge(f"shift {s} needs more than {L} samples")
        prod = np.ones(L - s)
        for i, a in enumerate(row):
            prod = prod * y[: L - s, i] * y[a : L - s + a, i]
        out.append(float(np.mean(prod)))
    return np.array(out)


def _component_lags(models, basis):
    tops = basis.max_exponents()
    return [m.lags(t) for m, t in zip(models, tops)]


def multi_true_moments(models, basis: MultiBasis) -> np.ndarray:
    """Exact moments of the product spectrum of independent components."""
    lags = _component_lags(models, basis)
    return np.array([np.prod([lags[i][a] for i, a in enumerate(row)]) for row in basis.exponents])


def multi_assess_box(models, box: LagBox, basis: MultiBasis, N: int) -> ProbabilityAssessment:
    """Cantelli assessments for independent Gaussian components."""
    lags = _component_lags(models, basis)
    per = []
    for k, row in enumerate(basis.exponents):
        m1 = float(np.prod([lags[i][a] for i, a in enumerate(row)]))
        m2 = float(np.prod([lags[i][0] ** 2 + 2.0 * lags[i][a] ** 2 for i, a in enumerate(row)]))
        p = moment_interval_probability((m1, m2), box.lower[k], box.upper[k], N - max(row) + k, k)
        per.append(LagProbability(k, box.lower[k], box.upper[k], min(1.0, max(0.0, p)), "MomentCantelli"))
    return ProbabilityAssessment(tuple(per))


def multi_monte_carlo_interval_probability(models, box: LagBox, basis: MultiBasis, N: int,
                                           trials: int, seed=0) -> ProbabilityAssessment:
    if trials < 100:
        raise ValidationError("Monte Carlo assessment needs at least 100 trials")
    lo, hi = box.lo, box.hi
    inside = np.zeros((trials, len(basis)), dtype=bool)
    for t, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        r = multi_estimate_moments(multi_simulate(models, N + 1, child), basis)
        inside[t] = (r >= lo) & (r <= hi)
    per = []
    for k in range(len(basis)):
        hits = int(inside[:, k].sum())
        per.append(LagProbability(k, float(lo[k]), float(hi[k]), hits / trials, "MonteCarlo",
                                  wilson_interval(hits, trials)))
    joint = int(inside.all(axis=1).sum())
    return ProbabilityAssessment(tuple(per), joint / trials, wilson_interval(joint, trials), trials,
                                 label="empirical frequency")
