"""Maximum-entropy spectral densities under lag constraints.

The maximizer of ``-integral(Phi log Phi)`` subject to ``lag_k(Phi) = r_k``
has the exponential form

    Phi(theta) = exp(-1 - lam_0 - 2 * sum_k lam_k cos(k theta)),

and ``lam`` minimizes the smooth convex dual
``F(lam) = (1/2pi) integral(Phi_lam) + <lam, r>``. At the optimum

    H[Phi] = 2 pi r0 + 2 pi <lam, r>,

and ``KL(D || Phi) = H[Phi] - H[D]`` for any density ``D`` with the same
lags.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._newton import SolverOptions, damped_newton
from .errors import (
    BoundaryApproach,
    EmptyFeasibleBox,
    MaxIterations,
    NoInteriorSolution,
    ValidationError,
)
from .trig import (
    AngularGrid,
    CovarianceSequence,
    GridDensity,
    compute_lags,
    cosine_matrix,
    entropy,
    pairing_weights,
    toeplitz_positive_definite,
)

__all__ = [
    "MaxEntDensity",
    "LagBox",
    "BoxSolution",
    "solve_maxent",
    "maxent_entropy_identity_check",
    "maxent_dual_value_and_gradient",
    "solve_maxent_box",
]

_EXP_CAP = 700.0
_LAMBDA_CAP = 1e8
# keeps box iterates away from singular Toeplitz windows, where the
# entropy diverges to -inf
_BOX_PD_MARGIN = 1e-6


@dataclass(frozen=True, eq=False)
class MaxEntDensity:
    lambdas: np.ndarray
    grid: AngularGrid = field(default_factory=AngularGrid)
    iterations: int = 0
    gradient_norm: float = 0.0
    hessian_pd: tuple = ()

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=float)).copy()
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @property
    def order(self) -> int:
        return self.lambdas.size - 1

    def exponent(self, theta):
        theta = np.asarray(theta, dtype=float)
        k = np.arange(self.lambdas.size)
        return -1.0 - np.cos(np.multiply.outer(theta, k)) @ (pairing_weights(self.order) * self.lambdas)

    def __call__(self, theta):
        return np.exp(self.exponent(theta))

    def on_grid(self, grid: AngularGrid | None = None) -> GridDensity:
        grid = grid or self.grid
        return GridDensity(grid, self(grid.nodes))

    def entropy(self) -> float:
        return entropy(self.on_grid())


@dataclass(frozen=True)
class LagBox:
    """Per-lag intervals ``lower[k] <= r_k <= upper[k]``."""

    lower: tuple
    upper: tuple

    def __init__(self, lower, upper):
        lo = np.atleast_1d(np.asarray(lower, dtype=float))
        hi = np.atleast_1d(np.asarray(upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValidationError("lower and upper must be 1-d and of equal length")
        if np.any(lo > hi):
            raise ValidationError("every lower bound must not exceed its upper bound")
        object.__setattr__(self, "lower", tuple(lo.tolist()))
        object.__setattr__(self, "upper", tuple(hi.tolist()))

    @classmethod
    def around(cls, lags, delta: float = 0.05) -> "LagBox":
        """Box ``r_k +/- delta * r0``."""
        r = np.asarray(lags, dtype=float)
        half = delta * r[0]
        return cls(r - half, r + half)

    @property
    def order(self) -> int:
        return len(self.lower) - 1

    @property
    def lo(self) -> np.ndarray:
        return np.array(self.lower)

    @property
    def hi(self) -> np.ndarray:
        return np.array(self.upper)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, lags) -> bool:
        r = np.asarray(lags, dtype=float)
        return bool(np.all(r >= self.lo) and np.all(r <= self.hi))

    def corners(self):
        for choice in itertools.product((0, 1), repeat=self.order + 1):
            yield np.where(np.array(choice, dtype=bool), self.hi, self.lo)

    def witness(self, feasible=None):
        """An admissible point of the box, or ``None``."""
        feasible = feasible or _box_feasible
        lo, hi = self.lo, self.hi
        favourable = np.clip(np.zeros_like(lo), lo, hi)
        favourable[0] = hi[0]
        candidates = [favourable, self.center, *itertools.islice(self.corners(), 1024)]
        rng = np.random.default_rng(0)
        candidates += list(lo + rng.random((256, lo.size)) * (hi - lo))
        for r in candidates:
            if feasible(r):
                return np.array(r)
        return None


# -- generic pieces, shared with the multivariate solver -------------------

def _maxent_oracle(B, c, r):
    M = B.shape[0]
    cr = c * r

    def oracle(lam):
        e = -1.0 - B @ (c * lam)
        if np.max(e) > _EXP_CAP:
            return None
        phi = np.exp(e)
        value = float(np.mean(phi) + cr @ lam)
        grad = c * (r - B.T @ phi / M)
        H = (B.T * phi) @ B / M
        return value, grad, H * np.outer(c, c)

    return oracle


def _initial_lambdas(r0, m):
    lam = np.zeros(m)
    lam[0] = -1.0 - math.log(r0)
    return lam


def _solve_exponential(B, c, r, opts, lam0=None):
    if lam0 is None:
        lam0 = _initial_lambdas(r[0], r.size)
    try:
        res = damped_newton(_maxent_oracle(B, c, r), lam0, opts.tol * r[0], opts)
    except BoundaryApproach as exc:
        raise NoInteriorSolution(f"maximum-entropy dual diverges: {exc}") from exc
    if np.max(np.abs(res.x)) > _LAMBDA_CAP:
        raise NoInteriorSolution("Lagrange multipliers diverge")
    return res


# --------------------------------------------------------------------------

def solve_maxent(lags, grid: AngularGrid | None = None, opts: SolverOptions | None = None,
                 lam0=None) -> MaxEntDensity:
    """Maximum-entropy density matching ``lags`` exactly.

    Raises
    ------
    ToeplitzNotPD
        If the lag window is not a valid covariance window.
    MaxIterations, NoInteriorSolution
        If the dual minimization fails.
    """
    opts = opts or SolverOptions()
    lags = lags if isinstance(lags, CovarianceSequence) else CovarianceSequence(lags)
    grid = grid or AngularGrid(opts.grid_size)
    n = lags.order
    if 2 * n >= grid.size:
        raise ValueError("grid too coarse for the lag window")
    res = _solve_exponential(cosine_matrix(grid, n), pairing_weights(n), lags.lags, opts, lam0)
    return MaxEntDensity(res.x, grid, res.iterations, res.gradient_norm, tuple(res.hessian_pd))


def maxent_dual_value_and_gradient(lam, lags, grid: AngularGrid | None = None):
    lags = np.asarray(lags, dtype=float)
    grid = grid or AngularGrid()
    n = lags.size - 1
    out = _maxent_oracle(cosine_matrix(grid, n), pairing_weights(n), lags)(np.asarray(lam, dtype=float))
    if out is None:
        raise NoInteriorSolution("exponent overflows at these multipliers")
    return out[0], out[1]


def maxent_entropy_identity_check(density: MaxEntDensity, lags) -> tuple[float, float]:
    """Entropy by quadrature next to ``2 pi r0 + 2 pi <lam, r>``."""
    r = np.asarray(lags, dtype=float)
    lam = density.lambdas
    if r.size != lam.size:
        raise ValueError("lags and multipliers differ in length")
    closed = 2.0 * math.pi * (r[0] + float(pairing_weights(r.size - 1) * lam @ r))
    return density.entropy(), closed


# -- box-constrained entropy maximization ----------------------------------

@dataclass(frozen=True, eq=False)
class BoxSolution:
    density: MaxEntDensity
    lags: np.ndarray
    entropy: float
    certified: bool
    evaluations: int


def _box_feasible(r) -> bool:
    return toeplitz_positive_definite(r, rtol=_BOX_PD_MARGIN)


class _BoxObjective:
    """Entropy of the maxent density as a function of the lag vector.

    ``B``/``c`` describe the quadrature design and ``cell`` is the volume
    of one quadrature cell. ``precheck`` screens lag vectors cheaply; when
    absent, a lag vector is feasible iff its inner solve succeeds.
    """

    def __init__(self, B, c, cell, opts, precheck=None):
        self.B, self.c, self.cell, self.opts = B, c, cell, opts
        self.precheck = precheck
        self.cache = {}
        self.evaluations = 0

    def solve(self, r):
        key = tuple(np.round(r, 15))
        if key not in self.cache:
            self.evaluations += 1
            try:
                res = _solve_exponential(self.B, self.c, np.asarray(r, float), self.opts)
            except (NoInteriorSolution, MaxIterations):
                self.cache[key] = None
            else:
                phi = np.exp(-1.0 - self.B @ (self.c * res.x))
                h = -self.cell * float(np.sum(phi * np.log(phi)))
                self.cache[key] = (h, res)
        return self.cache[key]

    def feasible(self, r) -> bool:
        if self.precheck is not None:
            return self.precheck(r)
        return r[0] > 0 and self.solve(r) is not None

    def __call__(self, r):
        if not self.feasible(r):
            return -math.inf
        out = self.solve(r)
        return -math.inf if out is None else out[0]


def _feasible_interval(feasible, x, k, lo, hi):
    """Largest sub-interval of ``[lo, hi]`` around ``x[k]`` with feasible points."""

    def ok(t):
        y = x.copy()
        y[k] = t
        return feasible(y)

    def edge(inner, outer):
        if ok(outer):
            return outer
        for _ in range(80):
            mid = 0.5 * (inner + outer)
            if ok(mid):
                inner = mid
            else:
                outer = mid
            if abs(outer - inner) <= 1e-14 * max(1.0, abs(inner)):
                break
        return inner

    return edge(x[k], lo), edge(x[k], hi)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, a, b, tol):
    if b - a <= tol:
        m = 0.5 * (a + b)
        return m, f(m)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _coordinate_ascent(obj, x, box, step_tol, max_sweeps=60):
    lo, hi = box.lo, box.hi
    fx = obj(x)
    for _ in range(max_sweeps):
        moved = False
        for k in range(x.size):
            if hi[k] - lo[k] <= step_tol:
                continue
            a, b = _feasible_interval(obj.feasible, x, k, lo[k], hi[k])

            def line(t, k=k):
                y = x.copy()
                y[k] = t
                return obj(y)

            t, ft = _golden_max(line, a, b, step_tol)
            # endpoints are not sampled by the golden search
            for edge in (a, b):
                fe = line(edge)
                if fe > ft:
                    t, ft = edge, fe
            if ft > fx and abs(t - x[k]) > 0.0:
                moved = moved or abs(t - x[k]) > step_tol
                x = x.copy()
                x[k] = t
                fx = ft
        if not moved:
            break
    return x, fx


def _certify(obj, x, fx, box, step_tol):
    for k in range(x.size):
        for s in (-step_tol, step_tol):
            y = x.copy()
            y[k] = np.clip(y[k] + s, box.lo[k], box.hi[k])
            if obj(y) > fx + 1e-12 * max(1.0, abs(fx)):
                return False
    return True


def _search_box(obj, box, step_tol, max_corner_order):
    lo, hi = box.lo, box.hi
    start = box.center if obj.feasible(box.center) else box.witness(obj.feasible)
    if start is None:
        raise EmptyFeasibleBox(
            f"no admissible lag vector in box [{lo.tolist()}, {hi.tolist()}]"
        )
    x, fx = _coordinate_ascent(obj, np.array(start, dtype=float), box, step_tol)
    if box.order + 1 <= max_corner_order:
        tried = set()
        improved = True
        while improved:
            improved = False
            for corner in box.corners():
                key = tuple(corner)
                if key in tried:
                    continue
                tried.add(key)
                if obj(corner) > fx:
                    x, fx = _coordinate_ascent(obj, corner.copy(), box, step_tol)
                    improved = True
                    break
    return x, fx, _certify(obj, x, fx, box, step_tol)


def solve_maxent_box(box: LagBox, grid: AngularGrid | None = None,
                     opts: SolverOptions | None = None, max_corner_order: int = 9) -> BoxSolution:
    """Lag vector in ``box`` whose maximum-entropy density has largest entropy.

    Coordinate-wise golden-section ascent over the lags, with an inner
    maximum-entropy solve at every trial point. The search starts at the
    box center (or a feasible witness); feasible corners that beat the
    result trigger a restart from that corner.

    Raises
    ------
    EmptyFeasibleBox
        If no positive definite lag window is found in the box.
    """
    opts = opts or SolverOptions()
    grid = grid or AngularGrid(opts.grid_size)
    lo, hi = box.lo, box.hi
    if np.all(hi - lo == 0):
        if not toeplitz_positive_definite(lo):
            raise EmptyFeasibleBox("the singleton box is not a valid lag window")
        dens = solve_maxent(lo, grid, opts)
        return BoxSolution(dens, lo.copy(), dens.entropy(), True, 1)
    n = box.order
    obj = _BoxObjective(cosine_matrix(grid, n), pairing_weights(n), grid.weight, opts, _box_feasible)
    x, fx, certified = _search_box(obj, box, opts.step_tol, max_corner_order)
    _, res = obj.solve(x)
    dens = MaxEntDensity(res.x, grid, res.iterations, res.gradient_norm, tuple(res.hessian_pd))
    return BoxSolution(dens, x, fx, certified, obj.evaluations)


def lags_of(density: MaxEntDensity, order: int | None = None) -> np.ndarray:
    return compute_lags(density.on_grid(), density.order if order is None else order)
