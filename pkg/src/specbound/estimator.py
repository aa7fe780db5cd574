"""Rational spectral estimates ``P/Q`` matching a lag window exactly.

The denominator ``Q`` minimizes the strictly convex dual

    J(q) = <r, q> - (1/2pi) * integral(P log Q)

over positive cosine polynomials, where ``<r, q> = r0 q0 + 2 sum r_k q_k``.
Its stationarity conditions are precisely the moment conditions
``lag_k(P/Q) = r_k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._newton import SolverOptions, damped_newton
from .errors import NonPositiveDensity, NonPositiveQ
from .trig import (
    AngularGrid,
    CovarianceSequence,
    GridDensity,
    TrigPolynomial,
    compute_lags,
    cosine_matrix,
    evaluate,
    pairing_weights,
)

__all__ = [
    "EstimatorProblem",
    "RationalDensity",
    "solve_dual",
    "dual_value_and_gradient",
    "dual_hessian",
]


@dataclass(frozen=True, eq=False)
class EstimatorProblem:
    lags: CovarianceSequence
    prior: TrigPolynomial = field(default_factory=lambda: TrigPolynomial([1.0]))
    grid: AngularGrid = field(default_factory=AngularGrid)

    def __post_init__(self):
        if not isinstance(self.lags, CovarianceSequence):
            object.__setattr__(self, "lags", CovarianceSequence(self.lags))
        if not isinstance(self.prior, TrigPolynomial):
            object.__setattr__(self, "prior", TrigPolynomial(self.prior))
        if 2 * max(self.order, self.prior.order) >= self.grid.size:
            raise ValueError("grid too coarse for the lag window")
        if np.min(evaluate(self.prior, self.grid)) <= 0:
            raise NonPositiveDensity("prior P must be strictly positive on the grid")

    @property
    def order(self) -> int:
        return self.lags.order


@dataclass(frozen=True, eq=False)
class RationalDensity:
    """``Phi = P/Q`` with solver diagnostics attached."""

    numerator: TrigPolynomial
    denominator: TrigPolynomial
    iterations: int = 0
    gradient_norm: float = 0.0
    hessian_pd: tuple = ()

    def __call__(self, theta):
        return self.numerator(theta) / self.denominator(theta)

    def on_grid(self, grid: AngularGrid) -> GridDensity:
        return GridDensity(grid, evaluate(self.numerator, grid) / evaluate(self.denominator, grid))

    def moment_residual(self, lags, grid: AngularGrid) -> float:
        r = np.asarray(lags, dtype=float)
        return float(np.max(np.abs(compute_lags(self.on_grid(grid), r.size - 1) - r)))


# -- generic moment-system pieces, shared with the multivariate solver ----

def _estimator_oracle(B, c, r, P):
    """Value/gradient/Hessian of the rational dual on a quadrature design.

    ``B`` holds basis values at the quadrature nodes (one column per basis
    function), ``c`` the pairing weights, and moments are node averages.
    """
    M = B.shape[0]
    cr = c * r

    def oracle(q):
        Q = B @ (c * q)
        if not np.all(Q > 0):
            return None
        ratio = P / Q
        value = float(cr @ q - np.mean(P * np.log(Q)))
        grad = c * (r - B.T @ ratio / M)
        H = (B.T * (ratio / Q)) @ B / M
        return value, grad, H * np.outer(c, c)

    return oracle


def _initial_denominator(P, r0, m):
    q = np.zeros(m)
    q[0] = float(np.mean(P)) / r0
    return q


def _solve_rational(B, c, r, P, opts, q0=None):
    oracle = _estimator_oracle(B, c, r, P)
    if q0 is None:
        q0 = _initial_denominator(P, r[0], r.size)
    return damped_newton(oracle, q0, opts.tol * r[0], opts)


# -------------------------------------------------------------------------

def _design(problem):
    n = problem.order
    return cosine_matrix(problem.grid, n), pairing_weights(n)


def solve_dual(problem: EstimatorProblem, opts: SolverOptions | None = None, q0=None) -> RationalDensity:
    """Minimize the dual functional and return ``P/Q``.

    Parameters
    ----------
    problem : EstimatorProblem
        Lags, prior and quadrature grid.
    opts : SolverOptions, optional
        Tolerances; ``opts.grid_size`` is ignored here since the problem
        carries its own grid.
    q0 : array_like, optional
        Interior starting point. Defaults to ``(mean(P)/r0, 0, ..., 0)``.

    Raises
    ------
    MaxIterations
        Newton did not reach the gradient tolerance.
    BoundaryApproach
        The line search could not make progress inside the positive cone,
        which happens for (nearly) singular lag windows.
    """
    opts = opts or SolverOptions()
    B, c = _design(problem)
    r = problem.lags.lags
    P = evaluate(problem.prior, problem.grid)
    if q0 is not None:
        q0 = np.asarray(q0, dtype=float)
        if q0.shape != r.shape:
            raise ValueError(f"q0 must have {r.size} entries")
        if np.min(B @ (c * q0)) <= 0:
            raise NonPositiveQ("starting point q0 is not a positive polynomial")
    res = _solve_rational(B, c, r, P, opts, q0)
    return RationalDensity(
        problem.prior,
        TrigPolynomial(res.x),
        res.iterations,
        res.gradient_norm,
        tuple(res.hessian_pd),
    )


def dual_value_and_gradient(q, problem: EstimatorProblem):
    """Dual value and gradient at ``q``.

    Raises
    ------
    NonPositiveQ
        If ``Q(theta) <= 0`` at some grid node.
    """
    q = np.asarray(q.coeffs if isinstance(q, TrigPolynomial) else q, dtype=float)
    if q.size != problem.order + 1:
        raise ValueError(f"q must have {problem.order + 1} coefficients")
    B, c = _design(problem)
    out = _estimator_oracle(B, c, problem.lags.lags, evaluate(problem.prior, problem.grid))(q)
    if out is None:
        raise NonPositiveQ("Q is not strictly positive on the grid")
    return out[0], out[1]


def dual_hessian(q, problem: EstimatorProblem) -> np.ndarray:
    q = np.asarray(q.coeffs if isinstance(q, TrigPolynomial) else q, dtype=float)
    B, c = _design(problem)
    out = _estimator_oracle(B, c, problem.lags.lags, evaluate(problem.prior, problem.grid))(q)
    if out is None:
        raise NonPositiveQ("Q is not strictly positive on the grid")
    return out[2]

