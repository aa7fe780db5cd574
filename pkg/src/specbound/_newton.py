"""Damped Newton iteration with backtracking for smooth convex duals."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import BoundaryApproach, MaxIterations

__all__ = ["SolverOptions", "NewtonResult", "damped_newton"]


@dataclass(frozen=True)
class SolverOptions:
    """Knobs shared by every dual solver.

    ``tol`` is relative: iteration stops once the gradient infinity norm
    drops below ``tol * r0``.
    """

    tol: float = 1e-10
    max_iterations: int = 200
    grid_size: int = 4096
    armijo: float = 1e-4
    shrink: float = 0.5
    step_tol: float = 1e-6

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 < self.armijo < 0.5:
            raise ValueError("armijo constant must lie in (0, 0.5)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if self.grid_size < 8:
            raise ValueError("grid_size must be at least 8")
        if not self.step_tol > 0:
            raise ValueError("step_tol must be positive")


@dataclass
class NewtonResult:
    x: np.ndarray
    value: float
    gradient: np.ndarray
    iterations: int
    hessian_pd: list = field(default_factory=list)

    @property
    def gradient_norm(self) -> float:
        return float(np.max(np.abs(self.gradient)))


_MIN_STEP = 2.0 ** -60


def damped_newton(oracle, x0, gtol, opts: SolverOptions) -> NewtonResult:
    """Minimize a strictly convex function by damped Newton steps.

    ``oracle(x)`` returns ``(value, gradient, hessian)`` or ``None`` when
    ``x`` lies outside the domain. Trial points outside the domain are
    rejected by the line search, which keeps every iterate feasible.
    """
    x = np.array(x0, dtype=float)
    state = oracle(x)
    if state is None:
        raise BoundaryApproach("starting point lies outside the domain")
    f, g, H = state
    pd_flags = []
    for it in range(opts.max_iterations + 1):
        if np.max(np.abs(g)) <= gtol:
            return NewtonResult(x, f, g, it, pd_flags)
        if it == opts.max_iterations:
            break
        try:
            cf = linalg.cho_factor(H)
            pd_flags.append(True)
        except linalg.LinAlgError:
            pd_flags.append(False)
            shift = 1e-12 * max(1.0, float(np.max(np.abs(np.diag(H)))))
            cf = linalg.cho_factor(H + shift * np.eye(H.shape[0]))
        dx = -linalg.cho_solve(cf, g)
        slope = float(g @ dx)
        gnorm = float(np.max(np.abs(g)))
        t = 1.0
        accepted = None
        saw_feasible = False
        while t >= _MIN_STEP:
            trial = oracle(x + t * dx)
            if trial is not None:
                saw_feasible = True
                ft, gt, Ht = trial
                if ft <= f + opts.armijo * t * slope:
                    accepted = trial
                    break
                # near the optimum the value stalls at roundoff; fall back
                # on a decrease of the gradient norm
                if abs(ft - f) <= 1e-13 * max(1.0, abs(f)) and np.max(np.abs(gt)) < gnorm:
                    accepted = trial
                    break
            t *= opts.shrink
        if accepted is None:
            if not saw_feasible:
                raise BoundaryApproach(
                    "line search cannot leave the boundary of the feasible cone "
                    f"(iteration {it}, gradient norm {gnorm:.3e})"
                )
            raise BoundaryApproach(
                f"line search stalled at iteration {it} (gradient norm {gnorm:.3e})"
            )
        x = x + t * dx
        f, g, H = accepted
    raise MaxIterations(
        f"no convergence in {opts.max_iterations} iterations "
        f"(gradient norm {np.max(np.abs(g)):.3e}, target {gtol:.3e})"
    )
