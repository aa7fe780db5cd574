"""Uniform angular grids, cosine polynomials and spectral integrals.

Conventions used throughout the package:

* grids are uniform on ``[-pi, pi)`` with first node ``-pi``;
* ``integral(f) = (2*pi/M) * sum(f)`` (trapezoidal rule on a periodic grid);
* a real even function is written ``c0 + 2*sum_k c_k cos(k*theta)``;
* covariance lags carry the ``1/(2*pi)`` factor,
  ``r_k = (1/2pi) * integral(cos(k*theta) * Phi)``, so that
  ``Phi = r0 + 2*sum_k r_k cos(k*theta)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import AliasingError, GridMismatch, NonPositiveDensity, ToeplitzNotPD

__all__ = [
    "AngularGrid",
    "TrigPolynomial",
    "GridDensity",
    "CovarianceSequence",
    "pairing_weights",
    "cosine_matrix",
    "evaluate",
    "compute_lags",
    "entropy",
    "kl_divergence",
    "tv_distance",
    "cepstral_coeffs",
    "toeplitz_positive_definite",
    "DEFAULT_GRID_SIZE",
]

DEFAULT_GRID_SIZE = 4096
PD_RELATIVE_TOL = 1e-12


@dataclass(frozen=True)
class AngularGrid:
    """Uniform grid of ``size`` nodes on ``[-pi, pi)``."""

    size: int = DEFAULT_GRID_SIZE

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 2:
            raise ValueError(f"grid size must be an integer >= 2, got {self.size!r}")

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = -np.pi + 2.0 * np.pi * np.arange(self.size) / self.size
        nodes.setflags(write=False)
        return nodes

    @property
    def weight(self) -> float:
        return 2.0 * np.pi / self.size

    def integrate(self, values) -> float:
        return float(self.weight * np.sum(values))


def pairing_weights(order: int) -> np.ndarray:
    """Weights ``(1, 2, ..., 2)`` pairing cosine coefficients with lags."""
    w = np.full(order + 1, 2.0)
    w[0] = 1.0
    return w


def cosine_matrix(grid: AngularGrid, order: int) -> np.ndarray:
    """``M x (order+1)`` matrix with entries ``cos(k * theta_j)``."""
    return np.cos(np.outer(grid.nodes, np.arange(order + 1)))


@dataclass(frozen=True)
class TrigPolynomial:
    """Real even trigonometric polynomial ``c0 + 2*sum c_k cos(k theta)``."""

    coeffs: tuple

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        object.__setattr__(self, "coeffs", tuple(float(x) for x in c))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        k = np.arange(len(self.coeffs))
        c = self.as_array() * pairing_weights(self.order)
        return np.cos(np.multiply.outer(theta, k)) @ c

    def is_positive(self, grid: AngularGrid | None = None) -> bool:
        """Membership test for the open cone of positive polynomials."""
        grid = grid or AngularGrid(max(DEFAULT_GRID_SIZE, 64 * (self.order + 1)))
        return bool(np.min(evaluate(self, grid)) > 0.0)


@dataclass(frozen=True, eq=False)
class GridDensity:
    """A nonnegative function sampled on an :class:`AngularGrid`."""

    grid: AngularGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError(
                f"expected {self.grid.size} values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite")
        if np.any(v < 0):
            raise NonPositiveDensity("density values must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, func, grid: AngularGrid) -> "GridDensity":
        return cls(grid, func(grid.nodes))

    def mass(self) -> float:
        return self.grid.integrate(self.values)

    def __add__(self, other):
        _check_same_grid(self, other)
        return GridDensity(self.grid, self.values + other.values)


class CovarianceSequence:
    """Finite lag window ``r0..rn`` whose Toeplitz matrix is positive definite."""

    __slots__ = ("_lags",)

    def __init__(self, lags):
        r = np.atleast_1d(np.asarray(lags, dtype=float)).copy()
        if r.ndim != 1 or r.size == 0:
            raise ValueError("lags must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(r)):
            raise ToeplitzNotPD("lags must be finite")
        if not toeplitz_positive_definite(r):
            raise ToeplitzNotPD(
                f"Toeplitz matrix of lags {np.array2string(r, precision=6)} "
                "is not positive definite"
            )
        r.setflags(write=False)
        self._lags = r

    @property
    def lags(self) -> np.ndarray:
        return self._lags

    @property
    def order(self) -> int:
        return self._lags.size - 1

    @property
    def r0(self) -> float:
        return float(self._lags[0])

    def __len__(self):
        return self._lags.size

    def __getitem__(self, k):
        return self._lags[k]

    def __iter__(self):
        return iter(self._lags)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._lags, dtype=dtype)

    def __add__(self, other):
        other = np.asarray(other, dtype=float)
        return CovarianceSequence(self._lags + other)

    def __repr__(self):
        return f"CovarianceSequence({self._lags.tolist()!r})"


def _check_same_grid(p: GridDensity, q: GridDensity):
    if p.grid.size != q.grid.size:
        raise GridMismatch(
            f"densities live on different grids ({p.grid.size} vs {q.grid.size})"
        )


def evaluate(poly: TrigPolynomial, grid: AngularGrid) -> np.ndarray:
    """Values of ``poly`` at every grid node (not clamped)."""
    return poly(grid.nodes)


def compute_lags(density: GridDensity, order: int) -> np.ndarray:
    """Covariance lags ``r_0..r_order`` of a density by grid quadrature.

    Raises
    ------
    AliasingError
        If ``order >= grid.size / 2``; higher lags alias on the grid.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if 2 * order >= density.grid.size:
        raise AliasingError(
            f"order {order} aliases on a grid of {density.grid.size} nodes"
        )
    C = cosine_matrix(density.grid, order)
    return C.T @ density.values / density.grid.size


def _xlogy(x, y):
    # 0 * log(0) := 0
    out = np.zeros_like(x, dtype=float)
    m = x > 0
    out[m] = x[m] * np.log(y[m])
    return out


def entropy(density: GridDensity) -> float:
    """Shannon entropy ``-integral(Phi log Phi)``, with ``0 log 0 = 0``."""
    v = density.values
    return -density.grid.integrate(_xlogy(v, v))


def kl_divergence(p: GridDensity, q: GridDensity) -> float:
    """``integral(p log(p/q))``; ``inf`` if ``q`` vanishes where ``p`` does not.

    Spectral densities are not normalized, so the result can be negative
    when the two masses differ.
    """
    _check_same_grid(p, q)
    pv, qv = p.values, q.values
    support = pv > 0
    if np.any(qv[support] <= 0):
        return float("inf")
    ratio = np.ones_like(pv)
    ratio[support] = pv[support] / qv[support]
    return p.grid.integrate(_xlogy(pv, ratio))


def tv_distance(p: GridDensity, q: GridDensity) -> float:
    """Largest absolute partial integral ``|integral_{-pi}^{theta}(p - q)|``.

    Partial integrals up to each node use the trapezoidal rule; the full
    period (``theta = pi``) is included as the last prefix.
    """
    _check_same_grid(p, q)
    d = p.values - q.values
    c = np.cumsum(d)
    partial = p.grid.weight * np.r_[c - 0.5 * d - 0.5 * d[0], c[-1]]
    return float(np.max(np.abs(partial)))


def cepstral_coeffs(density: GridDensity, order: int) -> np.ndarray:
    """Fourier coefficients ``c_0..c_order`` of ``log Phi``."""
    v = density.values
    if np.any(v <= 0):
        raise NonPositiveDensity("cepstrum requires a strictly positive density")
    if 2 * order >= density.grid.size:
        raise AliasingError(
            f"order {order} aliases on a grid of {density.grid.size} nodes"
        )
    C = cosine_matrix(density.grid, order)
    return C.T @ np.log(v) / density.grid.size


def toeplitz_positive_definite(lags, rtol: float = PD_RELATIVE_TOL) -> bool:
    """True iff the symmetric Toeplitz matrix of ``lags`` is positive definite.

    Every Cholesky pivot must exceed ``rtol * r0``.
    """
    r = np.atleast_1d(np.asarray(lags, dtype=float))
    if r.size == 0:
        raise ValueError("lags must be nonempty")
    if not np.all(np.isfinite(r)) or r[0] <= 0:
        return False
    # Cholesky via the Levinson-Durbin recursion: the prediction error
    # variances are the squared pivots of the Toeplitz factorization.
    tol = rtol * r[0]
    err = r[0]
    a = np.zeros(0)
    for m in range(1, r.size):
        acc = r[m] - a @ r[m - 1 : 0 : -1] if m > 1 else r[m]
        kappa = acc / err
        a = np.concatenate([a - kappa * a[::-1], [kappa]])
        err = err * (1.0 - kappa * kappa)
        if not err > tol:
            return False
    return True
