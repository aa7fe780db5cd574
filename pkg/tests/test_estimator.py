import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import solve_toeplitz

from conftest import random_pd_lags
from specbound import (
    AngularGrid,
    EstimatorProblem,
    SolverOptions,
    TrigPolynomial,
    compute_lags,
    dual_hessian,
    dual_value_and_gradient,
    solve_dual,
)
from specbound.errors import MaxIterations, NonPositiveDensity, NonPositiveQ, ToeplitzNotPD

G = AngularGrid(2048)


def problem(lags, prior=(1.0,)):
    return EstimatorProblem(lags, TrigPolynomial(prior), G)


def test_white_fixed_point():
    d = solve_dual(problem([1.0, 0.0, 0.0]))
    assert np.allclose(d.denominator.coeffs, [1, 0, 0], atol=1e-14)
    assert np.allclose(d.on_grid(G).values, 1.0)


@pytest.mark.parametrize("a", [0.1, 0.5, 0.9])
def test_levinson_oracle(a):
    r = np.array([1.0, a]) / (1 - a * a)
    # Yule-Walker by scipy's Levinson solver gives the AR(1) model independently
    coef = solve_toeplitz(r[:1], r[1:])
    sigma2 = r[0] - coef @ r[1:]
    d = solve_dual(problem(r))
    truth = sigma2 / np.abs(1 - coef[0] * np.exp(-1j * G.nodes)) ** 2
    assert np.max(np.abs(d.on_grid(G).values - truth)) <= 1e-6
    assert d.moment_residual(r, G) <= 1e-8 * r[0]


def test_near_boundary():
    d = solve_dual(problem([1.0, 0.9]))
    assert d.denominator.is_positive(G)
    assert d.moment_residual([1.0, 0.9], G) <= 1e-8


def test_invalid_inputs():
    with pytest.raises(ToeplitzNotPD):
        problem([1.0, 2.0])
    with pytest.raises(NonPositiveDensity):
        problem([1.0, 0.1], prior=(1.0, 1.0))


def test_max_iterations():
    with pytest.raises(MaxIterations):
        solve_dual(problem([1.0, 0.9, 0.7]), SolverOptions(max_iterations=1))


def test_stationary_gradient():
    _, g = dual_value_and_gradient([1.0, 0.0], problem([1.0, 0.0]))
    assert np.allclose(g, 0, atol=1e-15)


def test_nonpositive_q():
    with pytest.raises(NonPositiveQ):
        dual_value_and_gradient([0.1, 0.5], problem([1.0, 0.3]))


@given(st.integers(0, 10**6), st.integers(1, 5), st.booleans())
def test_moment_matching_and_hessians(seed, n, tilted):
    rng = np.random.default_rng(seed)
    r = random_pd_lags(rng, n)
    prior = (1.0, 0.25) if tilted else (1.0,)
    d = solve_dual(problem(r, prior))
    assert np.max(np.abs(compute_lags(d.on_grid(G), n) - r)) <= 1e-8 * r[0]
    assert all(d.hessian_pd)
    assert d.gradient_norm <= 1e-10 * r[0]


@given(st.integers(0, 10**6), st.integers(1, 4))
def test_gradient_matches_finite_differences(seed, n):
    rng = np.random.default_rng(seed)
    p = problem(random_pd_lags(rng, n), (1.0, 0.2))
    q = np.r_[1.0, rng.uniform(-0.4, 0.4, n) / n]
    _, g = dual_value_and_gradient(q, p)
    h = 1e-6
    fd = np.array([
        (dual_value_and_gradient(q + h * e, p)[0] - dual_value_and_gradient(q - h * e, p)[0]) / (2 * h)
        for e in np.eye(n + 1)
    ])
    assert np.max(np.abs(fd - g)) <= 1e-6 * max(1.0, np.max(np.abs(g)))
    H = dual_hessian(q, p)
    fdH = np.array([
        (dual_value_and_gradient(q + h * e, p)[1] - dual_value_and_gradient(q - h * e, p)[1]) / (2 * h)
        for e in np.eye(n + 1)
    ])
    assert np.allclose(H, fdH, atol=1e-5 * max(1.0, np.max(np.abs(H))))


@given(st.integers(0, 10**6), st.integers(1, 4))
def test_strict_convexity(seed, n):
    rng = np.random.default_rng(seed)
    p = problem(random_pd_lags(rng, n))
    q1 = np.r_[1.0, rng.uniform(-0.4, 0.4, n) / n]
    q2 = np.r_[1.5, rng.uniform(-0.4, 0.4, n) / n]
    f = lambda q: dual_value_and_gradient(q, p)[0]  # noqa: E731
    assert f(0.5 * (q1 + q2)) < 0.5 * (f(q1) + f(q2))


@given(st.integers(0, 10**6), st.integers(1, 4))
def test_unique_from_different_starts(seed, n):
    rng = np.random.default_rng(seed)
    p = problem(random_pd_lags(rng, n))
    a = solve_dual(p)
    b = solve_dual(p, q0=np.r_[3.0, rng.uniform(-0.3, 0.3, n) / n])
    assert np.allclose(a.denominator.coeffs, b.denominator.coeffs, atol=1e-7)
