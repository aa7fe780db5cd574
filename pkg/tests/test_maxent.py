import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FINE, TWO_PI, ar_density, random_pd_lags
from specbound import (
    AngularGrid,
    EstimatorProblem,
    GridDensity,
    LagBox,
    TrigPolynomial,
    compute_lags,
    entropy,
    kl_divergence,
    maxent_dual_value_and_gradient,
    maxent_entropy_identity_check,
    solve_dual,
    solve_maxent,
    solve_maxent_box,
    toeplitz_positive_definite,
)
from specbound.errors import EmptyFeasibleBox, ToeplitzNotPD

G = AngularGrid(2048)


def test_flat():
    d = solve_maxent([1.0, 0.0, 0.0], G)
    assert np.allclose(d.lambdas, [-1, 0, 0], atol=1e-14)
    assert np.allclose(d.on_grid(G).values, 1.0)


@pytest.mark.parametrize("c", [0.2, 3.0])
def test_constant(c):
    d = solve_maxent([c, 0.0], G)
    assert d.lambdas[0] == pytest.approx(-1 - math.log(c), abs=1e-12)
    h, rhs = maxent_entropy_identity_check(d, [c, 0.0])
    assert h == pytest.approx(-TWO_PI * c * math.log(c), abs=1e-12)
    assert rhs == pytest.approx(h, abs=1e-12)


def test_ar1_dominance():
    r = [4 / 3, 2 / 3]
    d = solve_maxent(r, G)
    h_ar = entropy(GridDensity.from_function(ar_density([0.5]), G))
    # mpmath oracle for the AR(1) entropy
    assert h_ar == pytest.approx(-4.820159388714675, abs=1e-8)
    # -integral(Phi log Phi) is maximized by an exponential, not by the AR spectrum
    assert entropy(d.on_grid(G)) > h_ar + 0.1


def test_non_pd():
    with pytest.raises(ToeplitzNotPD):
        solve_maxent([1.0, 1.5], G)


@given(st.integers(0, 10**6), st.integers(1, 6))
def test_identity_and_matching(seed, n):
    rng = np.random.default_rng(seed)
    r = random_pd_lags(rng, n)
    d = solve_maxent(r, G)
    assert np.max(np.abs(compute_lags(d.on_grid(G), n) - r)) <= 1e-8 * r[0]
    h, rhs = maxent_entropy_identity_check(d, r)
    assert h == pytest.approx(rhs, abs=1e-8 * max(1.0, abs(h)))


@given(st.integers(0, 10**6), st.integers(1, 5), st.booleans())
def test_entropy_dominance_and_kl_identity(seed, n, tilted):
    rng = np.random.default_rng(seed)
    r = random_pd_lags(rng, n)
    est = solve_dual(EstimatorProblem(r, TrigPolynomial((1.0, 0.3) if tilted else (1.0,)), G)).on_grid(G)
    me = solve_maxent(r, G).on_grid(G)
    gap = entropy(me) - entropy(est)
    assert gap >= -1e-8
    assert kl_divergence(est, me) == pytest.approx(gap, abs=1e-8)


@given(st.integers(0, 10**6), st.integers(1, 4))
def test_dual_gradient(seed, n):
    rng = np.random.default_rng(seed)
    r = random_pd_lags(rng, n)
    lam = np.r_[-1.0 - math.log(r[0]), rng.uniform(-0.3, 0.3, n) / n]
    _, g = maxent_dual_value_and_gradient(lam, r, G)
    h = 1e-6
    fd = np.array([
        (maxent_dual_value_and_gradient(lam + h * e, r, G)[0]
         - maxent_dual_value_and_gradient(lam - h * e, r, G)[0]) / (2 * h)
        for e in np.eye(n + 1)
    ])
    assert np.max(np.abs(fd - g)) <= 1e-6 * max(1.0, np.max(np.abs(g)))


class TestBox:
    def test_singleton(self):
        r = [4 / 3, 2 / 3]
        sol = solve_maxent_box(LagBox(r, r), G)
        assert np.allclose(sol.lags, r)
        assert sol.entropy == pytest.approx(entropy(solve_maxent(r, G).on_grid(G)), abs=1e-12)

    def test_grid_search_oracle(self):
        box = LagBox([0.9, -0.1], [1.1, 0.1])
        sol = solve_maxent_box(box, G)
        assert sol.certified and box.contains(sol.lags)
        # the best point on a 21 x 21 grid over the box, solved independently
        best = max(
            entropy(solve_maxent([r0, r1], G).on_grid(G))
            for r0, r1 in itertools.product(np.linspace(0.9, 1.1, 21), np.linspace(-0.1, 0.1, 21))
        )
        assert sol.entropy >= best - 1e-8
        assert sol.lags[1] == pytest.approx(0.0, abs=1e-5)

    def test_outside_cone(self):
        with pytest.raises(EmptyFeasibleBox):
            solve_maxent_box(LagBox([1.0, 2.0], [1.0, 3.0]), G)

    def test_beats_center_and_corners(self):
        box = LagBox.around([4 / 3, 2 / 3, 1 / 3], 0.05)
        sol = solve_maxent_box(box, G)
        for r in [box.center, *box.corners()]:
            if toeplitz_positive_definite(r):
                assert sol.entropy >= entropy(solve_maxent(r, G).on_grid(G)) - 1e-10

    def test_box_validation(self):
        with pytest.raises(ValueError):
            LagBox([1.0, 0.2], [0.9, 0.3])


def test_fine_grid_consistency():
    # the solution does not depend on the grid beyond quadrature error
    r = [4 / 3, 2 / 3, 1 / 3]
    a = solve_maxent(r, G).lambdas
    b = solve_maxent(r, FINE).lambdas
    assert np.allclose(a, b, atol=1e-10)
