import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specbound import AngularGrid, EstimatorProblem, LagBox, ProcessModel, solve_dual, solve_maxent
from specbound.errors import AliasingError, NegativeMu, ValidationError
from specbound.multivariate import (
    MultiBasis,
    MultiGrid,
    MultiGridDensity,
    multi_assess_box,
    multi_compute_moments,
    multi_entropy,
    multi_estimate_moments,
    multi_finite_sample_bound,
    multi_kl_lower_bound,
    multi_monte_carlo_interval_probability,
    multi_noise_tv_bound,
    multi_simulate,
    multi_solve_dual,
    multi_solve_maxent,
    multi_true_moments,
    multi_tv_distance,
    tensor_basis,
)

GRID = MultiGrid((64, 64))
MODELS = (ProcessModel.ar1(0.5), ProcessModel.ar1(-0.3))


class TestBasis:
    def test_constant_first(self):
        with pytest.raises(ValidationError):
            MultiBasis([(1, 0), (0, 0)])

    def test_duplicates(self):
        with pytest.raises(ValidationError):
            MultiBasis([(0, 0), (1, 0), (1, 0)])

    def test_caps(self):
        with pytest.raises(ValidationError):
            tensor_basis(3, 3)  # 16 functions
        with pytest.raises(ValidationError):
            MultiBasis([(0, 0, 0), (1, 0, 0)])

    def test_gram_pd(self):
        b = tensor_basis(2, 2)
        assert b.check_independent(GRID)
        assert np.all(np.linalg.eigvalsh(b.gram(GRID)) > 0)

    def test_weights(self):
        assert list(tensor_basis(1, 1).weights) == [1, 2, 2, 4]

    def test_aliasing(self):
        with pytest.raises(AliasingError):
            tensor_basis(2, 2).matrix(MultiGrid((8, 8)))


class TestMoments:
    def test_flat(self):
        d = MultiGridDensity(GRID, np.ones(GRID.shape))
        assert np.allclose(multi_compute_moments(d, tensor_basis(1, 1)), [1, 0, 0, 0], atol=1e-15)
        assert GRID.integrate(d.values) == pytest.approx((2 * np.pi) ** 2)

    def test_one_plus_cos(self):
        d = MultiGridDensity.from_function(lambda a, b: 1 + np.cos(a), GRID)
        r = multi_compute_moments(d, MultiBasis([(0, 0), (1, 0), (0, 1)]))
        assert np.allclose(r, [1, 0.5, 0], atol=1e-14)

    def test_separable_factor(self):
        b = tensor_basis(2, 1)
        f, g = (m.spectral_density for m in MODELS)
        d = MultiGridDensity.from_function(lambda a, c: f(a) * g(c), MultiGrid((256, 256)))
        assert np.allclose(multi_compute_moments(d, b), multi_true_moments(MODELS, b), atol=1e-12)


class TestSolvers:
    def test_flat_fixed_point(self):
        b = tensor_basis(1, 1)
        d = multi_solve_dual([1, 0, 0, 0], None, b, GRID)
        assert np.allclose(d.denominator, [1, 0, 0, 0], atol=1e-14)
        m = multi_solve_maxent([1, 0, 0, 0], b, GRID)
        assert np.allclose(m.on_grid(GRID).values, 1.0)

    def test_separable_cross_oracle(self):
        b = tensor_basis(1, 1)
        r = multi_true_moments(MODELS, b)
        multi = multi_solve_dual(r, None, b, GRID).on_grid(GRID).values
        g1 = AngularGrid(64)
        u = [solve_dual(EstimatorProblem(m.lags(1), grid=g1)).on_grid(g1).values for m in MODELS]
        assert np.max(np.abs(multi - np.outer(*u))) <= 1e-6
        me = multi_solve_maxent(r, b, GRID)
        v = [solve_maxent(m.lags(1), g1).on_grid(g1).values for m in MODELS]
        assert np.max(np.abs(me.on_grid(GRID).values - np.outer(*v))) <= 1e-6
        assert me.lambdas[3] == pytest.approx(0.0, abs=1e-8)

    @given(st.integers(0, 10**6))
    def test_perturbation_continuation(self, seed):
        rng = np.random.default_rng(seed)
        b = tensor_basis(1, 2)
        r = np.r_[1.0, rng.uniform(-1e-3, 1e-3, len(b) - 1)]
        d = multi_solve_dual(r, None, b, GRID)
        assert np.max(np.abs(multi_compute_moments(d.on_grid(GRID), b) - r)) <= 1e-7
        me = multi_solve_maxent(r, b, GRID)
        assert multi_entropy(me.on_grid(GRID)) >= multi_entropy(d.on_grid(GRID)) - 1e-8


class TestBounds:
    def test_zero_noise(self):
        b = tensor_basis(1, 1)
        r = multi_true_moments(MODELS, b)
        rep = multi_noise_tv_bound(r, np.zeros(4), None, b, GRID)
        assert rep.term("V2") == 0.0

    def test_white_plus_white(self):
        b = tensor_basis(1, 1)
        s2 = 0.2
        rep = multi_noise_tv_bound([1, 0, 0, 0], [s2, 0, 0, 0], None, b, GRID)
        assert rep.term("V2") == pytest.approx((2 * np.pi) ** 2 * s2, rel=1e-12)
        assert rep.term("V1") == pytest.approx(0.0, abs=1e-6)
        assert rep.bound_value == pytest.approx((2 * np.pi) ** 2 * s2, rel=1e-6)

    def test_finite_sample_singleton(self):
        b = tensor_basis(1, 1)
        r = np.array([0.2, 0.02, 0.01, 0.0])
        rep = multi_finite_sample_bound(LagBox(r, r), r, b, GRID)
        assert rep.term("T2") == 0.0
        assert rep.bound_value == pytest.approx(rep.term("T1") + rep.term("T3"))

    def test_kl_flat(self):
        b = tensor_basis(1, 1)
        rep = multi_kl_lower_bound(MultiGridDensity(GRID, np.ones(GRID.shape)), LagBox.around([1, 0, 0, 0], 0.1), b)
        assert rep.bound_value < 0
        assert any("trivial" in c for c in rep.caveats)

    def test_kl_projection(self):
        b = MultiBasis([(0, 0), (1, 0)])
        d = MultiGridDensity.from_function(lambda a, c: 1 + np.cos(a) + 1e-300, GRID)
        rep = multi_kl_lower_bound(d, LagBox([0, 0], [1, 1]), b)
        assert np.allclose(rep.details["mu"], [1, 1], atol=1e-12)
        assert rep.details["projection_residual_sup"] <= 1e-12

    def test_negative_mu(self):
        b = MultiBasis([(0, 0), (1, 0)])
        d = MultiGridDensity.from_function(lambda a, c: 1 - 0.5 * np.cos(a), GRID)
        with pytest.raises(NegativeMu):
            multi_kl_lower_bound(d, LagBox([0, 0], [1, 1]), b)


class TestSampling:
    def test_constant_series(self):
        r = multi_estimate_moments(np.ones((20, 2)), tensor_basis(1, 1))
        assert np.allclose(r, 1.0)

    def test_simulate_deterministic(self):
        a = multi_simulate(MODELS, 300, 3)
        b = multi_simulate(MODELS, 300, 3)
        assert np.array_equal(a.values, b.values) and a.values.shape == (300, 2)

    def test_var1_coverage_recorded(self):
        b = tensor_basis(1, 1)
        models = (ProcessModel.ar1(0.5), ProcessModel.ar1(0.5))
        box = LagBox.around(multi_true_moments(models, b), 0.1)
        mc = multi_monte_carlo_interval_probability(models, box, b, 10_000, 100, seed=2)
        analytic = multi_assess_box(models, box, b, 10_000)
        assert 0 <= mc.joint <= 1 and 0 <= analytic.product <= 1


def test_tv_pseudometric():
    rng = np.random.default_rng(0)
    g = MultiGrid((8, 8))
    p, q, r = (MultiGridDensity(g, rng.random((8, 8))) for _ in range(3))
    assert multi_tv_distance(p, p) == 0.0
    assert multi_tv_distance(p, q) == multi_tv_distance(q, p)
    assert multi_tv_distance(p, r) <= multi_tv_distance(p, q) + multi_tv_distance(q, r) + 1e-12
