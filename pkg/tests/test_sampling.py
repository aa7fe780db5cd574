import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from specbound import (
    GaussianProduct,
    LagBox,
    LagProbability,
    ProbabilityAssessment,
    ProcessModel,
    SampleSeries,
    add_noise,
    assess_box,
    estimate_lags,
    gaussian_product_moments,
    marginal_interval_probability,
    moment_interval_probability,
    monte_carlo_interval_probability,
    simulate,
)
from specbound.errors import (
    InvalidMoments,
    NonStationaryModel,
    OrderTooLarge,
    UnknownDistribution,
    ValidationError,
)


class TestModel:
    def test_nonstationary(self):
        with pytest.raises(NonStationaryModel):
            ProcessModel.ar1(1.0)
        with pytest.raises(NonStationaryModel):
            ProcessModel("ar", ar=(0.5, 0.6))

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            ProcessModel("garch")

    def test_ar1_lags(self):
        assert np.allclose(ProcessModel.ar1(0.5).lags(3), [4 / 3, 2 / 3, 1 / 3, 1 / 6], atol=1e-13)

    def test_ma1_lags(self):
        # y_t = e_t + 0.4 e_{t-1}: r_0 = 1.16, r_1 = 0.4
        assert np.allclose(ProcessModel("ma", ma=(0.4,)).lags(2), [1.16, 0.4, 0.0], atol=1e-13)

    def test_white_density(self):
        assert np.all(ProcessModel.white(2.0).spectral_density(np.linspace(-3, 3, 7)) == 2.0)


class TestSimulate:
    def test_white_variance(self):
        y = simulate(ProcessModel.white(), 10**6, 1).values
        assert 0.99 <= np.mean(y * y) <= 1.01

    def test_ar1_ratio(self):
        r = estimate_lags(simulate(ProcessModel.ar1(0.5), 10**6, 2), 3)
        assert 0.49 <= r[1] / r[0] <= 0.51
        assert np.allclose(r, [4 / 3, 2 / 3, 1 / 3, 1 / 6], atol=0.02)

    def test_deterministic(self):
        m = ProcessModel("arma", ar=(0.3,), ma=(0.2,))
        assert simulate(m, 500, 9).to_csv() == simulate(m, 500, 9).to_csv()
        assert not np.array_equal(simulate(m, 500, 9).values, simulate(m, 500, 10).values)

    def test_csv_roundtrip(self):
        s = add_noise(simulate(ProcessModel.ar1(0.5), 200, 4), ProcessModel.white(0.1), 5)
        back = SampleSeries.from_csv(s.to_csv())
        assert np.array_equal(back.values, s.values)
        assert back.seed == 4 and back.model == s.model

    def test_short(self):
        with pytest.raises(ValidationError):
            simulate(ProcessModel.white(), 1, 0)


class TestEstimateLags:
    def test_constant(self):
        assert np.allclose(estimate_lags([1, 1, 1], 1), [1, 1])

    def test_alternating(self):
        assert np.allclose(estimate_lags([1, -1, 1, -1], 1), [1, -1])

    def test_order_too_large(self):
        with pytest.raises(OrderTooLarge):
            estimate_lags([1.0, 2.0], 2)

    @given(st.lists(st.floats(-10, 10), min_size=3, max_size=40), st.floats(-5, 5))
    def test_mean_square_and_scaling(self, y, s):
        y = np.asarray(y)
        r = estimate_lags(y, 2)
        assert r[0] == pytest.approx(np.mean(y * y), rel=1e-12, abs=1e-300)
        assert np.allclose(estimate_lags(s * y, 2), s * s * r, rtol=1e-10, atol=1e-10)

    def test_consistency_trend(self):
        truth = ProcessModel.ar1(0.5).lags(2)
        med = []
        for N in (10**3, 10**4, 10**5):
            errs = [np.abs(estimate_lags(simulate(ProcessModel.ar1(0.5), N + 1, 1000 * N + s), 2) - truth)
                    for s in range(50)]
            med.append(np.median(errs, axis=0))
        assert np.all(med[1] <= med[0]) and np.all(med[2] <= med[1])


class TestGaussianProduct:
    def test_chi2(self):
        d = GaussianProduct(1.0, 1.0)
        assert d.cdf(0.454936423119572) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("rho", [-0.7, 0.0, 0.5])
    def test_against_sampling(self, rho):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(400_000)
        y = rho * x + math.sqrt(1 - rho * rho) * rng.standard_normal(x.size)
        d = GaussianProduct(2.0, rho)
        for a in (-1.0, 0.0, 0.7, 2.5):
            assert d.cdf(a) == pytest.approx(np.mean(2.0 * x * y <= a), abs=4e-3)

    def test_moments(self):
        assert gaussian_product_moments(4 / 3, 2 / 3) == pytest.approx((2 / 3, 16 / 9 + 8 / 9))
        assert GaussianProduct(2.0, 0.5).moments() == pytest.approx((1.0, 6.0))


class TestMarginal:
    def test_whole_line(self):
        d = GaussianProduct(1.0, 0.3)
        assert marginal_interval_probability(d, -math.inf, math.inf, 100, 1) == 1.0

    def test_single_term_exact(self):
        d = GaussianProduct(1.0, 1.0)
        p = marginal_interval_probability(d, 0.2, 1.5, 0, 0)
        assert p == pytest.approx(stats.chi2.cdf(1.5, 1) - stats.chi2.cdf(0.2, 1), abs=1e-12)

    def test_chi2_median(self):
        d = GaussianProduct(1.0, 1.0)
        assert marginal_interval_probability(d, 0.0, math.inf, 9, 0) == 1.0
        p = marginal_interval_probability(d, 0.0, stats.chi2.ppf(0.5, 1), 9, 0)
        assert p == pytest.approx(0.9990234375, abs=1e-9)

    def test_scipy_distribution(self):
        p = marginal_interval_probability(stats.chi2(1), 0.1, 2.0, 0, 0)
        assert p == pytest.approx(stats.chi2.cdf(2.0, 1) - stats.chi2.cdf(0.1, 1))

    def test_unknown(self):
        with pytest.raises(UnknownDistribution):
            marginal_interval_probability("gaussian", 0, 1, 10, 0)

    def test_white_matches_sampling_single_term(self):
        # with N + 1 - k = 1 the chain is the exact interval probability
        rng = np.random.default_rng(11)
        trials = 20_000
        hits = int(np.sum((lambda y: (y >= 0.3) & (y <= 2.0))(rng.standard_normal(trials) ** 2)))
        p = marginal_interval_probability(GaussianProduct(1.0, 1.0), 0.3, 2.0, 0, 0)
        se = math.sqrt(p * (1 - p) / trials)
        assert abs(hits / trials - p) <= 3 * se


class TestMoments:
    def test_infinite_edge(self):
        assert moment_interval_probability((0.0, 1.0), -math.inf, math.inf, 5, 0) == 1.0

    def test_point_mass(self):
        assert moment_interval_probability((1.0, 1.0), 0.5, 1.5, 10, 0) == 1.0

    def test_cantelli_arithmetic(self):
        p = moment_interval_probability((1.0, 2.0), -1.0, 3.0, 4, 0)
        assert p == pytest.approx(0.99936, abs=1e-12)

    def test_invalid(self):
        with pytest.raises(InvalidMoments):
            moment_interval_probability((2.0, 1.0), 0, 1, 10, 0)
        with pytest.raises(InvalidMoments):
            moment_interval_probability((math.nan, 1.0), 0, 1, 10, 0)

    def test_markov(self):
        # P{X >= 4} <= 1/4 for a nonnegative X of mean 1
        p = moment_interval_probability((1.0, 3.0), -1.0, 4.0, 0, 0, method="markov")
        assert p == pytest.approx(0.75)


class TestAssessment:
    def test_product(self):
        per = tuple(LagProbability(k, 0, 1, p, "Marginal") for k, p in enumerate((0.9, 0.8, 0.7)))
        assert ProbabilityAssessment(per).product == pytest.approx(0.504, abs=1e-15)

    def test_probability_range(self):
        with pytest.raises(ValidationError):
            LagProbability(0, 0, 1, 1.5, "Marginal")

    @pytest.mark.parametrize("method", ["marginal", "cantelli", "markov"])
    def test_assess_box(self, method):
        m = ProcessModel.ar1(0.5)
        box = LagBox.around(m.lags(2), 0.05)
        a = assess_box(m, box, 1000, method)
        assert len(a.per_lag) == 3 and 0 <= a.product <= 1

    def test_monte_carlo_whole_line(self):
        box = LagBox([-math.inf] * 3, [math.inf] * 3)
        a = monte_carlo_interval_probability(ProcessModel.ar1(0.5), box, 2, 200, 100, seed=1)
        assert a.joint == 1.0 and a.product == 1.0

    def test_monte_carlo_reproducible(self):
        m = ProcessModel.ar1(0.5)
        box = LagBox.around(m.lags(2), 0.1)
        a = monte_carlo_interval_probability(m, box, 2, 1000, 100, seed=5)
        b = monte_carlo_interval_probability(m, box, 2, 1000, 100, seed=5)
        assert a == b
        assert a.joint_ci[0] <= a.joint <= a.joint_ci[1]

    def test_monte_carlo_minimum_trials(self):
        with pytest.raises(ValidationError):
            monte_carlo_interval_probability(ProcessModel.white(), LagBox([0], [2]), 0, 100, 10)
