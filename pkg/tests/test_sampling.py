import numpy as np
import pytest
from hypothesis import given, strategies as st

from smoothbandits.core import (
    Context,
    ContinuousAction,
    DiscreteAction,
    FiniteActions,
    IntervalActions,
    SmoothingCap,
    seeded_rng,
)
from smoothbandits.sampling import (
    FiniteDistribution,
    IgwParams,
    exact_finite_distribution,
    igw_density,
    make_igw_params,
    rejection_sample,
    rejection_sample_batch,
    submeasure_total,
)

from helpers import CountingOracle, CountingRng, FrozenOracle, empirical_tv

CTX = Context()


def params_for(values, h, gamma):
    oracle = FrozenOracle(values)
    space = FiniteActions(len(values))
    return oracle, space, make_igw_params(oracle, CTX, space, SmoothingCap(h), gamma)


class TestIgwDensity:
    def test_zero_gap_gives_one(self):
        p = IgwParams(SmoothingCap(0.5), 3.0, DiscreteAction(1), 0.4)
        assert igw_density(p, 0.4) == 1.0

    def test_hand_evaluated_values(self):
        p = IgwParams(SmoothingCap(0.5), 4.0, DiscreteAction(1), 0.0)
        assert igw_density(p, 0.5) == pytest.approx(0.5)
        p = IgwParams(SmoothingCap(1.0), 100.0, DiscreteAction(1), 0.0)
        assert igw_density(p, 1.0) == pytest.approx(1.0 / 101.0)

    def test_tiny_negative_gap_clamps_to_one(self):
        p = IgwParams(SmoothingCap(1.0), 10.0, DiscreteAction(1), 0.5)
        assert igw_density(p, 0.5 - 5e-13) == 1.0

    def test_large_negative_gap_signals_broken_argmin(self):
        p = IgwParams(SmoothingCap(1.0), 10.0, DiscreteAction(1), 0.5)
        with pytest.raises(ValueError, match="argmin"):
            igw_density(p, 0.4)

    @given(
        h=st.floats(0.01, 1.0),
        gamma=st.floats(0.01, 1e4),
        gap=st.floats(0.0, 1.0),
    )
    def test_density_lies_in_unit_interval(self, h, gamma, gap):
        p = IgwParams(SmoothingCap(h), gamma, DiscreteAction(1), 0.0)
        m = igw_density(p, gap)
        assert 0.0 < m <= 1.0

    @given(gap=st.floats(1e-6, 1.0), h=st.floats(0.01, 1.0))
    def test_density_monotone_nonincreasing_in_gamma(self, gap, h):
        ms = [
            igw_density(IgwParams(SmoothingCap(h), g, DiscreteAction(1), 0.0), gap)
            for g in (1.0, 10.0, 100.0)
        ]
        assert ms[0] >= ms[1] >= ms[2]

    def test_vanishing_gamma_accepts_everything(self):
        p = IgwParams(SmoothingCap(1.0), 1e-12, DiscreteAction(1), 0.0)
        assert igw_density(p, 1.0) == pytest.approx(1.0, abs=1e-9)

    def test_gamma_must_be_positive(self):
        with pytest.raises(ValueError):
            IgwParams(SmoothingCap(1.0), 0.0, DiscreteAction(1), 0.0)


class TestExactFiniteDistribution:
    def test_constant_estimates_give_uniform(self):
        for K in (1, 2, 7):
            _, space, p = params_for([0.3] * K, 1.0, 50.0)
            oracle = FrozenOracle([0.3] * K)
            dist = exact_finite_distribution(oracle, CTX, space, p)
            assert np.allclose(dist.probabilities, np.full(K, 1.0 / K))

    def test_two_arm_hand_value(self):
        oracle, space, p = params_for([0.0, 1.0], 1.0, 1.0)
        dist = exact_finite_distribution(oracle, CTX, space, p)
        assert np.allclose(dist.probabilities, [0.75, 0.25])

    def test_three_arm_water_fill_of_leftover_mass(self):
        oracle, space, p = params_for([0.0, 0.5, 1.0], 1.0, 2.0)
        dist = exact_finite_distribution(oracle, CTX, space, p)
        assert np.allclose(dist.probabilities, [13.0 / 18.0, 3.0 / 18.0, 2.0 / 18.0], atol=1e-12)

    @given(st.data())
    def test_probability_vector_with_greedy_floor(self, data):
        K = data.draw(st.integers(2, 12))
        values = data.draw(
            st.lists(st.floats(0.0, 1.0), min_size=K, max_size=K).map(np.array)
        )
        gamma = data.draw(st.sampled_from([1.0, 10.0, 100.0]))
        h = data.draw(st.sampled_from([0.1, 0.5, 1.0]))
        oracle, space, p = params_for(values, h, gamma)
        dist = exact_finite_distribution(oracle, CTX, space, p)
        probs = dist.probabilities
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(probs >= 0.0)
        # the greedy arm keeps at least its base-measure mass
        assert probs[p.greedy_action.index - 1] >= 1.0 / K - 1e-12

    def test_distribution_type_validates(self):
        with pytest.raises(ValueError):
            FiniteDistribution(np.array([0.5, 0.4]))
        with pytest.raises(ValueError):
            FiniteDistribution(np.array([1.5, -0.5]))


class TestSubmeasureTotal:
    def test_constant_estimate_gives_full_mass(self):
        oracle, space, p = params_for([0.2, 0.2, 0.2], 0.5, 10.0)
        assert submeasure_total(oracle, CTX, space, p) == pytest.approx(1.0)

    def test_two_arm_hand_value(self):
        oracle, space, p = params_for([0.0, 1.0], 1.0, 1.0)
        assert submeasure_total(oracle, CTX, space, p) == pytest.approx(0.75)

    def test_huge_gamma_leaves_only_the_greedy_arm(self):
        oracle, space, p = params_for([0.0, 1.0, 1.0, 1.0], 1.0, 1e12)
        assert submeasure_total(oracle, CTX, space, p) == pytest.approx(0.25, abs=1e-9)


class TestRejectionSample:
    def test_cost_model_one_base_draw_two_predictions(self):
        oracle = CountingOracle(FrozenOracle([0.1, 0.6, 0.9]))
        space = FiniteActions(3)
        params = make_igw_params(oracle, CTX, space, SmoothingCap(0.5), 10.0)
        predict_before = oracle.predict_calls
        rng = CountingRng(seeded_rng(0, "cost"))
        rejection_sample(oracle, CTX, space, params, rng)
        # one proposal prediction per draw (the greedy value is cached on params)
        assert oracle.predict_calls - predict_before == 1
        assert rng.integer_draws == 1  # exactly one base-measure draw
        assert rng.uniform_draws == 1  # plus the Bernoulli accept draw

    def test_constant_estimates_return_base_measure(self):
        oracle = FrozenOracle([0.4] * 6)
        space = FiniteActions(6)
        params = make_igw_params(oracle, CTX, space, SmoothingCap(1.0), 500.0)
        rng = seeded_rng(3, "base")
        counts = np.zeros(6)
        for _ in range(30_000):
            counts[rejection_sample(oracle, CTX, space, params, rng).index - 1] += 1
        assert empirical_tv(counts, np.full(6, 1.0 / 6.0)) < 0.02

    def test_two_arm_law_matches_exact_distribution(self):
        oracle, space, params = params_for([0.0, 1.0], 1.0, 1.0)
        rng = seeded_rng(11, "law")
        counts = np.zeros(2)
        n = 200_000
        for _ in range(n):
            counts[rejection_sample(oracle, CTX, space, params, rng).index - 1] += 1
        assert counts[0] / n == pytest.approx(0.75, abs=0.005)

    def test_interval_sampler_returns_valid_actions(self):
        oracle = FrozenOracle([])
        oracle.predict = lambda context, action: min(1.0, abs(action.value - 0.3))
        space = IntervalActions()
        params = IgwParams(SmoothingCap(0.2), 50.0, ContinuousAction(0.3), 0.0)
        rng = seeded_rng(5, "interval")
        actions = [rejection_sample(oracle, CTX, space, params, rng) for _ in range(2000)]
        values = np.array([a.value for a in actions])
        assert np.all((values >= 0.0) & (values <= 1.0))
        # rejected proposals fall back to the greedy action
        assert (values == 0.3).mean() > 0.3

    def test_batch_sampler_matches_exact_distribution(self):
        rng = seeded_rng(21, "batch")
        values = rng.random(9)
        oracle, space, params = params_for(values, 0.25, 10.0)
        exact = exact_finite_distribution(oracle, CTX, space, params).probabilities
        draws = rejection_sample_batch(oracle, CTX, space, params, rng, 300_000)
        counts = np.bincount(draws, minlength=10)[1:]
        assert empirical_tv(counts, exact) < 0.008

    def test_batch_sampler_on_interval_space(self):
        oracle = FrozenOracle([])
        oracle.predict = lambda context, action: 0.5
        space = IntervalActions()
        params = IgwParams(SmoothingCap(1.0), 10.0, ContinuousAction(0.5), 0.5)
        draws = rejection_sample_batch(oracle, CTX, space, params, seeded_rng(0, "bi"), 20_000)
        # constant estimate: every proposal accepted, so the law is uniform
        assert abs(draws.mean() - 0.5) < 0.01
        assert np.all((draws >= 0) & (draws <= 1))
