"""Bandit-core tests: posterior arithmetic, selection, and stepping."""

import math

import numpy as np
import pytest

from dpbandit.bandit import (
    AgentKind,
    AgentSpec,
    AgentState,
    ArmPosterior,
    BanditInstance,
    RewardLaw,
    posterior_sample,
    posterior_update,
    posterior_variance,
    select_action,
    step,
    ucb1_select,
)
from dpbandit.errors import ConfigurationError, DomainError


def make_rng(*entropy):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


class TestTypes:
    def test_instance_validation(self):
        with pytest.raises(ConfigurationError):
            BanditInstance(())
        with pytest.raises(DomainError):
            BanditInstance((0.5, 1.2))
        with pytest.raises(DomainError):
            BanditInstance((-0.01,))

    def test_instance_properties(self):
        env = BanditInstance((0.2, 0.9, 0.5))
        assert env.n_arms == 3
        assert env.best_mean == 0.9
        assert env.reward_law is RewardLaw.BERNOULLI

    def test_posterior_validation(self):
        with pytest.raises(DomainError):
            ArmPosterior(pulls=-1)
        with pytest.raises(DomainError):
            ArmPosterior(pulls=2, reward_sum=2.5)
        with pytest.raises(DomainError):
            ArmPosterior(pulls=0, reward_sum=-0.1)
        assert ArmPosterior(pulls=2, reward_sum=2.0).mean == pytest.approx(2 / 3)

    def test_privacy_spec_validation(self):
        with pytest.raises(ConfigurationError):
            AgentSpec.privacy(epsilon_target=0.0, horizon=100)
        with pytest.raises(ConfigurationError):
            AgentSpec.privacy(epsilon_target=1.0, horizon=1)
        spec = AgentSpec.privacy(epsilon_target=1.0, horizon=2)
        assert spec.kind is AgentKind.TS_PRIVACY

    def test_state_accounting(self):
        state = AgentState.fresh(4)
        assert state.n_arms == 4
        assert state.total_pulls() == 0
        assert state.round == 0


class TestPosteriorUpdate:
    def test_first_unit_reward(self):
        post = posterior_update(ArmPosterior(), 1.0)
        assert (post.pulls, post.reward_sum) == (1, 1.0)
        assert post.mean == 0.5

    def test_first_zero_reward(self):
        post = posterior_update(ArmPosterior(), 0.0)
        assert (post.pulls, post.reward_sum) == (1, 0.0)
        assert post.mean == 0.0

    def test_fractional_reward(self):
        post = posterior_update(ArmPosterior(pulls=3, reward_sum=2.0), 0.5)
        assert (post.pulls, post.reward_sum) == (4, 2.5)
        assert post.mean == 0.5

    @pytest.mark.parametrize("reward", [-0.1, 1.5, math.nan])
    def test_out_of_range_reward(self, reward):
        with pytest.raises(DomainError):
            posterior_update(ArmPosterior(), reward)


class TestPosteriorVariance:
    def test_standard_unpulled(self):
        assert posterior_variance(ArmPosterior(), AgentSpec.standard()) == 1.0

    def test_privacy_collapses_to_standard_at_matching_epsilon(self):
        # epsilon equal to (ln T)^2 makes the scale exactly 1.0
        horizon = 1000
        spec = AgentSpec.privacy(math.log(horizon) ** 2, horizon)
        for pulls in range(50):
            post = ArmPosterior(pulls=pulls, reward_sum=0.0)
            assert posterior_variance(post, spec) == 1.0 / (pulls + 1)

    def test_privacy_value(self):
        # horizon e^2 puts ln(horizon) at 2, so the unpulled variance is 4
        spec = AgentSpec.privacy(epsilon_target=1.0, horizon=math.e**2)
        assert posterior_variance(ArmPosterior(), spec) == pytest.approx(4.0, rel=1e-12)

    def test_strictly_decreasing_in_pulls(self):
        for spec in (AgentSpec.standard(), AgentSpec.privacy(0.5, 1000)):
            values = [
                posterior_variance(ArmPosterior(pulls=k), spec) for k in range(200)
            ]
            assert all(v > 0 for v in values)
            assert all(a > b for a, b in zip(values, values[1:]))

    def test_ucb1_has_no_posterior(self):
        with pytest.raises(ConfigurationError):
            posterior_variance(ArmPosterior(), AgentSpec.ucb1())


class TestSelectAction:
    def test_single_arm(self):
        state = AgentState.fresh(1)
        assert select_action(state, AgentSpec.standard(), make_rng(0)) == 0

    def test_deterministic_given_seed(self):
        state = AgentState(
            [ArmPosterior(5, 2.0), ArmPosterior(3, 3.0), ArmPosterior(0, 0.0)], 8
        )
        picks = [
            select_action(state, AgentSpec.standard(), make_rng(99)) for _ in range(5)
        ]
        assert len(set(picks)) == 1

    def test_consumes_exactly_one_draw_per_arm(self):
        state = AgentState([ArmPosterior(2, 1.0), ArmPosterior(4, 2.0)], 6)
        rng_a = make_rng(7)
        select_action(state, AgentSpec.standard(), rng_a)
        rng_b = make_rng(7)
        for post in state.posteriors:
            posterior_sample(post, AgentSpec.standard(), rng_b)
        assert rng_a.random() == rng_b.random()

    def test_overwhelming_leader_never_loses(self):
        # gap ~1 against noise sigma ~1e-3: the tail probability of the
        # trailing arm winning is below 1e-9, so 1e5 draws see none
        n = 10**6
        state = AgentState(
            [ArmPosterior(n, float(n)), ArmPosterior(n, 0.0)], 2 * n
        )
        rng = make_rng(2024)
        assert all(
            select_action(state, AgentSpec.standard(), rng) == 0 for _ in range(10**5)
        )

    def test_moment_check_of_posterior_sampling(self):
        # fixed posterior: mean 0.5, variance 0.25
        post = ArmPosterior(pulls=3, reward_sum=2.0)
        spec = AgentSpec.standard()
        sigma2 = posterior_variance(post, spec)
        sigma = math.sqrt(sigma2)
        n = 10**5
        rng = make_rng(31337)
        draws = np.array([posterior_sample(post, spec, rng) for _ in range(n)])
        assert abs(draws.mean() - post.mean) <= 4 * sigma / math.sqrt(n)
        assert abs(draws.var() - sigma2) <= 5 * sigma2 * math.sqrt(2 / n)


class TestUcb1Select:
    def test_forced_initialization_order(self):
        rng = make_rng(0)
        state = AgentState.fresh(3)
        assert ucb1_select(state, rng) == 0
        state = AgentState(
            [ArmPosterior(1, 0.0), ArmPosterior(), ArmPosterior()], 1
        )
        assert ucb1_select(state, rng) == 1

    def test_index_comparison(self):
        # means 0.9 vs 0.1 with equal pulls: equal bonuses, arm 0 wins
        state = AgentState([ArmPosterior(10, 9.0), ArmPosterior(10, 1.0)], 20)
        rng = make_rng(0)
        assert ucb1_select(state, rng) == 0
        # oracle: evaluate both indexes directly
        bonus = math.sqrt(2 * math.log(20) / 10)
        assert 0.9 + bonus > 0.1 + bonus

    def test_bonus_can_overturn_means(self):
        # arm 1 is barely behind on mean but much less explored
        state = AgentState([ArmPosterior(400, 200.0), ArmPosterior(4, 1.6)], 404)
        index0 = 0.5 + math.sqrt(2 * math.log(404) / 400)
        index1 = 0.4 + math.sqrt(2 * math.log(404) / 4)
        assert index1 > index0
        assert ucb1_select(state, make_rng(0)) == 1


class TestStep:
    def test_zero_mean_environment(self):
        env = BanditInstance((0.0, 0.0))
        state = AgentState.fresh(2)
        rng = make_rng(5)
        for _ in range(20):
            action, reward, state = step(env, state, AgentSpec.standard(), rng)
            assert reward == 0.0
            assert state.posteriors[action].mean == 0.0

    def test_unit_mean_environment(self):
        env = BanditInstance((1.0,))
        state = AgentState.fresh(1)
        rng = make_rng(5)
        for _ in range(20):
            _, reward, state = step(env, state, AgentSpec.standard(), rng)
            assert reward == 1.0

    def test_deterministic_replay(self):
        env = BanditInstance((0.8, 0.4, 0.1))
        seqs = []
        for _ in range(2):
            rng = make_rng(17)
            state = AgentState.fresh(3)
            seq = []
            for _ in range(50):
                action, reward, state = step(env, state, AgentSpec.standard(), rng)
                seq.append((action, reward))
            seqs.append(seq)
        assert seqs[0] == seqs[1]

    def test_pull_counts_match_round(self):
        env = BanditInstance((0.6, 0.3))
        state = AgentState.fresh(2)
        rng = make_rng(3)
        for t in range(1, 101):
            _, _, state = step(env, state, AgentSpec.ucb1(), rng)
            assert state.total_pulls() == t
            assert state.round == t

    def test_privacy_matches_standard_at_identity_epsilon(self):
        horizon = 64
        env = BanditInstance((0.9, 0.5, 0.2))
        spec_priv = AgentSpec.privacy(math.log(horizon) ** 2, horizon)
        actions = {}
        for label, spec in (("std", AgentSpec.standard()), ("priv", spec_priv)):
            rng = make_rng(1234)
            state = AgentState.fresh(3)
            seq = []
            for _ in range(horizon):
                action, _, state = step(env, state, spec, rng)
                seq.append(action)
            actions[label] = seq
        assert actions["std"] == actions["priv"]

    def test_tape_environment_rejected(self):
        env = BanditInstance((0.5,), reward_law=RewardLaw.TAPE)
        with pytest.raises(ConfigurationError):
            step(env, AgentState.fresh(1), AgentSpec.standard(), make_rng(0))

    def test_privacy_agent_cannot_outrun_horizon(self):
        env = BanditInstance((0.5,))
        spec = AgentSpec.privacy(1.0, 2)
        state = AgentState.fresh(1)
        rng = make_rng(0)
        for _ in range(2):
            _, _, state = step(env, state, spec, rng)
        with pytest.raises(ConfigurationError):
            step(env, state, spec, rng)
