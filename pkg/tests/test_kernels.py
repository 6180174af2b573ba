"""Backend tests: compiled and pure-Python kernels replay identical streams."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from dpbandit import _pykernels, kernels
from dpbandit.bandit import (
    AgentSpec,
    AgentState,
    ArmPosterior,
    posterior_update,
    select_action,
    ucb1_select,
)

BACKENDS = kernels.available_backends()
HAS_CYTHON = "cython" in BACKENDS


def make_rng(*entropy):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def reference_ts_run(arm_means, horizon, spec, rng):
    """Drive the per-operation API as the ground truth for the kernels."""
    state = AgentState.fresh(len(arm_means))
    actions = []
    rewards = []
    for _ in range(horizon):
        action = select_action(state, spec, rng)
        reward = 1.0 if rng.random() < arm_means[action] else 0.0
        posteriors = list(state.posteriors)
        posteriors[action] = posterior_update(posteriors[action], reward)
        state = AgentState(posteriors, state.round + 1)
        actions.append(action)
        rewards.append(reward)
    return np.array(actions), np.array(rewards)


def reference_tape_codes(tape, spec, trials, rng):
    horizon, n_arms = tape.shape
    codes = []
    for _ in range(trials):
        state = AgentState.fresh(n_arms)
        code = 0
        for t in range(horizon):
            action = select_action(state, spec, rng)
            posteriors = list(state.posteriors)
            posteriors[action] = posterior_update(posteriors[action], tape[t, action])
            state = AgentState(posteriors, state.round + 1)
            code = code * n_arms + action
        codes.append(code)
    return np.array(codes)


@pytest.mark.parametrize("name", sorted(BACKENDS))
class TestAgainstReference:
    def test_ts_run_standard(self, name):
        means = np.array([0.85, 0.6, 0.35, 0.1])
        ref_actions, ref_rewards = reference_ts_run(
            means, 200, AgentSpec.standard(), make_rng(404, 0)
        )
        actions, rewards = BACKENDS[name].ts_run(means, 200, 1.0, make_rng(404, 0))
        assert np.array_equal(actions, ref_actions)
        assert np.array_equal(rewards, ref_rewards)

    def test_ts_run_privacy(self, name):
        means = np.array([0.7, 0.3])
        spec = AgentSpec.privacy(epsilon_target=2.0, horizon=150)
        ref_actions, ref_rewards = reference_ts_run(means, 150, spec, make_rng(77, 1))
        actions, rewards = BACKENDS[name].ts_run(
            means, 150, spec.noise_scale(), make_rng(77, 1)
        )
        assert np.array_equal(actions, ref_actions)
        assert np.array_equal(rewards, ref_rewards)

    def test_ucb1_run(self, name):
        means = np.array([0.8, 0.5, 0.2])
        rng = make_rng(11, 2)
        state = AgentState.fresh(3)
        ref_actions = []
        for _ in range(120):
            action = ucb1_select(state, rng)
            reward = 1.0 if rng.random() < means[action] else 0.0
            posteriors = list(state.posteriors)
            posteriors[action] = posterior_update(posteriors[action], reward)
            state = AgentState(posteriors, state.round + 1)
            ref_actions.append(action)
        actions, _ = BACKENDS[name].ucb1_run(means, 120, make_rng(11, 2))
        assert np.array_equal(actions, np.array(ref_actions))

    def test_tape_trials(self, name):
        tape = np.array([[1.0, 0.0], [0.25, 0.75], [0.0, 1.0]])
        ref = reference_tape_codes(tape, AgentSpec.standard(), 40, make_rng(5, 3))
        codes = BACKENDS[name].tape_trials(tape, 1.0, 40, make_rng(5, 3))
        assert np.array_equal(codes, ref)


@pytest.mark.skipif(not HAS_CYTHON, reason="compiled kernels unavailable")
class TestBackendParity:
    @pytest.mark.parametrize("noise_scale", [1.0, 47.71708299430558, 0.3])
    def test_ts_run(self, noise_scale):
        means = np.array([0.9, 0.8, 0.7, 0.6, 0.5])
        results = {}
        for name, module in BACKENDS.items():
            results[name] = module.ts_run(means, 500, noise_scale, make_rng(1001))
        assert np.array_equal(results["python"][0], results["cython"][0])
        assert np.array_equal(results["python"][1], results["cython"][1])

    def test_ucb1_run(self):
        means = np.array([0.9, 0.1])
        results = {
            name: module.ucb1_run(means, 500, make_rng(1002))
            for name, module in BACKENDS.items()
        }
        assert np.array_equal(results["python"][0], results["cython"][0])
        assert np.array_equal(results["python"][1], results["cython"][1])

    def test_tape_trials(self):
        rng = make_rng(99)
        tape = rng.random((4, 2))
        results = {
            name: module.tape_trials(tape, 3.5, 300, make_rng(1003))
            for name, module in BACKENDS.items()
        }
        assert np.array_equal(results["python"], results["cython"])

    def test_readonly_tape_accepted(self):
        tape = np.array([[1.0, 0.0], [0.0, 1.0]])
        tape.flags.writeable = False
        for module in BACKENDS.values():
            module.tape_trials(tape, 1.0, 5, make_rng(4))


class TestSelection:
    def test_backend_reports_a_known_name(self):
        assert kernels.backend() in ("cython", "python")

    def test_python_fallback_always_listed(self):
        assert "python" in BACKENDS
        assert BACKENDS["python"] is _pykernels

    def test_env_var_forces_fallback(self):
        env = dict(os.environ, DPBANDIT_PURE_PYTHON="1")
        out = subprocess.run(
            [sys.executable, "-c", "import dpbandit; print(dpbandit.backend())"],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        assert out.stdout.strip() == "python"
