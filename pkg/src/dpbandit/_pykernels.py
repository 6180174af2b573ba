"""Pure-Python hot loops, the fallback backend.

These replay exactly the same random stream as the compiled kernels in
``dpbandit._ckernels``: both consume the generator through numpy's scalar
``normal``/``random`` transformations, in the same call order, so results
are bit-identical across backends.  The per-round semantics mirror
``dpbandit.bandit.step`` (parity is enforced by tests).
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"


def ts_run(arm_means, horizon, noise_scale, rng):
    """Simulate one Thompson-sampling run against a Bernoulli environment.

    Per round: one Gaussian draw per arm in index order, argmax with
    lowest-index ties, then one uniform draw for the pulled arm's reward.
    Returns (actions, rewards) arrays of length ``horizon``.
    """
    means = [float(m) for m in arm_means]
    n_arms = len(means)
    scale = float(noise_scale)
    pulls = [0] * n_arms
    sums = [0.0] * n_arms
    actions = np.empty(horizon, dtype=np.int64)
    rewards = np.empty(horizon, dtype=np.float64)
    normal = rng.normal
    uniform = rng.random
    for t in range(horizon):
        best = 0
        best_theta = -math.inf
        for i in range(n_arms):
            shifted = pulls[i] + 1
            theta = normal(sums[i] / shifted, math.sqrt(scale / shifted))
            if theta > best_theta:
                best = i
                best_theta = theta
        reward = 1.0 if uniform() < means[best] else 0.0
        pulls[best] += 1
        sums[best] += reward
        actions[t] = best
        rewards[t] = reward
    return actions, rewards


def ucb1_run(arm_means, horizon, rng):
    """Simulate one UCB1 run; consumes one uniform draw per round."""
    means = [float(m) for m in arm_means]
    n_arms = len(means)
    pulls = [0] * n_arms
    sums = [0.0] * n_arms
    actions = np.empty(horizon, dtype=np.int64)
    rewards = np.empty(horizon, dtype=np.float64)
    uniform = rng.random
    for t in range(horizon):
        if t < n_arms:
            best = t
        else:
            log_t = math.log(t)
            best = 0
            best_index = -math.inf
            for i in range(n_arms):
                index = sums[i] / pulls[i] + math.sqrt(2.0 * log_t / pulls[i])
                if index > best_index:
                    best = i
                    best_index = index
        reward = 1.0 if uniform() < means[best] else 0.0
        pulls[best] += 1
        sums[best] += reward
        actions[t] = best
        rewards[t] = reward
    return actions, rewards


def tape_trials(tape, noise_scale, n_trials, rng):
    """Run Thompson-sampling trials on a fixed reward tape.

    ``tape`` is a (T, K) array; the reward at round t is ``tape[t, action]``
    and consumes no randomness.  Each trial's action sequence is encoded as
    a base-K integer (round 0 most significant).  Returns int64 codes.
    """
    tape = np.asarray(tape, dtype=np.float64)
    horizon, n_arms = tape.shape
    scale = float(noise_scale)
    codes = np.empty(n_trials, dtype=np.int64)
    normal = rng.normal
    rows = tape.tolist()
    for n in range(n_trials):
        pulls = [0] * n_arms
        sums = [0.0] * n_arms
        code = 0
        for t in range(horizon):
            best = 0
            best_theta = -math.inf
            for i in range(n_arms):
                shifted = pulls[i] + 1
                theta = normal(sums[i] / shifted, math.sqrt(scale / shifted))
                if theta > best_theta:
                    best = i
                    best_theta = theta
            pulls[best] += 1
            sums[best] += rows[t][best]
            code = code * n_arms + best
        codes[n] = code
    return codes
