#cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops (Cython backend).

Draws come from numpy's own C distribution routines operating directly on
the bit generator state, so the stream is bit-identical to the pure-Python
kernels that call ``Generator.normal`` / ``Generator.random`` in the same
order.  The loops run without the GIL; callers hand each kernel its own
generator, and the bit generator's lock is held for the duration.
"""

from libc.math cimport INFINITY, log, sqrt

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_normal, random_standard_uniform

import numpy as np

BACKEND_NAME = "cython"

cdef const char *CAPSULE_NAME = "BitGenerator"


cdef bitgen_t *_bitgen(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, CAPSULE_NAME):
        raise ValueError("invalid BitGenerator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, CAPSULE_NAME)


def ts_run(arm_means, Py_ssize_t horizon, double noise_scale, rng):
    """Thompson-sampling run; same contract as the python backend."""
    cdef const double[::1] means = np.ascontiguousarray(arm_means, dtype=np.float64)
    cdef Py_ssize_t n_arms = means.shape[0]
    cdef long[::1] pulls = np.zeros(n_arms, dtype=np.int64)
    cdef double[::1] sums = np.zeros(n_arms, dtype=np.float64)
    actions_arr = np.empty(horizon, dtype=np.int64)
    rewards_arr = np.empty(horizon, dtype=np.float64)
    cdef long[::1] actions = actions_arr
    cdef double[::1] rewards = rewards_arr
    bit_generator = rng.bit_generator
    cdef bitgen_t *state = _bitgen(bit_generator)
    cdef Py_ssize_t t, i, best
    cdef double shifted, theta, best_theta, reward
    with bit_generator.lock, nogil:
        for t in range(horizon):
            best = 0
            best_theta = -INFINITY
            for i in range(n_arms):
                shifted = pulls[i] + 1
                theta = random_normal(state, sums[i] / shifted, sqrt(noise_scale / shifted))
                if theta > best_theta:
                    best = i
                    best_theta = theta
            reward = 1.0 if random_standard_uniform(state) < means[best] else 0.0
            pulls[best] += 1
            sums[best] += reward
            actions[t] = best
            rewards[t] = reward
    return actions_arr, rewards_arr


def ucb1_run(arm_means, Py_ssize_t horizon, rng):
    """UCB1 run; same contract as the python backend."""
    cdef const double[::1] means = np.ascontiguousarray(arm_means, dtype=np.float64)
    cdef Py_ssize_t n_arms = means.shape[0]
    cdef long[::1] pulls = np.zeros(n_arms, dtype=np.int64)
    cdef double[::1] sums = np.zeros(n_arms, dtype=np.float64)
    actions_arr = np.empty(horizon, dtype=np.int64)
    rewards_arr = np.empty(horizon, dtype=np.float64)
    cdef long[::1] actions = actions_arr
    cdef double[::1] rewards = rewards_arr
    bit_generator = rng.bit_generator
    cdef bitgen_t *state = _bitgen(bit_generator)
    cdef Py_ssize_t t, i, best
    cdef double log_t, index, best_index, reward
    with bit_generator.lock, nogil:
        for t in range(horizon):
            if t < n_arms:
                best = t
            else:
                log_t = log(<double> t)
                best = 0
                best_index = -INFINITY
                for i in range(n_arms):
                    index = sums[i] / pulls[i] + sqrt(2.0 * log_t / pulls[i])
                    if index > best_index:
                        best = i
                        best_index = index
            reward = 1.0 if random_standard_uniform(state) < means[best] else 0.0
            pulls[best] += 1
            sums[best] += reward
            actions[t] = best
            rewards[t] = reward
    return actions_arr, rewards_arr


def tape_trials(tape, double noise_scale, Py_ssize_t n_trials, rng):
    """Thompson trials on a fixed (T, K) reward tape; base-K outcome codes."""
    cdef const double[:, ::1] rows = np.ascontiguousarray(tape, dtype=np.float64)
    cdef Py_ssize_t horizon = rows.shape[0]
    cdef Py_ssize_t n_arms = rows.shape[1]
    cdef long[::1] pulls = np.zeros(n_arms, dtype=np.int64)
    cdef double[::1] sums = np.zeros(n_arms, dtype=np.float64)
    codes_arr = np.empty(n_trials, dtype=np.int64)
    cdef long[::1] codes = codes_arr
    bit_generator = rng.bit_generator
    cdef bitgen_t *state = _bitgen(bit_generator)
    cdef Py_ssize_t n, t, i, best
    cdef double shifted, theta, best_theta
    cdef long code
    with bit_generator.lock, nogil:
        for n in range(n_trials):
            for i in range(n_arms):
                pulls[i] = 0
                sums[i] = 0.0
            code = 0
            for t in range(horizon):
                best = 0
                best_theta = -INFINITY
                for i in range(n_arms):
                    shifted = pulls[i] + 1
                    theta = random_normal(state, sums[i] / shifted, sqrt(noise_scale / shifted))
                    if theta > best_theta:
                        best = i
                        best_theta = theta
                pulls[best] += 1
                sums[best] += rows[t, best]
                code = code * n_arms + best
            codes[n] = code
    return codes_arr
