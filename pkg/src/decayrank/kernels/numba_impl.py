"""Compiled loop kernels (numba ``@njit``).

Every function here has a vectorized twin in :mod:`.numpy_impl` with the same
signature. The walk and enumeration kernels perform the same floating-point
operations in the same order as their twins, so outputs agree bit for bit.
"""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def path_key(seed, path):
    return _mix64(seed + _GOLDEN * np.uint64(path + 1))


@njit(cache=True)
def _unit(z):
    return np.float64(np.int64(_mix64(z) >> _S11)) * _TO_UNIT


@njit(cache=True)
def uniform(key, step):
    # splitmix64 output number ``step`` of the substream keyed by ``key``
    return _unit(key + _GOLDEN * np.uint64(step + 1))


@njit(cache=True)
def simulate_walk(V, cum, phase_ends, alpha, y0, checkpoints, paths, seed):
    """Run ``paths`` walks ``y <- alpha*y + (1-alpha)*V[:, i]``.

    ``cum[p]`` holds the cumulative vertex probabilities of phase ``p`` and
    ``phase_ends`` the cumulative step count at which each phase ends. The
    state of every path is recorded at each entry of ``checkpoints`` (number
    of completed steps, ascending). Returns an array ``(paths, C, n)``.
    """
    n, m = V.shape
    n_phases = phase_ends.shape[0]
    total = phase_ends[n_phases - 1]
    n_ck = checkpoints.shape[0]
    beta = 1.0 - alpha
    out = np.empty((paths, n_ck, n))
    useed = np.uint64(seed)
    y = np.empty(n)
    for path in range(paths):
        z = path_key(useed, path)
        for k in range(n):
            y[k] = y0[k]
        c = 0
        phase = 0
        s = 0
        while True:
            while c < n_ck and checkpoints[c] == s:
                for k in range(n):
                    out[path, c, k] = y[k]
                c += 1
            if s >= total:
                break
            while s >= phase_ends[phase]:
                phase += 1
            stop = phase_ends[phase]
            if c < n_ck and checkpoints[c] < stop:
                stop = checkpoints[c]
            # tight loop up to the next phase change or checkpoint;
            # branchless vertex pick (count of cum entries <= u)
            if n == 1:
                y1 = y[0]
                while s < stop:
                    z += _GOLDEN
                    u = _unit(z)
                    idx = 0
                    for j in range(m - 1):
                        idx += np.int64(u >= cum[phase, j])
                    y1 = alpha * y1 + beta * V[0, idx]
                    s += 1
                y[0] = y1
            else:
                while s < stop:
                    z += _GOLDEN
                    u = _unit(z)
                    idx = 0
                    for j in range(m - 1):
                        idx += np.int64(u >= cum[phase, j])
                    for k in range(n):
                        y[k] = alpha * y[k] + beta * V[k, idx]
                    s += 1
    return out


@njit(cache=True)
def enumerate_support(V, q, alpha, y0, steps):
    """All ``m**steps`` endpoints in lexicographic vertex-sequence order.

    Returns ``(values, probs)`` with ``values`` of shape ``(m**steps, n)``.
    """
    n, m = V.shape
    total = 1
    for _ in range(steps):
        total *= m
    beta = 1.0 - alpha
    values = np.empty((total, n))
    probs = np.empty(total)
    y = np.empty(n)
    for idx in range(total):
        for k in range(n):
            y[k] = y0[k]
        p = 1.0
        divisor = total
        rem = idx
        for _ in range(steps):
            divisor //= m
            d = rem // divisor
            rem -= d * divisor
            for k in range(n):
                y[k] = alpha * y[k] + beta * V[k, d]
            p *= q[d]
        for k in range(n):
            values[idx, k] = y[k]
        probs[idx] = p
    return values, probs


@njit(cache=True)
def weighted_central_sums(values, probs, center, max_order):
    """Compensated sums of ``p * (x - c)**k`` and of the centered cross products.

    Returns ``(powers, cross)``: ``powers[k, a] = sum p (x_a - c_a)**k`` for
    ``k <= max_order`` and ``cross[a, b] = sum p (x_a - c_a)(x_b - c_b)``.
    Uses Neumaier summation.
    """
    N, n = values.shape
    powers = np.zeros((max_order + 1, n))
    powers_c = np.zeros((max_order + 1, n))
    cross = np.zeros((n, n))
    cross_c = np.zeros((n, n))
    d = np.empty(n)
    for i in range(N):
        p = probs[i]
        for a in range(n):
            d[a] = values[i, a] - center[a]
        for a in range(n):
            term = p
            for k in range(max_order + 1):
                s = powers[k, a]
                t = s + term
                if abs(s) >= abs(term):
                    powers_c[k, a] += (s - t) + term
                else:
                    powers_c[k, a] += (term - t) + s
                powers[k, a] = t
                term *= d[a]
            for b in range(n):
                term = p * d[a] * d[b]
                s = cross[a, b]
                t = s + term
                if abs(s) >= abs(term):
                    cross_c[a, b] += (s - t) + term
                else:
                    cross_c[a, b] += (term - t) + s
                cross[a, b] = t
    return powers + powers_c, cross + cross_c
