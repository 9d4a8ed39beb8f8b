"""Vectorized numpy kernels; drop-in twins of :mod:`.numba_impl`."""
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TO_UNIT = 1.0 / 9007199254740992.0
_MASK = (1 << 64) - 1


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def path_keys(seed, paths):
    idx = np.arange(1, paths + 1, dtype=np.uint64)
    return _mix64(np.uint64(seed & _MASK) + _GOLDEN * idx)


def uniforms(keys, step):
    z = _mix64(keys + np.uint64((int(_GOLDEN) * (step + 1)) & _MASK))
    return (z >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def simulate_walk(V, cum, phase_ends, alpha, y0, checkpoints, paths, seed):
    n, m = V.shape
    total = int(phase_ends[-1])
    beta = 1.0 - alpha
    VT = np.ascontiguousarray(V.T)
    out = np.empty((paths, len(checkpoints), n))
    keys = path_keys(seed, paths)
    Y = np.tile(np.asarray(y0, dtype=np.float64), (paths, 1))
    c = 0
    while c < len(checkpoints) and checkpoints[c] == 0:
        out[:, c, :] = Y
        c += 1
    phase = 0
    for s in range(total):
        while s >= phase_ends[phase]:
            phase += 1
        u = uniforms(keys, s)
        idx = np.searchsorted(cum[phase, : m - 1], u, side="right")
        Y = alpha * Y + beta * VT[idx]
        while c < len(checkpoints) and checkpoints[c] == s + 1:
            out[:, c, :] = Y
            c += 1
    return out


def enumerate_support(V, q, alpha, y0, steps):
    n, m = V.shape
    beta = 1.0 - alpha
    VT = V.T
    values = np.asarray(y0, dtype=np.float64).reshape(1, n)
    probs = np.ones(1)
    for _ in range(steps):
        values = (alpha * values[:, None, :] + beta * VT[None, :, :]).reshape(-1, n)
        probs = (probs[:, None] * q[None, :]).reshape(-1)
    return values, probs


def weighted_central_sums(values, probs, center, max_order):
    # pairwise summation in extended precision stands in for compensation
    ld = np.longdouble
    d = values.astype(ld) - np.asarray(center, dtype=ld)
    p = probs.astype(ld)
    powers = np.empty((max_order + 1, values.shape[1]))
    term = np.broadcast_to(p[:, None], d.shape).copy()
    for k in range(max_order + 1):
        powers[k] = term.sum(axis=0)
        term = term * d
    cross = np.einsum("i,ia,ib->ab", p, d, d).astype(np.float64)
    return powers, cross
