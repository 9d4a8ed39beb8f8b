"""The numba and numpy kernels must agree bit for bit."""
import numpy as np
import pytest

from decayrank import kernels
from decayrank.kernels import numpy_impl
from decayrank.walk import VertexSet, WalkConfig

numba_impl = pytest.importorskip("decayrank.kernels.numba_impl")


def _args(cfg, checkpoints):
    cum, ends = cfg.phase_table()
    V = np.ascontiguousarray(cfg.vertices.as_matrix(), dtype=np.float64)
    ck = np.asarray(checkpoints, dtype=np.int64)
    return (V, np.ascontiguousarray(cum), ends, float(cfg.alpha), cfg.y0.astype(np.float64),
            ck, cfg.paths, np.uint64(cfg.seed))


CONFIGS = [
    WalkConfig(alpha=0.9, q=[0.7, 0.3], vertices=VertexSet.real([[0.0, 1.0]]), y0=[0.5], steps=40, paths=257, seed=3),
    WalkConfig(alpha=0.8, q=[0.5, 0.3, 0.2], vertices=VertexSet.simplex(3), steps=25, paths=100, seed=2**64 - 1),
    WalkConfig(alpha=0.95, q=[0.2, 0.3, 0.5], vertices=VertexSet.roots_of_unity(3), steps=30, paths=64, seed=11,
               extra_phases=(([0.6, 0.2, 0.2], 10),)),
]


@pytest.mark.parametrize("cfg", CONFIGS)
def test_simulate_backends_identical(cfg):
    cks = [0, 1, 7, cfg.total_steps]
    a = numba_impl.simulate_walk(*_args(cfg, cks))
    b = numpy_impl.simulate_walk(*_args(cfg, cks))
    assert a.shape == (cfg.paths, len(cks), cfg.vertices.dim)
    assert np.array_equal(a, b)


def test_uniform_streams_match():
    keys = numpy_impl.path_keys(np.uint64(12345), 50)
    for step in (0, 1, 99):
        u = numpy_impl.uniforms(keys, step)
        ref = [numba_impl.uniform(np.uint64(numba_impl.path_key(np.uint64(12345), np.int64(p))), np.int64(step)) for p in range(50)]
        assert np.array_equal(u, np.array(ref))
        assert np.all((u >= 0) & (u < 1))


def test_enumeration_backends_agree():
    V = np.array([[0.0, 1.0, 3.0]])
    q = np.array([0.2, 0.5, 0.3])
    y0 = np.array([0.4])
    va, pa = numba_impl.enumerate_support(V, q, 0.7, y0, 6)
    vb, pb = numpy_impl.enumerate_support(V, q, 0.7, y0, 6)
    assert va.shape == vb.shape == (3**6, 1)
    np.testing.assert_allclose(va, vb, rtol=0, atol=1e-15)
    np.testing.assert_allclose(pa, pb, rtol=1e-15)
    assert abs(pa.sum() - 1.0) < 1e-14
    ca, xa = numba_impl.weighted_central_sums(va, pa, np.array([0.5]), 4)
    cb, xb = numpy_impl.weighted_central_sums(vb, pb, np.array([0.5]), 4)
    np.testing.assert_allclose(ca, cb, rtol=1e-13, atol=1e-16)
    np.testing.assert_allclose(xa, xb, rtol=1e-13, atol=1e-16)


def test_seed_determinism_and_independence():
    cfg = CONFIGS[0]
    a = kernels.simulate_walk(*_args(cfg, [cfg.steps]))
    b = kernels.simulate_walk(*_args(cfg, [cfg.steps]))
    assert np.array_equal(a, b)
    other = WalkConfig(alpha=cfg.alpha, q=cfg.q, vertices=cfg.vertices, y0=cfg.y0, steps=cfg.steps,
                       paths=cfg.paths, seed=cfg.seed + 1)
    c = kernels.simulate_walk(*_args(other, [other.steps]))
    assert not np.array_equal(a, c)


def test_path_prefix_stable_under_more_paths():
    # each path has its own substream, so adding paths leaves earlier ones untouched
    cfg = CONFIGS[1]
    small = kernels.simulate_walk(*_args(cfg, [cfg.steps]))
    big_cfg = WalkConfig(alpha=cfg.alpha, q=cfg.q, vertices=cfg.vertices, steps=cfg.steps, paths=500, seed=cfg.seed)
    big = kernels.simulate_walk(*_args(big_cfg, [cfg.steps]))
    assert np.array_equal(big[: cfg.paths], small)


def test_env_flag_selects_numpy(monkeypatch):
    import subprocess
    import sys

    code = "from decayrank import kernels; print(kernels.BACKEND)"
    env = {"DECAYRANK_DISABLE_NUMBA": "1", "PATH": "/usr/bin:/bin"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
