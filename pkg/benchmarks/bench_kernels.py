"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --paths 100000 --steps 2000

Both backends consume the same random streams, so the script also checks
that they return identical arrays.
"""
import argparse
import time

import numpy as np

from decayrank.kernels import numba_impl, numpy_impl
from decayrank.walk import VertexSet, WalkConfig


def kernel_args(cfg):
    cum, ends = cfg.phase_table()
    V = np.ascontiguousarray(cfg.vertices.as_matrix(), dtype=np.float64)
    return (V, np.ascontiguousarray(cum), ends, float(cfg.alpha), cfg.y0.astype(np.float64),
            np.array([cfg.total_steps], dtype=np.int64), cfg.paths, np.uint64(cfg.seed))


def best_of(fn, args, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=20000)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    cases = {
        "scalar 0/1": WalkConfig(alpha=0.9, q=[0.7, 0.3], vertices=VertexSet.real([[0.0, 1.0]]),
                                 steps=args.steps, paths=args.paths, seed=1),
        "simplex n=5": WalkConfig(alpha=0.9, q=[0.1, 0.2, 0.3, 0.2, 0.2], vertices=VertexSet.simplex(5),
                                  steps=args.steps, paths=args.paths, seed=1),
        "complex m=3": WalkConfig(alpha=0.9, q=[0.2, 0.3, 0.5], vertices=VertexSet.roots_of_unity(3),
                                  steps=args.steps, paths=args.paths, seed=1),
    }
    numba_impl.simulate_walk(*kernel_args(WalkConfig(alpha=0.5, q=[0.5, 0.5], vertices=VertexSet.simplex(2),
                                                     steps=2, paths=2)))  # compile
    print(f"{'case':<12} {'numba s':>9} {'numpy s':>9} {'speedup':>8} {'ns/step':>8}  identical")
    for name, cfg in cases.items():
        a = kernel_args(cfg)
        t_nb, out_nb = best_of(numba_impl.simulate_walk, a, args.repeat)
        t_np, out_np = best_of(numpy_impl.simulate_walk, a, args.repeat)
        per = 1e9 * t_nb / (cfg.paths * cfg.steps)
        print(f"{name:<12} {t_nb:9.3f} {t_np:9.3f} {t_np / t_nb:8.1f} {per:8.2f}  {np.array_equal(out_nb, out_np)}")


if __name__ == "__main__":
    main()
