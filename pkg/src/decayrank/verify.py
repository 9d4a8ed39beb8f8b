"""Cross-validation suite: closed forms against enumeration and simulation.

Each check returns a :class:`CheckResult`. ``budget="quick"`` shrinks the
Monte Carlo sample sizes; tolerances never change with the budget.
"""
from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence

import numpy as np

from . import analytics, bounds
from .ranker import DecayParams, DecayRankTable, DenseRanker
from .walk import INFINITE, VertexSet, WalkConfig, enumerate_exact, reciprocal_probe, run_walk

BUDGETS = ("quick", "full")

GRID_ALPHA = (0.5, 0.9, 0.99)
GRID_Q = (0.1, 0.3, 0.5)
GRID_Y0 = (0.0, 1.0)
GRID_T = (1, 5, 10, 12)


@dataclass
class CheckResult:
    id: str
    title: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0
    heuristic: bool = False

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = " [heuristic]" if self.heuristic else ""
        return (
            f"{tag} {self.id} {self.title}: residual={self.residual:.3e} "
            f"tol={self.tolerance:.3e} ({self.seconds:.1f}s){extra} {self.detail}".rstrip()
        )

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _paths(budget: str, full: int, quick: int) -> int:
    if budget not in BUDGETS:
        raise ValueError(f"budget must be one of {BUDGETS}")
    return full if budget == "full" else quick


def _scalar_cfg(alpha, q, y0, t, paths=1, seed=0):
    return WalkConfig(
        alpha=alpha, q=[q, 1.0 - q], vertices=VertexSet.simplex(2),
        y0=[y0, 1.0 - y0], steps=t, paths=paths, seed=seed,
    )


def _grid():
    return itertools.product(GRID_ALPHA, GRID_Q, GRID_Y0, GRID_T)


def check_mean_closed_form(budget="full") -> CheckResult:
    worst = 0.0
    for a, q, y0, t in _grid():
        ex = enumerate_exact(_scalar_cfg(a, q, y0, t), max_order=2)
        ref = analytics.scalar_mean_var(a, q, t, y0=y0).mean
        worst = max(worst, abs(ex.mean[0] - ref))
    return CheckResult("c01", "mean closed form vs enumeration", worst <= 1e-12, worst, 1e-12,
                       f"{len(GRID_ALPHA) * len(GRID_Q) * len(GRID_Y0) * len(GRID_T)} configs")


def check_variance_closed_form(budget="full") -> CheckResult:
    worst = 0.0
    for a, q, y0, t in _grid():
        ex = enumerate_exact(_scalar_cfg(a, q, y0, t), max_order=2)
        ref = analytics.scalar_mean_var(a, q, t, y0=y0).variance
        worst = max(worst, abs(ex.central[2, 0] - ref))
    return CheckResult("c02", "variance closed form vs enumeration", worst <= 1e-12, worst, 1e-12)


def check_covariance_matrix(budget="full") -> CheckResult:
    Q = np.array([0.5, 0.3, 0.2])
    cfg = WalkConfig(alpha=0.95, q=Q, vertices=VertexSet.simplex(3), y0=Q, steps=8)
    ex = enumerate_exact(cfg, max_order=2)
    ref = analytics.simplex_covariance(0.95, Q, 8).covariance
    entry = float(np.abs(ex.cov - ref).max())
    annihilate = float(max(np.abs(ex.cov @ np.ones(3)).max(), np.abs(ref @ np.ones(3)).max()))
    worst = max(entry, annihilate)
    return CheckResult("c03", "simplex covariance vs 3^8 enumeration", worst <= 1e-12, worst, 1e-12,
                       f"entrywise={entry:.2e} annihilation={annihilate:.2e}")


def check_infinite_monte_carlo(budget="full") -> CheckResult:
    paths = _paths(budget, 10**5, 2 * 10**4)
    a, q = 0.9, 0.3
    stats = run_walk(_scalar_cfg(a, q, 0.0, 2000, paths=paths, seed=20240401))
    target_var = analytics.stationary_factor(a) * (q - q * q)
    z = abs(stats.mean[0] - q) / stats.sem[0]
    rel = abs(stats.cov[0, 0] - target_var) / target_var
    ok = z <= 4.0 and rel <= 0.05
    return CheckResult("c04", "limit mean/variance by simulation", ok, rel, 0.05,
                       f"mean z={z:.2f} (<=4), variance rel err={rel:.4f}, paths={paths}")


def _example_moments(a, q, corrected=False):
    """M_2, M_3, M_4 closed forms; ``corrected`` fixes the M_4 constant term.

    Expanding ``E z^4`` for ``z = alpha*z' + (1-alpha)(xi - q)`` gives the
    constant ``1 - 3q + 3q^2``; the published form reads ``1 - q + q^2``.
    """
    pq = q - q * q
    m2 = (1 - a) / (1 + a) * pq
    m3 = (1 - a) ** 3 / (1 - a**3) * pq * (1 - 2 * q)
    const = 1 - 3 * q + 3 * q * q if corrected else 1 - q + q * q
    m4 = (1 - a) ** 4 / (1 - a**4) * pq * (6 * a**2 / (1 - a**2) * pq + const)
    return m2, m3, m4


MOMENT_Q = (0.1, 0.3, 0.5, 0.7, 0.9)


def check_moment_recurrence(budget="full") -> CheckResult:
    worst = 0.0
    for a in GRID_ALPHA:
        for q in MOMENT_Q:
            M = analytics.central_moments(a, q, 3).values
            m2, m3, _ = _example_moments(a, q)
            worst = max(worst, abs(M[2] - m2), abs(M[3] - m3))
            sym = analytics.moment_symmetry_check(a, q, 16)
            worst = max(worst, max(sym.reflection_residuals))
        worst = max(worst, abs(analytics.central_moments(a, 0.5, 3)[3]))
    return CheckResult("c05a", "central moments M2, M3, odd at 1/2, reflection n<=16", worst <= 1e-12, worst, 1e-12)


def _m4_residual(corrected):
    worst = 0.0
    for a in GRID_ALPHA:
        for q in MOMENT_Q:
            worst = max(worst, abs(analytics.central_moments(a, q, 4)[4] - _example_moments(a, q, corrected)[2]))
    return worst


def check_m4_published(budget="full") -> CheckResult:
    worst = _m4_residual(corrected=False)
    return CheckResult("c05b", "M4 vs published closed form", worst <= 1e-12, worst, 1e-12,
                       "published constant term 1-q+q^2")


def check_m4_corrected(budget="full") -> CheckResult:
    worst = _m4_residual(corrected=True)
    return CheckResult("c05c", "M4 vs re-derived closed form", worst <= 1e-12, worst, 1e-12,
                       "constant term 1-3q+3q^2")


def check_moments_vs_simulation(budget="full") -> CheckResult:
    paths = _paths(budget, 10**6, 10**5)
    a, q = 0.9, 0.3
    stats = run_walk(_scalar_cfg(a, q, q, 2000, paths=paths, seed=7_000_001))
    M = analytics.central_moments(a, q, 6).values
    worst_z = 0.0
    parts = []
    for n in range(3, 7):
        est, se = stats.central_moment(n, q)
        z = abs(est - M[n]) / se
        worst_z = max(worst_z, z)
        parts.append(f"M{n} z={z:.2f}")
    return CheckResult("c06", "central moments 3-6 vs simulation", worst_z <= 4.0, worst_z, 4.0,
                       f"{', '.join(parts)}, paths={paths}")


def check_spectral(budget="full") -> CheckResult:
    r = abs(analytics.secular_eigenvalues([0.3, 0.7])[0] - 0.42)
    uni = 0.0
    for n in range(2, 7):
        vals = analytics.simplex_covariance(0.9, np.full(n, 1.0 / n)).kernel_eigenvalues
        expected = np.array([0.0] + [1.0 / n] * (n - 1))
        uni = max(uni, float(np.abs(np.sort(vals) - expected).max()))
    rng = np.random.default_rng(2024)
    dense = 0.0
    for _ in range(25):
        n = int(rng.integers(2, 9))
        Q = rng.dirichlet(np.ones(n))
        roots = analytics.secular_eigenvalues(Q)
        ev = np.sort(np.linalg.eigvalsh(analytics.kernel_matrix(Q)))[1:]
        dense = max(dense, float(np.abs(roots - ev).max()))
    ok = r <= 1e-12 and uni <= 1e-10 and dense <= 1e-9
    return CheckResult("c07", "secular roots and kernel spectrum", ok, max(r, uni, dense), 1e-9,
                       f"two-point={r:.1e} (<=1e-12) uniform={uni:.1e} (<=1e-10) random={dense:.1e} (<=1e-9)")


def check_complex_walks(budget="full") -> CheckResult:
    paths = _paths(budget, 10**5, 2 * 10**4)
    Q = np.array([0.2, 0.3, 0.5])
    a, t = 0.9, 12
    verts = VertexSet.roots_of_unity(3)
    stats = run_walk(WalkConfig(alpha=a, q=Q, vertices=verts, y0=0.0, steps=t, paths=paths, seed=31337))
    formula = analytics.generalized_moments(verts.points, Q, a, t, y0=0.0).variance
    example = 3 * (1 - a ** (2 * t)) * analytics.stationary_factor(a) * (Q[0] * Q[1] + Q[0] * Q[2] + Q[1] * Q[2])
    rel = abs(stats.complex_variance - formula) / formula
    angles = 2 * np.pi * np.arange(3) / 3
    ucv = analytics.unit_circle_variance(angles, Q, a, t)
    agree = max(abs(ucv - formula), abs(example - formula))
    ok = rel <= 0.05 and agree <= 1e-12
    return CheckResult("c08", "complex walk variance", ok, rel, 0.05,
                       f"MC rel err={rel:.4f} (<=0.05), closed forms agree to {agree:.1e} (<=1e-12), paths={paths}")


def check_chebyshev(budget="full") -> CheckResult:
    worst_excess = -math.inf
    for a, q, y0, t in _grid():
        ex = enumerate_exact(_scalar_cfg(a, q, y0, t), max_order=0, keep_support=True)
        for eps in (0.05, 0.1, 0.2):
            rep = bounds.tail_bound(bounds.BoundQuery(a, q, eps, t, y0=y0))
            p = ex.tail_probability(rep.centers[0], eps)
            worst_excess = max(worst_excess, p - rep.item_bounds[0])
    ex3 = bounds.tail_bound(bounds.BoundQuery(0.99, 0.5, 0.1, INFINITE)).item_bounds[0]
    ex3_err = abs(ex3 - 0.25 / 1.99)
    # the two-point law at t=1 can meet Chebyshev with equality; allow rounding
    ok = worst_excess <= 1e-12 and ex3_err <= 1e-4
    return CheckResult("c09", "Chebyshev bound soundness", ok, max(worst_excess, 0.0), 1e-12,
                       f"max(P - bound)={worst_excess:.2e}; alpha=.99 q=.5 eps=.1 bound={ex3:.6f} "
                       f"-> coverage {1 - ex3:.1%}")


def check_relative_threshold(budget="full") -> CheckResult:
    r = abs(bounds.relative_error_threshold(0.999, 0.1) - 1 / 2.999)
    return CheckResult("c10", "relative-error q threshold", r <= 1e-12, r, 1e-12)


def check_boost_exact(budget="full") -> CheckResult:
    r = abs(bounds.boost_ratio(0.99, 100, 100).exact - 0.99**-100)
    return CheckResult("c11a", "velocity boost exact ratio", r <= 1e-12, r, 1e-12)


BOOST_BETAS = (1e-4, 1e-5, 1e-6, 1e-7)
BOOST_TS = (1, 2, 10, 50, 100, 250, 500, 750, 1000)


def check_boost_approximation(budget="full") -> CheckResult:
    worst, where = 0.0, None
    for beta in BOOST_BETAS:
        for t1 in BOOST_TS:
            for t2 in BOOST_TS:
                g = bounds.boost_ratio(1.0 - beta, t1, t2).relative_gap
                if g > worst:
                    worst, where = g, (beta, t1, t2)
    return CheckResult("c11b", "velocity boost approximation gap", worst < 1e-3, worst, 1e-3,
                       f"worst at beta={where[0]:g} t1={where[1]} t2={where[2]}")


REGIME_CASES = (
    # the stated case: every phase is a point mass, so the walk is deterministic
    dict(X=[1, 0], P1=[0, 1], P2=[1, 0]),
    dict(X=[1, 0], P1=[0.2, 0.8], P2=[0.7, 0.3]),
)


def check_regime_switch(budget="full") -> CheckResult:
    paths = _paths(budget, 10**5, 2 * 10**4)
    a = 0.99
    worst_z, parts, ok = 0.0, [], True
    for i, case in enumerate(REGIME_CASES):
        spec = bounds.RegimeSwitchSpec(t1=100, t2=100, alpha=a, **case)
        expected = bounds.regime_switch_mean(spec)
        coef = sum(bounds.regime_switch_coefficients(spec))
        cfg = WalkConfig(alpha=a, q=spec.P1, vertices=VertexSet.simplex(2), y0=spec.X,
                         steps=spec.t1, extra_phases=((spec.P2, spec.t2),), paths=paths, seed=99 + i)
        stats = run_walk(cfg)
        diff = abs(stats.mean[0] - expected[0])
        # a zero-variance walk has no sampling error; only rounding remains
        allowed = 4.0 * stats.sem[0] + 1e-12
        z = diff / stats.sem[0] if stats.sem[0] > 1e-12 else 0.0
        worst_z = max(worst_z, z)
        ok = ok and diff <= allowed and abs(coef - 1.0) <= 1e-12
        parts.append(f"case{i}: mixture={expected[0]:.6f} simulated={stats.mean[0]:.6f} diff={diff:.1e}")
    return CheckResult("c12", "regime-switch mixture vs two-phase simulation", ok, worst_z, 4.0,
                       "; ".join(parts) + f"; paths={paths}")


def check_root_trend(budget="full") -> CheckResult:
    failures = []
    worst_gap_ratio = 0.0
    for q in (0.1, 0.3, 0.5):
        for a in (0.5, 0.9):
            tr = analytics.moment_root_trend(a, q, 64)
            g16, g64 = tr.gap(16), tr.gap(64)
            worst_gap_ratio = max(worst_gap_ratio, g64 / g16)
            if not (tr.passed and g64 < g16):
                failures.append(f"q={q} a={a}")
    return CheckResult("c13", "root trend of central moments", not failures, worst_gap_ratio, 1.0,
                       "gap(64)/gap(16) < 1, bounds and even monotonicity"
                       + (f"; failed: {failures}" if failures else ""))


def _event_stream(n_events, n_items, seed):
    rng = random.Random(seed)
    weights = [1.0 / (i + 1) for i in range(n_items)]
    names = [f"item{i:03d}" for i in range(n_items)]
    return rng.choices(names, weights=weights, k=n_events), names


def check_ranker(budget="full") -> CheckResult:
    n_events = _paths(budget, 10**5, 2 * 10**4)
    worst = 0.0
    for a in (0.5, 0.99, 0.999):
        stream, names = _event_stream(n_events, 40, seed=int(a * 1000))
        declared = names[:20]  # the rest arrive mid-stream with zero prior
        lazy = DecayRankTable(DecayParams.from_alpha(a), items=declared)
        dense = DenseRanker(a, declared)
        for i, item in enumerate(stream):
            lazy.observe(item)
            dense.observe(item)
            if i % 997 == 0 or i == len(stream) - 1:
                lp = lazy.probabilities()
                worst = max(worst, max(abs(lp[k] - v) for k, v in dense.probabilities().items()))
    stream, names = _event_stream(2 * 10**4, 30, seed=5)
    whole = DecayRankTable(DecayParams.from_alpha(0.99), items=names)
    whole.observe_many(stream)
    first = DecayRankTable(DecayParams.from_alpha(0.99), items=names)
    first.observe_many(stream[:10**4])
    resumed = DecayRankTable.restore(first.snapshot())
    resumed.observe_many(stream[10**4:])
    exact = resumed.probabilities() == whole.probabilities() and resumed.global_step == whole.global_step
    ok = worst <= 1e-9 and exact
    return CheckResult("c14", "lazy ranker vs dense reference; snapshot continuation", ok, worst, 1e-9,
                       f"events={n_events}, bit-exact resume={exact}")


def check_reciprocal_probe(budget="full") -> CheckResult:
    paths = _paths(budget, 10**5, 2 * 10**4)
    steps = 2000
    div = reciprocal_probe(_scalar_cfg(0.3, 0.5, 0.5, steps, paths=paths, seed=11))
    conv = reciprocal_probe(_scalar_cfg(0.99, 0.5, 0.5, steps, paths=paths, seed=12))
    ok = div.classification == "apparently divergent" and conv.classification == "apparently convergent"
    return CheckResult("c15", "reciprocal-moment probe", ok, conv.relative_residual, 1.0,
                       f"alpha=.3: {div.classification}; alpha=.99: {conv.classification} "
                       f"(identity residual {conv.relative_residual:.1e})", heuristic=True)


CHECKS: Dict[str, Callable[[str], CheckResult]] = {
    "c01": check_mean_closed_form,
    "c02": check_variance_closed_form,
    "c03": check_covariance_matrix,
    "c04": check_infinite_monte_carlo,
    "c05a": check_moment_recurrence,
    "c05b": check_m4_published,
    "c05c": check_m4_corrected,
    "c06": check_moments_vs_simulation,
    "c07": check_spectral,
    "c08": check_complex_walks,
    "c09": check_chebyshev,
    "c10": check_relative_threshold,
    "c11a": check_boost_exact,
    "c11b": check_boost_approximation,
    "c12": check_regime_switch,
    "c13": check_root_trend,
    "c14": check_ranker,
    "c15": check_reciprocal_probe,
}


def run_check(check_id: str, budget: str = "full") -> CheckResult:
    start = time.perf_counter()
    res = CHECKS[check_id](budget)
    res.seconds = time.perf_counter() - start
    return res


def run_all(budget: str = "quick", only: Sequence[str] = ()) -> List[CheckResult]:
    ids = list(only) if only else list(CHECKS)
    return [run_check(i, budget) for i in ids]
