"""Seeded Monte Carlo simulation of convex-mixture random walks.

A walk moves ``Y <- alpha*Y + (1-alpha)*v_i`` where vertex ``v_i`` is drawn
with probability ``q_i``. Vertices are simplex corners, arbitrary real
vectors, or points of the complex plane (simulated as their 2-D embedding).

Every path draws from its own splitmix64 substream keyed by
``(seed, path index)``, so results do not depend on evaluation order or on
the kernel backend.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import BudgetExceededError, ParameterError

INFINITE = math.inf

MODES = ("simplex", "real", "complex")
ENUMERATION_BUDGET = 2**24
SUPPORT_LIMIT = 2**16
MAX_ENUM_ORDER = 8
STAND_IN_TOL = 1e-9
STAND_IN_CAP = 10**6


def infinite_stand_in_steps(alpha: float) -> int:
    """Steps after which ``alpha**t`` drops below 1e-9, capped at 10**6."""
    t = math.ceil(math.log(STAND_IN_TOL) / math.log(alpha))
    if t > STAND_IN_CAP:
        warnings.warn(f"alpha={alpha} needs {t} steps to forget y0; capped at {STAND_IN_CAP}")
        t = STAND_IN_CAP
    return t


def _prob_vector(q, name="q") -> np.ndarray:
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.size == 0 or not np.all(np.isfinite(q)) or np.any(q < 0):
        raise ParameterError(f"{name} must be a non-empty vector of non-negative numbers")
    if abs(math.fsum(q) - 1.0) > 1e-12:
        raise ParameterError(f"{name} must sum to 1 (got {math.fsum(q)!r})")
    return q


@dataclass(frozen=True)
class VertexSet:
    """Vertices of a walk.

    ``points`` is an ``n x m`` real matrix (one column per vertex) for the
    simplex and real modes, and a length-``m`` complex array in complex mode.
    """

    mode: str
    points: np.ndarray

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "complex":
            pts = np.asarray(self.points, dtype=np.complex128).reshape(-1)
        else:
            pts = np.asarray(self.points, dtype=np.float64)
            if pts.ndim != 2:
                raise ParameterError("real vertex matrix must be 2-D (n x m)")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("vertices must be finite")
        object.__setattr__(self, "points", pts)

    @classmethod
    def simplex(cls, n: int) -> "VertexSet":
        if n < 1:
            raise ParameterError("simplex dimension must be >= 1")
        return cls("simplex", np.eye(n))

    @classmethod
    def real(cls, V) -> "VertexSet":
        return cls("real", np.atleast_2d(np.asarray(V, dtype=np.float64)))

    @classmethod
    def complex(cls, points) -> "VertexSet":
        return cls("complex", np.asarray(points, dtype=np.complex128))

    @classmethod
    def unit_circle(cls, angles) -> "VertexSet":
        return cls("complex", np.exp(1j * np.asarray(angles, dtype=np.float64)))

    @classmethod
    def roots_of_unity(cls, m: int) -> "VertexSet":
        return cls.unit_circle(2.0 * np.pi * np.arange(m) / m)

    @property
    def count(self) -> int:
        return self.points.shape[-1] if self.mode != "complex" else self.points.size

    @property
    def dim(self) -> int:
        return 2 if self.mode == "complex" else self.points.shape[0]

    def as_matrix(self) -> np.ndarray:
        """Real ``dim x count`` matrix; complex points become (re, im) columns."""
        if self.mode == "complex":
            return np.vstack([self.points.real, self.points.imag])
        return self.points


@dataclass(frozen=True)
class WalkConfig:
    """A complete walk instance.

    The walk runs ``steps`` steps with vertex distribution ``q``, then each
    ``(q, steps)`` entry of ``extra_phases`` in turn. ``steps`` may be
    :data:`INFINITE`, which is replaced by :func:`infinite_stand_in_steps`.
    ``y0`` defaults to the stationary mean ``V q``.
    """

    alpha: float
    q: np.ndarray
    vertices: VertexSet
    y0: Any = None
    steps: float = 0
    paths: int = 1
    seed: int = 0
    extra_phases: Tuple[Tuple[np.ndarray, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not (isinstance(self.alpha, (int, float)) and 0.0 < self.alpha < 1.0):
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        q = _prob_vector(self.q)
        if q.size != self.vertices.count:
            raise ParameterError(f"q has {q.size} entries but there are {self.vertices.count} vertices")
        object.__setattr__(self, "q", q)
        phases = []
        for i, (pq, ps) in enumerate(self.extra_phases):
            pq = _prob_vector(pq, f"extra_phases[{i}].q")
            if pq.size != q.size:
                raise ParameterError(f"extra_phases[{i}].q has the wrong length")
            if int(ps) != ps or ps < 0:
                raise ParameterError(f"extra_phases[{i}].steps must be a non-negative integer")
            phases.append((pq, int(ps)))
        object.__setattr__(self, "extra_phases", tuple(phases))
        if self.steps == INFINITE:
            object.__setattr__(self, "steps", infinite_stand_in_steps(self.alpha))
        elif int(self.steps) != self.steps or self.steps < 0:
            raise ParameterError(f"steps must be a non-negative integer or INFINITE, got {self.steps!r}")
        else:
            object.__setattr__(self, "steps", int(self.steps))
        if int(self.paths) != self.paths or self.paths < 1:
            raise ParameterError("paths must be a positive integer")
        object.__setattr__(self, "paths", int(self.paths))
        object.__setattr__(self, "seed", int(self.seed) & (2**64 - 1))
        object.__setattr__(self, "y0", self._start_point())

    def _start_point(self) -> np.ndarray:
        V = self.vertices.as_matrix()
        if self.y0 is None:
            return V @ self.q
        if self.vertices.mode == "complex":
            y0 = np.asarray(self.y0)
            if y0.size == 1:
                z = complex(y0.reshape(-1)[0])
                y0 = np.array([z.real, z.imag])
        else:
            y0 = np.asarray(self.y0, dtype=np.float64).reshape(-1)
        y0 = np.asarray(y0, dtype=np.float64).reshape(-1)
        if y0.size != V.shape[0]:
            raise ParameterError(f"y0 must have {V.shape[0]} coordinates")
        if self.vertices.mode == "simplex":
            if np.any(y0 < 0) or abs(math.fsum(y0) - 1.0) > 1e-12:
                raise ParameterError("simplex start point must be non-negative and sum to 1")
        return y0

    @property
    def total_steps(self) -> int:
        return self.steps + sum(s for _, s in self.extra_phases)

    def phase_table(self) -> Tuple[np.ndarray, np.ndarray]:
        qs = [self.q] + [pq for pq, _ in self.extra_phases]
        ends = np.cumsum([self.steps] + [s for _, s in self.extra_phases]).astype(np.int64)
        cum = np.cumsum(np.vstack(qs), axis=1)
        return cum, ends

    # -- JSON ----------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "mode": self.vertices.mode,
            "alpha": self.alpha,
            "q": self.q.tolist(),
            "steps": self.steps,
            "paths": self.paths,
            "seed": self.seed,
        }
        if self.vertices.mode == "simplex":
            doc["y0"] = self.y0.tolist()
        elif self.vertices.mode == "real":
            doc["vertices"] = self.vertices.points.T.tolist()
            doc["y0"] = self.y0.tolist()
        else:
            doc["vertices"] = [[z.real, z.imag] for z in self.vertices.points]
            doc["y0"] = self.y0.tolist()
        if self.extra_phases:
            doc["then"] = [{"q": pq.tolist(), "steps": s} for pq, s in self.extra_phases]
        return doc

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "WalkConfig":
        mode = doc.get("mode", "simplex")
        q = doc.get("q")
        if q is None:
            raise ParameterError("q is required")
        if mode == "simplex":
            vertices = VertexSet.simplex(len(q))
        elif mode == "real":
            if "vertices" not in doc:
                raise ParameterError("real mode needs 'vertices'")
            vertices = VertexSet.real(np.asarray(doc["vertices"], dtype=np.float64).T)
        elif mode == "complex":
            if "angles" in doc:
                vertices = VertexSet.unit_circle(doc["angles"])
            elif "vertices" in doc:
                pts = np.asarray(doc["vertices"], dtype=np.float64).reshape(-1, 2)
                vertices = VertexSet.complex(pts[:, 0] + 1j * pts[:, 1])
            else:
                vertices = VertexSet.roots_of_unity(len(q))
        else:
            raise ParameterError(f"unknown mode {mode!r}")
        steps = doc.get("steps", 0)
        if steps == "infinite":
            steps = INFINITE
        y0 = doc.get("y0")
        if mode == "complex" and y0 is not None:
            y0 = np.asarray(y0, dtype=np.float64).reshape(-1)
            if y0.size == 2:
                y0 = complex(y0[0], y0[1])
        phases = tuple((p["q"], p["steps"]) for p in doc.get("then", ()))
        return cls(
            alpha=float(doc["alpha"]) if "alpha" in doc else _missing("alpha"),
            q=q,
            vertices=vertices,
            y0=y0,
            steps=steps,
            paths=doc.get("paths", 1),
            seed=doc.get("seed", 0),
            extra_phases=phases,
        )


def _missing(name):
    raise ParameterError(f"{name} is required")


WALK_CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "WalkConfig",
    "type": "object",
    "required": ["alpha", "q"],
    "properties": {
        "mode": {"enum": list(MODES)},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "q": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "vertices": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "angles": {"type": "array", "items": {"type": "number"}},
        "y0": {"type": "array", "items": {"type": "number"}},
        "steps": {"oneOf": [{"type": "integer", "minimum": 0}, {"const": "infinite"}]},
        "paths": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "then": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["q", "steps"],
                "properties": {
                    "q": {"type": "array", "items": {"type": "number", "minimum": 0}},
                    "steps": {"type": "integer", "minimum": 0},
                },
            },
        },
    },
    "additionalProperties": False,
}


# -- simulation -----------------------------------------------------------


def simulate(cfg: WalkConfig, checkpoints: Optional[Sequence[int]] = None) -> np.ndarray:
    """Raw path states, shape ``(paths, len(checkpoints), dim)``.

    ``checkpoints`` defaults to the final step only.
    """
    total = cfg.total_steps
    if checkpoints is None:
        checkpoints = [total]
    ck = np.asarray(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
    if ck.size == 0 or ck[0] < 0 or ck[-1] > total:
        raise ParameterError(f"checkpoints must lie in [0, {total}]")
    cum, ends = cfg.phase_table()
    V = np.ascontiguousarray(cfg.vertices.as_matrix(), dtype=np.float64)
    # a zero-length walk still needs one (empty) phase for the kernel
    return kernels.simulate_walk(
        V, np.ascontiguousarray(cum), ends, float(cfg.alpha), cfg.y0.astype(np.float64),
        ck, cfg.paths, np.uint64(cfg.seed),
    )


@dataclass
class SampleStats:
    """Empirical moments of walk endpoints."""

    mode: str
    paths: int
    steps: int
    mean: np.ndarray
    cov: np.ndarray
    sem: np.ndarray
    complex_mean: Optional[complex] = None
    complex_variance: Optional[float] = None
    samples: Optional[np.ndarray] = field(default=None, repr=False)

    def central_moment(self, order: int, center, coord: int = 0) -> Tuple[float, float]:
        """Sample estimate of ``E[(y - center)**order]`` and its standard error."""
        if self.samples is None:
            raise ParameterError("samples were not retained")
        terms = (self.samples[:, coord] - center) ** order
        n = terms.size
        se = float(terms.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        return float(terms.mean()), se

    def to_dict(self) -> Dict[str, Any]:
        doc = {
            "mode": self.mode,
            "paths": self.paths,
            "steps": self.steps,
            "mean": self.mean.tolist(),
            "covariance": self.cov.tolist(),
            "standard_error": self.sem.tolist(),
        }
        if self.complex_mean is not None:
            doc["complex_mean"] = [self.complex_mean.real, self.complex_mean.imag]
            doc["complex_variance"] = self.complex_variance
        return doc


def summarize(samples: np.ndarray, mode: str, steps: int) -> SampleStats:
    paths = samples.shape[0]
    # shift by the first path so constant samples average exactly
    shift = samples[0]
    mean = shift + (samples - shift).mean(axis=0)
    if paths > 1:
        centered = samples - mean
        cov = centered.T @ centered / (paths - 1)
        cov = 0.5 * (cov + cov.T)
    else:
        cov = np.zeros((samples.shape[1], samples.shape[1]))
    sem = np.sqrt(np.diag(cov) / paths)
    stats = SampleStats(mode, paths, steps, mean, cov, sem, samples=samples)
    if mode == "complex":
        stats.complex_mean = complex(mean[0], mean[1])
        stats.complex_variance = float(cov[0, 0] + cov[1, 1])
    return stats


def run_walk(cfg: WalkConfig) -> SampleStats:
    """Simulate ``cfg.paths`` independent walks and summarize their endpoints."""
    finals = simulate(cfg)[:, -1, :]
    return summarize(finals, cfg.vertices.mode, cfg.total_steps)


# -- exact enumeration ----------------------------------------------------


@dataclass
class ExactMoments:
    """Exact endpoint distribution summaries from full path enumeration."""

    mode: str
    steps: int
    paths_enumerated: int
    mean: np.ndarray
    cov: np.ndarray
    central: np.ndarray  # central[k, a] = E[(y_a - mean_a)**k]
    support: Optional[np.ndarray] = field(default=None, repr=False)
    probs: Optional[np.ndarray] = field(default=None, repr=False)
    complex_mean: Optional[complex] = None
    complex_variance: Optional[float] = None

    def moments_about(self, center, max_order: int) -> np.ndarray:
        """``E[(y - center)**k]`` for ``k <= max_order``; needs the support."""
        self._need_support()
        center = np.broadcast_to(np.asarray(center, dtype=np.float64), (self.support.shape[1],))
        powers, _ = kernels.weighted_central_sums(self.support, self.probs, np.ascontiguousarray(center), max_order)
        return powers

    def tail_probability(self, center: float, eps: float, coord: int = 0) -> float:
        """Exact ``P(|y - center| >= eps)`` for one coordinate."""
        self._need_support()
        mask = np.abs(self.support[:, coord] - center) >= eps
        return math.fsum(self.probs[mask])

    def _need_support(self):
        if self.support is None:
            raise ParameterError("support not retained (path count above the support limit)")

    def to_dict(self) -> Dict[str, Any]:
        doc = {
            "mode": self.mode,
            "steps": self.steps,
            "paths_enumerated": self.paths_enumerated,
            "mean": self.mean.tolist(),
            "covariance": self.cov.tolist(),
            "central_moments": self.central.tolist(),
        }
        if self.complex_mean is not None:
            doc["complex_mean"] = [self.complex_mean.real, self.complex_mean.imag]
            doc["complex_variance"] = self.complex_variance
        if self.support is not None:
            doc["support"] = {"values": self.support.tolist(), "probabilities": self.probs.tolist()}
        return doc


def enumerate_exact(cfg: WalkConfig, max_order: int = 4, keep_support: Optional[bool] = None) -> ExactMoments:
    """Exact moments by enumerating every vertex sequence of a single-phase walk.

    Refuses when ``m**steps`` exceeds 2**24 sequences. The discrete support is
    kept when it has at most 2**16 points (or when ``keep_support`` forces it).
    """
    if cfg.extra_phases:
        raise ParameterError("enumeration handles single-phase walks only")
    if not 0 <= max_order <= MAX_ENUM_ORDER:
        raise ParameterError(f"max_order must be in [0, {MAX_ENUM_ORDER}]")
    m = cfg.vertices.count
    count = m**cfg.steps
    if count > ENUMERATION_BUDGET:
        raise BudgetExceededError(
            f"{m}**{cfg.steps} = {count} paths exceeds the enumeration budget of 2**24 = {ENUMERATION_BUDGET}"
        )
    V = np.ascontiguousarray(cfg.vertices.as_matrix(), dtype=np.float64)
    values, probs = kernels.enumerate_support(V, cfg.q, float(cfg.alpha), cfg.y0.astype(np.float64), cfg.steps)
    zero = np.zeros(V.shape[0])
    first, _ = kernels.weighted_central_sums(values, probs, zero, 1)
    mean = first[1] / first[0]
    central, cov = kernels.weighted_central_sums(values, probs, mean, max(max_order, 2))
    central = central[: max_order + 1]
    central[0] = 1.0
    if max_order >= 1:
        central[1] = 0.0
    if keep_support is None:
        keep_support = count <= SUPPORT_LIMIT
    res = ExactMoments(
        cfg.vertices.mode, cfg.steps, count, mean, 0.5 * (cov + cov.T), central,
        support=values if keep_support else None, probs=probs if keep_support else None,
    )
    if cfg.vertices.mode == "complex":
        res.complex_mean = complex(mean[0], mean[1])
        res.complex_variance = float(cov[0, 0] + cov[1, 1])
    return res


# -- reciprocal-moment probe ----------------------------------------------


@dataclass
class ProbeReport:
    """Heuristic evidence about ``E[1/y_t]`` as ``t`` grows.

    This is a Monte Carlo probe, not a proof; the classification only
    summarizes the observed growth of the estimates.
    """

    alpha: float
    q: float
    y0: float
    checkpoints: List[int]
    estimates: List[float]
    standard_errors: List[float]
    growth_ratios: List[float]
    classification: str
    lhs: float
    rhs: float
    residual: float
    relative_residual: float
    heuristic: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _unit_interval_walk(cfg: WalkConfig) -> Tuple[float, float]:
    """(q, y0) of a walk on [0, 1] jumping toward 1 with probability q."""
    if cfg.vertices.mode == "simplex" and cfg.vertices.count == 2:
        return float(cfg.q[0]), float(cfg.y0[0])
    if cfg.vertices.mode == "real" and cfg.vertices.points.shape == (1, 2):
        pts = cfg.vertices.points[0]
        if sorted(pts.tolist()) == [0.0, 1.0]:
            return float(cfg.q[int(np.argmax(pts))]), float(cfg.y0[0])
    raise ParameterError("reciprocal probe needs a 1-D walk with vertices 0 and 1")


def reciprocal_probe(cfg: WalkConfig, growth_factor: float = 2.0, run_length: int = 3) -> ProbeReport:
    """Estimate ``E[1/y_t]`` at ``t = 1, 2, 4, ...`` up to ``cfg.steps``.

    Classified "apparently divergent" when the estimate grows by at least
    ``growth_factor`` over ``run_length`` consecutive doublings of ``t``.
    Also reports both sides of the limiting identity
    ``(alpha - 1 + q)/alpha * E[1/y] = q * E[1/(1 - alpha(1 - y))]``
    evaluated on the final sample.
    """
    q, y0 = _unit_interval_walk(cfg)
    if not y0 > 0:
        raise ParameterError("reciprocal probe needs y0 > 0")
    if cfg.extra_phases:
        raise ParameterError("reciprocal probe handles single-phase walks only")
    if cfg.steps < 1:
        raise ParameterError("reciprocal probe needs steps >= 1")
    cks = []
    t = 1
    while t < cfg.steps:
        cks.append(t)
        t *= 2
    cks.append(cfg.steps)
    walk = WalkConfig(
        alpha=cfg.alpha, q=[1.0 - q, q], vertices=VertexSet.real([[0.0, 1.0]]),
        y0=[y0], steps=cfg.steps, paths=cfg.paths, seed=cfg.seed,
    )
    states = simulate(walk, cks)[:, :, 0]
    with np.errstate(divide="ignore"):
        recip = 1.0 / states
    n = states.shape[0]
    estimates = recip.mean(axis=0)
    ses = recip.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.full(len(cks), math.inf)
    ratios = [float(b / a) if a > 0 else math.inf for a, b in zip(estimates[:-1], estimates[1:])]
    streak = best = 0
    # only exact doublings count toward the streak
    for i, r in enumerate(ratios):
        doubling = cks[i + 1] == 2 * cks[i]
        streak = streak + 1 if (doubling and r >= growth_factor) else 0
        best = max(best, streak)
    divergent = best >= run_length or not np.all(np.isfinite(estimates))
    final = states[:, -1]
    a = cfg.alpha
    lhs = (a - 1.0 + q) / a * float(estimates[-1])
    rhs = q * float(np.mean(1.0 / (1.0 - a * (1.0 - final))))
    residual = lhs - rhs
    scale = max(abs(lhs), abs(rhs))
    return ProbeReport(
        alpha=a, q=q, y0=y0, checkpoints=cks,
        estimates=estimates.tolist(), standard_errors=np.asarray(ses).tolist(),
        growth_ratios=ratios,
        classification="apparently divergent" if divergent else "apparently convergent",
        lhs=lhs, rhs=rhs, residual=residual,
        relative_residual=abs(residual) / scale if scale > 0 else 0.0,
    )
