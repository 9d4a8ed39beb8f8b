"""Chebyshev quality bounds and recency-boost ratios for the decayed ranker."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .analytics import _finite_factor, stationary_factor
from .errors import ParameterError
from .walk import INFINITE

# worst-case (q = 1/2) bound at eps = sqrt(1 - alpha) counts as "about 7/8 coverage" up to here
SEVEN_EIGHTHS_CUTOFF = 0.13


def _check_alpha(alpha, allow_zero=False):
    lo_ok = alpha >= 0.0 if allow_zero else alpha > 0.0
    if not (isinstance(alpha, (int, float)) and lo_ok and alpha < 1.0):
        raise ParameterError(f"alpha must lie in {'[0' if allow_zero else '(0'}, 1), got {alpha!r}")


def _check_t(t):
    if t == INFINITE:
        return
    if isinstance(t, bool) or not isinstance(t, (int, np.integer)) or t < 0:
        raise ParameterError(f"t must be a non-negative integer or INFINITE, got {t!r}")


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class BoundQuery:
    alpha: float
    q: Any  # scalar or probability vector
    epsilon: float
    t: Any = INFINITE
    y0: Any = None  # start point; defaults to q

    def __post_init__(self):
        _check_alpha(self.alpha)
        _check_t(self.t)
        if not (isinstance(self.epsilon, (int, float)) and self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ParameterError(f"epsilon must be positive, got {self.epsilon!r}")
        q = np.atleast_1d(np.asarray(self.q, dtype=np.float64))
        if np.any(q < 0) or np.any(q > 1):
            raise ParameterError("q entries must lie in [0, 1]")


@dataclass
class BoundReport:
    alpha: float
    t: Any
    epsilon: float
    q: List[float]
    centers: List[float]
    item_bounds: List[float]
    item_bounds_raw: List[float]
    vector_bound: Optional[float]
    vector_bound_raw: Optional[float]
    sqrt_eps: float
    sqrt_eps_bounds: List[float]
    worst_case_sqrt_eps_bound: float
    about_seven_eighths: bool
    relative_error_threshold: Optional[float]
    intervals: List[List[float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        doc = {k: getattr(self, k) for k in self.__dataclass_fields__}
        doc["t"] = "infinite" if self.t == INFINITE else self.t
        return doc

    def render(self) -> str:
        t = "infinite" if self.t == INFINITE else str(self.t)
        lines = [f"Chebyshev tail bounds  alpha={self.alpha:g}  t={t}  eps={self.epsilon:g}"]
        for q, c, b, raw, (lo, hi) in zip(self.q, self.centers, self.item_bounds, self.item_bounds_raw, self.intervals):
            lines.append(
                f"  q={q:.6g}: P(|y - {c:.6g}| >= eps) <= {b:.6g}"
                f" (raw {raw:.6g}); coverage of [{lo:.6g}, {hi:.6g}] >= {1 - b:.2%}"
            )
        if self.vector_bound is not None:
            lines.append(f"  vector: P(||Y - Q|| >= eps) <= {self.vector_bound:.6g} (raw {self.vector_bound_raw:.6g})")
        lines.append(
            f"  eps = sqrt(1-alpha) = {self.sqrt_eps:.6g}: worst-case bound {self.worst_case_sqrt_eps_bound:.6g}"
            + ("  (about 7/8 coverage)" if self.about_seven_eighths else "")
        )
        if self.relative_error_threshold is not None:
            lines.append(
                f"  relative error eps: P(|y - q| >= eps*q) <= eps for q >= {self.relative_error_threshold:.6g}"
            )
        return "\n".join(lines)


def tail_bound(query: BoundQuery) -> BoundReport:
    """Chebyshev bounds on ``P(|y_t - center| >= eps)`` per item and for the vector.

    The center is the mean after ``t`` steps from ``y0``, which is ``q`` when
    ``y0 = q`` (the default) or ``t`` is infinite. The variance does not
    depend on ``y0``. The vector bound is reported when ``q`` is a
    probability vector.
    """
    a = query.alpha
    eps = query.epsilon
    t = query.t
    q = np.atleast_1d(np.asarray(query.q, dtype=np.float64))
    if query.y0 is None or t == INFINITE:
        centers = q.copy()
    else:
        a_t = a**t
        y0 = np.broadcast_to(np.asarray(query.y0, dtype=np.float64), q.shape)
        centers = a_t * y0 + (1.0 - a_t) * q
    var_scale = _finite_factor(a, t) * stationary_factor(a)
    raw = var_scale * (q - q * q) / eps**2
    vector_raw = None
    if q.size > 1 and abs(math.fsum(q) - 1.0) <= 1e-12:
        vector_raw = var_scale * (1.0 - float(np.sum(q * q))) / eps**2
    finite = _finite_factor(a, t)
    sqrt_raw = finite * (q - q * q) / (1.0 + a)
    worst = finite * 0.25 / (1.0 + a)
    thr = relative_error_threshold(a, eps) if eps < 1 else None
    return BoundReport(
        alpha=a, t=t, epsilon=eps, q=q.tolist(), centers=centers.tolist(),
        item_bounds=[_clamp(x) for x in raw], item_bounds_raw=raw.tolist(),
        vector_bound=None if vector_raw is None else _clamp(vector_raw),
        vector_bound_raw=vector_raw,
        sqrt_eps=math.sqrt(1.0 - a),
        sqrt_eps_bounds=[_clamp(x) for x in sqrt_raw],
        worst_case_sqrt_eps_bound=worst,
        about_seven_eighths=worst <= SEVEN_EIGHTHS_CUTOFF,
        relative_error_threshold=thr,
        intervals=[[c - eps, c + eps] for c in centers],
    )


def relative_error_threshold(alpha: float, epsilon: float) -> float:
    """Smallest ``q`` with ``P(|y - q| >= eps*q) <= eps`` guaranteed in the limit."""
    _check_alpha(alpha, allow_zero=True)
    if not 0.0 < epsilon < 1.0:
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    return 1.0 / (1.0 + (1.0 + alpha) / (1.0 - alpha) * epsilon**3)


@dataclass(frozen=True)
class RegimeSwitchSpec:
    X: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    t1: int
    t2: int
    alpha: float

    def __post_init__(self):
        _check_alpha(self.alpha)
        for name in ("X", "P1", "P2"):
            v = np.asarray(getattr(self, name), dtype=np.float64).reshape(-1)
            if np.any(v < 0) or abs(math.fsum(v) - 1.0) > 1e-12:
                raise ParameterError(f"{name} must be a probability vector")
            object.__setattr__(self, name, v)
        if not (self.X.size == self.P1.size == self.P2.size):
            raise ParameterError("X, P1 and P2 must have the same length")
        for name in ("t1", "t2"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 0:
                raise ParameterError(f"{name} must be a non-negative integer")


def regime_switch_coefficients(spec: RegimeSwitchSpec):
    """Weights on ``X``, ``P1`` and ``P2`` after ``t1`` steps of ``P1`` then ``t2`` of ``P2``."""
    a = spec.alpha
    w_x = a ** (spec.t1 + spec.t2)
    w_1 = a**spec.t2 * (1.0 - a**spec.t1)
    w_2 = 1.0 - a**spec.t2
    return w_x, w_1, w_2


def regime_switch_mean(spec: RegimeSwitchSpec) -> np.ndarray:
    w_x, w_1, w_2 = regime_switch_coefficients(spec)
    return w_x * spec.X + w_1 * spec.P1 + w_2 * spec.P2


@dataclass(frozen=True)
class BoostRatio:
    alpha: float
    t1: int
    t2: int
    exact: float
    approximate: float
    counting: float

    @property
    def relative_gap(self) -> float:
        return abs(self.approximate - self.exact) / abs(self.exact)

    def to_dict(self) -> Dict[str, Any]:
        doc = {k: getattr(self, k) for k in self.__dataclass_fields__}
        doc["relative_gap"] = self.relative_gap
        return doc


def boost_ratio(alpha: float, t1: int, t2: int) -> BoostRatio:
    """Weight of the recent phase relative to the older one.

    ``exact = (1 - alpha^t2) / (alpha^t2 (1 - alpha^t1))``; the small-``beta``
    approximation is ``alpha^-t2 * t2/t1`` and plain counting gives ``t2/t1``.
    """
    _check_alpha(alpha)
    for name, v in (("t1", t1), ("t2", t2)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
            raise ParameterError(f"{name} must be a positive integer")
    la = math.log(alpha)
    # 1 - alpha^t via expm1 keeps precision as alpha -> 1
    exact = -math.expm1(t2 * la) / (math.exp(t2 * la) * -math.expm1(t1 * la))
    approx = math.exp(-t2 * la) * t2 / t1
    return BoostRatio(alpha, int(t1), int(t2), exact, approx, t2 / t1)
