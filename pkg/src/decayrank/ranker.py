"""Streaming decayed-frequency ranking.

Each event for item ``j`` applies the convex mixture ``p <- alpha*p +
(1-alpha)*delta_j`` to the whole distribution. :class:`DecayRankTable` does
this in O(1) per event by storing unnormalized weights ``u`` and a shared
scale, ``p_i = u_i * alpha**(step - rebase)``; the scale is folded back into
the weights only when it leaves ``[2**-500, 2**500]``.
"""
from __future__ import annotations

import heapq
import json
import math
import threading
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import ParameterError, SnapshotFormatError

SNAPSHOT_FORMAT = "decayrank.snapshot"
SNAPSHOT_VERSION = 1

_LN2 = math.log(2.0)
_RESCALE_EXP = 500  # fold the scale once alpha**k < 2**-500
_TINY = np.finfo(np.float64).tiny


def half_life_to_alpha(half_life: float) -> float:
    """Decay factor under which an idle item loses half its mass in ``half_life`` events."""
    if not (isinstance(half_life, (int, float)) and math.isfinite(half_life)) or half_life <= 0:
        raise ParameterError(f"half_life must be a positive finite number, got {half_life!r}")
    alpha = math.exp(-_LN2 / half_life)
    # exp rounds to 1.0 for half lives beyond ~1e16 events
    return min(alpha, math.nextafter(1.0, 0.0))


def alpha_to_half_life(alpha: float) -> float:
    _check_alpha(alpha)
    return -_LN2 / math.log(alpha)


def _check_alpha(alpha) -> None:
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha)) or not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")


@dataclass(frozen=True)
class DecayParams:
    alpha: float
    half_life: float

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.half_life > 0:
            raise ParameterError(f"half_life must be positive, got {self.half_life!r}")
        if abs(self.alpha - math.exp(-_LN2 / self.half_life)) > 1e-12:
            raise ParameterError("alpha and half_life are inconsistent")

    @classmethod
    def from_alpha(cls, alpha: float) -> "DecayParams":
        return cls(alpha=float(alpha), half_life=alpha_to_half_life(alpha))

    @classmethod
    def from_half_life(cls, half_life: float) -> "DecayParams":
        return cls(alpha=half_life_to_alpha(half_life), half_life=float(half_life))


class DecayRankTable:
    """Lazily decayed rank distribution over string item ids.

    ``items`` declares the initial universe, which starts uniform unless
    ``initial`` gives explicit probabilities. Items first seen mid-stream
    enter with zero prior mass.

    ``evict_below`` (default 0, disabled) drops items whose probability falls
    under the floor whenever the scale is folded. Eviction is lossy: the
    dropped mass leaves the table and probabilities no longer sum to one.
    """

    def __init__(
        self,
        params: DecayParams,
        items: Iterable[str] = (),
        initial: Optional[Mapping[str, float]] = None,
        evict_below: float = 0.0,
    ):
        if not isinstance(params, DecayParams):
            raise ParameterError("params must be a DecayParams")
        if evict_below < 0:
            raise ParameterError("evict_below must be >= 0")
        self._params = params
        self._evict_below = float(evict_below)
        self._lock = threading.RLock()
        self._step = 0
        self._rebase = 0
        if initial is not None:
            weights = {str(k): float(v) for k, v in initial.items()}
            if any(v < 0 or not math.isfinite(v) for v in weights.values()):
                raise ParameterError("initial probabilities must be finite and >= 0")
            if weights and abs(math.fsum(weights.values()) - 1.0) > 1e-9:
                raise ParameterError("initial probabilities must sum to 1")
        else:
            names = list(dict.fromkeys(str(i) for i in items))
            weights = {name: 1.0 / len(names) for name in names} if names else {}
        self._u: Dict[str, float] = weights
        self._set_rescale_limit()

    # -- bookkeeping ---------------------------------------------------

    def _set_rescale_limit(self) -> None:
        # largest k with alpha**k >= 2**-500, so the increment alpha**-k stays finite
        self._k_max = max(1, int(_RESCALE_EXP * _LN2 / -math.log(self._params.alpha)))

    def _scale(self) -> float:
        return self._params.alpha ** (self._step - self._rebase)

    def _rescale(self) -> None:
        scale = self._scale()
        floor = self._evict_below
        u = self._u
        for key in list(u):
            v = u[key] * scale
            if v < _TINY:
                v = 0.0
            if floor > 0.0 and v < floor:
                del u[key]
            else:
                u[key] = v
        self._rebase = self._step

    # -- public surface ------------------------------------------------

    @property
    def params(self) -> DecayParams:
        return self._params

    @property
    def alpha(self) -> float:
        return self._params.alpha

    @property
    def global_step(self) -> int:
        return self._step

    @property
    def rebase_step(self) -> int:
        return self._rebase

    def __len__(self) -> int:
        return len(self._u)

    def __contains__(self, item) -> bool:
        return item in self._u

    def observe(self, item: str) -> None:
        with self._lock:
            if self._step + 1 - self._rebase > self._k_max:
                self._rescale()
            self._step += 1
            k = self._step - self._rebase
            inc = (1.0 - self._params.alpha) * self._params.alpha ** (-k)
            self._u[item] = self._u.get(item, 0.0) + inc

    def observe_many(self, items: Iterable[str]) -> None:
        for item in items:
            self.observe(item)

    def probability(self, item: str) -> float:
        with self._lock:
            return self._u.get(item, 0.0) * self._scale()

    def probabilities(self) -> Dict[str, float]:
        with self._lock:
            scale = self._scale()
            return {k: v * scale for k, v in self._u.items()}

    def total_mass(self) -> float:
        return math.fsum(self.probabilities().values())

    def top_k(self, k: int) -> List[Tuple[str, float]]:
        """The ``k`` heaviest items, descending; ties go to the smaller item id."""
        if not isinstance(k, (int, np.integer)) or k < 1:
            raise ParameterError(f"k must be a positive integer, got {k!r}")
        with self._lock:
            scale = self._scale()
            best = heapq.nsmallest(k, self._u.items(), key=lambda kv: (-kv[1], kv[0]))
            return [(key, u * scale) for key, u in best]

    def set_alpha(self, alpha: float) -> None:
        _check_alpha(alpha)
        with self._lock:
            if alpha == self._params.alpha:
                return
            self._rescale()
            self._params = DecayParams.from_alpha(alpha)
            self._set_rescale_limit()

    # -- persistence ---------------------------------------------------

    def snapshot(self) -> bytes:
        """Canonical JSON document (UTF-8) holding the complete state."""
        with self._lock:
            doc = {
                "format": SNAPSHOT_FORMAT,
                "version": SNAPSHOT_VERSION,
                "alpha": self._params.alpha,
                "half_life": self._params.half_life,
                "global_step": self._step,
                "rebase_step": self._rebase,
                "evict_below": self._evict_below,
                "weights": [[k, v] for k, v in sorted(self._u.items())],
            }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")

    @classmethod
    def restore(cls, data: bytes) -> "DecayRankTable":
        try:
            doc = json.loads(bytes(data).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SnapshotFormatError("document", f"not a valid snapshot ({exc})") from None
        if not isinstance(doc, dict):
            raise SnapshotFormatError("document", "expected a JSON object")
        if doc.get("format") != SNAPSHOT_FORMAT:
            raise SnapshotFormatError("format", f"expected {SNAPSHOT_FORMAT!r}")
        if doc.get("version") != SNAPSHOT_VERSION:
            raise SnapshotFormatError("version", f"unsupported version {doc.get('version')!r}")

        def need(name, kinds):
            if name not in doc:
                raise SnapshotFormatError(name, "missing")
            value = doc[name]
            if isinstance(value, bool) or not isinstance(value, kinds):
                raise SnapshotFormatError(name, f"bad type {type(value).__name__}")
            return value

        alpha = need("alpha", (int, float))
        half_life = need("half_life", (int, float))
        step = need("global_step", int)
        rebase = need("rebase_step", int)
        evict = need("evict_below", (int, float))
        weights = need("weights", list)
        try:
            params = DecayParams(alpha=float(alpha), half_life=float(half_life))
        except ParameterError as exc:
            raise SnapshotFormatError("alpha", str(exc)) from None
        if not 0 <= rebase <= step:
            raise SnapshotFormatError("rebase_step", "must satisfy 0 <= rebase_step <= global_step")
        u: Dict[str, float] = {}
        for entry in weights:
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not isinstance(entry[0], str)
                or isinstance(entry[1], bool)
                or not isinstance(entry[1], (int, float))
                or not math.isfinite(entry[1])
                or entry[1] < 0
            ):
                raise SnapshotFormatError("weights", f"bad entry {entry!r}")
            u[entry[0]] = float(entry[1])
        table = cls(params, evict_below=float(evict))
        table._u = u
        table._step = step
        table._rebase = rebase
        return table


class DenseRanker:
    """Reference implementation touching every entry on each event.

    Used as the oracle for :class:`DecayRankTable`; O(n) per event.
    """

    def __init__(self, alpha: float, items: Sequence[str], initial: Optional[Sequence[float]] = None):
        _check_alpha(alpha)
        self.alpha = float(alpha)
        self.items = list(items)
        self.index = {name: i for i, name in enumerate(self.items)}
        if initial is None:
            self.p = np.full(len(self.items), 1.0 / len(self.items)) if self.items else np.zeros(0)
        else:
            self.p = np.array(initial, dtype=np.float64)

    def observe(self, item: str) -> None:
        if item not in self.index:
            self.index[item] = len(self.items)
            self.items.append(item)
            self.p = np.append(self.p, 0.0)
        j = self.index[item]
        self.p *= self.alpha
        self.p[j] += 1.0 - self.alpha

    def set_alpha(self, alpha: float) -> None:
        _check_alpha(alpha)
        self.alpha = float(alpha)

    def probabilities(self) -> Dict[str, float]:
        return dict(zip(self.items, self.p.tolist()))
