"""Closed-form moments of finite and infinite biased Bernoulli convolutions.

``t`` arguments accept an integer step count or :data:`INFINITE` (the
limiting distribution). Every finite-``t`` variance carries the factor
``1 - alpha**(2t)``, which vanishes as ``t`` grows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import HypothesisViolationError, ParameterError
from .walk import INFINITE, VertexSet

MAX_MOMENT_ORDER = 64


def _check_alpha(alpha):
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")


def _check_t(t):
    if t == INFINITE:
        return
    if isinstance(t, bool) or not isinstance(t, (int, np.integer)) or t < 0:
        raise ParameterError(f"t must be a non-negative integer or INFINITE, got {t!r}")


def _decay(alpha: float, t) -> float:
    """``alpha**t``, zero at INFINITE."""
    return 0.0 if t == INFINITE else alpha**t


def _finite_factor(alpha: float, t) -> float:
    """``1 - alpha**(2t)`` computed without cancellation near alpha = 1."""
    if t == INFINITE:
        return 1.0
    return -math.expm1(2 * t * math.log(alpha))


def stationary_factor(alpha: float) -> float:
    """``(1 - alpha)/(1 + alpha)``, the variance scale of the limit."""
    return (1.0 - alpha) / (1.0 + alpha)


def _prob_vector(Q) -> np.ndarray:
    Q = np.asarray(Q, dtype=np.float64).reshape(-1)
    if Q.size == 0 or np.any(Q < 0) or not np.all(np.isfinite(Q)) or abs(math.fsum(Q) - 1.0) > 1e-12:
        raise ParameterError("Q must be a probability vector")
    return Q


# -- scalar walk ----------------------------------------------------------


@dataclass(frozen=True)
class ScalarMoments:
    alpha: float
    q: float
    t: float
    mean: float
    variance: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "q": self.q,
            "t": "infinite" if self.t == INFINITE else self.t,
            "mean": self.mean,
            "variance": self.variance,
        }


def scalar_mean_var(alpha: float, q: float, t, y0: Optional[float] = None) -> ScalarMoments:
    """Mean and variance of the 0/1 walk after ``t`` steps (or in the limit)."""
    _check_alpha(alpha)
    _check_t(t)
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"q must lie in [0, 1], got {q!r}")
    if t == INFINITE:
        mean = q
    else:
        if y0 is None:
            raise ParameterError("y0 is required for finite t")
        a_t = alpha**t
        mean = a_t * y0 + (1.0 - a_t) * q
    var = _finite_factor(alpha, t) * stationary_factor(alpha) * (q - q * q)
    return ScalarMoments(alpha, q, t, mean, var)


# -- simplex covariance ---------------------------------------------------


def kernel_matrix(Q) -> np.ndarray:
    """``diag(Q) - Q Q^T``."""
    Q = _prob_vector(Q)
    return np.diag(Q) - np.outer(Q, Q)


@dataclass
class CovarianceReport:
    Q: np.ndarray
    alpha: float
    t: float
    covariance: np.ndarray
    scale: float
    eigenvalues: np.ndarray  # nonzero eigenvalues of the covariance
    eigenvectors: np.ndarray  # columns matching ``eigenvalues``
    kernel_eigenvalues: np.ndarray  # full spectrum of diag(Q) - QQ^T, ascending

    def to_dict(self) -> Dict[str, Any]:
        return {
            "Q": self.Q.tolist(),
            "alpha": self.alpha,
            "t": "infinite" if self.t == INFINITE else self.t,
            "scale": self.scale,
            "covariance": self.covariance.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenvectors": self.eigenvectors.T.tolist(),
            "kernel_eigenvalues": self.kernel_eigenvalues.tolist(),
        }


def simplex_covariance(alpha: float, Q, t=INFINITE, zero_tol: float = 1e-12) -> CovarianceReport:
    """Covariance of the simplex walk and its spectrum.

    The spectrum is reported twice: for the scaled covariance (nonzero part
    only, with eigenvectors) and for the unscaled kernel ``diag(Q) - QQ^T``.
    """
    _check_alpha(alpha)
    _check_t(t)
    Q = _prob_vector(Q)
    K = kernel_matrix(Q)
    scale = _finite_factor(alpha, t) * stationary_factor(alpha)
    cov = scale * K
    k_vals, k_vecs = np.linalg.eigh(K)
    keep = np.abs(k_vals) > zero_tol
    return CovarianceReport(
        Q=Q, alpha=alpha, t=t, covariance=cov, scale=scale,
        eigenvalues=scale * k_vals[keep], eigenvectors=k_vecs[:, keep],
        kernel_eigenvalues=k_vals,
    )


def secular_function(lam: float, Q) -> float:
    Q = np.asarray(Q, dtype=np.float64)
    return float(np.sum(Q / (Q - lam)))


def secular_eigenvalues(Q) -> np.ndarray:
    """Nonzero eigenvalues of ``diag(Q) - QQ^T`` as roots of ``sum q_i/(q_i - x) = 0``.

    One root lies strictly between each pair of neighbouring sorted ``q_i``;
    each is bisected to full double precision.
    """
    Q = _prob_vector(Q)
    if np.any(Q <= 0):
        raise ParameterError("all q_i must be positive")
    qs = np.sort(Q)
    if np.any(np.diff(qs) == 0):
        raise HypothesisViolationError("q_i are not pairwise distinct")
    roots = []
    for lo, hi in zip(qs[:-1], qs[1:]):
        a, b = float(lo), float(hi)
        # f runs from -inf just above lo to +inf just below hi and is increasing
        while True:
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b or b - a <= 1e-17:
                break
            if np.sum(qs / (qs - mid)) < 0:
                a = mid
            else:
                b = mid
        roots.append(0.5 * (a + b))
    return np.array(roots)


# -- generalized vertex sets ----------------------------------------------


@dataclass
class GeneralizedMoments:
    alpha: float
    Q: np.ndarray
    t: float
    mean: Any  # real vector, or complex scalar
    covariance: Optional[np.ndarray] = None
    variance: Optional[float] = None  # complex walks only

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "alpha": self.alpha,
            "Q": self.Q.tolist(),
            "t": "infinite" if self.t == INFINITE else self.t,
        }
        if isinstance(self.mean, complex):
            doc["mean"] = [self.mean.real, self.mean.imag]
            doc["variance"] = self.variance
        else:
            doc["mean"] = np.asarray(self.mean).tolist()
            doc["covariance"] = self.covariance.tolist()
        return doc


def complex_kernel_variance(v, Q) -> float:
    """``sum |v_i|^2 (q_i - q_i^2) - sum_{i<j} (v_i conj(v_j) + v_j conj(v_i)) q_i q_j``."""
    v = np.asarray(v, dtype=np.complex128)
    Q = np.asarray(Q, dtype=np.float64)
    diag = np.sum(np.abs(v) ** 2 * (Q - Q * Q))
    cross = 0.0
    for i in range(v.size):
        for j in range(i + 1, v.size):
            cross += (2.0 * (v[i] * np.conj(v[j])).real) * Q[i] * Q[j]
    return float(diag - cross)


def generalized_moments(vertices, Q, alpha: float, t=INFINITE, y0=None) -> GeneralizedMoments:
    """Moments of the walk toward arbitrary vertices.

    ``vertices`` is a :class:`VertexSet`, an ``n x m`` real matrix (one column
    per vertex) or a 1-D complex sequence. ``y0`` is required for finite ``t``.
    """
    _check_alpha(alpha)
    _check_t(t)
    Q = _prob_vector(Q)
    a_t = _decay(alpha, t)
    scale = _finite_factor(alpha, t) * stationary_factor(alpha)
    arr = np.asarray(vertices.points if isinstance(vertices, VertexSet) else vertices)
    if np.iscomplexobj(arr):
        v = arr.reshape(-1)
        if v.size != Q.size:
            raise ParameterError(f"{v.size} vertices but {Q.size} probabilities")
        stationary = complex(np.sum(v * Q))
        mean = stationary if t == INFINITE else _finite_mean(a_t, y0, stationary)
        return GeneralizedMoments(alpha, Q, t, complex(mean), variance=scale * complex_kernel_variance(v, Q))
    V = np.atleast_2d(arr.astype(np.float64))
    if V.shape[1] != Q.size:
        raise ParameterError(f"V has {V.shape[1]} columns but Q has {Q.size} entries")
    stationary = V @ Q
    if t == INFINITE:
        mean = stationary
    else:
        if y0 is None:
            raise ParameterError("y0 is required for finite t")
        mean = a_t * np.asarray(y0, dtype=np.float64) + (1.0 - a_t) * stationary
    K = np.diag(Q) - np.outer(Q, Q)
    cov = scale * (V @ K @ V.T)
    return GeneralizedMoments(alpha, Q, t, mean, covariance=0.5 * (cov + cov.T))


def _finite_mean(a_t, y0, stationary):
    if y0 is None:
        raise ParameterError("y0 is required for finite t")
    return a_t * complex(y0) + (1.0 - a_t) * stationary


def unit_circle_variance(angles, Q, alpha: float, t=INFINITE) -> float:
    """Complex variance for vertices ``exp(i*angle)`` on the unit circle."""
    _check_alpha(alpha)
    _check_t(t)
    Q = _prob_vector(Q)
    phi = np.asarray(angles, dtype=np.float64).reshape(-1)
    if phi.size != Q.size:
        raise ParameterError(f"{phi.size} angles but {Q.size} probabilities")
    total = 0.0
    for i in range(phi.size):
        for j in range(i + 1, phi.size):
            total += math.sin(0.5 * (phi[i] - phi[j])) ** 2 * Q[i] * Q[j]
    return 4.0 * _finite_factor(alpha, t) * stationary_factor(alpha) * total


# -- central moments ------------------------------------------------------


def _pascal(n: int) -> np.ndarray:
    C = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        C[i, 0] = 1.0
        for k in range(1, i + 1):
            C[i, k] = C[i - 1, k - 1] + C[i - 1, k]
    return C


_BINOM = _pascal(MAX_MOMENT_ORDER)


@dataclass
class CentralMomentTable:
    alpha: float
    q: float
    order: int
    values: np.ndarray  # values[n] = M_n

    def __getitem__(self, n: int) -> float:
        return float(self.values[n])

    def to_dict(self) -> Dict[str, Any]:
        return {"alpha": self.alpha, "q": self.q, "order": self.order, "moments": self.values.tolist()}


def _check_moment_args(alpha, q, N):
    _check_alpha(alpha)
    if not 0.0 < q < 1.0:
        raise ParameterError(f"q must lie in (0, 1), got {q!r}")
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or not 0 <= N <= MAX_MOMENT_ORDER:
        raise ParameterError(f"order must be an integer in [0, {MAX_MOMENT_ORDER}], got {N!r}")


def central_moments(alpha: float, q: float, N: int) -> CentralMomentTable:
    """``M_n = E[(y - q)^n]`` of the limiting convolution for ``n <= N``."""
    _check_moment_args(alpha, q, N)
    beta = 1.0 - alpha
    pq = q - q * q
    M = np.zeros(N + 1)
    M[0] = 1.0
    # c[k] = (-1)^k q^(k-1) + (1-q)^(k-1)
    c = np.array([0.0] + [(-1.0) ** k * q ** (k - 1) + (1.0 - q) ** (k - 1) for k in range(1, N + 1)])
    for n in range(2, N + 1):
        acc = 0.0
        for k in range(2, n + 1):
            acc += _BINOM[n, k] * alpha ** (n - k) * beta**k * c[k] * M[n - k]
        M[n] = pq / (1.0 - alpha**n) * acc
    return CentralMomentTable(alpha, q, N, M)


def central_moments_finite(alpha: float, q: float, N: int, t: int, y0: float) -> np.ndarray:
    """``E[(y_t - q)^n]`` after ``t`` steps from ``y0``, by stepping the moment map.

    One step sends ``E[z^n]`` to
    ``sum_k C(n,k) alpha^(n-k) (1-alpha)^k ((1-q)(-q)^k + q(1-q)^k) E[z^(n-k)]``;
    its fixed point is :func:`central_moments`.
    """
    _check_moment_args(alpha, q, N)
    _check_t(t)
    beta = 1.0 - alpha
    d = np.array([(1.0 - q) * (-q) ** k + q * (1.0 - q) ** k for k in range(N + 1)])
    M = np.array([(y0 - q) ** n for n in range(N + 1)], dtype=np.float64)
    for _ in range(int(t)):
        new = np.empty_like(M)
        for n in range(N + 1):
            acc = 0.0
            for k in range(n + 1):
                acc += _BINOM[n, k] * alpha ** (n - k) * beta**k * d[k] * M[n - k]
            new[n] = acc
        M = new
    return M


@dataclass
class SymmetryReport:
    alpha: float
    q: float
    order: int
    reflection_residuals: List[float]  # |M_n(1-q) - (-1)^n M_n(q)|
    reflection_pass: List[bool]
    odd_at_half: Dict[int, float]  # odd n -> M_n(1/2)
    odd_at_half_pass: bool
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(self.reflection_pass) and self.odd_at_half_pass

    def to_dict(self) -> Dict[str, Any]:
        doc = {k: getattr(self, k) for k in self.__dataclass_fields__}
        doc["odd_at_half"] = {str(k): v for k, v in self.odd_at_half.items()}
        doc["passed"] = self.passed
        return doc


def moment_symmetry_check(alpha: float, q: float, N: int, tol: float = 1e-12) -> SymmetryReport:
    """Check ``M_n(1-q) = (-1)^n M_n(q)`` and that odd moments vanish at q = 1/2."""
    M = central_moments(alpha, q, N).values
    R = central_moments(alpha, 1.0 - q, N).values
    res = [abs(R[n] - (-1) ** n * M[n]) for n in range(N + 1)]
    half = central_moments(alpha, 0.5, N).values
    odd = {n: float(half[n]) for n in range(1, N + 1, 2)}
    return SymmetryReport(
        alpha, q, N, res, [r <= tol for r in res], odd,
        all(abs(v) <= 1e-15 for v in odd.values()), tol,
    )


@dataclass
class RootTrend:
    alpha: float
    q: float
    orders: List[int]
    roots: List[float]  # M_n^(1/n)
    moments: List[float]
    bound: float  # 1 - q
    within_bounds: bool
    even_nondecreasing: bool

    @property
    def passed(self) -> bool:
        return self.within_bounds and self.even_nondecreasing

    def gap(self, n: int) -> float:
        return self.bound - self.roots[self.orders.index(n)]

    def to_dict(self) -> Dict[str, Any]:
        doc = {k: getattr(self, k) for k in self.__dataclass_fields__}
        doc["passed"] = self.passed
        return doc


def moment_root_trend(alpha: float, q: float, N: int) -> RootTrend:
    """``(n, M_n^(1/n))`` for ``n = 2..N`` with the bound and monotonicity checks.

    Requires ``q <= 1/2``; the roots should approach ``1 - q`` from below,
    but only boundedness and monotonicity of the even orders are checked.
    """
    if q > 0.5:
        raise HypothesisViolationError(f"root trend needs q <= 1/2, got {q!r}")
    if N < 2:
        raise ParameterError("N must be >= 2")
    M = central_moments(alpha, q, N).values
    orders = list(range(2, N + 1))
    roots = [math.copysign(abs(M[n]) ** (1.0 / n), M[n]) for n in orders]
    bound = 1.0 - q
    # M_0 = 1 is excluded from the upper bound
    within = all(0.0 <= M[n] <= bound for n in range(1, N + 1))
    evens = [r for n, r in zip(orders, roots) if n % 2 == 0]
    nondecreasing = all(b >= a for a, b in zip(evens[:-1], evens[1:]))
    return RootTrend(alpha, q, orders, roots, M[2:].tolist(), bound, within, nondecreasing)
