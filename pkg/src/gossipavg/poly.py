"""Residual polynomials of the consensus methods on k-regular graphs.

All evaluation goes through forward three-term recurrences; expanded monomial
coefficients overflow long before the degrees used here. Every function is
vectorised over ``lam``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, ParameterError
from .spectrum import support_bounds

METHODS = ("gd", "heavyball", "chebyshev", "nesterov", "optimal")


def _arr(x):
    return np.asarray(x, dtype=np.float64)


def _out(v):
    return v[()] if isinstance(v, np.ndarray) and v.ndim == 0 else v


def chebyshev_T(t: int, x):
    """First-kind Chebyshev polynomial by forward recurrence.

    Stable for ``|x| <= ~1.05``; outside ``[-1, 1]`` values grow like
    ``cosh(t acosh|x|)`` and relative accuracy is still fine for moderate t.
    """
    x = _arr(x)
    prev, cur = np.ones_like(x), x.copy()
    if t == 0:
        return _out(prev)
    for _ in range(t - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return _out(cur)


def chebyshev_U(t: int, x):
    """Second-kind Chebyshev polynomial; ``U_{-1} = 0`` by convention."""
    x = _arr(x)
    if t < 0:
        return _out(np.zeros_like(x))
    prev, cur = np.ones_like(x), 2.0 * x
    if t == 0:
        return _out(prev)
    for _ in range(t - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return _out(cur)


def chebyshev_TU(t: int, x):
    """``(T_t(x), U_t(x))`` in one pass."""
    x = _arr(x)
    t_prev, t_cur = np.ones_like(x), x.copy()
    u_prev, u_cur = np.ones_like(x), 2.0 * x
    if t == 0:
        return _out(t_prev), _out(u_prev)
    for _ in range(t - 1):
        t_prev, t_cur = t_cur, 2.0 * x * t_cur - t_prev
        u_prev, u_cur = u_cur, 2.0 * x * u_cur - u_prev
    return _out(t_cur), _out(u_cur)


# --- optimal method --------------------------------------------------------

@dataclass(frozen=True)
class DeltaSequence:
    """Step coefficients ``delta_0..delta_T`` of the optimal method."""

    k: int
    values: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


@lru_cache(maxsize=256)
def _delta_values(k: int, T: int, delta0: float | None) -> np.ndarray:
    d = np.empty(T + 1)
    d[0] = k / (k + 1) if delta0 is None else delta0
    c = (k - 1) / k**2
    for t in range(1, T + 1):
        d[t] = 1.0 / (1.0 - c * d[t - 1])
    d.setflags(write=False)
    return d


def delta_sequence(k: int, T: int, delta0: float | None = None) -> DeltaSequence:
    """``delta_0 = k/(k+1)``, ``delta_t = 1 / (1 - (k-1)/k^2 * delta_{t-1})``.

    ``delta0`` overrides the starting value (used to mutation-test the
    verification suites).
    """
    if k < 3:
        raise ParameterError(f"k must be >= 3, got {k}")
    if T < 0:
        raise ParameterError(f"T must be >= 0, got {T}")
    return DeltaSequence(k, _delta_values(k, T, delta0))


def optimal_residual_recurrence(k: int, t: int, lam, delta0: float | None = None):
    """Residual ``Q_t(lam)`` of the optimal method via its delta recurrence."""
    lam = _arr(lam)
    q_prev = np.ones_like(lam)
    if t == 0:
        return _out(q_prev)
    d = delta_sequence(k, t, delta0).values
    q = 1.0 - d[0] * lam
    for s in range(1, t):
        q_prev, q = q, d[s] * (1.0 - lam) * q + (1.0 - d[s]) * q_prev
    return _out(q)


def _cheb_form(k: int, t: int, lam):
    q = k - 1
    sq = math.sqrt(q)
    if t == 0:
        return np.full_like(_arr(lam), sq)
    sigma = k * (1.0 - _arr(lam)) / (2.0 * sq)
    u_prev, u = np.ones_like(sigma), 2.0 * sigma
    for _ in range(t - 1):
        u_prev, u = u, 2.0 * sigma * u - u_prev
    return sq * u + u_prev


def optimal_residual_chebyshev_unnormalized(k: int, t: int, lam):
    """``sqrt(q) U_t(s) + U_{t-1}(s)``, ``s = k(1-lam)/(2 sqrt(q))``; ``sqrt(q)`` at t=0."""
    return _out(_cheb_form(k, t, lam))


def optimal_residual_chebyshev(k: int, t: int, lam):
    """Residual ``Q_t`` of the optimal method from its second-kind Chebyshev form."""
    return _out(_cheb_form(k, t, lam) / _cheb_form(k, t, 0.0))


def product_formula(k: int, t: int) -> tuple[float, float]:
    """Both sides of ``prod_{i<t} (sqrt(k-1)/k * delta_i)^2 = closed form``."""
    d = delta_sequence(k, max(t - 1, 0)).values[:t]
    lhs = float(np.prod((math.sqrt(k - 1) / k * d) ** 2))
    q = k - 1
    rhs = (1.0 / q) ** t * (1.0 + 2.0 / (k - 2) * (1.0 - float(q) ** (-t))) ** -2
    return lhs, rhs


# --- classical methods -----------------------------------------------------

def gd_step(k: int) -> float:
    lo, hi = support_bounds(k)
    return 2.0 / (hi + lo)


def gd_residual(k: int, t: int, lam):
    """``(1 - 2 lam / (lam_max + lam_min))^t``; ``(1 - lam)^t`` on regular graphs."""
    return _out((1.0 - gd_step(k) * _arr(lam)) ** t)


def polyak_parameters(k: int) -> tuple[float, float]:
    """Heavy-ball ``(m, h)`` tuned to the Kesten-McKay support."""
    lo, hi = support_bounds(k)
    a, b = math.sqrt(hi), math.sqrt(lo)
    return ((a - b) / (a + b)) ** 2, (2.0 / (a + b)) ** 2


def momentum_residual(m: float, h: float, t: int, lam):
    """Residual of gradient descent with momentum ``m`` and step ``h``."""
    if not 0.0 < m < 1.0 or h <= 0.0:
        raise ParameterError(f"need 0 < m < 1 and h > 0, got m={m} h={h}")
    sigma = (1.0 + m - h * _arr(lam)) / (2.0 * math.sqrt(m))
    T, U = chebyshev_TU(t, sigma)
    return _out(m ** (t / 2.0) * (2.0 * m / (1.0 + m) * T + (1.0 - m) / (1.0 + m) * U))


def chebyshev_parameters(k: int) -> tuple[float, float]:
    """``(rho, step)`` of the Chebyshev iterative method."""
    lo, hi = support_bounds(k)
    return (hi - lo) / (hi + lo), 2.0 / (hi + lo)


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def chebyshev_iter_residual(k: int, t: int, lam):
    """``T_t(sigma(lam)) / T_t(sigma(0))`` with ``sigma`` mapping the support onto [-1, 1]."""
    lo, hi = support_bounds(k)
    lam = _arr(lam)
    sigma = (hi + lo - 2.0 * lam) / (hi - lo)
    s0 = (hi + lo) / (hi - lo)
    if t <= 200:
        return _out(chebyshev_T(t, sigma) / chebyshev_T(t, s0))
    # T_t(s0) = cosh(t acosh s0) overflows for large t: divide in log space
    log_den = _log_cosh(t * math.acosh(s0))
    inside = np.abs(sigma) <= 1.0
    val_in = np.cos(t * np.arccos(np.clip(sigma, -1.0, 1.0))) * np.exp(-log_den)
    a = np.arccosh(np.maximum(np.abs(sigma), 1.0))
    sign = np.where((sigma < 0) & (t % 2 == 1), -1.0, 1.0)
    val_out = sign * np.exp(_log_cosh(t * a) - log_den)
    return _out(np.where(inside, val_in, val_out))


def nesterov_parameters(k: int) -> tuple[float, float]:
    """``(alpha, beta)``: step ``1/lam_max`` and momentum of accelerated GD."""
    lo, hi = support_bounds(k)
    a, b = math.sqrt(hi), math.sqrt(lo)
    return 1.0 / hi, (a - b) / (a + b)


def nesterov_residual(k: int, t: int, lam):
    """Closed form of the accelerated-gradient residual, valid on ``lam <= lam_max``."""
    alpha, beta = nesterov_parameters(k)
    lam = _arr(lam)
    s = 1.0 - alpha * lam
    if np.any(s < -1e-14):
        raise DomainError("nesterov closed form needs lam <= lam_max")
    s = np.maximum(s, 0.0)
    sigma = (1.0 + beta) * np.sqrt(s) / (2.0 * math.sqrt(beta))
    T, U = chebyshev_TU(t, sigma)
    bracket = 2.0 * beta / (1.0 + beta) * T + (1.0 - beta) / (1.0 + beta) * U
    return _out((beta * s) ** (t / 2.0) * bracket)


def nesterov_residual_recurrence(k: int, t: int, lam):
    """Same polynomial via ``P_{t+1} = s((1+beta) P_t - beta P_{t-1})``, ``s = 1 - alpha lam``.

    Valid for every real ``lam``; used where the closed form's square root
    would go negative.
    """
    alpha, beta = nesterov_parameters(k)
    s = 1.0 - alpha * _arr(lam)
    p_prev = np.ones_like(s)
    if t == 0:
        return _out(p_prev)
    p = s.copy()
    for _ in range(t - 1):
        p_prev, p = p, s * ((1.0 + beta) * p - beta * p_prev)
    return _out(p)


@dataclass(frozen=True)
class ResidualEvaluator:
    """``P_t(lam)`` for one method on degree-``k`` graphs.

    ``evaluator(t, lam)`` is deterministic and vectorised; ``P_t(0) = 1``.
    """

    method: str
    k: int
    delta0: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"no residual polynomial for method {self.method!r}")
        if self.k < 3:
            raise ParameterError(f"k must be >= 3, got {self.k}")

    def __call__(self, t: int, lam):
        k = self.k
        if self.method == "gd":
            return gd_residual(k, t, lam)
        if self.method == "heavyball":
            m, h = polyak_parameters(k)
            return momentum_residual(m, h, t, lam)
        if self.method == "chebyshev":
            return chebyshev_iter_residual(k, t, lam)
        if self.method == "nesterov":
            lam = _arr(lam)
            alpha, _ = nesterov_parameters(k)
            if np.all(alpha * lam <= 1.0):
                return nesterov_residual(k, t, lam)
            return nesterov_residual_recurrence(k, t, lam)
        return optimal_residual_recurrence(k, t, lam, self.delta0)


def residual_evaluator(method: str, k: int) -> ResidualEvaluator:
    return ResidualEvaluator(method, k)
