"""First-order consensus methods on a k-regular gossip operator.

Every method minimises ``f(x) = 1/2 x^T (L kron I_d) x`` from ``x0``; the
gradient ``L x`` is applied column-wise through :func:`graph.apply_gossip`
(or a fused kernel). Spectrum-parameterised methods take ``lam_min`` and
``lam_max`` from the Kesten-McKay support of degree ``k``, not from the
sampled graph.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from . import kernels
from ._io import atomic_write_text, fmt
from .errors import ParameterError, UnsupportedMethodError
from .graph import DENSE_CAP, RegularGraph, apply_gossip
from .poly import (
    ResidualEvaluator,
    chebyshev_parameters,
    delta_sequence,
    gd_step,
    nesterov_parameters,
    polyak_parameters,
)

ALL_METHODS = ("gd", "heavyball", "chebyshev", "nesterov", "optimal", "cg")
OBLIVIOUS_METHODS = ALL_METHODS[:5]
DIVERGENCE_LIMIT = 1e150
_CONSENSUS_EPS = 1e-300
CG_RELATIVE_FLOOR = 1e-30


@dataclass(frozen=True)
class MethodConfig:
    method: str
    k: int
    iterations: int
    record_every: int = 1

    def __post_init__(self):
        if self.method not in ALL_METHODS:
            raise ParameterError(f"unknown method {self.method!r}; choose from {', '.join(ALL_METHODS)}")
        if self.iterations < 1:
            raise ParameterError("iterations must be >= 1")
        if self.record_every < 1:
            raise ParameterError("record_every must be >= 1")
        if self.k < 3:
            raise ParameterError(f"k must be >= 3, got {self.k}")


@dataclass
class ConvergenceTrace:
    """Normalised consensus error ``||x_t - xbar||^2 / ||x_0 - xbar||^2`` per recorded t."""

    method: str
    iters: np.ndarray
    errors: np.ndarray
    diverged: bool = False
    meta: dict = field(default_factory=dict)

    def error_at(self, t: int) -> float:
        idx = np.flatnonzero(self.iters == t)
        if idx.size == 0:
            raise KeyError(f"iteration {t} not recorded")
        return float(self.errors[idx[0]])

    def first_below(self, tol: float) -> int | None:
        hit = np.flatnonzero(self.errors < tol)
        return int(self.iters[hit[0]]) if hit.size else None

    def to_csv(self, path) -> Path:
        lines = ["iter,error"] + [f"{int(t)},{fmt(e)}" for t, e in zip(self.iters, self.errors)]
        return atomic_write_text(path, "\n".join(lines) + "\n")

    @staticmethod
    def filename(method: str, k: int, n: int, seed: int) -> str:
        return f"{method}_k{k}_n{n}_seed{seed}.csv"


def read_trace_csv(path) -> tuple[np.ndarray, np.ndarray]:
    rows = Path(path).read_text(encoding="utf-8").splitlines()
    if rows[0] != "iter,error":
        raise ValueError(f"{path}: unexpected header {rows[0]!r}")
    body = [r.split(",") for r in rows[1:] if r]
    return np.array([int(a) for a, _ in body]), np.array([float(b) for _, b in body])


INIT_DISTRIBUTIONS = ("normal", "uniform", "rademacher")
# second seed word for x0 draws; graph sampling uses [seed, attempt] with attempt < MAX_ATTEMPTS
_X0_STREAM = 2**31


def initial_state(n: int, d: int, seed: int, dist: str = "normal") -> np.ndarray:
    """Seeded ``(n, d)`` start with i.i.d. zero-mean, unit-variance entries.

    The generator is keyed on ``[seed, _X0_STREAM]``, so it never shares a
    stream with the graph sampler for the same seed.
    """
    rng = np.random.default_rng([int(seed), _X0_STREAM])
    if dist == "normal":
        return rng.standard_normal((n, d))
    if dist == "uniform":
        return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), (n, d))
    if dist == "rademacher":
        return rng.choice(np.array([-1.0, 1.0]), size=(n, d))
    raise ParameterError(f"unknown init distribution {dist!r}; choose from {', '.join(INIT_DISTRIBUTIONS)}")


def consensus_error(x: np.ndarray, x0: np.ndarray) -> float:
    """``||x - xbar0||_F^2 / ||x0 - xbar0||_F^2``; 0 when ``x0`` is already at consensus."""
    x = np.asarray(x, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    if x.shape != x0.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {x0.shape}")
    mean = x0.mean(axis=0)
    den = np.sum((x0 - mean) ** 2)
    if den < _CONSENSUS_EPS:
        return 0.0
    return float(np.sum((x - mean) ** 2) / den)


def _as_block(g: RegularGraph, x0) -> np.ndarray:
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim == 1:
        x0 = x0[:, None]
    if x0.ndim != 2 or x0.shape[0] != g.n:
        raise ValueError(f"x0 has shape {x0.shape}, expected ({g.n}, d)")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 has non-finite entries")
    return np.ascontiguousarray(x0)


def iterate(g: RegularGraph, x0: np.ndarray, cfg: MethodConfig) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(t, x_t)`` for ``t = 0..cfg.iterations``.

    Yielded arrays are fresh; callers may keep them. ``x0`` is not modified.
    """
    if g.k != cfg.k:
        raise ParameterError(f"config k={cfg.k} does not match graph k={g.k}")
    x0 = _as_block(g, x0)
    nb, k, T = g.neighbors, g.k, cfg.iterations
    yield 0, x0.copy()
    method = cfg.method

    if method == "cg":
        yield from _cg(g, x0, T)
        return

    if method == "nesterov":
        alpha, beta = nesterov_parameters(k)
        x_prev, x = x0, x0
        for t in range(1, T + 1):
            x_prev, x = x, kernels.lookahead_step(nb, k, x, x_prev, beta, alpha)
            yield t, x
        return

    # two-step methods: x_{t+1} = x_t + a_t (x_t - x_{t-1}) - b_t L x_t
    if method == "gd":
        step = gd_step(k)
        coeffs = ((0.0, step) for _ in range(T))
    elif method == "heavyball":
        m, h = polyak_parameters(k)
        coeffs = _first_then((0.0, gd_step(k)), (m, h), T)
    elif method == "chebyshev":
        coeffs = _chebyshev_coeffs(k, T)
    else:
        d = delta_sequence(k, T).values
        coeffs = ((0.0, d[0]) if t == 0 else (d[t] - 1.0, d[t]) for t in range(T))

    x_prev, x = x0, x0
    for t, (a, b) in enumerate(coeffs, start=1):
        x_prev, x = x, kernels.momentum_step(nb, k, x, x_prev, a, b)
        yield t, x


def _first_then(first, rest, T):
    yield first
    for _ in range(T - 1):
        yield rest


def _chebyshev_coeffs(k: int, T: int):
    rho, step = chebyshev_parameters(k)
    yield 0.0, step
    omega = 2.0
    for _ in range(1, T):
        omega = 1.0 / (1.0 - rho * rho / 4.0 * omega)
        yield omega - 1.0, omega * step


def _cg(g: RegularGraph, x0: np.ndarray, T: int):
    # Independent CG per column of the block, sharing the iteration count.
    x = x0.copy()
    r = -apply_gossip(g, x)
    p = r.copy()
    rr = np.einsum("ij,ij->j", r, r)
    # a column stops once its residual reaches roundoff level; iterating
    # past that point only amplifies rounding noise
    floor = rr * CG_RELATIVE_FLOOR
    for t in range(1, T + 1):
        active = rr > floor
        if np.any(active):
            lp = apply_gossip(g, p)
            plp = np.einsum("ij,ij->j", p, lp)
            active &= plp > 0.0
            alpha = np.where(active, rr / np.where(active, plp, 1.0), 0.0)
            x = x + alpha * p
            r = r - alpha * lp
            rr_new = np.einsum("ij,ij->j", r, r)
            beta = np.where(active, rr_new / np.where(active, rr, 1.0), 0.0)
            p = r + beta * p
            rr = np.where(active, rr_new, 0.0)
        yield t, x.copy()


def run(g: RegularGraph, x0: np.ndarray, cfg: MethodConfig) -> ConvergenceTrace:
    """Simulate ``cfg.method`` for ``cfg.iterations`` steps from ``x0``."""
    x0b = _as_block(g, x0)
    iters, errs = [], []
    diverged = False
    for t, x in iterate(g, x0b, cfg):
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_LIMIT:
            diverged = True
            break
        if t % cfg.record_every == 0 or t == cfg.iterations:
            iters.append(t)
            errs.append(consensus_error(x, x0b))
    return ConvergenceTrace(
        cfg.method,
        np.array(iters, dtype=np.int64),
        np.array(errs),
        diverged,
        {"n": g.n, "k": g.k, "d": x0b.shape[1]},
    )


def trajectory_polynomial_gaps(g: RegularGraph, x0: np.ndarray, cfg: MethodConfig,
                               delta0: float | None = None) -> np.ndarray:
    """Relative gap between simulated ``x_t`` and ``P_t(L)`` applied to ``x0``, per t.

    The polynomial side evaluates the method's residual at every eigenvalue
    of a dense eigendecomposition of ``L`` and reassembles. The gap at ``t`` is
    ``||x_t^sim - x_t^poly|| / ||x_t^poly - x_*||`` (0 where the denominator
    vanishes).
    """
    if cfg.method not in OBLIVIOUS_METHODS:
        raise UnsupportedMethodError(f"{cfg.method!r} has no predetermined residual polynomial")
    if g.n > DENSE_CAP:
        raise ParameterError(f"n={g.n} exceeds dense cap {DENSE_CAP}")
    x0 = _as_block(g, x0)
    evals, vecs = np.linalg.eigh(g.gossip_dense())
    xstar = np.broadcast_to(x0.mean(axis=0), x0.shape)
    coef = vecs.T @ (x0 - xstar)
    evaluator = ResidualEvaluator(cfg.method, cfg.k, delta0)
    gaps = np.zeros(cfg.iterations + 1)
    for t, x in iterate(g, x0, cfg):
        if t == 0:
            continue  # P_0 = 1: both sides are x0 itself
        p = np.asarray(evaluator(t, evals))
        pred = vecs @ (p[:, None] * coef)
        den = np.linalg.norm(pred)
        if den > 0.0:
            gaps[t] = np.linalg.norm((x - xstar) - pred) / den
    return gaps


def trajectory_polynomial_check(g: RegularGraph, x0: np.ndarray, cfg: MethodConfig,
                                delta0: float | None = None) -> float:
    """Max over ``t <= cfg.iterations`` of :func:`trajectory_polynomial_gaps`."""
    return float(trajectory_polynomial_gaps(g, x0, cfg, delta0).max())
