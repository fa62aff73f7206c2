"""Expected-error curves: quadrature, closed-form sandwiches, Monte Carlo."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._io import atomic_write_text, fmt
from .graph import generate_regular
from .poly import ResidualEvaluator, product_formula
from .solvers import MethodConfig, initial_state, iterate
from .spectrum import DEFAULT_NODES, KestenMcKay


def expected_error_quadrature(evaluator: ResidualEvaluator, k: int, t: int, R: float = 1.0,
                              nodes: int = DEFAULT_NODES) -> float:
    """``R^2 * int P_t^2 dmu`` against the Kesten-McKay law of degree ``k``."""
    if R <= 0:
        raise ValueError("R must be positive")
    return R * R * KestenMcKay(k).integrate(lambda lam: np.asarray(evaluator(t, lam)) ** 2, nodes)


def expected_error_curve(evaluator: ResidualEvaluator, k: int, t_max: int, R: float = 1.0,
                         nodes: int = DEFAULT_NODES) -> np.ndarray:
    """Quadrature expected error for ``t = 0..t_max`` on one shared node set."""
    lam, w = KestenMcKay(k).nodes_weights(nodes)
    return np.array([R * R * float(np.dot(np.asarray(evaluator(t, lam)) ** 2, w))
                     for t in range(t_max + 1)])


def optimal_rate_closed_form(k: int, t: int) -> tuple[float, float]:
    """Lower/upper bounds on ``int Q_t^2 dmu`` for the optimal method (R = 1).

    The lower end is ``prod_{i<t} (sqrt(k-1)/k delta_i)^2`` in closed form; the
    upper end multiplies it by ``1/(1-M) = (1 + 2/(k-2))^2``.
    """
    _, lower = product_formula(k, t)
    return lower, (1.0 + 2.0 / (k - 2)) ** 2 * lower


def heavyball_rate_bounds(k: int, t: int, R: float = 1.0) -> tuple[float, float]:
    q = k - 1
    m = 1.0 / q
    lower = R * R * (q**3 + q) / k**3 * m**t
    upper = R * R * (q**3 + q) / (k * (k - 2) ** 2) * m**t
    return lower, upper


def closed_form_bounds(method: str, k: int, t: int, R: float = 1.0) -> tuple[float, float]:
    if method == "optimal":
        lo, hi = optimal_rate_closed_form(k, t)
        return R * R * lo, R * R * hi
    if method == "heavyball":
        return heavyball_rate_bounds(k, t, R)
    return math.nan, math.nan


def monte_carlo_expected_error(k: int, n: int, d: int, method: str, t_max: int, seeds,
                               init: str = "normal") -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error over seeds of the unnormalised ``||x_t - x_*||^2``.

    Each seed draws a fresh graph and an ``x0`` with i.i.d. unit-variance
    entries (standard normal by default); ``x_*`` is the row-broadcast column
    mean of ``x0``.
    """
    seeds = sorted(int(s) for s in seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    cfg = MethodConfig(method, k, t_max)
    runs = np.empty((len(seeds), t_max + 1))
    for i, seed in enumerate(seeds):
        g = generate_regular(n, k, seed)
        x0 = initial_state(n, d, seed, init)
        xstar = x0.mean(axis=0)
        for t, x in iterate(g, x0, cfg):
            runs[i, t] = np.sum((x - xstar) ** 2)
    mean = runs.mean(axis=0)
    sem = runs.std(axis=0, ddof=1) / math.sqrt(len(seeds)) if len(seeds) > 1 else np.full(t_max + 1, math.nan)
    return mean, sem


def fit_log_slope(ts, errors, window: tuple[int, int] = (5, 25)) -> float:
    """Least-squares slope of ``log(error)`` against ``t`` over ``window`` (inclusive)."""
    ts = np.asarray(ts)
    errors = np.asarray(errors, dtype=np.float64)
    sel = (ts >= window[0]) & (ts <= window[1]) & (errors > 0)
    if sel.sum() < 2:
        raise ValueError("fewer than two positive points in the fit window")
    return float(np.polyfit(ts[sel], np.log(errors[sel]), 1)[0])


@dataclass
class RateReport:
    """Per-iteration expected-error table for one method and degree.

    ``mc_mean``/``mc_sem`` are per-coordinate Monte Carlo values
    (``||x_t - x_*||^2 / (n d)``) so they sit on the same scale as the
    quadrature column; NaN when no seeds were requested.
    """

    method: str
    k: int
    R: float
    quadrature: np.ndarray
    closed_lower: np.ndarray
    closed_upper: np.ndarray
    mc_mean: np.ndarray
    mc_sem: np.ndarray
    mc_seeds: int = 0

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.quadrature.size)

    def to_csv(self, path) -> None:
        lines = ["t,quadrature,closed_lower,closed_upper,mc_mean,mc_sem"]
        for row in zip(self.t, self.quadrature, self.closed_lower, self.closed_upper, self.mc_mean, self.mc_sem):
            t, vals = row[0], row[1:]
            lines.append(",".join([str(int(t))] + ["" if math.isnan(v) else fmt(v) for v in vals]))
        atomic_write_text(path, "\n".join(lines) + "\n")


def rate_report(k: int, t_max: int, method: str = "optimal", R: float = 1.0,
                nodes: int = DEFAULT_NODES, mc_n: int = 0, mc_d: int = 1, seeds=(),
                init: str = "normal") -> RateReport:
    quad = expected_error_curve(ResidualEvaluator(method, k), k, t_max, R, nodes)
    bounds = np.array([closed_form_bounds(method, k, t, R) for t in range(t_max + 1)])
    if seeds and mc_n:
        mean, sem = monte_carlo_expected_error(k, mc_n, mc_d, method, t_max, seeds, init)
        scale = R * R / (mc_n * mc_d)
        mean, sem = mean * scale, sem * scale
    else:
        mean = sem = np.full(t_max + 1, math.nan)
    return RateReport(method, k, R, quad, bounds[:, 0], bounds[:, 1], mean, sem, len(seeds) if mc_n else 0)
