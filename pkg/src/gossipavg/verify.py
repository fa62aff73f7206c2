"""Invariant suites bundled behind ``gossipavg verify``.

Each suite returns :class:`Check` rows (measured value against threshold).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analysis import closed_form_bounds, expected_error_curve
from .graph import dense_eigenvalues, generate_regular
from .poly import METHODS, ResidualEvaluator, delta_sequence, optimal_residual_recurrence, product_formula
from .solvers import OBLIVIOUS_METHODS, MethodConfig, initial_state, trajectory_polynomial_check
from .spectrum import KestenMcKay, empirical_histogram, l1_density_distance

DEGREES = (3, 8, 15)
SANDWICH_SLACK = 1e-12


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    threshold: float
    passed: bool
    relation: str = "<"

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.suite}: {self.name} = {self.value:.3e} ({self.relation} {self.threshold:.3e})"


def _lt(suite, name, value, threshold):
    return Check(suite, name, float(value), float(threshold), bool(value < threshold))


def orthogonality(delta0: float | None = None, max_degree: int = 15, degrees=DEGREES) -> list[Check]:
    out = []
    for k in degrees:
        lam, w = KestenMcKay(k).nodes_weights()
        Q = np.array([optimal_residual_recurrence(k, t, lam, delta0) for t in range(max_degree + 1)])
        gram = (Q * (lam * w)) @ Q.T
        off = np.abs(gram[np.triu_indices(max_degree + 1, 1)]).max()
        out.append(_lt("orthogonality", f"k={k} max|<Q_i,Q_j>_lam|", off, 1e-8))
    return out


def product_formula_suite(degrees=range(3, 13), t_max: int = 40) -> list[Check]:
    worst = 0.0
    for k in degrees:
        for t in range(t_max + 1):
            lhs, rhs = product_formula(k, t)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
    checks = [_lt("product_formula", "max relative gap k=3..12 t<=40", worst, 1e-12)]
    for t, expected in ((1, 0.125), (2, 0.04)):
        lhs, rhs = product_formula(3, t)
        gap = max(abs(lhs - expected), abs(rhs - expected)) / expected
        checks.append(_lt("product_formula", f"k=3 t={t} equals {expected}", gap, 1e-12))
    return checks


def delta_limit(degrees=range(3, 21), t: int = 60) -> list[Check]:
    worst = max(abs(delta_sequence(k, t).values[t] - k / (k - 1)) for k in degrees)
    d = delta_sequence(3, t).values[t]
    hb_gap = max(abs((d - 1.0) - 0.5), abs(d - 1.5))
    return [
        _lt("delta_limit", "max|delta_60 - k/(k-1)| k=3..20", worst, 1e-10),
        _lt("delta_limit", "k=3 optimal vs heavy-ball coefficients at t=60", hb_gap, 1e-8),
    ]


def trajectory(delta0: float | None = None, n: int = 50, k: int = 3, T: int = 30, seed: int = 0) -> list[Check]:
    g = generate_regular(n, k, seed)
    x0 = initial_state(n, 3, seed)
    out = []
    for method in OBLIVIOUS_METHODS:
        gap = trajectory_polynomial_check(g, x0, MethodConfig(method, k, T), delta0 if method == "optimal" else None)
        out.append(_lt("trajectory", f"{method} n={n} k={k} T={T}", gap, 1e-8))
    return out


def sandwich(degrees=DEGREES, t_max: int = 30) -> list[Check]:
    out = []
    for method in ("optimal", "heavyball"):
        for k in degrees:
            quad = expected_error_curve(ResidualEvaluator(method, k), k, t_max)
            # worst violation ratio; <= 0 means inside the bounds
            worst = -math.inf
            for t in range(t_max + 1):
                lo, hi = closed_form_bounds(method, k, t)
                worst = max(worst, (lo - quad[t]) / lo, (quad[t] - hi) / hi)
            out.append(Check("sandwich", f"{method} k={k} worst relative excursion", worst,
                             SANDWICH_SLACK, worst <= SANDWICH_SLACK, "<="))
    return out


def optimality(degrees=DEGREES, t_max: int = 30) -> list[Check]:
    out = []
    for k in degrees:
        curves = {m: expected_error_curve(ResidualEvaluator(m, k), k, t_max) for m in METHODS}
        opt = curves["optimal"]
        others = np.min([curves[m] for m in METHODS if m != "optimal"], axis=0)
        # relative excess of optimal over the best competitor; must be <= 0 up to rounding
        excess = float(np.max((opt - others) / others))
        out.append(Check("optimality", f"k={k} max (opt - best other)/best other", excess,
                         SANDWICH_SLACK, excess <= SANDWICH_SLACK, "<="))
        margin = float(others[10] - opt[10]) / others[10]
        out.append(Check("optimality", f"k={k} strict gap at t=10", margin, 0.0, margin > 0.0, ">"))
    return out


def spectral_law(k: int = 3, bins: int = 50, seeds=range(5)) -> list[Check]:
    med = {}
    for n in (250, 1000):
        med[n] = float(np.median([
            l1_density_distance(empirical_histogram(dense_eigenvalues(generate_regular(n, k, s)), bins, k))
            for s in seeds
        ]))
    return [
        _lt("spectral_law", f"median L1 n=1000 k={k} bins={bins}", med[1000], 0.08),
        Check("spectral_law", "median L1 n=250 minus n=1000", med[250] - med[1000], 0.0,
              med[250] > med[1000], ">"),
    ]


SUITES: dict[str, Callable[..., list[Check]]] = {
    "orthogonality": orthogonality,
    "product_formula": product_formula_suite,
    "delta_limit": delta_limit,
    "trajectory": trajectory,
    "sandwich": sandwich,
    "optimality": optimality,
    "spectral_law": spectral_law,
}
_TAKES_DELTA0 = {"orthogonality", "trajectory"}


def run_suites(names=None, delta0: float | None = None) -> list[Check]:
    names = list(SUITES) if not names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}; choose from {', '.join(SUITES)}")
    checks = []
    for name in names:
        fn = SUITES[name]
        checks += fn(delta0=delta0) if name in _TAKES_DELTA0 else fn()
    return checks
