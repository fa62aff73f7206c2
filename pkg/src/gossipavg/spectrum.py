"""Kesten-McKay spectral law of ``L = I - A/k`` and empirical spectra.

Quadrature against the law uses ``lam = 1 - r cos(theta)`` with
``r = 2 sqrt(k-1) / k``; the square-root edge behaviour becomes a smooth
periodic integrand in ``theta``, so the composite midpoint rule converges
geometrically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._io import atomic_write_text, fmt
from .errors import NumericalError

DEFAULT_NODES = 4096


def support_radius(k: int) -> float:
    return 2.0 * math.sqrt(k - 1) / k


def support_bounds(k: int) -> tuple[float, float]:
    """``(lambda_min, lambda_max) = (1 - 2 sqrt(k-1)/k, 1 + 2 sqrt(k-1)/k)``."""
    r = support_radius(k)
    return 1.0 - r, 1.0 + r


def kesten_mckay_density(k: int, lam):
    """Density of the limiting spectral law of ``I - A/k``; zero off the open support."""
    lam = np.asarray(lam, dtype=np.float64)
    s2 = (1.0 - lam) ** 2
    r2 = 4.0 * (k - 1) / k**2
    inside = s2 < r2
    num = np.sqrt(np.where(inside, r2 - s2, 0.0))
    den = np.where(inside, 1.0 - s2, 1.0)
    out = np.where(inside, k / (2.0 * math.pi) * num / den, 0.0)
    return out[()] if out.ndim == 0 else out


def _theta_weight(k: int, theta: np.ndarray) -> np.ndarray:
    # density(1 - r cos t) * r sin t
    r2 = 4.0 * (k - 1) / k**2
    c = np.cos(theta)
    return k / (2.0 * math.pi) * r2 * np.sin(theta) ** 2 / (1.0 - r2 * c * c)


@dataclass(frozen=True)
class KestenMcKay:
    """Theoretical spectral measure for degree ``k``."""

    k: int

    @property
    def support(self) -> tuple[float, float]:
        return support_bounds(self.k)

    def density(self, lam):
        return kesten_mckay_density(self.k, lam)

    def nodes_weights(self, nodes: int = DEFAULT_NODES) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes in ``lambda`` and weights summing to ~1."""
        theta = (np.arange(nodes) + 0.5) * (math.pi / nodes)
        lam = 1.0 - support_radius(self.k) * np.cos(theta)
        return lam, _theta_weight(self.k, theta) * (math.pi / nodes)

    def integrate(self, f: Callable, nodes: int = DEFAULT_NODES) -> float:
        return integrate(self, f, nodes)


@dataclass(frozen=True)
class EmpiricalSpectrum:
    """Uniform point mass on a sorted eigenvalue list."""

    eigenvalues: np.ndarray = field(repr=False)

    def __post_init__(self):
        eig = np.asarray(self.eigenvalues, dtype=np.float64)
        if eig.ndim != 1 or eig.size == 0:
            raise ValueError("need a non-empty 1-D eigenvalue list")
        if np.any(np.diff(eig) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", eig)

    def integrate(self, f: Callable, nodes: int | None = None) -> float:
        return integrate(self, f)


SpectralMeasure = KestenMcKay | EmpiricalSpectrum


def integrate(measure: SpectralMeasure, f: Callable, nodes: int = DEFAULT_NODES) -> float:
    """``int f dmu``; ``f`` is called once on an array of nodes."""
    if isinstance(measure, EmpiricalSpectrum):
        lam = measure.eigenvalues
        w = np.full(lam.size, 1.0 / lam.size)
    else:
        lam, w = measure.nodes_weights(nodes)
    vals = np.broadcast_to(np.asarray(f(lam), dtype=np.float64), lam.shape)
    if not np.all(np.isfinite(vals)):
        bad = np.flatnonzero(~np.isfinite(vals))
        raise NumericalError(
            f"integrand non-finite at {bad.size} node(s), first at lambda={lam[bad[0]]:.6g}"
        )
    return float(np.dot(vals, w))


def bin_masses(k: int, edges: np.ndarray, order: int = 64) -> np.ndarray:
    """Kesten-McKay probability of each bin ``[edges[i], edges[i+1]]``."""
    r = support_radius(k)
    # theta(lam) = arccos((1 - lam) / r), increasing in lam
    theta = np.arccos(np.clip((1.0 - np.asarray(edges, dtype=np.float64)) / r, -1.0, 1.0))
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = theta[:-1, None], theta[1:, None]
    half = 0.5 * (hi - lo)
    t = lo + half * (x + 1.0)
    return (_theta_weight(k, t) * w).sum(axis=1) * half[:, 0]


@dataclass(frozen=True)
class Histogram:
    """Density histogram over the theoretical support of degree ``k``.

    Mass below ``lambda_min`` (the kernel eigenvalue 0 of any finite graph,
    plus stragglers) is kept in ``underflow``, mass above ``lambda_max`` in
    ``overflow``. ``sum(density * width) + underflow + overflow == 1``.
    """

    k: int
    edges: np.ndarray
    density: np.ndarray
    underflow: float = 0.0
    overflow: float = 0.0

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def mass(self) -> float:
        return float(np.dot(self.density, self.widths) + self.underflow + self.overflow)

    def theoretical_density(self) -> np.ndarray:
        return bin_masses(self.k, self.edges) / self.widths

    def to_csv(self, path) -> None:
        theo = self.theoretical_density()
        lines = ["bin_lo,bin_hi,empirical_density,theoretical_density"]
        for lo, hi, emp, th in zip(self.edges[:-1], self.edges[1:], self.density, theo):
            lines.append(f"{fmt(lo)},{fmt(hi)},{fmt(emp)},{fmt(th)}")
        lines.append(f"underflow,{fmt(self.underflow)},,")
        lines.append(f"overflow,{fmt(self.overflow)},,")
        atomic_write_text(path, "\n".join(lines) + "\n")


def empirical_histogram(eigs, bins: int, k: int) -> Histogram:
    eigs = np.asarray(eigs, dtype=np.float64)
    if eigs.size == 0:
        raise ValueError("empty eigenvalue list")
    if bins < 10:
        raise ValueError(f"need at least 10 bins, got {bins}")
    lo, hi = support_bounds(k)
    edges = np.linspace(lo, hi, bins + 1)
    n = eigs.size
    below = eigs < lo
    above = eigs > hi
    inside = eigs[~below & ~above]
    counts, _ = np.histogram(inside, bins=edges)
    density = counts / (n * np.diff(edges))
    return Histogram(k, edges, density, below.sum() / n, above.sum() / n)


def l1_density_distance(h: Histogram, k: int | None = None) -> float:
    """L1 distance between ``h`` and the bin-averaged Kesten-McKay density.

    Underflow/overflow mass has no theoretical counterpart and counts in full.
    """
    k = h.k if k is None else k
    theo = bin_masses(k, h.edges) / h.widths
    return float(np.dot(np.abs(h.density - theo), h.widths) + h.underflow + h.overflow)
