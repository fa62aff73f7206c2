import math

import numpy as np
import pytest
from scipy import integrate as sint

from gossipavg.errors import NumericalError
from gossipavg.graph import dense_eigenvalues, generate_regular
from gossipavg.poly import optimal_residual_recurrence
from gossipavg.spectrum import (
    EmpiricalSpectrum,
    Histogram,
    KestenMcKay,
    bin_masses,
    empirical_histogram,
    integrate,
    kesten_mckay_density,
    l1_density_distance,
    support_bounds,
)


def quad_oracle(k, f, a=None, b=None):
    """Adaptive quadrature in lambda with the sqrt edge weight handled by QUADPACK."""
    lo, hi = support_bounds(k)
    a = lo if a is None else a
    b = hi if b is None else b

    def g(lam):
        # density / ((lam - lo)(hi - lam))^(1/2): smooth remainder
        return f(lam) * k / (2 * math.pi) / (1 - (1 - lam) ** 2)

    val, _ = sint.quad(g, a, b, weight="alg", wvar=(0.5, 0.5), epsabs=1e-14, epsrel=1e-13, limit=200)
    return val if (a, b) == (lo, hi) else None


def test_support_bounds_k3():
    lo, hi = support_bounds(3)
    assert lo == pytest.approx(0.057191, abs=1e-6)
    assert hi == pytest.approx(1.942809, abs=1e-6)


def test_support_symmetric_and_shrinking():
    widths = []
    for k in range(3, 51):
        lo, hi = support_bounds(k)
        assert lo + hi == pytest.approx(2.0, abs=1e-15)
        widths.append(hi - lo)
    assert np.all(np.diff(widths) < 0)


def test_density_outside_support_is_zero():
    lo, hi = support_bounds(3)
    assert kesten_mckay_density(3, lo - 1e-9) == 0.0
    assert kesten_mckay_density(3, hi + 1e-3) == 0.0
    assert kesten_mckay_density(3, lo) == 0.0
    assert kesten_mckay_density(3, hi) == 0.0
    assert kesten_mckay_density(3, -5.0) == 0.0


def test_density_at_centre_k3():
    assert kesten_mckay_density(3, 1.0) == pytest.approx(3 / (2 * math.pi) * math.sqrt(8 / 9), rel=1e-15)
    assert kesten_mckay_density(3, 1.0) == pytest.approx(0.4502, abs=1e-4)


@pytest.mark.parametrize("k", [3, 5, 12])
def test_density_symmetric_about_one(k):
    r = support_bounds(k)[1] - 1
    s = np.linspace(0, r, 37)
    np.testing.assert_allclose(kesten_mckay_density(k, 1 - s), kesten_mckay_density(k, 1 + s), rtol=1e-14)


@pytest.mark.parametrize("k", range(3, 21))
def test_mass_and_mean(k):
    mu = KestenMcKay(k)
    assert abs(integrate(mu, lambda lam: np.ones_like(lam)) - 1) < 1e-10
    assert abs(integrate(mu, lambda lam: lam) - 1) < 1e-10
    # variance of A/k under the law is 1/k
    assert abs(integrate(mu, lambda lam: (lam - 1) ** 2) - 1 / k) < 1e-12


@pytest.mark.parametrize("k", [3, 8, 15])
def test_integrate_against_adaptive_oracle(k):
    f = lambda lam: np.cos(3 * lam) * lam**5 + np.exp(-lam)  # noqa: E731
    assert integrate(KestenMcKay(k), f) == pytest.approx(quad_oracle(k, f), abs=1e-11)


def test_q0_q1_orthogonal_k3():
    val = integrate(KestenMcKay(3), lambda lam: lam * optimal_residual_recurrence(3, 0, lam)
                    * optimal_residual_recurrence(3, 1, lam))
    assert abs(val) < 1e-10


@pytest.mark.parametrize("k", [3, 8])
def test_doubling_nodes_is_converged_for_degree_60(k):
    f = lambda lam: optimal_residual_recurrence(k, 60, lam) ** 2  # noqa: E731
    mu = KestenMcKay(k)
    assert abs(integrate(mu, f, 4096) - integrate(mu, f, 8192)) < 1e-10


def test_polynomial_degree_100_exact(rng):
    # random degree-100 polynomial in Chebyshev basis on the support; compare to adaptive oracle
    lo, hi = support_bounds(3)
    coef = rng.standard_normal(101) / np.arange(1, 102)
    f = lambda lam: np.polynomial.chebyshev.chebval((2 * lam - lo - hi) / (hi - lo), coef)  # noqa: E731
    assert integrate(KestenMcKay(3), f) == pytest.approx(quad_oracle(3, f), abs=1e-10)


def test_non_finite_integrand_raises():
    with pytest.raises(NumericalError):
        integrate(KestenMcKay(3), lambda lam: 1 / (lam - 1.0 + 0.0 * lam) * np.where(lam > 1.5, np.inf, 1))


def test_empirical_measure_integrates_as_mean():
    mu = EmpiricalSpectrum(np.array([0.0, 4 / 3, 4 / 3, 4 / 3]))
    assert integrate(mu, lambda lam: lam) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        EmpiricalSpectrum(np.array([1.0, 0.0]))


@pytest.mark.parametrize("k", [3, 7])
def test_bin_masses_match_oracle(k):
    lo, hi = support_bounds(k)
    edges = np.linspace(lo, hi, 11)
    expected = []
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = sint.quad(lambda lam: kesten_mckay_density(k, lam), a, b, epsabs=1e-14, limit=200)
        expected.append(val)
    np.testing.assert_allclose(bin_masses(k, edges), expected, atol=1e-10)
    assert bin_masses(k, edges).sum() == pytest.approx(1.0, abs=1e-12)


def test_histogram_single_bin():
    lo, _ = support_bounds(3)
    h = empirical_histogram(np.full(9, lo + 1e-9), 20, 3)
    assert np.count_nonzero(h.density) == 1 and h.density[0] > 0
    assert h.underflow == 0 and h.overflow == 0


def test_histogram_mass_is_one():
    ev = dense_eigenvalues(generate_regular(300, 3, 1))
    h = empirical_histogram(ev, 50, 3)
    assert abs(h.mass - 1) < 1e-12
    assert h.underflow >= 1 / 300


def test_histogram_rejects_empty_and_few_bins():
    with pytest.raises(ValueError):
        empirical_histogram([], 20, 3)
    with pytest.raises(ValueError):
        empirical_histogram([1.0], 5, 3)


def test_l1_self_consistency():
    # midpoint sampling loses O(h^1.5) at the square-root edges; 200 bins keep it under 1e-3
    lo, hi = support_bounds(3)
    edges = np.linspace(lo, hi, 201)
    centres = 0.5 * (edges[1:] + edges[:-1])
    dens = kesten_mckay_density(3, centres)
    assert l1_density_distance(Histogram(3, edges, dens), 3) < 1e-3


def test_l1_reflection_symmetry():
    lo, hi = support_bounds(5)
    edges = np.linspace(lo, hi, 21)
    dens = np.abs(np.sin(np.linspace(0, np.pi, 20)))
    dens = dens / np.dot(dens, np.diff(edges))
    h = Histogram(5, edges, dens)
    h_ref = Histogram(5, 2 - edges[::-1], dens[::-1])
    assert l1_density_distance(h) == pytest.approx(l1_density_distance(h_ref), rel=1e-12)


def test_l1_k4_far_from_law():
    h = empirical_histogram([0.0, 4 / 3, 4 / 3, 4 / 3], 50, 3)
    assert h.underflow == 0.25
    # independent: occupied bin carries 0.75 of mass, the rest of the law is unmatched
    j = int(np.flatnonzero(h.density)[0])
    a, b = h.edges[j], h.edges[j + 1]
    mj, _ = sint.quad(lambda lam: kesten_mckay_density(3, lam), a, b, epsabs=1e-14)
    expected = 0.25 + abs(0.75 - mj) + (1.0 - mj)
    d = l1_density_distance(h)
    assert d == pytest.approx(expected, abs=1e-10)
    assert d > 0.5


def test_histogram_csv(tmp_path):
    h = empirical_histogram([0.0, 4 / 3, 4 / 3, 4 / 3], 10, 3)
    path = tmp_path / "h.csv"
    h.to_csv(path)
    rows = path.read_text().splitlines()
    assert rows[0] == "bin_lo,bin_hi,empirical_density,theoretical_density"
    assert rows[-2] == "underflow,0.25,," and rows[-1] == "overflow,0,,"
    body = np.array([[float(v) for v in r.split(",")] for r in rows[1:-2]])
    np.testing.assert_array_equal(body[:, 2], h.density)  # 17 digits round-trip
    assert abs(np.dot(body[:, 2], body[:, 1] - body[:, 0]) + 0.25 - 1) < 1e-12


@pytest.mark.slow
@pytest.mark.parametrize("k", [3, 8, 15])
def test_histogram_distance_shrinks_with_n(k):
    def med(n, seeds):
        return float(np.median([
            l1_density_distance(empirical_histogram(dense_eigenvalues(generate_regular(n, k, s)), 50, k))
            for s in seeds
        ]))

    d250, d1000, d4000 = med(250, range(3)), med(1000, range(3)), med(4000, [0])
    assert d250 > d1000 > d4000
    assert d4000 < 0.03
