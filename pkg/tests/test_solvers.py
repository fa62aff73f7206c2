import numpy as np
import pytest

from gossipavg import solvers
from gossipavg.errors import ParameterError, UnsupportedMethodError
from gossipavg.graph import generate_regular
from gossipavg.poly import momentum_residual, nesterov_residual
from gossipavg.solvers import (
    ALL_METHODS,
    OBLIVIOUS_METHODS,
    ConvergenceTrace,
    MethodConfig,
    consensus_error,
    initial_state,
    iterate,
    read_trace_csv,
    run,
    trajectory_polynomial_check,
    trajectory_polynomial_gaps,
)


def test_consensus_error_examples(rng):
    x0 = rng.standard_normal((6, 2))
    assert consensus_error(x0, x0) == 1.0
    assert consensus_error(np.broadcast_to(x0.mean(axis=0), x0.shape), x0) == 0.0
    x0 = np.array([[1.0], [1.0], [1.0], [3.0]])
    assert consensus_error(np.full((4, 1), 1.5), x0) == 0.0
    assert consensus_error(np.zeros((4, 1)), np.ones((4, 1))) == 0.0  # at-consensus sentinel
    with pytest.raises(ValueError):
        consensus_error(np.zeros((3, 1)), x0)


@pytest.mark.parametrize("method", ALL_METHODS)
def test_consensus_start_gives_zero_trace(method):
    g = generate_regular(30, 3, 0)
    x0 = np.tile([1.0, -2.0, 0.5], (30, 1))
    tr = run(g, x0, MethodConfig(method, 3, 15))
    assert np.all(tr.errors == 0.0) and not tr.diverged


def test_cg_k4_one_step(k4):
    tr = run(k4, np.array([1.0, 0, 0, 0]), MethodConfig("cg", 3, 3))
    assert tr.errors[0] == 1.0
    assert tr.error_at(1) < 1e-20


def test_heavyball_k4_single_mode(k4):
    tr = run(k4, np.array([1.0, 0, 0, 0]), MethodConfig("heavyball", 3, 30))
    for t in range(31):
        assert abs(tr.error_at(t) - momentum_residual(0.5, 1.5, t, 4 / 3) ** 2) < 1e-8


def test_nesterov_k4_single_mode(k4):
    tr = run(k4, np.array([0.0, 1.0, 0, 0]), MethodConfig("nesterov", 3, 20))
    for t in range(21):
        assert abs(tr.error_at(t) - nesterov_residual(3, t, 4 / 3) ** 2) < 1e-8


def test_trajectory_gd_n20(rng):
    g = generate_regular(20, 3, 1)
    gaps = trajectory_polynomial_gaps(g, rng.standard_normal((20, 2)), MethodConfig("gd", 3, 20))
    assert gaps[0] == 0.0
    assert gaps.max() < 1e-10


@pytest.mark.parametrize("method", OBLIVIOUS_METHODS)
def test_trajectory_identity_all_oblivious(method, g50, rng):
    assert trajectory_polynomial_check(g50, rng.standard_normal((50, 3)), MethodConfig(method, 3, 30)) < 1e-8


@pytest.mark.parametrize("method", ["heavyball", "optimal", "nesterov"])
def test_trajectory_identity_other_degrees(method, rng):
    # k=6 contracts by ~sqrt(5) per step; keep T short enough that the
    # predicted signal stays far above absolute rounding in x_t
    g = generate_regular(40, 6, 3)
    assert trajectory_polynomial_check(g, rng.standard_normal((40, 2)), MethodConfig(method, 6, 12)) < 1e-8


def test_trajectory_rejects_cg(g50):
    with pytest.raises(UnsupportedMethodError):
        trajectory_polynomial_check(g50, np.ones(50), MethodConfig("cg", 3, 5))


def test_trajectory_detects_wrong_delta0(g50, rng):
    gap = trajectory_polynomial_check(g50, rng.standard_normal((50, 1)), MethodConfig("optimal", 3, 10), delta0=0.7)
    assert gap > 1e-3


@pytest.mark.parametrize("method", ALL_METHODS)
def test_means_conserved(method, rng):
    g = generate_regular(100, 4, 8)
    x0 = rng.standard_normal((100, 3)) + 5.0
    mean0 = x0.mean(axis=0)
    for t, x in iterate(g, x0, MethodConfig(method, 4, 200)):
        assert np.max(np.abs(x.mean(axis=0) - mean0)) < 1e-10


@pytest.mark.parametrize("method", ALL_METHODS)
@pytest.mark.parametrize("n,k", [(500, 3), (200, 8), (300, 15)])
def test_convergence_at_200(method, n, k):
    g = generate_regular(n, k, 11)
    x0 = np.random.default_rng(3).standard_normal((n, 2))
    tr = run(g, x0, MethodConfig(method, k, 200, record_every=50))
    assert list(tr.iters) == [0, 50, 100, 150, 200]
    assert tr.errors[-1] < 1e-6 and not tr.diverged


@pytest.mark.parametrize("method", ALL_METHODS)
def test_run_is_deterministic_and_leaves_x0(method):
    g = generate_regular(80, 3, 2)
    x0 = np.random.default_rng(9).standard_normal((80, 4))
    keep = x0.copy()
    a = run(g, x0, MethodConfig(method, 3, 40))
    b = run(g, x0, MethodConfig(method, 3, 40))
    assert np.array_equal(a.errors, b.errors)
    assert np.array_equal(x0, keep)


def test_divergence_is_flagged(monkeypatch):
    monkeypatch.setattr(solvers, "gd_step", lambda k: 5.0)
    g = generate_regular(40, 3, 0)
    tr = run(g, np.random.default_rng(0).standard_normal((40, 1)), MethodConfig("gd", 3, 1000))
    assert tr.diverged
    assert tr.iters[-1] < 1000
    assert np.all(np.isfinite(tr.errors))


def test_config_validation(g50):
    with pytest.raises(ParameterError):
        MethodConfig("adam", 3, 10)
    with pytest.raises(ParameterError):
        MethodConfig("gd", 3, 0)
    with pytest.raises(ParameterError):
        run(g50, np.ones(50), MethodConfig("gd", 4, 3))
    with pytest.raises(ValueError):
        run(g50, np.ones(49), MethodConfig("gd", 3, 3))


def test_trace_csv_round_trip(tmp_path, g50, rng):
    tr = run(g50, rng.standard_normal((50, 2)), MethodConfig("optimal", 3, 30))
    name = ConvergenceTrace.filename("optimal", 3, 50, 7)
    assert name == "optimal_k3_n50_seed7.csv"
    path = tr.to_csv(tmp_path / name)
    assert path.read_text().splitlines()[0] == "iter,error"
    iters, errs = read_trace_csv(path)
    assert np.array_equal(iters, tr.iters)
    assert np.array_equal(errs, tr.errors)


@pytest.mark.parametrize("dist", ["normal", "uniform", "rademacher"])
def test_initial_state_unit_variance(dist):
    x = initial_state(4000, 5, 3, dist)
    assert x.shape == (4000, 5)
    assert abs(x.var() - 1.0) < 0.05 and abs(x.mean()) < 0.05
    assert np.array_equal(x, initial_state(4000, 5, 3, dist))


def test_initial_state_rejects_unknown():
    with pytest.raises(ParameterError):
        initial_state(10, 1, 0, "cauchy")
