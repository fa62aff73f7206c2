"""Hot inner loops: the gossip matvec and the fused two-step updates.

Every kernel has a numba implementation and a pure-numpy one with the same
floating-point operation order. The numba path is used when numba imports
and ``GOSSIPAVG_DISABLE_NUMBA`` is unset (or ``0``); set it to ``1`` to force
the numpy path. :func:`set_backend` switches at runtime (benchmarks, tests).
"""
from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "GOSSIPAVG_DISABLE_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in ("", "0", "false", "no")


try:
    if not _numba_requested():
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # numba missing or disabled by the env flag
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


BACKEND = "numba" if HAVE_NUMBA else "numpy"


def set_backend(name: str) -> None:
    """Select ``"numba"`` or ``"numpy"`` for subsequent kernel calls."""
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError(f"numba backend unavailable (missing or {_ENV_FLAG} set)")
    BACKEND = name


# --- numba -----------------------------------------------------------------

@njit(cache=True)
def _gossip_nb(neighbors, k, x, out):
    n, d = x.shape
    for i in range(n):
        base = i * k
        for c in range(d):
            acc = 0.0
            for j in range(k):
                acc += x[neighbors[base + j], c]
            out[i, c] = x[i, c] - acc / k
    return out


@njit(cache=True)
def _momentum_step_nb(neighbors, k, x, x_prev, a, b, out):
    # out = x + a (x - x_prev) - b L x
    n, d = x.shape
    for i in range(n):
        base = i * k
        for c in range(d):
            acc = 0.0
            for j in range(k):
                acc += x[neighbors[base + j], c]
            lx = x[i, c] - acc / k
            out[i, c] = x[i, c] + a * (x[i, c] - x_prev[i, c]) - b * lx
    return out


@njit(cache=True)
def _lookahead_step_nb(neighbors, k, x, x_prev, a, b, y, out):
    # y = x + a (x - x_prev); out = y - b L y
    n, d = x.shape
    for i in range(n):
        for c in range(d):
            y[i, c] = x[i, c] + a * (x[i, c] - x_prev[i, c])
    for i in range(n):
        base = i * k
        for c in range(d):
            acc = 0.0
            for j in range(k):
                acc += y[neighbors[base + j], c]
            out[i, c] = y[i, c] - b * (y[i, c] - acc / k)
    return out


# --- numpy -----------------------------------------------------------------

def _gossip_np(neighbors, k, x):
    n, d = x.shape
    # (n, k, d) gather; summing over axis 1 adds neighbours in list order
    acc = x[neighbors.reshape(n, k)].sum(axis=1)
    return x - acc / k


def _momentum_step_np(neighbors, k, x, x_prev, a, b):
    lx = _gossip_np(neighbors, k, x)
    return x + a * (x - x_prev) - b * lx


def _lookahead_step_np(neighbors, k, x, x_prev, a, b):
    y = x + a * (x - x_prev)
    acc = y[neighbors.reshape(y.shape[0], k)].sum(axis=1)
    return y - b * (y - acc / k)


# --- dispatch --------------------------------------------------------------

def gossip_apply(neighbors: np.ndarray, k: int, x: np.ndarray) -> np.ndarray:
    """Return ``x - A x / k`` for a k-regular flat neighbour array."""
    if BACKEND == "numba":
        return _gossip_nb(neighbors, k, x, np.empty_like(x))
    return _gossip_np(neighbors, k, x)


def momentum_step(neighbors, k, x, x_prev, a: float, b: float) -> np.ndarray:
    """Return ``x + a (x - x_prev) - b L x``."""
    if BACKEND == "numba":
        return _momentum_step_nb(neighbors, k, x, x_prev, float(a), float(b), np.empty_like(x))
    return _momentum_step_np(neighbors, k, x, x_prev, a, b)


def lookahead_step(neighbors, k, x, x_prev, a: float, b: float) -> np.ndarray:
    """Return ``y - b L y`` with ``y = x + a (x - x_prev)`` (Nesterov form)."""
    if BACKEND == "numba":
        return _lookahead_step_nb(
            neighbors, k, x, x_prev, float(a), float(b), np.empty_like(x), np.empty_like(x)
        )
    return _lookahead_step_np(neighbors, k, x, x_prev, a, b)
