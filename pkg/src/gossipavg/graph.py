"""Random k-regular graphs and the gossip operator ``L = I - A/k``."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from ._io import atomic_write_text
from .errors import DenseCapError, FormatError, GenerationError, ParameterError, ValidationError

DENSE_CAP = 4096
MAX_ATTEMPTS = 100


@dataclass(frozen=True, eq=False)
class RegularGraph:
    """Simple connected k-regular graph in compressed adjacency form.

    ``neighbors[offsets[i]:offsets[i + 1]]`` is the sorted neighbour list of
    vertex ``i``. Instances are validated on construction and read-only.
    """

    n: int
    k: int
    offsets: np.ndarray = field(repr=False)
    neighbors: np.ndarray = field(repr=False)

    def __post_init__(self):
        n, k = self.n, self.k
        if k < 1 or n <= k:
            raise ValidationError(f"need 1 <= k < n, got n={n} k={k}")
        if (n * k) % 2:
            raise ValidationError(f"n*k must be even, got n={n} k={k}")
        offsets = np.ascontiguousarray(self.offsets, dtype=np.int64)
        nbrs = np.ascontiguousarray(self.neighbors, dtype=np.int64)
        if offsets.shape != (n + 1,) or not np.array_equal(offsets, np.arange(n + 1) * k):
            raise ValidationError("every vertex must have exactly k neighbours")
        if nbrs.shape != (n * k,):
            raise ValidationError("neighbour array has wrong length")
        if nbrs.min() < 0 or nbrs.max() >= n:
            raise ValidationError("neighbour id out of range")
        rows = nbrs.reshape(n, k)
        if np.any(rows == np.arange(n)[:, None]):
            raise ValidationError("self-loop present")
        if k > 1 and np.any(np.diff(rows, axis=1) <= 0):
            raise ValidationError("neighbour lists must be strictly increasing (no duplicates)")
        # symmetry: the multiset of directed edges equals its transpose
        src = np.repeat(np.arange(n), k)
        fwd = np.sort(src * n + nbrs)
        rev = np.sort(nbrs * n + src)
        if not np.array_equal(fwd, rev):
            raise ValidationError("adjacency is not symmetric")
        if not _is_connected(n, k, nbrs):
            raise ValidationError("graph is disconnected")
        offsets.setflags(write=False)
        nbrs.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "neighbors", nbrs)

    @classmethod
    def from_edges(cls, n: int, k: int, edges) -> RegularGraph:
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise ValidationError("edge endpoint out of range")
        deg = np.bincount(edges.ravel(), minlength=n)
        bad = np.flatnonzero(deg != k)
        if bad.size:
            v = int(bad[0])
            raise ValidationError(f"vertex {v} has degree {int(deg[v])}, expected {k}")
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        order = np.lexsort((dst, src))
        return cls(n, k, np.arange(n + 1) * k, dst[order])

    def neighbors_of(self, v: int) -> np.ndarray:
        return self.neighbors[self.offsets[v]:self.offsets[v + 1]]

    def edges(self) -> np.ndarray:
        """Undirected edges ``(u, v)`` with ``u < v``, sorted lexicographically."""
        src = np.repeat(np.arange(self.n), self.k)
        mask = src < self.neighbors
        return np.column_stack([src[mask], self.neighbors[mask]])

    def adjacency_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        a[np.repeat(np.arange(self.n), self.k), self.neighbors] = 1.0
        return a

    def gossip_dense(self) -> np.ndarray:
        return np.eye(self.n) - self.adjacency_dense() / self.k

    def __eq__(self, other):
        if not isinstance(other, RegularGraph):
            return NotImplemented
        return (self.n, self.k) == (other.n, other.k) and np.array_equal(self.neighbors, other.neighbors)

    def __hash__(self):
        return hash((self.n, self.k, self.neighbors.tobytes()))


def _is_connected(n: int, k: int, nbrs: np.ndarray) -> bool:
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for v in nbrs[u * k:(u + 1) * k]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count == n


@dataclass(frozen=True)
class GossipOperator:
    """Matrix-free ``L = I - A/k``; acts column-wise on an ``(n, d)`` block."""

    graph: RegularGraph

    def __matmul__(self, x):
        return apply_gossip(self, x)


def apply_gossip(op: GossipOperator | RegularGraph, x: np.ndarray) -> np.ndarray:
    """Return ``y`` with ``y_i = x_i - (1/k) * sum_{j in N(i)} x_j``.

    ``x`` is an ``(n, d)`` state block (a 1-D vector is treated as ``d = 1``
    and the result keeps its shape). The input is not modified.
    """
    g = op.graph if isinstance(op, GossipOperator) else op
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    block = x.reshape(-1, 1) if squeeze else x
    if block.ndim != 2 or block.shape[0] != g.n:
        raise ValueError(f"state block has shape {x.shape}, expected ({g.n}, d)")
    y = kernels.gossip_apply(g.neighbors, g.k, np.ascontiguousarray(block))
    return y.ravel() if squeeze else y


def check_parameters(n: int, k: int) -> None:
    if k < 3:
        raise ParameterError(f"degree k must be >= 3, got k={k}")
    if n <= k:
        raise ParameterError(f"need n > k, got n={n} k={k}")
    if (n * k) % 2:
        raise ParameterError(f"n*k must be even, got n={n} k={k} (n*k={n * k})")


def _pairing_attempt(n: int, k: int, rng: np.random.Generator):
    """One pass of the pairing model with local rejection.

    Stubs are shuffled and paired; pairs that would form a loop or a repeated
    edge are returned to the pool and re-shuffled. Returns ``None`` when the
    leftover stubs admit no valid pair.
    """
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n), k)
    while stubs.size:
        stubs = rng.permutation(stubs)
        leftover = []
        for s1, s2 in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
            if s1 > s2:
                s1, s2 = s2, s1
            if s1 != s2 and (s1, s2) not in edges:
                edges.add((s1, s2))
            else:
                leftover += (s1, s2)
        if leftover:
            pool = sorted(set(leftover))
            if not any(
                (u, v) not in edges for i, u in enumerate(pool) for v in pool[i + 1:]
            ):
                return None
        stubs = np.asarray(leftover, dtype=np.int64)
    return edges


def generate_regular(n: int, k: int, seed: int) -> RegularGraph:
    """Sample a random simple connected k-regular graph on ``n`` vertices.

    Deterministic in ``seed``. Failed or disconnected samples are redrawn from
    the sub-seed ``(seed, attempt)``, at most ``MAX_ATTEMPTS`` times.
    """
    check_parameters(n, k)
    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng([int(seed), attempt])
        edges = _pairing_attempt(n, k, rng)
        if edges is None:
            continue
        arr = np.array(sorted(edges), dtype=np.int64)
        try:
            return RegularGraph.from_edges(n, k, arr)
        except ValidationError:
            continue  # disconnected sample
    raise GenerationError(f"no connected {k}-regular graph on {n} vertices after {MAX_ATTEMPTS} attempts")


def dense_eigenvalues(g: RegularGraph, cap: int = DENSE_CAP) -> np.ndarray:
    """Ascending eigenvalues of ``L = I - A/k`` from a dense symmetric solve."""
    if g.n > cap:
        raise DenseCapError(f"n={g.n} exceeds the dense eigensolver cap {cap}; lower n")
    return np.linalg.eigvalsh(g.gossip_dense())


def write_edge_list(g: RegularGraph, path) -> None:
    lines = [f"{g.n} {g.k}"] + [f"{u} {v}" for u, v in g.edges().tolist()]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_edge_list(path) -> RegularGraph:
    text = Path(path).read_text(encoding="utf-8")
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise FormatError(f"{path}: empty edge list")
    try:
        header = [int(tok) for tok in rows[0]]
        body = [[int(tok) for tok in r] for r in rows[1:]]
    except ValueError as exc:
        raise FormatError(f"{path}: non-integer token ({exc})") from None
    if len(header) != 2:
        raise FormatError(f"{path}: header must be 'n k'")
    n, k = header
    if n < 1 or k < 1 or (n * k) % 2:
        raise FormatError(f"{path}: invalid header n={n} k={k} (n*k must be even)")
    if any(len(r) != 2 for r in body):
        raise FormatError(f"{path}: every edge line must be 'u v'")
    edges = np.array(body, dtype=np.int64).reshape(-1, 2)
    if edges.size and np.any(edges[:, 0] >= edges[:, 1]):
        raise FormatError(f"{path}: edge lines must satisfy u < v")
    if len({tuple(e) for e in edges.tolist()}) != len(edges):
        raise FormatError(f"{path}: duplicate edge")
    return RegularGraph.from_edges(n, k, edges)
