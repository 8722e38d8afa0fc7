"""Sparse undirected simple graphs, seeded G(n, p) sampling and subgraph operations.

A :class:`Graph` is stored in CSR form: ``indices[indptr[v]:indptr[v+1]]`` is the
sorted neighbour list of ``v``.  Graphs are immutable once built; the arrays are
flagged read-only so they can be shared freely.
"""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

__all__ = [
    "GENERATOR_VERSION",
    "MAX_GNP_N",
    "ComponentLabeling",
    "Graph",
    "GraphFormatError",
    "VertexSet",
    "bipartite_components",
    "complete",
    "complete_bipartite",
    "components",
    "cut",
    "cycle",
    "degrees",
    "disjoint_union",
    "edge_subgraph",
    "from_edges",
    "gen_gnp",
    "gen_gnp_naive",
    "induced",
    "is_bipartite",
    "is_forest",
    "max_degree",
    "path",
    "read_edgelist",
    "star",
    "write_edgelist",
]

# Bump whenever the sampling stream changes: old fixtures stop reproducing.
GENERATOR_VERSION = "gnp-skip/1 numpy-PCG64"

# Pair indices are linearised into int64 and unranked through float64.
MAX_GNP_N = 2**26

EDGELIST_MAGIC = "gnp-graph"
EDGELIST_VERSION = 1


class GraphFormatError(ValueError):
    """Malformed edge input. ``line`` is the offending position when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.reason = message
        self.line = line


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _index_dtype(n: int):
    return np.int32 if n < 2**31 else np.int64


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    @cached_property
    def degrees(self) -> np.ndarray:
        return _readonly(np.diff(self.indptr).astype(np.int64))

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Adjacency matrix as float64 CSR, sharing the index arrays."""
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    @cached_property
    def _rows(self) -> np.ndarray:
        return np.repeat(np.arange(self.n, dtype=self.indices.dtype), self.degrees)

    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of edges ``u < v`` in lexicographic order."""
        rows = self._rows
        keep = rows < self.indices
        return np.column_stack((rows[keep], self.indices[keep]))

    def to_edge_list(self) -> list[tuple[int, int]]:
        return [(int(u), int(v)) for u, v in self.edges()]

    @classmethod
    def _from_unique_pairs(cls, n: int, u: np.ndarray, v: np.ndarray) -> "Graph":
        """Build from pairs already known to be loop-free and duplicate-free."""
        dtype = _index_dtype(n)
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        keys = np.concatenate((u * n + v, v * n + u))
        keys.sort()
        rows = keys // n if n else keys
        cols = (keys - rows * n).astype(dtype)
        counts = np.bincount(rows, minlength=n) if len(rows) else np.zeros(n, np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(n, _readonly(indptr), _readonly(cols))


@dataclass(frozen=True, eq=False)
class VertexSet:
    """Subset of ``0..n-1`` held as a boolean mask."""

    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        object.__setattr__(self, "mask", _readonly(mask.copy()))

    @classmethod
    def from_indices(cls, n: int, members: Iterable[int]) -> "VertexSet":
        mask = np.zeros(n, dtype=bool)
        idx = np.fromiter(members, dtype=np.int64) if not isinstance(members, np.ndarray) else members
        if len(idx) and (idx.min() < 0 or idx.max() >= n):
            raise ValueError(f"vertex set member out of range 0..{n - 1}")
        mask[idx] = True
        return cls(mask)

    @classmethod
    def empty(cls, n: int) -> "VertexSet":
        return cls(np.zeros(n, dtype=bool))

    @classmethod
    def full(cls, n: int) -> "VertexSet":
        return cls(np.ones(n, dtype=bool))

    @property
    def n(self) -> int:
        return len(self.mask)

    def __len__(self) -> int:
        return int(np.count_nonzero(self.mask))

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.n and bool(self.mask[v])

    def members(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def complement(self) -> "VertexSet":
        return VertexSet(~self.mask)

    def __or__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.mask | other.mask)

    def __and__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.mask & other.mask)

    def __sub__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.mask & ~other.mask)


@dataclass(frozen=True)
class ComponentLabeling:
    labels: np.ndarray
    count: int
    sizes: np.ndarray
    edge_counts: np.ndarray


# --------------------------------------------------------------------------
# construction


def from_edges(n: int, edges: Sequence[tuple[int, int]] | np.ndarray) -> Graph:
    """Canonical graph from an edge list.

    Raises :class:`GraphFormatError` on an out-of-range endpoint, a self-loop
    or a repeated pair; ``err.line`` is the 0-based position in ``edges``.
    """
    if n < 0:
        raise GraphFormatError(f"negative vertex count {n}")
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphFormatError("edges must be pairs")
    u, v = arr[:, 0], arr[:, 1]

    bad = np.flatnonzero((u < 0) | (u >= n) | (v < 0) | (v >= n))
    if len(bad):
        i = int(bad[0])
        raise GraphFormatError(f"endpoint out of range in ({u[i]}, {v[i]}) for n={n}", line=i)
    bad = np.flatnonzero(u == v)
    if len(bad):
        i = int(bad[0])
        raise GraphFormatError(f"self-loop ({u[i]}, {v[i]})", line=i)

    lo, hi = np.minimum(u, v), np.maximum(u, v)
    keys = lo * n + hi
    order = np.argsort(keys, kind="stable")
    dup = np.flatnonzero(keys[order][1:] == keys[order][:-1])
    if len(dup):
        # report the later occurrence of the earliest-repeated pair
        i = int(order[dup + 1].min())
        raise GraphFormatError(f"duplicate edge ({u[i]}, {v[i]})", line=i)
    return Graph._from_unique_pairs(n, lo, hi)


def _unrank_pairs(n: int, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map linear indices over pairs ``i < j`` (row-major) to ``(i, j)``."""
    k = np.asarray(k, dtype=np.int64)
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(float(b) * b - 8.0 * k)) / 2).astype(np.int64)
    np.clip(i, 0, max(n - 2, 0), out=i)

    def start(r):
        return r * (2 * n - r - 1) // 2

    # float rounding can leave i off by one in either direction
    while True:
        hi = start(i + 1) <= k
        lo = start(i) > k
        if not (hi.any() or lo.any()):
            break
        i += hi
        i -= lo
    j = k - start(i) + i + 1
    return i, j


def gen_gnp(n: int, p: float, seed: int) -> Graph:
    """Sample G(n, p) by geometric skipping over the linearised pair index.

    Expected cost is O(n + m).  The result depends only on ``(n, p, seed)``
    and :data:`GENERATOR_VERSION`.
    """
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    if n < 0 or n > MAX_GNP_N:
        raise ValueError(f"n must lie in 0..{MAX_GNP_N}, got {n}")
    if not (0 <= seed < 2**64):
        raise ValueError("seed must be a 64-bit unsigned integer")
    total = n * (n - 1) // 2
    if p == 0.0 or total == 0:
        return Graph._from_unique_pairs(n, np.empty(0, np.int64), np.empty(0, np.int64))
    if p == 1.0:
        idx = np.arange(total, dtype=np.int64)
        return Graph._from_unique_pairs(n, *_unrank_pairs(n, idx))

    rng = np.random.Generator(np.random.PCG64(seed))
    chunks = []
    last = -1
    while True:
        remaining = total - 1 - last
        mean = remaining * p
        size = int(mean + 6.0 * math.sqrt(mean) + 64)
        gaps = rng.geometric(p, size=size)
        idx = last + np.cumsum(gaps, dtype=np.int64)
        if idx[-1] >= total:
            chunks.append(idx[: np.searchsorted(idx, total)])
            break
        chunks.append(idx)
        last = int(idx[-1])
    idx = np.concatenate(chunks)
    return Graph._from_unique_pairs(n, *_unrank_pairs(n, idx))


def gen_gnp_naive(n: int, p: float, seed: int) -> Graph:
    """One Bernoulli draw per pair. O(n^2); kept as a reference sampler."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    rng = np.random.Generator(np.random.PCG64(seed))
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return Graph._from_unique_pairs(n, iu[keep], ju[keep])


def disjoint_union(*graphs: Graph) -> Graph:
    """Union with vertex ids of later graphs shifted past earlier ones."""
    us, vs, off = [], [], 0
    for g in graphs:
        e = g.edges().astype(np.int64)
        us.append(e[:, 0] + off)
        vs.append(e[:, 1] + off)
        off += g.n
    if not us:
        return from_edges(0, [])
    return Graph._from_unique_pairs(off, np.concatenate(us), np.concatenate(vs))


def star(leaves: int) -> Graph:
    """Star with centre 0 and ``leaves`` leaves."""
    return from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def path(n: int) -> Graph:
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> Graph:
    return from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def complete_bipartite(a: int, b: int) -> Graph:
    return from_edges(a + b, [(i, a + j) for i in range(a) for j in range(b)])


# --------------------------------------------------------------------------
# queries


def degrees(g: Graph) -> np.ndarray:
    return g.degrees


def max_degree(g: Graph) -> int:
    return g.max_degree


def components(g: Graph) -> ComponentLabeling:
    """Connected components, ids numbered by smallest member vertex."""
    if g.n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return ComponentLabeling(empty, 0, empty, empty)
    count, raw = connected_components(g.adjacency, directed=False)
    _, first = np.unique(raw, return_index=True)
    remap = np.empty(count, dtype=np.int64)
    remap[np.argsort(first)] = np.arange(count)
    labels = remap[raw]
    sizes = np.bincount(labels, minlength=count)
    e = g.edges()
    edge_counts = np.bincount(labels[e[:, 0]], minlength=count) if len(e) else np.zeros(count, np.int64)
    return ComponentLabeling(_readonly(labels), int(count), _readonly(sizes), _readonly(edge_counts))


def is_forest(g: Graph) -> bool:
    if g.m >= g.n:
        return False
    return g.m == g.n - components(g).count


def bipartite_components(g: Graph, lab: ComponentLabeling | None = None) -> np.ndarray:
    """Per component, whether it is 2-colourable.

    Uses the bipartite double cover: a connected component is bipartite iff
    its two lifts ``v`` and ``v + n`` fall in different cover components.
    """
    lab = components(g) if lab is None else lab
    if g.m == 0:
        return np.ones(lab.count, dtype=bool)
    e = g.edges().astype(np.int64)
    u, v, n = e[:, 0], e[:, 1], g.n
    cover = Graph._from_unique_pairs(
        2 * n, np.concatenate((u, v)), np.concatenate((v + n, u + n))
    )
    cl = components(cover).labels
    odd = cl[:n] == cl[n:]
    bad = np.zeros(lab.count, dtype=bool)
    bad[lab.labels[odd]] = True
    return ~bad


def is_bipartite(g: Graph) -> bool:
    return bool(bipartite_components(g).all())


# --------------------------------------------------------------------------
# subgraphs


def edge_subgraph(g: Graph, keep: np.ndarray) -> Graph:
    """Spanning subgraph on the same vertex ids keeping ``g.edges()[keep]``."""
    e = g.edges()[np.asarray(keep, dtype=bool)]
    return Graph._from_unique_pairs(g.n, e[:, 0], e[:, 1])


def _check_set(g: Graph, s: VertexSet) -> None:
    if s.n != g.n:
        raise ValueError(f"vertex set over {s.n} vertices used with a graph on {g.n}")


def induced(g: Graph, s: VertexSet, relabel: bool = True) -> tuple[Graph, np.ndarray]:
    """Subgraph induced by ``s``.

    With ``relabel`` the result has ``len(s)`` vertices and ``mapping[i]`` is
    the original id of new vertex ``i``; otherwise ids are kept and mapping is
    the identity.
    """
    _check_set(g, s)
    e = g.edges()
    keep = s.mask[e[:, 0]] & s.mask[e[:, 1]]
    if not relabel:
        return edge_subgraph(g, keep), np.arange(g.n)
    mapping = s.members()
    new_id = np.cumsum(s.mask) - 1
    e = e[keep]
    return Graph._from_unique_pairs(len(mapping), new_id[e[:, 0]], new_id[e[:, 1]]), mapping


def cut(g: Graph, s: VertexSet) -> Graph:
    """Bipartite spanning subgraph of edges with exactly one end in ``s``."""
    _check_set(g, s)
    e = g.edges()
    return edge_subgraph(g, s.mask[e[:, 0]] != s.mask[e[:, 1]])


# --------------------------------------------------------------------------
# edge-list text format


def write_edgelist(g: Graph, dest) -> None:
    """Write ``gnp-graph 1 <n> <m>`` followed by sorted ``u v`` lines."""
    buf = io.StringIO()
    buf.write(f"{EDGELIST_MAGIC} {EDGELIST_VERSION} {g.n} {g.m}\n")
    e = g.edges()
    if len(e):
        np.savetxt(buf, e, fmt="%d", delimiter=" ", newline="\n")
    text = buf.getvalue()
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="\n", encoding="ascii") as fh:
            fh.write(text)
    else:
        dest.write(text)


def read_edgelist(src) -> Graph:
    """Parse the edge-list format; errors carry 1-based file line numbers."""
    if isinstance(src, (str, os.PathLike)):
        with open(src, "r", encoding="ascii", newline="") as fh:
            text = fh.read()
    else:
        text = src.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise GraphFormatError("empty input", line=1)
    head = lines[0].split(" ")
    if len(head) != 4 or head[0] != EDGELIST_MAGIC or head[1] != str(EDGELIST_VERSION):
        raise GraphFormatError(f"bad header {lines[0]!r}", line=1)
    try:
        n, m = int(head[2]), int(head[3])
    except ValueError:
        raise GraphFormatError(f"bad header {lines[0]!r}", line=1) from None
    body = lines[1:]
    if len(body) != m:
        raise GraphFormatError(f"header declares {m} edges, found {len(body)}", line=1)
    edges = np.empty((m, 2), dtype=np.int64)
    for i, line in enumerate(body):
        parts = line.split(" ")
        if len(parts) != 2 or not all(t.isdigit() for t in parts):
            raise GraphFormatError(f"expected '<u> <v>', got {line!r}", line=i + 2)
        edges[i] = int(parts[0]), int(parts[1])
    try:
        g = from_edges(n, edges)
    except GraphFormatError as err:
        raise GraphFormatError(err.reason, line=err.line + 2) from None
    if m:
        u, v = edges[:, 0], edges[:, 1]
        bad = np.flatnonzero(u >= v)
        if len(bad):
            raise GraphFormatError("edge not written as u < v", line=int(bad[0]) + 2)
        keys = u * n + v
        bad = np.flatnonzero(keys[1:] < keys[:-1])
        if len(bad):
            raise GraphFormatError("edges not in sorted order", line=int(bad[0]) + 3)
    return g
