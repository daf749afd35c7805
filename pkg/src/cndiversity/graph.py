"""Undirected graphs in sorted-adjacency form, edge-list ingestion and summary statistics."""

from __future__ import annotations

import math
import csv
import dataclasses
import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .exceptions import DiameterRefusedError, EdgeListParseError, EmptyGraphError

EXACT_DIAMETER_MAX_NODES = 20_000


class Graph:
    """Immutable undirected simple graph stored as CSR arrays.

    ``indptr``/``indices`` hold each node's neighbors sorted ascending.
    ``original_ids[v]`` is the id node ``v`` carried in the source file.
    """

    __slots__ = ("indptr", "indices", "original_ids")

    def __init__(self, indptr, indices, original_ids=None):
        indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        indices = np.ascontiguousarray(indices, dtype=np.int64)
        n = indptr.size - 1
        if original_ids is None:
            original_ids = np.arange(n, dtype=np.int64)
        original_ids = np.ascontiguousarray(original_ids, dtype=np.int64)
        for arr in (indptr, indices, original_ids):
            arr.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "original_ids", original_ids)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    @classmethod
    def from_edges(cls, src, dst, n=None, original_ids=None):
        """Build a simple graph from endpoint arrays over nodes ``0..n-1``.

        Self-loops and duplicates (in either orientation) are dropped.
        """
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("src and dst must have the same length")
        if n is None:
            n = int(max(src.max(initial=-1), dst.max(initial=-1)) + 1)
        if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
            raise ValueError("edge endpoint out of range")
        keep = src != dst
        lo = np.minimum(src[keep], dst[keep])
        hi = np.maximum(src[keep], dst[keep])
        key = np.unique(lo * n + hi)
        lo, hi = key // n, key % n
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return cls(indptr, cols, original_ids)

    @property
    def node_count(self) -> int:
        return self.indptr.size - 1

    @property
    def edge_count(self) -> int:
        return self.indices.size // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        pos = np.searchsorted(nbrs, v)
        return bool(pos < nbrs.size and nbrs[pos] == v)

    def edges(self) -> np.ndarray:
        """(m, 2) array of unordered edges with ``i < j``, sorted."""
        rows = np.repeat(np.arange(self.node_count, dtype=np.int64), self.degrees())
        upper = rows < self.indices
        return np.column_stack([rows[upper], self.indices[upper]])

    def permute(self, perm) -> "Graph":
        """Relabel node ``v`` as ``perm[v]``; original ids travel with the nodes."""
        perm = np.asarray(perm, dtype=np.int64)
        e = self.edges()
        ids = np.empty_like(self.original_ids)
        ids[perm] = self.original_ids
        return Graph.from_edges(perm[e[:, 0]], perm[e[:, 1]], self.node_count, ids)

    def subgraph(self, nodes) -> "Graph":
        """Induced subgraph on ``nodes`` (relabelled in ascending order)."""
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        remap = np.full(self.node_count, -1, dtype=np.int64)
        remap[nodes] = np.arange(nodes.size)
        e = self.edges()
        keep = (remap[e[:, 0]] >= 0) & (remap[e[:, 1]] >= 0)
        return Graph.from_edges(remap[e[keep, 0]], remap[e[keep, 1]], nodes.size,
                                self.original_ids[nodes])

    def to_scipy(self):
        from scipy.sparse import csr_matrix

        data = np.ones(self.indices.size, dtype=np.int64)
        n = self.node_count
        return csr_matrix((data, self.indices, self.indptr), shape=(n, n))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self):
        return hash((self.node_count, self.indices.tobytes()))

    def __repr__(self):
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"


class DirectedMode(str, enum.Enum):
    ALREADY_UNDIRECTED = "already_undirected"
    RECIPROCAL_ONLY = "reciprocal_only"
    SYMMETRIZE = "symmetrize"


@dataclass(frozen=True)
class CleaningPolicy:
    directed_mode: DirectedMode = DirectedMode.ALREADY_UNDIRECTED
    keep_lcc: bool = True

    def __post_init__(self):
        object.__setattr__(self, "directed_mode", DirectedMode(self.directed_mode))


def _read_pairs(path):
    path = Path(path)
    src, dst = [], []
    with open(path, "r") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            tokens = stripped.split()
            if len(tokens) < 2:
                raise EdgeListParseError(path, line_no, stripped)
            try:
                src.append(int(tokens[0]))
                dst.append(int(tokens[1]))
            except ValueError:
                raise EdgeListParseError(path, line_no, stripped) from None
    return np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64)


def clean_edges(src, dst, policy: CleaningPolicy) -> Graph:
    """Apply a cleaning policy to raw directed/undirected id pairs."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    original_ids, inverse = np.unique(np.concatenate([src, dst]), return_inverse=True)
    n = original_ids.size
    s, d = inverse[:src.size], inverse[src.size:]
    if policy.directed_mode is DirectedMode.RECIPROCAL_ONLY:
        forward = np.unique(s * n + d)
        backward = np.unique(d * n + s)
        both = np.intersect1d(forward, backward, assume_unique=True)
        s, d = both // n, both % n
    g = Graph.from_edges(s, d, n, original_ids)
    if policy.keep_lcc:
        g = largest_connected_component(g)
    if g.edge_count == 0:
        raise EmptyGraphError("graph has no edges after cleaning")
    return g


def load_edge_list(path, policy: CleaningPolicy | None = None) -> Graph:
    """Read a whitespace-separated ``src dst`` edge list and clean it.

    Lines starting with ``#`` are comments; extra columns are ignored.
    Node ids are compacted to ``0..n-1`` in ascending original-id order.
    """
    policy = policy or CleaningPolicy()
    src, dst = _read_pairs(path)
    return clean_edges(src, dst, policy)


def write_edge_list(g: Graph, path, original_ids=False):
    e = g.edges()
    if original_ids:
        e = g.original_ids[e]
    with open(path, "w") as fh:
        for i, j in e:
            fh.write(f"{i} {j}\n")


def write_id_map(g: Graph, path):
    with open(path, "w") as fh:
        fh.write("# node_id original_id\n")
        for v, orig in enumerate(g.original_ids):
            fh.write(f"{v} {orig}\n")


def largest_connected_component(g: Graph) -> Graph:
    """Largest component; ties go to the one holding the smallest original id."""
    n = g.node_count
    if n == 0:
        return g
    ncomp, labels = connected_components(g.to_scipy(), directed=False)
    if ncomp == 1:
        return g
    sizes = np.bincount(labels, minlength=ncomp)
    min_orig = np.full(ncomp, np.iinfo(np.int64).max)
    np.minimum.at(min_orig, labels, g.original_ids)
    best = min(range(ncomp), key=lambda c: (-sizes[c], min_orig[c]))
    return g.subgraph(np.flatnonzero(labels == best))


@dataclass
class NetworkStats:
    node_count: int
    edge_count: int
    avg_degree: float
    degree_p10: int
    degree_p50: int
    degree_p90: int
    degree_max: int
    avg_cc: float
    global_cc: float
    diameter: int | None
    triangles: int
    wedges: int
    diameter_kind: str = "exact"

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    def to_csv(self, path):
        row = self.to_dict()
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(row))
            writer.writeheader()
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})


def percentile_degree(sorted_degrees, q_num, q_den=10):
    """Element at index floor(q*(n-1)) of the ascending sequence, q = q_num/q_den."""
    n = len(sorted_degrees)
    return int(sorted_degrees[(q_num * (n - 1)) // q_den])


def triangles_per_node(g: Graph, n_jobs=None) -> np.ndarray:
    def task(sources):
        tri = np.zeros(g.node_count, dtype=np.int64)
        _kernels.node_triangles(g.indptr, g.indices, sources, tri)
        return tri

    parts = _kernels.run_partitioned(task, np.arange(g.node_count), n_jobs)
    return np.sum(parts, axis=0)


def exact_diameter(g: Graph, n_jobs=None) -> int:
    n = g.node_count

    def task(sources):
        out = np.zeros(sources.size, dtype=np.int64)
        dist = np.full(n, -1, dtype=np.int64)
        queue = np.empty(n, dtype=np.int64)
        _kernels.eccentricities(g.indptr, g.indices, sources, out, dist, queue)
        return int(out.max(initial=0))

    return max(_kernels.run_partitioned(task, np.arange(n), n_jobs))


def double_sweep_diameter(g: Graph, sweeps=4) -> int:
    """Lower bound on the diameter by repeated farthest-node BFS sweeps.

    Starts from the highest-degree node of every component.
    """
    n = g.node_count
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    _, labels = connected_components(g.to_scipy(), directed=False)
    deg = g.degrees()
    best = 0
    for comp in np.unique(labels):
        members = np.flatnonzero(labels == comp)
        start = int(members[np.argmax(deg[members])])
        for _ in range(sweeps):
            far_node, ecc = _kernels.bfs_farthest(g.indptr, g.indices, start, dist, queue)
            best = max(best, int(ecc))
            if far_node == start:
                break
            start = int(far_node)
    return best


def network_stats(g: Graph, diameter_mode="exact", exact_threshold=EXACT_DIAMETER_MAX_NODES,
                  n_jobs=None) -> NetworkStats:
    n = g.node_count
    deg = g.degrees()
    sorted_deg = np.sort(deg)
    tri = triangles_per_node(g, n_jobs)
    triangles = int(tri.sum() // 3)
    wedges = int((deg * (deg - 1) // 2).sum())
    local = np.zeros(n)
    ok = deg >= 2
    local[ok] = tri[ok] / (deg[ok] * (deg[ok] - 1) / 2.0)

    if diameter_mode == "exact":
        if n > exact_threshold:
            raise DiameterRefusedError(
                f"exact diameter refused for {n} nodes (threshold {exact_threshold})")
        diameter, kind = exact_diameter(g, n_jobs), "exact"
    elif diameter_mode == "double_sweep_lower_bound":
        diameter, kind = double_sweep_diameter(g), "lower_bound"
    elif diameter_mode == "skip":
        diameter, kind = None, "skipped"
    else:
        raise ValueError(f"unknown diameter_mode {diameter_mode!r}")

    return NetworkStats(
        node_count=n,
        edge_count=g.edge_count,
        avg_degree=float(deg.mean()) if n else 0.0,
        degree_p10=percentile_degree(sorted_deg, 1) if n else 0,
        degree_p50=percentile_degree(sorted_deg, 5) if n else 0,
        degree_p90=percentile_degree(sorted_deg, 9) if n else 0,
        degree_max=int(sorted_deg[-1]) if n else 0,
        avg_cc=math.fsum(local.tolist()) / n if n else 0.0,
        global_cc=3.0 * triangles / wedges if wedges else 0.0,
        diameter=diameter,
        triangles=triangles,
        wedges=wedges,
        diameter_kind=kind,
    )
