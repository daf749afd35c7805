"""Isomorphism classes of small graphs (1 to 6 nodes) with O(1) classification.

A graph on ``k`` labelled nodes is an *adjacency mask*: bit ``b`` is set when
the ``b``-th upper-triangle cell ``(i, j)``, ``i < j``, taken in row-major
order, is an edge. The canonical form of a mask is the minimum mask over all
``k!`` relabellings; every raw mask is mapped to its class through a lookup
table built once per catalog.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

MAX_K = 6


def n_cells(k: int) -> int:
    return k * (k - 1) // 2


def cell_index(i: int, j: int, k: int) -> int:
    """Bit position of cell (i, j) of a ``k``-node mask."""
    if i > j:
        i, j = j, i
    if i == j or j >= k:
        raise ValueError(f"invalid cell ({i}, {j}) for k={k}")
    return i * k - i * (i + 1) // 2 + (j - i - 1)


def mask_from_edges(k: int, edges) -> int:
    bits = 0
    for i, j in edges:
        bits |= 1 << cell_index(i, j, k)
    return bits


def mask_edges(k: int, bits: int) -> list[tuple[int, int]]:
    out = []
    b = 0
    for i in range(k):
        for j in range(i + 1, k):
            if bits >> b & 1:
                out.append((i, j))
            b += 1
    return out


def permute_mask(bits: int, perm, k: int) -> int:
    """Mask of the graph obtained by renaming node ``v`` to ``perm[v]``."""
    return mask_from_edges(k, [(perm[i], perm[j]) for i, j in mask_edges(k, bits)])


@dataclass(frozen=True)
class AdjMask:
    k: int
    bits: int

    def __post_init__(self):
        if not 1 <= self.k <= MAX_K:
            raise ValueError(f"k must be in 1..{MAX_K}, got {self.k}")
        if not 0 <= self.bits < 1 << n_cells(self.k):
            raise ValueError(f"bits {self.bits} out of range for k={self.k}")

    @classmethod
    def from_edges(cls, k, edges):
        return cls(k, mask_from_edges(k, edges))

    def edges(self):
        return mask_edges(self.k, self.bits)

    def permute(self, perm) -> "AdjMask":
        return AdjMask(self.k, permute_mask(self.bits, perm, self.k))


def _components(k, edges):
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        parent[find(i)] = find(j)
    return len({find(v) for v in range(k)})


@dataclass(frozen=True)
class GraphClass:
    class_id: int
    k: int
    canonical_mask: int
    edge_count: int
    component_count: int
    density: float
    degree_sequence: tuple[int, ...]
    labeled_count: int

    @classmethod
    def from_mask(cls, class_id, k, bits, labeled_count=0):
        edges = mask_edges(k, bits)
        deg = [0] * k
        for i, j in edges:
            deg[i] += 1
            deg[j] += 1
        cells = n_cells(k)
        return cls(
            class_id=class_id,
            k=k,
            canonical_mask=bits,
            edge_count=len(edges),
            component_count=_components(k, edges),
            density=len(edges) / cells if cells else 0.0,
            degree_sequence=tuple(sorted(deg, reverse=True)),
            labeled_count=labeled_count,
        )

    @property
    def exact_density(self) -> Fraction:
        cells = n_cells(self.k)
        return Fraction(self.edge_count, cells) if cells else Fraction(0)


def class_order_key(c: GraphClass):
    """Display order: size, density, component count ascending, then degree
    sequence in descending lexicographic order.

    The canonical mask breaks the remaining ties (non-isomorphic classes that
    agree on all four keys first appear at five nodes).
    """
    return (c.k, c.exact_density, c.component_count,
            tuple(-d for d in c.degree_sequence), c.canonical_mask)


@lru_cache(maxsize=None)
def _canonical_table(k: int) -> np.ndarray:
    cells = n_cells(k)
    masks = np.arange(1 << cells, dtype=np.int64)
    if k <= 1:
        return masks
    src_bits = [(masks >> b) & 1 for b in range(cells)]
    canon = masks.copy()
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    for perm in itertools.permutations(range(k)):
        permuted = np.zeros_like(masks)
        for b, (i, j) in enumerate(pairs):
            permuted |= src_bits[b] << cell_index(perm[i], perm[j], k)
        np.minimum(canon, permuted, out=canon)
    return canon


class GraphClassCatalog:
    """All isomorphism classes on 1..``max_k`` nodes, in display order.

    Class ids are contiguous, increasing with size, so the ids of a smaller
    catalog are a prefix of those of a larger one.
    """

    def __init__(self, max_k: int = MAX_K):
        if not isinstance(max_k, (int, np.integer)) or not 1 <= max_k <= MAX_K:
            raise ValueError(f"max_k must be in 1..{MAX_K}, got {max_k!r}")
        self.max_k = int(max_k)
        self.classes: list[GraphClass] = []
        offsets = np.zeros(self.max_k + 2, dtype=np.int64)
        tables = []
        for k in range(1, self.max_k + 1):
            canon = _canonical_table(k)
            reps, counts = np.unique(canon, return_counts=True)
            drafts = [GraphClass.from_mask(-1, k, int(b), int(c)) for b, c in zip(reps, counts)]
            drafts.sort(key=class_order_key)
            first = len(self.classes)
            rep_to_id = {}
            for pos, c in enumerate(drafts):
                cid = first + pos
                rep_to_id[c.canonical_mask] = cid
                self.classes.append(GraphClass(cid, *_fields_after_id(c)))
            id_of_rep = np.vectorize(rep_to_id.__getitem__, otypes=[np.int32])
            tables.append(id_of_rep(canon))
            offsets[k + 1] = offsets[k] + canon.size
        # offsets[k] is where the table for size k starts; size 0 maps nowhere
        self._offsets = offsets
        self._lookup = np.concatenate(tables).astype(np.int32)
        self._offsets.setflags(write=False)
        self._lookup.setflags(write=False)

    def __len__(self):
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def __getitem__(self, class_id) -> GraphClass:
        return self.classes[class_id]

    @property
    def lookup_offsets(self) -> np.ndarray:
        return self._offsets

    @property
    def lookup_table(self) -> np.ndarray:
        return self._lookup

    def classes_of_size(self, k: int) -> list[GraphClass]:
        return [c for c in self.classes if c.k == k]

    def counts_per_size(self) -> list[int]:
        return [len(self.classes_of_size(k)) for k in range(1, self.max_k + 1)]

    def ids_in_range(self, k_min: int, k_max: int) -> list[int]:
        return [c.class_id for c in self.classes if k_min <= c.k <= k_max]

    def classify(self, mask: AdjMask) -> int:
        if mask.k > self.max_k:
            raise ValueError(f"mask has {mask.k} nodes but catalog stops at {self.max_k}")
        return int(self._lookup[self._offsets[mask.k] + mask.bits])

    def classify_bits(self, k: int, bits: int) -> int:
        return self.classify(AdjMask(k, bits))

    def version(self, max_k: int | None = None) -> str:
        """Tag identifying the class numbering for sizes up to ``max_k``."""
        max_k = self.max_k if max_k is None else max_k
        if max_k > self.max_k:
            raise ValueError(f"catalog stops at {self.max_k}")
        h = hashlib.sha256()
        for c in self.classes:
            if c.k <= max_k:
                h.update(f"{c.class_id}:{c.k}:{c.canonical_mask};".encode())
        return f"minmask-v1-k{max_k}-{h.hexdigest()[:16]}"

    def to_csv(self, fh=None) -> str | None:
        out = fh or io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["class_id", "k", "edge_count", "component_count", "density",
                         "degree_sequence", "canonical_bits"])
        for c in self.classes:
            writer.writerow([c.class_id, c.k, c.edge_count, c.component_count,
                             repr(c.density), "-".join(map(str, c.degree_sequence)),
                             c.canonical_mask])
        return None if fh else out.getvalue()


def _fields_after_id(c: GraphClass):
    return (c.k, c.canonical_mask, c.edge_count, c.component_count, c.density,
            c.degree_sequence, c.labeled_count)


@lru_cache(maxsize=None)
def build_catalog(max_k: int = MAX_K) -> GraphClassCatalog:
    """Cached catalog constructor; catalogs are immutable once built."""
    return GraphClassCatalog(max_k)


def classify(mask: AdjMask, catalog: GraphClassCatalog) -> int:
    return catalog.classify(mask)
