"""Common-neighborhood census: per-class pair and link counts over node pairs.

Pairs are discovered source-first. For a source ``i`` the candidate partners
are the neighbors of its neighbors; each partner's common-neighbor count is
accumulated in a scratch counter, and the induced subgraph on the common
neighbors is classified when it has at most ``cap`` nodes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .canon import AdjMask, GraphClassCatalog, build_catalog, mask_from_edges
from .exceptions import CatalogMismatchError
from .graph import Graph


@dataclass(frozen=True)
class CensusMode:
    """``exact`` visits every pair once; ``node_sampled`` keeps each source
    node independently with probability ``rate`` and counts all its partners.

    Node sampling favours pairs with high-degree endpoints; counts are raw.
    """

    kind: str = "exact"
    rate: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ("exact", "node_sampled"):
            raise ValueError(f"unknown census mode {self.kind!r}")
        if self.kind == "node_sampled":
            if not 0.0 < self.rate <= 1.0:
                raise ValueError(f"sampling rate must be in (0, 1], got {self.rate}")
            if self.seed is None:
                raise ValueError("node_sampled mode needs an explicit seed")

    @classmethod
    def exact(cls):
        return cls()

    @classmethod
    def node_sampled(cls, rate, seed):
        return cls("node_sampled", float(rate), None if seed is None else int(seed))

    def sources(self, n: int) -> np.ndarray:
        if self.kind == "exact":
            return np.arange(n, dtype=np.int64)
        rng = np.random.default_rng(self.seed)
        return np.flatnonzero(rng.random(n) < self.rate).astype(np.int64)

    @property
    def upper_only(self) -> bool:
        return self.kind == "exact"

    def to_dict(self):
        return {"kind": self.kind, "rate": self.rate, "seed": self.seed}


def _as_mode(mode) -> CensusMode:
    if mode is None or mode == "exact":
        return CensusMode()
    if isinstance(mode, CensusMode):
        return mode
    if isinstance(mode, dict):
        return CensusMode(**mode)
    raise ValueError(f"unknown census mode {mode!r}")


@dataclass
class CensusTable:
    pair_count: np.ndarray
    linked_count: np.ndarray
    bag: np.ndarray
    max_k: int
    catalog_version: str
    mode: CensusMode = field(default_factory=CensusMode)

    @property
    def bag_of_cn(self) -> dict[int, int]:
        """#CN size -> number of pairs, over every observed size."""
        return {int(s): int(c) for s, c in enumerate(self.bag) if c and s > 0}

    @property
    def total_pairs(self) -> int:
        return int(self.bag.sum())

    def rate(self, class_id: int) -> float:
        return self.linked_count[class_id] / self.pair_count[class_id]

    def __eq__(self, other):
        if not isinstance(other, CensusTable):
            return NotImplemented
        return (self.max_k == other.max_k and self.catalog_version == other.catalog_version
                and self.mode == other.mode
                and np.array_equal(self.pair_count, other.pair_count)
                and np.array_equal(self.linked_count, other.linked_count)
                and self.bag_of_cn == other.bag_of_cn)

    def __add__(self, other: "CensusTable") -> "CensusTable":
        if (self.max_k, self.catalog_version) != (other.max_k, other.catalog_version):
            raise CatalogMismatchError("cannot merge censuses over different catalogs")
        size = max(self.bag.size, other.bag.size)
        bag = np.zeros(size, dtype=np.int64)
        bag[:self.bag.size] += self.bag
        bag[:other.bag.size] += other.bag
        return CensusTable(self.pair_count + other.pair_count,
                           self.linked_count + other.linked_count,
                           bag, self.max_k, self.catalog_version, self.mode)

    def to_files(self, prefix, extra_meta=None):
        """Write ``<prefix>.census.csv`` and the ``<prefix>.census.json`` sidecar."""
        prefix = str(prefix)
        catalog = build_catalog(self.max_k)
        with open(prefix + ".census.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["class_id", "k", "pair_count", "linked_count"])
            for c in catalog:
                writer.writerow([c.class_id, c.k, int(self.pair_count[c.class_id]),
                                 int(self.linked_count[c.class_id])])
        meta = {
            "mode": self.mode.kind,
            "rate": self.mode.rate,
            "seed": self.mode.seed,
            "cap": self.max_k,
            "catalog_version": self.catalog_version,
            "bag_of_cn": {str(k): v for k, v in self.bag_of_cn.items()},
        }
        if extra_meta:
            meta.update(extra_meta)
        Path(prefix + ".census.json").write_text(json.dumps(meta, indent=2) + "\n")

    @classmethod
    def from_files(cls, prefix, catalog: GraphClassCatalog | None = None):
        prefix = str(prefix)
        if prefix.endswith(".census.csv") or prefix.endswith(".census.json"):
            prefix = prefix.rsplit(".census.", 1)[0]
        meta = json.loads(Path(prefix + ".census.json").read_text())
        max_k = int(meta["cap"])
        catalog = catalog or build_catalog(max_k)
        if meta["catalog_version"] != catalog.version(max_k):
            raise CatalogMismatchError(
                f"census built with catalog {meta['catalog_version']}, "
                f"current catalog is {catalog.version(max_k)}")
        n_classes = len(catalog.ids_in_range(1, max_k))
        pair = np.zeros(n_classes, dtype=np.int64)
        linked = np.zeros(n_classes, dtype=np.int64)
        with open(prefix + ".census.csv", newline="") as fh:
            for row in csv.DictReader(fh):
                cid = int(row["class_id"])
                pair[cid] = int(row["pair_count"])
                linked[cid] = int(row["linked_count"])
        sizes = {int(k): int(v) for k, v in meta["bag_of_cn"].items()}
        bag = np.zeros(max(sizes, default=0) + 1, dtype=np.int64)
        for s, c in sizes.items():
            bag[s] = c
        mode = CensusMode(meta["mode"], meta["rate"], meta["seed"])
        return cls(pair, linked, bag, max_k, meta["catalog_version"], mode)


def common_neighborhood(g: Graph, i: int, j: int, cap: int = 6):
    """Size of ``N(i) & N(j)`` and, when it is at most ``cap``, its induced mask.

    Common neighbors are indexed in ascending node order. Returns
    ``(cn_size, AdjMask)`` or ``(cn_size, None)`` on overflow.
    """
    if i == j:
        raise ValueError("common neighborhood needs two distinct nodes")
    common = np.intersect1d(g.neighbors(i), g.neighbors(j), assume_unique=True)
    c = int(common.size)
    if c > cap:
        return c, None
    if c == 0:
        return 0, None
    edges = [(a, b) for a in range(c) for b in range(a + 1, c)
             if g.has_edge(int(common[a]), int(common[b]))]
    return c, AdjMask(c, mask_from_edges(c, edges))


def _scratch(n):
    return np.zeros(n, dtype=np.int64), np.empty(max(n, 1), dtype=np.int64)


def enumerate_pairs(g: Graph, mode=None, block=4096):
    """Yield each unordered pair ``(i, j)`` with at least one common neighbor.

    In exact mode pairs come out once with ``i < j``; in sampled mode every
    qualifying partner of each sampled source ``i`` is produced.
    """
    for rec in iter_pair_records(g, mode, cap=0, block=block):
        for i, j in zip(rec["i"].tolist(), rec["j"].tolist()):
            yield i, j


def iter_pair_records(g: Graph, mode=None, cap=0, catalog=None, block=4096):
    """Blocks of per-pair records: dicts of arrays ``i, j, cn, class_id, linked``."""
    mode = _as_mode(mode)
    if cap and catalog is None:
        catalog = build_catalog(cap)
    offsets, lookup = _tables(catalog, cap)
    sources = mode.sources(g.node_count)
    counter, touched = _scratch(g.node_count)
    degmax = int(g.degrees().max(initial=0))
    for start in range(0, sources.size, block):
        chunk = sources[start:start + block]
        bag = np.zeros(degmax + 2, dtype=np.int64)
        dummy = np.zeros(1, dtype=np.int64)
        _kernels.census_sources(g.indptr, g.indices, chunk, mode.upper_only, 0,
                                offsets, lookup, dummy, dummy, bag, counter, touched)
        total = int(bag.sum())
        if total == 0:
            continue
        out_i = np.empty(total, dtype=np.int64)
        out_j = np.empty(total, dtype=np.int64)
        out_cn = np.empty(total, dtype=np.int64)
        out_cls = np.empty(total, dtype=np.int64)
        out_link = np.empty(total, dtype=np.bool_)
        _kernels.pair_records(g.indptr, g.indices, chunk, mode.upper_only, cap, offsets,
                              lookup, out_i, out_j, out_cn, out_cls, out_link,
                              counter, touched)
        yield {"i": out_i, "j": out_j, "cn": out_cn, "class_id": out_cls, "linked": out_link}


def _tables(catalog, cap):
    if catalog is None or cap == 0:
        return np.zeros(2, dtype=np.int64), np.zeros(1, dtype=np.int32)
    if cap > catalog.max_k:
        raise ValueError(f"cap {cap} exceeds catalog size limit {catalog.max_k}")
    return catalog.lookup_offsets, catalog.lookup_table


def run_census(g: Graph, catalog: GraphClassCatalog | None = None, mode=None,
               cap: int | None = None, n_jobs=None) -> CensusTable:
    """Count, per common-neighborhood class, the pairs and the linked pairs.

    Sources are split across ``n_jobs`` threads with private tables that are
    summed afterwards, so the result is independent of the thread count.
    """
    mode = _as_mode(mode)
    catalog = catalog or build_catalog()
    cap = catalog.max_k if cap is None else int(cap)
    if not 1 <= cap <= catalog.max_k:
        raise ValueError(f"cap must be in 1..{catalog.max_k}, got {cap}")
    n_classes = len(catalog.ids_in_range(1, cap))
    offsets, lookup = _tables(catalog, cap)
    degmax = int(g.degrees().max(initial=0))

    def task(sources):
        pair = np.zeros(n_classes, dtype=np.int64)
        linked = np.zeros(n_classes, dtype=np.int64)
        bag = np.zeros(degmax + 2, dtype=np.int64)
        counter, touched = _scratch(g.node_count)
        _kernels.census_sources(g.indptr, g.indices, sources, mode.upper_only, cap,
                                offsets, lookup, pair, linked, bag, counter, touched)
        return pair, linked, bag

    parts = _kernels.run_partitioned(task, mode.sources(g.node_count), n_jobs)
    pair = np.sum([p[0] for p in parts], axis=0)
    linked = np.sum([p[1] for p in parts], axis=0)
    bag = np.sum([p[2] for p in parts], axis=0)
    last = np.flatnonzero(bag)
    bag = bag[:last[-1] + 1] if last.size else bag[:1]
    return CensusTable(pair, linked, bag, cap, catalog.version(cap), mode)


def cn_size_histogram(g: Graph, n_jobs=None) -> np.ndarray:
    """Exact bag-of-#CN histogram (index = common-neighbor count), no classification."""
    degmax = int(g.degrees().max(initial=0))
    offsets, lookup = _tables(None, 0)

    def task(sources):
        bag = np.zeros(degmax + 2, dtype=np.int64)
        dummy = np.zeros(1, dtype=np.int64)
        counter, touched = _scratch(g.node_count)
        _kernels.census_sources(g.indptr, g.indices, sources, True, 0, offsets, lookup,
                                dummy, dummy, bag, counter, touched)
        return bag

    return np.sum(_kernels.run_partitioned(task, np.arange(g.node_count), n_jobs), axis=0)
