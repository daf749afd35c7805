"""Seeded Erdos-Renyi, Barabasi-Albert and Watts-Strogatz generators.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``, whose
streams are fixed across platforms, so a spec and seed always give the same
edge set.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .graph import Graph

FAMILIES = ("er", "ba", "ws")


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n: int
    seed: int
    p: float | None = None
    m: int | None = None
    k: int | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.family == "er":
            if self.p is None or not 0.0 < self.p < 1.0:
                raise ValueError(f"er needs p in (0, 1), got {self.p}")
        elif self.family == "ba":
            if self.m is None or not 1 <= self.m < self.n:
                raise ValueError(f"ba needs 1 <= m < n, got m={self.m}")
        else:
            if self.k is None or self.k % 2 or not 0 < self.k < self.n:
                raise ValueError(f"ws needs an even k with 0 < k < n, got k={self.k}")
            if self.beta is None or not 0.0 <= self.beta <= 1.0:
                raise ValueError(f"ws needs beta in [0, 1], got {self.beta}")

    @classmethod
    def er(cls, n, p, seed):
        return cls("er", int(n), int(seed), p=float(p))

    @classmethod
    def ba(cls, n, m, seed):
        return cls("ba", int(n), int(seed), m=int(m))

    @classmethod
    def ws(cls, n, k, beta, seed):
        return cls("ws", int(n), int(seed), k=int(k), beta=float(beta))

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    @property
    def name(self) -> str:
        if self.family == "er":
            params = f"p{self.p:g}"
        elif self.family == "ba":
            params = f"m{self.m}"
        else:
            params = f"k{self.k}_beta{self.beta:g}"
        return f"{self.family}_n{self.n}_{params}_seed{self.seed}"


def generate(spec: GeneratorSpec) -> Graph:
    rng = np.random.default_rng(spec.seed)
    if spec.family == "er":
        src, dst = _erdos_renyi(spec.n, spec.p, rng)
    elif spec.family == "ba":
        src, dst = _barabasi_albert(spec.n, spec.m, rng)
    else:
        src, dst = _watts_strogatz(spec.n, spec.k, spec.beta, rng)
    return Graph.from_edges(src, dst, spec.n)


def _erdos_renyi(n, p, rng, batch=1 << 20):
    """Geometric skips over the n(n-1)/2 pairs ordered (j, i) with i < j."""
    total = n * (n - 1) // 2
    found = []
    pos = -1
    while True:
        jumps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(jumps)
        found.append(idx[idx < total])
        if idx[-1] >= total:
            break
        pos = int(idx[-1])
    lin = np.concatenate(found)
    j = ((1 + np.sqrt(1 + 8 * lin.astype(np.float64))) // 2).astype(np.int64)
    # correct float rounding so that j(j-1)/2 <= lin < j(j+1)/2
    j -= (j * (j - 1) // 2) > lin
    j += ((j + 1) * j // 2) <= lin
    i = lin - j * (j - 1) // 2
    return i, j


def _barabasi_albert(n, m, rng):
    """Seed clique on m+1 nodes, then degree-proportional attachment.

    Targets are drawn uniformly from the list of edge endpoints (each node
    appears once per incident edge) until ``m`` distinct nodes are chosen.
    """
    src, dst = [], []
    endpoints = np.empty(2 * (m * (m + 1) // 2 + (n - m - 1) * m), dtype=np.int64)
    size = 0
    for a in range(m + 1):
        for b in range(a + 1, m + 1):
            src.append(a)
            dst.append(b)
            endpoints[size:size + 2] = (a, b)
            size += 2
    buf = rng.random(4096)
    used = 0
    for v in range(m + 1, n):
        chosen: list[int] = []
        while len(chosen) < m:
            if used == buf.size:
                buf = rng.random(4096)
                used = 0
            t = int(endpoints[int(buf[used] * size)])
            used += 1
            if t not in chosen:
                chosen.append(t)
        for t in chosen:
            src.append(v)
            dst.append(t)
            endpoints[size:size + 2] = (v, t)
            size += 2
    return np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64)


def _watts_strogatz(n, k, beta, rng):
    """Ring lattice with k/2 neighbors per side; each lattice edge (u, u+d)
    keeps u and, with probability beta, moves its far end to a uniform node
    that is neither u nor already adjacent to u. Edges are visited by offset
    d = 1..k/2, then by u."""
    adj = [set() for _ in range(n)]
    for u in range(n):
        for d in range(1, k // 2 + 1):
            v = (u + d) % n
            adj[u].add(v)
            adj[v].add(u)
    if beta > 0:
        for d in range(1, k // 2 + 1):
            coins = rng.random(n)
            for u in range(n):
                v = (u + d) % n
                if coins[u] >= beta or v not in adj[u]:
                    continue
                if len(adj[u]) >= n - 1:
                    continue
                while True:
                    w = int(rng.integers(n))
                    if w != u and w not in adj[u]:
                        break
                adj[u].discard(v)
                adj[v].discard(u)
                adj[u].add(w)
                adj[w].add(u)
    src = [u for u in range(n) for v in adj[u] if u < v]
    dst = [v for u in range(n) for v in adj[u] if u < v]
    return np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64)


def reference_manifest(n=1_000_000, seed=0) -> list[GeneratorSpec]:
    """The 32 random-graph specs of the 116-network collection.

    ER: p = 5e-6 .. 5e-5 step 5e-6; BA: m = 2, 4, .., 16 (inferred from the
    stated 2M-16M edge range); WS: k = 4, 8, .., 28 with beta in {0.2, 0.8}.
    Seeds are ``seed + index``.
    """
    specs = []
    for t in range(1, 11):
        specs.append(("er", {"p": round(5e-6 * t, 12)}))
    for m in range(2, 17, 2):
        specs.append(("ba", {"m": m}))
    for k in range(4, 29, 4):
        for beta in (0.2, 0.8):
            specs.append(("ws", {"k": k, "beta": beta}))
    return [GeneratorSpec(fam, n, seed + i, **params) for i, (fam, params) in enumerate(specs)]


def write_manifest(specs, path):
    Path(path).write_text(json.dumps([s.to_dict() for s in specs], indent=2) + "\n")


def read_manifest(path) -> list[GeneratorSpec]:
    return [GeneratorSpec(**d) for d in json.loads(Path(path).read_text())]
