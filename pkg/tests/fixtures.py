"""Seeded graph corpora shared by unit and acceptance tests."""

import numpy as np

from cndiversity.graph import Graph
from cndiversity.randgraph import GeneratorSpec, generate


def mixed_specs(count, max_n=200, seed=0):
    """``count`` ER/BA/WS specs cycling through the families, sizes <= max_n."""
    rng = np.random.default_rng(seed)
    specs = []
    for t in range(count):
        n = int(rng.integers(20, max_n + 1))
        fam = ("er", "ba", "ws")[t % 3]
        if fam == "er":
            specs.append(GeneratorSpec.er(n, float(rng.uniform(0.03, 0.15)), 1000 + t))
        elif fam == "ba":
            specs.append(GeneratorSpec.ba(n, int(rng.integers(1, 6)), 1000 + t))
        else:
            k = 2 * int(rng.integers(1, 5))
            specs.append(GeneratorSpec.ws(n, k, float(rng.uniform(0, 1)), 1000 + t))
    return specs


def mixed_graphs(count, max_n=200, seed=0):
    return [generate(s) for s in mixed_specs(count, max_n, seed)]


def graph_from(edges, n=None):
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return Graph.from_edges(e[:, 0], e[:, 1], n)


def k4_minus_edge():
    """Nodes a=0, b=1, c=2, d=3 with edge {a, d} removed."""
    return graph_from([(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])


def triangle():
    return graph_from([(0, 1), (1, 2), (0, 2)])


def cycle(n):
    return graph_from([(i, (i + 1) % n) for i in range(n)])


def star(leaves):
    return graph_from([(0, i) for i in range(1, leaves + 1)])


def complete(n):
    return graph_from([(i, j) for i in range(n) for j in range(i + 1, n)])


def monotone_images(s):
    """Strictly increasing transforms of ``s`` that keep every pairwise order
    (ties included) intact in floating point."""
    s = np.asarray(s, dtype=float)
    sign = np.sign(np.subtract.outer(s, s))
    out = []
    for t in (np.exp(s / 1e3) * 5 + 2, np.arctan(s), s ** 3, 2.0 * s + 1):
        if np.array_equal(np.sign(np.subtract.outer(t, t)), sign):
            out.append(t)
    return out


# -- Ward fixtures ------------------------------------------------------------

def corr_from_dist(d):
    return 1.0 - np.asarray(d, dtype=float)


def _dist(n, pairs, default=1.0):
    d = np.full((n, n), default)
    np.fill_diagonal(d, 0.0)
    for (a, b), v in pairs.items():
        d[a, b] = d[b, a] = v
    return d


FOUR = _dist(4, {(0, 1): 0.1, (2, 3): 0.1, (0, 2): 0.9, (0, 3): 1.0, (1, 2): 1.0, (1, 3): 1.1})
SIX_A = _dist(6, {(0, 1): 0.2, (2, 3): 0.4, (4, 5): 0.6})
SIX_B = _dist(6, {(0, 3): 0.1, (1, 4): 0.1, (2, 3): 0.4})

# merges traced by hand with the Ward Lance-Williams update
HAND_TRACES = {
    "four": (FOUR, [(0, 1, 0.1, 2), (2, 3, 0.1, 2), (4, 5, 1.9, 4)], [0, 1, 2, 3]),
    "six_a": (SIX_A, [(0, 1, 0.2, 2), (2, 3, 0.4, 2), (4, 5, 0.6, 2), (7, 8, 1.5, 4),
                      (6, 9, 1.7, 6)], [0, 1, 2, 3, 4, 5]),
    "six_b": (SIX_B, [(0, 3, 0.1, 2), (1, 4, 0.1, 2), (2, 6, 0.9, 3), (5, 8, 1.25, 4),
                      (7, 9, 1.85, 6)], [0, 3, 2, 5, 1, 4]),
}
