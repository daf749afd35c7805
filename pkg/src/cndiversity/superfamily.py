"""Network comparison: profile vectors, Pearson correlation matrices, Ward clustering."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .census import CensusTable, cn_size_histogram
from .exceptions import UndefinedCorrelationError
from .graph import Graph, percentile_degree, triangles_per_node
from .signature import read_signature_csv

PROFILE_KINDS = ("diversity_signature", "subgraph_frequency", "percentile_degrees",
                 "bag_of_degrees", "bag_of_cns")
SUBGRAPH_LABELS = ("path3", "triangle", "star4", "path4", "tailed_triangle", "cycle4",
                   "diamond", "clique4")
DISTANCES = ("one_minus_r", "half_one_minus_r")


@dataclass
class ProfileMatrix:
    network_names: list[str]
    vectors: np.ndarray
    kind: str = "diversity_signature"
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if self.vectors.shape[0] != len(self.network_names):
            raise ValueError("one vector per network is required")

    @classmethod
    def from_directory(cls, directory, pattern="*.csv"):
        """Load every signature or profile CSV in ``directory`` (sorted by name)."""
        paths = sorted(Path(directory).glob(pattern))
        if not paths:
            raise FileNotFoundError(f"no profile files matching {pattern} in {directory}")
        names, vectors, kinds = [], [], set()
        for p in paths:
            kind, vec = read_profile_csv(p)
            names.append(_network_name(p))
            vectors.append(vec)
            kinds.add(kind)
        if len(kinds) != 1:
            raise ValueError(f"mixed profile kinds in {directory}: {sorted(kinds)}")
        lengths = {v.size for v in vectors}
        if len(lengths) != 1:
            raise ValueError(f"profiles have different lengths: {sorted(lengths)}")
        return cls(names, np.vstack(vectors), kinds.pop())


def _network_name(path: Path) -> str:
    name = path.name
    for suffix in (".signature.csv", ".profile.csv", ".csv"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


def read_profile_csv(path):
    """Return ``(kind, vector)`` for a signature CSV or a baseline profile CSV."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    if "relative_rate" in header:
        return "diversity_signature", read_signature_csv(path)[1]
    kinds, values = set(), []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kinds.add(row["kind"])
            values.append(float(row["value"]) if row["value"] != "" else np.nan)
    if len(kinds) != 1:
        raise ValueError(f"{path}: expected a single profile kind")
    return kinds.pop(), np.array(values)


def write_profile_csv(path, kind, values, labels=None):
    labels = labels or [str(i) for i in range(len(values))]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["kind", "index", "label", "value"])
        for i, (lab, v) in enumerate(zip(labels, values)):
            writer.writerow([kind, i, lab, "" if np.isnan(v) else repr(float(v))])


def pearson(x, y, min_cells=3) -> float:
    """Pearson r over the cells defined (non-NaN) in both vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("vectors must have the same length")
    keep = ~(np.isnan(x) | np.isnan(y))
    if keep.sum() < min_cells:
        raise UndefinedCorrelationError(
            f"only {int(keep.sum())} complete cells, need {min_cells}")
    xc = x[keep] - x[keep].mean()
    yc = y[keep] - y[keep].mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("zero variance after deletion")
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def correlation_matrix(profiles) -> np.ndarray:
    """Symmetric matrix of pairwise r; undefined pairs are NaN, diagonal is 1."""
    vectors = profiles.vectors if isinstance(profiles, ProfileMatrix) else np.asarray(profiles, float)
    n = vectors.shape[0]
    if n < 2:
        raise ValueError("need at least two networks")
    corr = np.eye(n)
    for a in range(n):
        for b in range(a + 1, n):
            try:
                r = pearson(vectors[a], vectors[b])
            except UndefinedCorrelationError:
                r = np.nan
            corr[a, b] = corr[b, a] = r
    return corr


def impute_correlations(corr) -> tuple[np.ndarray, int]:
    """Fill NaN cells with the mean of the two columns' defined entries.

    Averaging both column means keeps the matrix symmetric. Columns with no
    defined off-diagonal entry contribute 0. Returns the matrix and the
    number of imputed cells.
    """
    corr = np.array(corr, dtype=float)
    missing = np.isnan(corr)
    if not missing.any():
        return corr, 0
    off = corr.copy()
    np.fill_diagonal(off, np.nan)
    defined = ~np.isnan(off)
    sums = np.where(defined, off, 0.0).sum(axis=0)
    counts = defined.sum(axis=0)
    col_mean = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    fill = (col_mean[:, None] + col_mean[None, :]) / 2.0
    corr[missing] = fill[missing]
    return corr, int(missing.sum())


@dataclass
class Dendrogram:
    """Ward merge tree. Leaves are ``0..n-1``; merge ``t`` creates cluster ``n + t``."""

    merges: list[tuple[int, int, float, int]]
    leaf_order: list[int]
    n_leaves: int

    @property
    def heights(self) -> np.ndarray:
        return np.array([m[2] for m in self.merges])

    def to_linkage(self) -> np.ndarray:
        """scipy-style (n-1, 4) linkage array."""
        return np.array([[a, b, h, s] for a, b, h, s in self.merges], dtype=float)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["step", "cluster_a", "cluster_b", "height", "merged_size"])
            for t, (a, b, h, s) in enumerate(self.merges):
                writer.writerow([t, a, b, repr(h), s])


def correlation_distance(corr, kind="one_minus_r") -> np.ndarray:
    corr = np.asarray(corr, dtype=float)
    if kind == "one_minus_r":
        d = 1.0 - corr
    elif kind == "half_one_minus_r":
        d = (1.0 - corr) / 2.0
    else:
        raise ValueError(f"unknown distance {kind!r}")
    np.fill_diagonal(d, 0.0)
    return d


def ward_cluster(corr, distance="one_minus_r") -> Dendrogram:
    """Agglomerative Ward clustering on ``d = 1 - r`` (Lance-Williams updates).

    The update is applied to the dissimilarities directly,
    ``d(k, i+j) = ((n_i+n_k) d(k,i) + (n_j+n_k) d(k,j) - n_k d(i,j)) / (n_i+n_j+n_k)``,
    which is exact Ward when ``d`` is a squared Euclidean distance, as ``1 - r``
    is for standardised profiles. Ties go to the pair with the smallest
    cluster ids.
    """
    corr = np.asarray(corr, dtype=float)
    n = corr.shape[0]
    if n < 2:
        raise ValueError("Ward clustering needs at least two items")
    if corr.shape != (n, n):
        raise ValueError("correlation matrix must be square")
    if np.isnan(corr).any():
        raise ValueError("correlation matrix has missing cells; impute first")
    size_total = 2 * n - 1
    dist = np.full((size_total, size_total), np.inf)
    dist[:n, :n] = correlation_distance(corr, distance)
    sizes = np.zeros(size_total, dtype=np.int64)
    sizes[:n] = 1
    active = list(range(n))
    members: dict[int, list[int]] = {}
    children: dict[int, tuple[int, int]] = {}
    merges = []
    for step in range(n - 1):
        best = None
        for ai, a in enumerate(active):
            row = dist[a]
            for b in active[ai + 1:]:
                if best is None or row[b] < best[0]:
                    best = (row[b], a, b)
        h, a, b = best
        new = n + step
        na, nb = sizes[a], sizes[b]
        active.remove(a)
        active.remove(b)
        for k in active:
            nk = sizes[k]
            d = ((na + nk) * dist[a, k] + (nb + nk) * dist[b, k] - nk * dist[a, b]) / (na + nb + nk)
            dist[new, k] = dist[k, new] = d
        active.append(new)
        sizes[new] = na + nb
        children[new] = (a, b)
        merges.append((int(a), int(b), float(h), int(na + nb)))

    leaf_min = {i: i for i in range(n)}
    for new, (a, b) in children.items():
        leaf_min[new] = min(leaf_min[a], leaf_min[b])

    def order(node):
        stack, out = [node], []
        while stack:
            x = stack.pop()
            if x < n:
                out.append(x)
                continue
            a, b = sorted(children[x], key=leaf_min.__getitem__)
            stack.append(b)
            stack.append(a)
        return out

    return Dendrogram(merges, order(2 * n - 2), n)


def flat_clusters(dend: Dendrogram, k: int) -> np.ndarray:
    """Labels after applying the first ``n - k`` merges.

    Labels are numbered by first appearance along ``leaf_order``.
    """
    n = dend.n_leaves
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    owner = list(range(2 * n - 1))

    def find(x):
        while owner[x] != x:
            owner[x] = owner[owner[x]]
            x = owner[x]
        return x

    for t, (a, b, _, _) in enumerate(dend.merges[: n - k]):
        owner[find(a)] = n + t
        owner[find(b)] = n + t
    labels = np.empty(n, dtype=np.int64)
    seen: dict[int, int] = {}
    for leaf in dend.leaf_order:
        root = find(leaf)
        labels[leaf] = seen.setdefault(root, len(seen))
    return labels


# -- baseline profiles ------------------------------------------------------

def subgraph_counts(g: Graph, n_jobs=None) -> dict[str, int]:
    """Exact induced counts of connected 3- and 4-node subgraphs.

    Non-induced counts come from degree, triangle, common-neighbor and clique
    statistics; the induced counts follow by inverting the containment
    relations between the six connected 4-node shapes.
    """
    deg = g.degrees().astype(np.int64)
    tri_v = triangles_per_node(g, n_jobs)
    T = int(tri_v.sum() // 3)
    wedges = int((deg * (deg - 1) // 2).sum())
    e = g.edges()

    def task(sources):
        tp = np.zeros(1, dtype=np.int64)
        k4 = np.zeros(1, dtype=np.int64)
        _kernels.edge_triangles_and_cliques(g.indptr, g.indices, sources, tp, k4)
        return tp[0], k4[0]

    parts = _kernels.run_partitioned(task, np.arange(g.node_count), n_jobs)
    diamonds_ni = int(sum(p[0] for p in parts))
    k4 = int(sum(p[1] for p in parts))
    bag = cn_size_histogram(g, n_jobs)
    sizes = np.arange(bag.size, dtype=np.int64)
    c4_ni = int((bag * (sizes * (sizes - 1) // 2)).sum() // 2)
    star_ni = int((deg * (deg - 1) * (deg - 2) // 6).sum())
    path_ni = int(((deg[e[:, 0]] - 1) * (deg[e[:, 1]] - 1)).sum()) - 3 * T
    paw_ni = int((tri_v * (deg - 2)).sum())

    diamond = diamonds_ni - 6 * k4
    c4 = c4_ni - diamond - 3 * k4
    paw = paw_ni - 4 * diamond - 12 * k4
    star = star_ni - paw - 2 * diamond - 4 * k4
    path4 = path_ni - 2 * paw - 4 * c4 - 6 * diamond - 12 * k4
    return {"path3": wedges - 3 * T, "triangle": T, "star4": star, "path4": path4,
            "tailed_triangle": paw, "cycle4": c4, "diamond": diamond, "clique4": k4}


def _normalise(v):
    v = np.asarray(v, dtype=float)
    s = v.sum()
    return v / s if s > 0 else v


def log_bin_edges(cap=1024, linear_until=64):
    """Inclusive upper edges: 1..linear_until one per value, then doubling to ``cap``."""
    edges = list(range(1, linear_until + 1))
    top = linear_until
    while top < cap:
        top = min(top * 2, cap)
        edges.append(top)
    return np.array(edges, dtype=np.int64)


def binned_histogram(values, counts=None, cap=1024, linear_until=64):
    """Histogram of positive integer values on the shared log grid; values
    above ``cap`` land in the last bin and zeros are ignored."""
    edges = log_bin_edges(cap, linear_until)
    values = np.asarray(values, dtype=np.int64)
    counts = np.ones(values.size) if counts is None else np.asarray(counts, dtype=float)
    keep = values >= 1
    idx = np.minimum(np.searchsorted(edges, values[keep]), edges.size - 1)
    return np.bincount(idx, weights=counts[keep], minlength=edges.size)


def baseline_profile(g: Graph, census: CensusTable | None, kind: str, cap=1024,
                     n_jobs=None) -> np.ndarray:
    if kind == "subgraph_frequency":
        c = subgraph_counts(g, n_jobs)
        three = _normalise([c[k] for k in SUBGRAPH_LABELS[:2]])
        four = _normalise([c[k] for k in SUBGRAPH_LABELS[2:]])
        return np.concatenate([three, four])
    if kind == "percentile_degrees":
        sd = np.sort(g.degrees())
        return np.array([percentile_degree(sd, t) for t in range(11)], dtype=float)
    if kind == "bag_of_degrees":
        return _normalise(binned_histogram(g.degrees(), cap=cap))
    if kind == "bag_of_cns":
        if census is None:
            raise ValueError("bag_of_cns needs a census")
        sizes = np.arange(census.bag.size)
        return _normalise(binned_histogram(sizes, census.bag, cap=cap))
    raise ValueError(f"unknown baseline kind {kind!r}")


def profile_labels(kind, cap=1024):
    if kind == "subgraph_frequency":
        return list(SUBGRAPH_LABELS)
    if kind == "percentile_degrees":
        return [f"p{10 * t}" for t in range(11)]
    if kind in ("bag_of_degrees", "bag_of_cns"):
        edges = log_bin_edges(cap)
        lows = np.concatenate([[1], edges[:-1] + 1])
        return [f"{lo}" if lo == hi else f"{lo}-{hi}" for lo, hi in zip(lows, edges)]
    raise ValueError(f"unknown baseline kind {kind!r}")


# -- heatmap ----------------------------------------------------------------

def _diverging(r):
    if r is None or not np.isfinite(r):
        return "#bdbdbd"
    r = max(-1.0, min(1.0, float(r)))
    if r >= 0:
        lo, hi, t = (255, 255, 255), (178, 24, 43), r
    else:
        lo, hi, t = (255, 255, 255), (33, 102, 172), -r
    rgb = [round(a + (b - a) * t) for a, b in zip(lo, hi)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def heatmap_svg(corr, names, order=None, cell=14) -> str:
    """Standalone SVG of a correlation matrix on a fixed [-1, 1] diverging scale."""
    corr = np.asarray(corr, dtype=float)
    n = corr.shape[0]
    order = list(range(n)) if order is None else list(order)
    label_w = 8 * max((len(s) for s in names), default=1) + 10
    size = label_w + n * cell + 10
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'font-family="sans-serif" font-size="{cell - 4}">']
    for row, a in enumerate(order):
        y = label_w + row * cell
        parts.append(f'<text x="{label_w - 4}" y="{y + cell - 3}" text-anchor="end">'
                     f'{_escape(names[a])}</text>')
        x0 = label_w + row * cell + cell - 3
        parts.append(f'<text transform="translate({x0},{label_w - 4}) rotate(-90)">'
                     f'{_escape(names[a])}</text>')
        for col, b in enumerate(order):
            x = label_w + col * cell
            r = corr[a, b]
            title = "nan" if np.isnan(r) else f"{r:.3f}"
            parts.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                         f'fill="{_diverging(r)}"><title>{_escape(names[a])} / '
                         f'{_escape(names[b])}: {title}</title></rect>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
