"""Regression of link-existence rates on neighborhood features, and link inference.

Regression rows are per-class aggregates. The inference task scores each
candidate pair either by its common-neighbor count (homophily) or by a linear
combination of size, density and component count fitted on those aggregates
(diversity), and reports tie-aware AUROC, AUPR and the precision-recall curve.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .canon import GraphClassCatalog, build_catalog
from .census import CensusTable, iter_pair_records, run_census
from .exceptions import (DegenerateDatasetError, SingularDesignError,
                         UndefinedBaselineError, UndefinedCorrelationError)
from .graph import Graph
from .superfamily import pearson

FEATURES = ("cn", "density", "components")


@dataclass
class RegressionRows:
    class_id: np.ndarray
    cn: np.ndarray
    density: np.ndarray
    components: np.ndarray
    response: np.ndarray
    pair_count: np.ndarray
    response_kind: str = "relative_rate"

    def __len__(self):
        return self.class_id.size

    def design(self, features=FEATURES) -> np.ndarray:
        return np.column_stack([getattr(self, f).astype(float) for f in features])


def _class_rates(census: CensusTable, response: str):
    rates = np.full(census.pair_count.size, np.nan)
    seen = census.pair_count > 0
    rates[seen] = census.linked_count[seen] / census.pair_count[seen]
    if response == "rate":
        return rates
    if response != "relative_rate":
        raise ValueError(f"unknown response {response!r}")
    if census.pair_count[0] == 0 or census.linked_count[0] == 0:
        raise UndefinedBaselineError("relative rates need linked pairs with one common neighbor")
    return rates / (census.linked_count[0] / census.pair_count[0])


def regression_rows(census: CensusTable, catalog: GraphClassCatalog | None = None,
                    k_min: int = 2, k_max: int = 6, response: str = "relative_rate"
                    ) -> RegressionRows:
    """One row per observed class of size ``k_min..k_max``."""
    if census.max_k < k_max:
        raise ValueError(f"census covers sizes up to {census.max_k}, need {k_max}")
    catalog = catalog or build_catalog(census.max_k)
    values = _class_rates(census, response)
    ids = [cid for cid in catalog.ids_in_range(k_min, k_max) if census.pair_count[cid] > 0]
    if not ids:
        raise ValueError(f"no observed classes with sizes {k_min}..{k_max}")
    cls = [catalog[c] for c in ids]
    return RegressionRows(
        class_id=np.array(ids),
        cn=np.array([c.k for c in cls]),
        density=np.array([c.density for c in cls]),
        components=np.array([c.component_count for c in cls]),
        response=values[ids],
        pair_count=census.pair_count[ids].copy(),
        response_kind=response,
    )


def significance_stars(p: float) -> str:
    if not np.isfinite(p):
        return ""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass
class RegressionResult:
    names: list[str]
    coefficients: dict[str, float]
    std_errors: dict[str, float]
    t_values: dict[str, float]
    p_values: dict[str, float]
    r2: float
    adj_r2: float
    n_obs: int
    weighted: bool = False

    def coef_vector(self) -> np.ndarray:
        return np.array([self.coefficients[n] for n in self.names])

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        beta = self.coef_vector()
        return beta[0] + X @ beta[1:]


def ols_fit(X, y, names=FEATURES, weights=None) -> RegressionResult:
    """Least squares with intercept, solved through a QR factorisation.

    With ``weights`` the fit is weighted least squares. Standard errors use
    the residual variance with ``n - p - 1`` degrees of freedom; p-values are
    two-sided Student t.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.size:
        raise ValueError(f"{X.shape[0]} design rows for {y.size} responses")
    n, p = X.shape
    if len(names) != p:
        raise ValueError(f"{len(names)} names for {p} predictors")
    if n <= p + 1:
        raise SingularDesignError(f"{n} observations cannot fit {p + 1} coefficients")
    A = np.column_stack([np.ones(n), X])
    if weights is not None:
        sw = np.sqrt(np.asarray(weights, dtype=float))
        A_fit, y_fit = A * sw[:, None], y * sw
    else:
        sw = None
        A_fit, y_fit = A, y
    q, r = np.linalg.qr(A_fit)
    diag = np.abs(np.diag(r))
    if diag.min() <= diag.max() * max(A_fit.shape) * np.finfo(float).eps:
        raise SingularDesignError("design matrix is rank deficient")
    beta = np.linalg.solve(r, q.T @ y_fit)

    resid = y_fit - A_fit @ beta
    dof = n - p - 1
    sse = float(resid @ resid)
    if sw is None:
        centered = y - y.mean()
    else:
        w = sw ** 2
        centered = (y - (w @ y) / w.sum()) * sw
    sst = float(centered @ centered)
    r2 = 1.0 - sse / sst if sst > 0 else 0.0
    adj = 1.0 - (1.0 - r2) * (n - 1) / dof

    rinv = np.linalg.inv(r)
    cov = (sse / dof) * (rinv @ rinv.T)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / np.where(se > 0, se, 1.0),
                     np.where(beta == 0, 0.0, np.sign(beta) * np.inf))
    pvals = np.clip(2.0 * stats.t.sf(np.abs(t), dof), 0.0, 1.0)
    keys = ["intercept", *names]
    return RegressionResult(
        names=keys,
        coefficients=dict(zip(keys, map(float, beta))),
        std_errors=dict(zip(keys, map(float, se))),
        t_values=dict(zip(keys, map(float, t))),
        p_values=dict(zip(keys, map(float, pvals))),
        r2=float(r2),
        adj_r2=float(adj),
        n_obs=int(n),
        weighted=weights is not None,
    )


def fit_rows(rows: RegressionRows, features=FEATURES, weighted=False) -> RegressionResult:
    weights = rows.pair_count if weighted else None
    return ols_fit(rows.design(features), rows.response, list(features), weights)


def correlation_table(census: CensusTable, feature: str, k_min=2, k_max=6,
                      response="relative_rate", catalog=None) -> dict[int, float]:
    """Pearson r between the class response and ``feature`` within each size.

    With only two observed classes (always the case at size 2) the value is
    the sign of the two-point slope. Undefined correlations are NaN.
    """
    if feature not in ("density", "components"):
        raise ValueError(f"unknown feature {feature!r}")
    rows = regression_rows(census, catalog, k_min, k_max, response)
    out = {}
    for k in range(k_min, k_max + 1):
        sel = rows.cn == k
        x = getattr(rows, feature)[sel].astype(float)
        try:
            out[k] = pearson(x, rows.response[sel], min_cells=2)
        except UndefinedCorrelationError:
            out[k] = float("nan")
    return out


# -- link inference ---------------------------------------------------------

@dataclass
class InferenceDataset:
    """Candidate pairs as feature rows; ``weight`` counts identical pairs."""

    cn_count: np.ndarray
    density: np.ndarray
    components: np.ndarray
    label: np.ndarray
    weight: np.ndarray
    cn_range: tuple[int, int] = (2, 6)

    def __post_init__(self):
        self.label = np.asarray(self.label, dtype=np.int64)
        self.weight = np.asarray(self.weight, dtype=np.int64)
        lo, hi = self.cn_range
        if self.cn_count.size and (self.cn_count.min() < lo or self.cn_count.max() > hi):
            raise ValueError(f"cn_count outside configured range {self.cn_range}")

    @property
    def n_pairs(self) -> int:
        return int(self.weight.sum())

    @property
    def positives(self) -> int:
        return int((self.weight * self.label).sum())

    @property
    def positive_rate(self) -> float:
        return self.positives / self.n_pairs if self.n_pairs else float("nan")

    def features(self) -> np.ndarray:
        return np.column_stack([self.cn_count, self.density, self.components]).astype(float)

    @classmethod
    def from_census(cls, census: CensusTable, k_min=2, k_max=6, catalog=None):
        """Aggregated dataset: one weighted row per (class, label)."""
        if census.max_k < k_max:
            raise ValueError(f"census covers sizes up to {census.max_k}, need {k_max}")
        catalog = catalog or build_catalog(census.max_k)
        cols = {"cn": [], "d": [], "c": [], "y": [], "w": []}
        for cid in catalog.ids_in_range(k_min, k_max):
            c = catalog[cid]
            linked = int(census.linked_count[cid])
            unlinked = int(census.pair_count[cid]) - linked
            for y, w in ((1, linked), (0, unlinked)):
                if w:
                    cols["cn"].append(c.k)
                    cols["d"].append(c.density)
                    cols["c"].append(c.component_count)
                    cols["y"].append(y)
                    cols["w"].append(w)
        return cls(np.array(cols["cn"], dtype=np.int64), np.array(cols["d"], dtype=float),
                   np.array(cols["c"], dtype=np.int64), np.array(cols["y"]),
                   np.array(cols["w"]), (k_min, k_max))

    @classmethod
    def from_graph(cls, g: Graph, k_min=2, k_max=6, catalog=None):
        """One row per candidate pair, enumerated from ``g`` itself."""
        catalog = catalog or build_catalog(k_max)
        parts = {"cn": [], "cls": [], "y": []}
        for rec in iter_pair_records(g, cap=k_max, catalog=catalog):
            sel = (rec["cn"] >= k_min) & (rec["cn"] <= k_max)
            parts["cn"].append(rec["cn"][sel])
            parts["cls"].append(rec["class_id"][sel])
            parts["y"].append(rec["linked"][sel])
        cn = np.concatenate(parts["cn"]) if parts["cn"] else np.zeros(0, dtype=np.int64)
        cid = np.concatenate(parts["cls"]) if parts["cls"] else np.zeros(0, dtype=np.int64)
        y = np.concatenate(parts["y"]) if parts["y"] else np.zeros(0, dtype=bool)
        density = np.array([catalog[c].density for c in cid.tolist()], dtype=float)
        comps = np.array([catalog[c].component_count for c in cid.tolist()], dtype=np.int64)
        return cls(cn, density, comps, y.astype(np.int64), np.ones(cn.size, dtype=np.int64),
                   (k_min, k_max))


def _sweep(scores, labels, weights=None):
    """Cumulative weighted TP/FP at each distinct score, highest first."""
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel().astype(bool)
    w = np.ones(scores.size) if weights is None else np.asarray(weights, dtype=float).ravel()
    if not (scores.size == labels.size == w.size):
        raise ValueError("scores, labels and weights must align")
    order = np.argsort(-scores, kind="mergesort")
    s, y, w = scores[order], labels[order], w[order]
    last = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tp = np.cumsum(w * y)[last]
    fp = np.cumsum(w * ~y)[last]
    return s[last], tp, fp


def _check_labels(tp, fp):
    if tp.size == 0 or tp[-1] == 0 or fp[-1] == 0:
        raise DegenerateDatasetError("need at least one positive and one negative instance")


def roc_auc(scores, labels, weights=None) -> float:
    """Probability a positive outranks a negative, ties counting one half."""
    _, tp, fp = _sweep(scores, labels, weights)
    _check_labels(tp, fp)
    pos_g = np.diff(np.r_[0.0, tp])
    neg_g = np.diff(np.r_[0.0, fp])
    tp_before = tp - pos_g
    return float((neg_g * (tp_before + pos_g / 2.0)).sum() / (tp[-1] * fp[-1]))


def precision_recall_curve(scores, labels, weights=None):
    """(recall, precision, thresholds) at every distinct score, highest first."""
    thr, tp, fp = _sweep(scores, labels, weights)
    _check_labels(tp, fp)
    return tp / tp[-1], tp / (tp + fp), thr


def average_precision(scores, labels, weights=None) -> float:
    """Area under the precision-recall step curve: sum of recall gains times
    precision at each distinct threshold."""
    recall, precision, _ = precision_recall_curve(scores, labels, weights)
    return float((np.diff(np.r_[0.0, recall]) * precision).sum())


@dataclass
class EvalReport:
    predictor: str
    aupr: float
    auroc: float
    pr_curve: list[tuple[float, float]]
    n_pairs: int
    positive_rate: float
    coefficients: dict[str, float] = field(default_factory=dict)


def evaluate_scores(name, scores, dataset: InferenceDataset, coefficients=None) -> EvalReport:
    recall, precision, _ = precision_recall_curve(scores, dataset.label, dataset.weight)
    return EvalReport(
        predictor=name,
        aupr=average_precision(scores, dataset.label, dataset.weight),
        auroc=roc_auc(scores, dataset.label, dataset.weight),
        pr_curve=list(zip(recall.tolist(), precision.tolist())),
        n_pairs=dataset.n_pairs,
        positive_rate=dataset.positive_rate,
        coefficients=dict(coefficients or {}),
    )


def evaluate_predictors(g: Graph | None, dataset: InferenceDataset | None,
                        diversity_coeffs) -> tuple[EvalReport, EvalReport]:
    """Homophily (#CN) and diversity (fitted linear score) reports.

    ``diversity_coeffs`` is a :class:`RegressionResult` or a mapping with keys
    ``intercept, cn, density, components``. When ``dataset`` is None it is
    built from an exact census of ``g``.
    """
    if dataset is None:
        if g is None:
            raise ValueError("need a graph or a dataset")
        dataset = InferenceDataset.from_census(run_census(g))
    if dataset.n_pairs == 0:
        raise DegenerateDatasetError("empty inference dataset")
    if isinstance(diversity_coeffs, RegressionResult):
        coeffs = diversity_coeffs.coefficients
    else:
        coeffs = dict(diversity_coeffs)
    beta = np.array([coeffs["intercept"], coeffs["cn"], coeffs["density"], coeffs["components"]])
    diversity = beta[0] + dataset.features() @ beta[1:]
    homophily = evaluate_scores("homophily", dataset.cn_count.astype(float), dataset)
    return homophily, evaluate_scores("diversity", diversity, dataset, coeffs)


# -- table writers ----------------------------------------------------------

def write_regression_csv(path, diversity: RegressionResult, homophily: RegressionResult | None):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["term", "coefficient", "std_error", "t_value", "p_value", "stars"])
        for name in diversity.names:
            p = diversity.p_values[name]
            writer.writerow([name, repr(diversity.coefficients[name]),
                             repr(diversity.std_errors[name]), repr(diversity.t_values[name]),
                             repr(p), significance_stars(p)])
        writer.writerow(["adj_r2_diversity", repr(diversity.adj_r2), "", "", "", ""])
        if homophily is not None:
            writer.writerow(["adj_r2_homophily", repr(homophily.adj_r2), "", "", "", ""])
        writer.writerow(["n_obs", diversity.n_obs, "", "", "", ""])


def write_evaluation_csv(path, reports):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["predictor", "n_pairs", "pct_positive", "aupr", "auroc"])
        for r in reports:
            writer.writerow([r.predictor, r.n_pairs, repr(100.0 * r.positive_rate),
                             repr(r.aupr), repr(r.auroc)])


def write_pr_curves_csv(path, reports):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["predictor", "point", "recall", "precision"])
        for r in reports:
            for i, (rec, prec) in enumerate(r.pr_curve):
                writer.writerow([r.predictor, i, repr(rec), repr(prec)])
