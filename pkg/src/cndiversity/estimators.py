"""scikit-learn style wrappers around the pipeline stages.

Transformers take a list of :class:`~cndiversity.graph.Graph` objects as
``X`` and return one row per graph. The clustering estimator takes a profile
matrix (one row per network) and the regressor takes a plain design matrix.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from .canon import build_catalog
from .census import CensusMode, run_census
from .graph import Graph
from .inference import FEATURES, ols_fit
from .signature import build_signature
from .superfamily import (DISTANCES, PROFILE_KINDS, correlation_matrix, flat_clusters,
                          impute_correlations, baseline_profile, ward_cluster)


def _check_graphs(X):
    graphs = list(X) if not isinstance(X, Graph) else [X]
    bad = [type(g).__name__ for g in graphs if not isinstance(g, Graph)]
    if bad:
        raise TypeError(f"expected Graph objects, got {bad[0]}")
    if not graphs:
        raise ValueError("need at least one graph")
    return graphs


class DiversitySignatureTransformer(TransformerMixin, BaseEstimator):
    """Map each graph to its relative link-existence rates over classes of
    size ``k_min..k_max``. Classes with no pairs come out as NaN.

    Stateless: ``fit`` only records the class layout.
    """

    def __init__(self, k_min=2, k_max=4, mode="exact", rate=1.0, seed=None,
                 confidence=0.95, n_jobs=None):
        self.k_min = k_min
        self.k_max = k_max
        self.mode = mode
        self.rate = rate
        self.seed = seed
        self.confidence = confidence
        self.n_jobs = n_jobs

    def _census_mode(self):
        if self.mode == "exact":
            return CensusMode.exact()
        if self.mode == "node_sampled":
            return CensusMode.node_sampled(self.rate, self.seed)
        raise ValueError(f"unknown mode {self.mode!r}")

    def fit(self, X=None, y=None):
        self._census_mode()
        self.class_ids_ = np.array(build_catalog(self.k_max).ids_in_range(self.k_min, self.k_max))
        self.n_features_out_ = self.class_ids_.size
        return self

    def transform(self, X):
        check_is_fitted(self, "class_ids_")
        rows = []
        catalog = build_catalog(self.k_max)
        for g in _check_graphs(X):
            census = run_census(g, catalog, self._census_mode(), n_jobs=self.n_jobs)
            sig = build_signature(census, self.k_min, self.k_max, self.confidence)
            rows.append(sig.relative_rates)
        return np.vstack(rows)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "class_ids_")
        return np.array([f"class_{c}" for c in self.class_ids_], dtype=object)


class BaselineProfileTransformer(TransformerMixin, BaseEstimator):
    """One of the four comparison baselines per graph (see ``PROFILE_KINDS``)."""

    def __init__(self, kind="bag_of_degrees", cap=1024, n_jobs=None):
        self.kind = kind
        self.cap = cap
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        if self.kind not in PROFILE_KINDS[1:]:
            raise ValueError(f"unknown baseline kind {self.kind!r}")
        self.fitted_kind_ = self.kind
        return self

    def transform(self, X):
        check_is_fitted(self, "fitted_kind_")
        rows = []
        for g in _check_graphs(X):
            census = None
            if self.kind == "bag_of_cns":
                census = run_census(g, build_catalog(1), cap=1, n_jobs=self.n_jobs)
            rows.append(baseline_profile(g, census, self.kind, self.cap, self.n_jobs))
        return np.vstack(rows)


class SuperfamilyClustering(ClusterMixin, BaseEstimator):
    """Ward clustering of networks on the Pearson correlation of their profiles.

    ``X`` holds one profile per row and may contain NaN for undefined cells.
    Undefined correlations are imputed before clustering; ``n_imputed_``
    reports how many off-diagonal pairs needed it.
    """

    def __init__(self, n_clusters=4, distance="one_minus_r"):
        self.n_clusters = n_clusters
        self.distance = distance

    def fit(self, X, y=None):
        X = check_array(X, ensure_all_finite="allow-nan", ensure_min_samples=2)
        if self.distance not in DISTANCES:
            raise ValueError(f"unknown distance {self.distance!r}")
        if not 1 <= self.n_clusters <= X.shape[0]:
            raise ValueError(f"n_clusters must be in 1..{X.shape[0]}, got {self.n_clusters}")
        self.correlation_ = correlation_matrix(X)
        filled, self.n_imputed_ = impute_correlations(self.correlation_)
        self.dendrogram_ = ward_cluster(filled, self.distance)
        self.leaf_order_ = np.array(self.dendrogram_.leaf_order)
        self.labels_ = flat_clusters(self.dendrogram_, self.n_clusters)
        return self


class LinkRateRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of link rate on neighborhood features, with
    t-statistics. Pass ``sample_weight`` (e.g. pair counts) for weighted fits."""

    def __init__(self, feature_names=FEATURES):
        self.feature_names = feature_names

    def fit(self, X, y, sample_weight=None):
        X, y = validate_data(self, X, y, y_numeric=True)
        names = list(self.feature_names)
        if len(names) != X.shape[1]:
            names = [f"x{i}" for i in range(X.shape[1])]
        self.result_ = ols_fit(X, y, names, sample_weight)
        beta = self.result_.coef_vector()
        self.intercept_ = beta[0]
        self.coef_ = beta[1:]
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        X = validate_data(self, X, reset=False)
        return self.intercept_ + X @ self.coef_
