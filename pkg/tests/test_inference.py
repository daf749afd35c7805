import itertools

import numpy as np
import pytest
import statsmodels.api as sm
from hypothesis import given, settings, strategies as st

from cndiversity.canon import build_catalog
from cndiversity.census import CensusTable, run_census
from cndiversity.exceptions import (DegenerateDatasetError, SingularDesignError,
                                    UndefinedBaselineError)
from cndiversity.inference import (FEATURES, InferenceDataset, average_precision,
                                   correlation_table, evaluate_predictors, fit_rows, ols_fit,
                                   precision_recall_curve, regression_rows, roc_auc,
                                   significance_stars, write_evaluation_csv,
                                   write_pr_curves_csv, write_regression_csv)
from cndiversity.randgraph import GeneratorSpec, generate

import oracles
from fixtures import monotone_images
from fixtures import k4_minus_edge


def _census(pairs, linked, max_k=6):
    cat = build_catalog(max_k)
    return CensusTable(np.asarray(pairs, dtype=np.int64), np.asarray(linked, dtype=np.int64),
                       np.zeros(1, dtype=np.int64), max_k, cat.version())


class TestMetrics:
    def test_perfect(self):
        assert roc_auc([1, 2, 3, 4], [0, 0, 1, 1]) == 1.0
        assert average_precision([1, 2, 3, 4], [0, 0, 1, 1]) == 1.0

    def test_all_tied(self):
        labels = [1, 0, 0, 1, 0]
        assert roc_auc([3] * 5, labels) == 0.5
        assert average_precision([3] * 5, labels) == pytest.approx(0.4)

    def test_four_points(self):
        s, y = [0.9, 0.8, 0.7, 0.6], [1, 0, 1, 0]
        assert roc_auc(s, y) == 0.75
        assert average_precision(s, y) == pytest.approx(oracles.brute_average_precision(s, y))
        assert average_precision(s, y) == pytest.approx((1.0 + 2 / 3) / 2)

    def test_random_against_oracles(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            n = int(rng.integers(2, 21))
            s = rng.integers(0, 6, size=n).astype(float)
            y = rng.integers(0, 2, size=n)
            if y.min() == y.max():
                continue
            w = rng.integers(1, 5, size=n).astype(float)
            assert abs(roc_auc(s, y) - oracles.brute_auroc(s, y)) <= 1e-12
            assert abs(average_precision(s, y) - oracles.brute_average_precision(s, y)) <= 1e-12
            assert abs(roc_auc(s, y, w) - oracles.brute_auroc(s, y, w)) <= 1e-12
            assert abs(average_precision(s, y, w)
                       - oracles.brute_average_precision(s, y, w)) <= 1e-12

    def test_weights_equal_repetition(self):
        s = np.array([0.1, 0.4, 0.4, 0.9])
        y = np.array([0, 1, 0, 1])
        w = np.array([3, 2, 1, 4])
        rs, ry = np.repeat(s, w), np.repeat(y, w)
        assert roc_auc(s, y, w) == pytest.approx(roc_auc(rs, ry), abs=1e-15)
        assert average_precision(s, y, w) == pytest.approx(average_precision(rs, ry), abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=20, unique=True),
           st.data())
    def test_auroc_invariances(self, scores, data):
        labels = data.draw(st.lists(st.integers(0, 1), min_size=len(scores),
                                    max_size=len(scores)))
        if len(set(labels)) < 2:
            return
        s = np.array(scores)
        a = roc_auc(s, labels)
        assert abs(a + roc_auc(-s, labels) - 1.0) <= 1e-12
        for t in monotone_images(s):
            assert roc_auc(t, labels) == a

    def test_pr_curve_shape(self):
        rng = np.random.default_rng(2)
        s, y = rng.random(50), rng.integers(0, 2, 50)
        recall, precision, thr = precision_recall_curve(s, y)
        assert np.all(np.diff(recall) >= 0) and recall[-1] == 1.0
        assert np.all(np.diff(thr) < 0)
        assert np.all((precision >= 0) & (precision <= 1))

    def test_degenerate(self):
        with pytest.raises(DegenerateDatasetError):
            roc_auc([1, 2], [1, 1])
        with pytest.raises(DegenerateDatasetError):
            average_precision([1, 2], [0, 0])
        with pytest.raises(ValueError):
            roc_auc([1, 2, 3], [0, 1])


class TestOLS:
    def test_exact_line(self):
        x = np.arange(10.0)
        r = ols_fit(x, 2 + 3 * x, ["x"])
        assert r.coefficients["intercept"] == pytest.approx(2, abs=1e-9)
        assert r.coefficients["x"] == pytest.approx(3, abs=1e-9)
        assert r.adj_r2 == pytest.approx(1.0, abs=1e-9)

    def test_constant_response(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(12, 3))
        r = ols_fit(X, np.full(12, 4.0))
        assert np.allclose(r.coef_vector()[1:], 0, atol=1e-12)
        assert r.r2 == 0.0

    def test_hand_rows_against_pinv(self):
        X = np.array([[2, 0.0, 2], [3, 1 / 3, 2], [3, 2 / 3, 1], [4, 0.5, 1], [4, 1.0, 1],
                      [2, 1.0, 1]])
        y = np.array([1.0, 2.5, 3.0, 2.0, 6.0, 0.5])
        r = ols_fit(X, y)
        assert np.allclose(r.coef_vector(), oracles.pinv_ols(X, y), atol=1e-9, rtol=0)

    def test_matches_statsmodels(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(8, 60))
            X = rng.normal(size=(n, 3))
            y = X @ rng.normal(size=3) + rng.normal(size=n)
            w = rng.uniform(0.5, 3, size=n)
            for weights in (None, w):
                r = ols_fit(X, y, weights=weights)
                A = sm.add_constant(X)
                ref = (sm.OLS(y, A) if weights is None else sm.WLS(y, A, weights=w)).fit()
                assert np.allclose(r.coef_vector(), ref.params, atol=1e-9)
                assert np.allclose([r.std_errors[k] for k in r.names], ref.bse, atol=1e-9)
                assert np.allclose([r.p_values[k] for k in r.names], ref.pvalues, atol=1e-9)
                assert r.adj_r2 == pytest.approx(ref.rsquared_adj, abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_residuals_orthogonal(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(6, 40))
        X = rng.normal(size=(n, 3)) * rng.uniform(0.1, 10, size=3)
        y = rng.normal(size=n) * 5
        r = ols_fit(X, y)
        resid = y - r.predict(X)
        A = np.column_stack([np.ones(n), X])
        scale = np.abs(A).max() * np.abs(y).max() * n
        assert np.all(np.abs(A.T @ resid) <= 1e-8 * scale)
        assert r.adj_r2 <= 1.0
        assert all(0 <= p <= 1 for p in r.p_values.values())

    def test_singular(self):
        X = np.column_stack([np.arange(8.0), 2 * np.arange(8.0), np.ones(8)])
        with pytest.raises(SingularDesignError):
            ols_fit(X, np.arange(8.0))
        with pytest.raises(SingularDesignError):
            ols_fit(np.arange(4.0).reshape(2, 2), np.ones(2), ["a", "b"])

    def test_stars(self):
        assert [significance_stars(p) for p in (0.0001, 0.005, 0.03, 0.2, float("nan"))] == \
            ["***", "**", "*", "", ""]


class TestRows:
    def test_k4_minus_edge(self):
        rows = regression_rows(run_census(k4_minus_edge()), k_min=2, k_max=2)
        got = sorted(zip(rows.cn, rows.density, rows.components, rows.response))
        assert got == [(2, 0.0, 2, 1.0), (2, 1.0, 1, 0.0)]

    def test_full_coverage(self):
        rows = regression_rows(_census(np.full(208, 10), np.full(208, 2)))
        assert len(rows) == 207

    def test_range_two_only(self):
        g = generate(GeneratorSpec.er(300, 0.05, 2))
        assert len(regression_rows(run_census(g), k_min=2, k_max=2)) <= 2

    def test_response_kinds(self):
        c = run_census(generate(GeneratorSpec.ws(300, 8, 0.2, 1)))
        rel = regression_rows(c)
        raw = regression_rows(c, response="rate")
        base = c.linked_count[0] / c.pair_count[0]
        assert np.allclose(rel.response * base, raw.response)
        with pytest.raises(ValueError):
            regression_rows(c, response="odds")
        with pytest.raises(UndefinedBaselineError):
            regression_rows(_census(np.full(208, 10), np.zeros(208)))

    def test_weighted_fit(self):
        c = run_census(generate(GeneratorSpec.ws(400, 10, 0.3, 4)))
        rows = regression_rows(c)
        r = fit_rows(rows, FEATURES, weighted=True)
        ref = sm.WLS(rows.response, sm.add_constant(rows.design()), weights=rows.pair_count).fit()
        assert np.allclose(r.coef_vector(), ref.params, atol=1e-8)


class TestCorrelationTable:
    def _two_class_census(self, r_disconnected, r_connected):
        pairs = np.zeros(208, dtype=np.int64)
        linked = np.zeros(208, dtype=np.int64)
        pairs[:3] = 100
        linked[0] = 50
        linked[1] = int(100 * r_disconnected)
        linked[2] = int(100 * r_connected)
        return _census(pairs, linked)

    def test_two_points(self):
        t = correlation_table(self._two_class_census(0.8, 0.3), "density", 2, 2)
        assert t[2] == -1.0
        t = correlation_table(self._two_class_census(0.8, 0.3), "components", 2, 2)
        assert t[2] == 1.0

    def test_flat_rates_undefined(self):
        t = correlation_table(self._two_class_census(0.5, 0.5), "density", 2, 2)
        assert np.isnan(t[2])

    def test_increasing_with_density(self):
        cat = build_catalog(6)
        pairs = np.zeros(208, dtype=np.int64)
        linked = np.zeros(208, dtype=np.int64)
        pairs[0], linked[0] = 1000, 100
        for c in cat.classes_of_size(4):
            pairs[c.class_id] = 1000
            linked[c.class_id] = int(1000 * (0.05 + 0.9 * c.density))
        t = correlation_table(_census(pairs, linked), "density", 4, 4)
        ids = cat.ids_in_range(4, 4)
        x = [cat[i].density for i in ids]
        y = linked[ids] / pairs[ids] / 0.1
        assert t[4] == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12) and t[4] > 0

    def test_unknown_feature(self):
        with pytest.raises(ValueError):
            correlation_table(self._two_class_census(0.8, 0.3), "degree")


class TestDatasets:
    def test_positives_recount(self):
        g = generate(GeneratorSpec.ws(300, 8, 0.3, 2))
        ds = InferenceDataset.from_graph(g)
        adj = oracles.adjacency_sets(g)
        want_pairs = want_pos = 0
        for i, j in itertools.combinations(range(g.node_count), 2):
            if 2 <= len(adj[i] & adj[j]) <= 6:
                want_pairs += 1
                want_pos += j in adj[i]
        assert ds.n_pairs == want_pairs and ds.positives == want_pos

    def test_census_and_graph_agree(self):
        g = generate(GeneratorSpec.ws(400, 10, 0.2, 3))
        census = run_census(g)
        coeffs = fit_rows(regression_rows(census))
        agg = evaluate_predictors(None, InferenceDataset.from_census(census), coeffs)
        full = evaluate_predictors(None, InferenceDataset.from_graph(g), coeffs)
        for a, b in zip(agg, full):
            assert a.n_pairs == b.n_pairs
            assert a.auroc == pytest.approx(b.auroc, abs=1e-12)
            assert a.aupr == pytest.approx(b.aupr, abs=1e-12)

    def test_evaluate_from_graph(self):
        g = generate(GeneratorSpec.ws(300, 8, 0.2, 5))
        coeffs = {"intercept": 0.0, "cn": 1.0, "density": 0.0, "components": 0.0}
        hom, div = evaluate_predictors(g, None, coeffs)
        assert hom.auroc == pytest.approx(div.auroc, abs=1e-12)
        assert hom.predictor == "homophily" and div.coefficients == coeffs
        assert 0 <= hom.auroc <= 1

    def test_range_check(self):
        with pytest.raises(ValueError):
            InferenceDataset(np.array([1]), np.array([0.0]), np.array([1]), np.array([1]),
                             np.array([1]))

    def test_degenerate(self):
        census = _census(np.r_[10, np.zeros(207)], np.r_[5, np.zeros(207)])
        with pytest.raises(DegenerateDatasetError):
            evaluate_predictors(None, InferenceDataset.from_census(census),
                                {"intercept": 0, "cn": 1, "density": 0, "components": 0})


def test_writers(tmp_path):
    g = generate(GeneratorSpec.ws(300, 8, 0.2, 5))
    census = run_census(g)
    rows = regression_rows(census)
    div = fit_rows(rows)
    hom = fit_rows(rows, ("cn",))
    reports = evaluate_predictors(None, InferenceDataset.from_census(census), div)
    write_regression_csv(tmp_path / "r.csv", div, hom)
    write_evaluation_csv(tmp_path / "e.csv", reports)
    write_pr_curves_csv(tmp_path / "p.csv", reports)
    reg = (tmp_path / "r.csv").read_text().splitlines()
    assert reg[0].startswith("term,coefficient") and len(reg) == 1 + 4 + 3
    ev = (tmp_path / "e.csv").read_text().splitlines()
    assert ev[0] == "predictor,n_pairs,pct_positive,aupr,auroc" and len(ev) == 3
