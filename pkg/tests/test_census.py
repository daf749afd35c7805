import itertools
import json

import numpy as np
import pytest

from cndiversity.canon import AdjMask, build_catalog
from cndiversity.census import (CensusMode, CensusTable, common_neighborhood, enumerate_pairs,
                                iter_pair_records, run_census)
from cndiversity.exceptions import CatalogMismatchError
from cndiversity.graph import Graph
from cndiversity.randgraph import GeneratorSpec, generate

import oracles
from fixtures import complete, cycle, graph_from, k4_minus_edge, mixed_graphs, star, triangle


@pytest.fixture(scope="module")
def catalog():
    return build_catalog(6)


def _class_id(catalog, k, edges):
    return catalog.classify(AdjMask.from_edges(k, edges))


class TestCommonNeighborhood:
    def test_k4_minus_edge_pairs(self):
        g = k4_minus_edge()
        c, mask = common_neighborhood(g, 0, 3)
        assert c == 2 and mask.edges() == [(0, 1)]
        c, mask = common_neighborhood(g, 1, 2)
        assert c == 2 and mask.bits == 0

    def test_star_center_leaf(self):
        assert common_neighborhood(star(4), 0, 1)[0] == 0

    def test_overflow(self):
        g = complete(9)
        c, mask = common_neighborhood(g, 0, 1, cap=6)
        assert c == 7 and mask is None

    def test_same_node(self):
        with pytest.raises(ValueError):
            common_neighborhood(triangle(), 1, 1)


class TestEnumeration:
    def test_cycle(self):
        pairs = sorted(enumerate_pairs(cycle(4)))
        assert pairs == [(0, 2), (1, 3)]

    def test_triangle(self):
        assert sorted(enumerate_pairs(triangle())) == [(0, 1), (0, 2), (1, 2)]

    def test_empty(self):
        g = Graph.from_edges(np.zeros(0, np.int64), np.zeros(0, np.int64), 5)
        assert list(enumerate_pairs(g)) == []

    def test_exact_matches_brute_force(self):
        for g in mixed_graphs(8, 80, seed=4):
            adj = oracles.adjacency_sets(g)
            want = [(i, j) for i, j in itertools.combinations(range(g.node_count), 2)
                    if adj[i] & adj[j]]
            got = list(enumerate_pairs(g, block=7))
            assert len(got) == len(set(got))
            assert sorted(got) == want

    def test_sampled_sources_get_all_partners(self):
        g = generate(GeneratorSpec.er(120, 0.08, 3))
        mode = CensusMode.node_sampled(0.3, 5)
        sources = set(mode.sources(g.node_count).tolist())
        adj = oracles.adjacency_sets(g)
        want = sorted((i, j) for i in sources for j in range(g.node_count)
                      if j != i and adj[i] & adj[j])
        assert sorted(enumerate_pairs(g, mode)) == want

    def test_records(self, catalog):
        g = k4_minus_edge()
        recs = list(iter_pair_records(g, cap=6, catalog=catalog))
        rows = {(int(i), int(j)): (int(c), int(k), bool(l)) for r in recs
                for i, j, c, k, l in zip(r["i"], r["j"], r["cn"], r["class_id"], r["linked"])}
        assert rows[(0, 3)] == (2, _class_id(catalog, 2, [(0, 1)]), False)
        assert rows[(1, 2)] == (2, _class_id(catalog, 2, []), True)


class TestCensus:
    def test_k4_minus_edge(self, catalog):
        t = run_census(k4_minus_edge(), catalog)
        assert t.bag_of_cn == {1: 4, 2: 2}
        connected = _class_id(catalog, 2, [(0, 1)])
        disconnected = _class_id(catalog, 2, [])
        assert (t.pair_count[connected], t.linked_count[connected]) == (1, 0)
        assert (t.pair_count[disconnected], t.linked_count[disconnected]) == (1, 1)

    def test_triangle(self, catalog):
        t = run_census(triangle(), catalog)
        assert t.bag_of_cn == {1: 3}
        assert (t.pair_count[0], t.linked_count[0]) == (3, 3)

    def test_oracle_equivalence(self, catalog):
        for g in mixed_graphs(15, 150, seed=21):
            t = run_census(g, catalog)
            pair, linked, bag = oracles.brute_census(g, catalog, 6)
            assert np.array_equal(t.pair_count, pair)
            assert np.array_equal(t.linked_count, linked)
            assert t.bag_of_cn == bag

    @pytest.mark.parametrize("cap", [1, 3, 4])
    def test_cap(self, cap):
        cat = build_catalog(cap)
        g = generate(GeneratorSpec.er(150, 0.1, 8))
        t = run_census(g, cat)
        pair, linked, bag = oracles.brute_census(g, cat, cap)
        assert np.array_equal(t.pair_count, pair) and t.bag_of_cn == bag
        assert t.max_k == cap

    def test_partition_identity(self, catalog):
        for g in mixed_graphs(6, 200, seed=2):
            t = run_census(g, catalog)
            assert np.all(t.linked_count <= t.pair_count)
            for k in range(1, 7):
                ids = catalog.ids_in_range(k, k)
                assert t.pair_count[ids].sum() == t.bag_of_cn.get(k, 0)

    def test_workers_do_not_matter(self, catalog):
        g = generate(GeneratorSpec.ba(400, 4, 1))
        base = run_census(g, catalog, n_jobs=1)
        for jobs in (2, 3, 8):
            assert run_census(g, catalog, n_jobs=jobs) == base

    def test_env_thread_override(self, catalog, monkeypatch):
        g = generate(GeneratorSpec.ws(300, 6, 0.4, 1))
        monkeypatch.setenv("CNDIVERSITY_THREADS", "4")
        assert run_census(g, catalog) == run_census(g, catalog, n_jobs=1)

    def test_relabeling(self, catalog):
        rng = np.random.default_rng(0)
        for g in mixed_graphs(5, 200, seed=31):
            h = g.permute(rng.permutation(g.node_count))
            assert run_census(g, catalog) == run_census(h, catalog)

    def test_edge_removal_never_adds_links(self, catalog):
        rng = np.random.default_rng(1)
        for g in mixed_graphs(5, 60, seed=12):
            e = g.edges()
            drop = rng.integers(e.shape[0])
            keep = np.delete(e, drop, axis=0)
            h = Graph.from_edges(keep[:, 0], keep[:, 1], g.node_count)
            assert run_census(h, catalog).linked_count.sum() <= \
                run_census(g, catalog).linked_count.sum()

    def test_sampled_mode(self, catalog):
        g = generate(GeneratorSpec.er(300, 0.05, 4))
        mode = CensusMode.node_sampled(0.25, 99)
        a = run_census(g, catalog, mode)
        assert a == run_census(g, catalog, mode, n_jobs=3)
        assert a.mode == mode
        # every sampled source counts each of its partners once: recount directly
        adj = oracles.adjacency_sets(g)
        src = mode.sources(g.node_count).tolist()
        expected = sum(1 for i in src for j in range(g.node_count) if j != i and adj[i] & adj[j])
        assert a.total_pairs == expected
        full = run_census(g, catalog, CensusMode.node_sampled(1.0, 3))
        assert full.total_pairs == 2 * run_census(g, catalog).total_pairs

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            CensusMode.node_sampled(0.0, 1)
        with pytest.raises(ValueError):
            CensusMode.node_sampled(1.5, 1)
        with pytest.raises(ValueError):
            CensusMode("node_sampled", 0.5, None)
        with pytest.raises(ValueError):
            CensusMode("bogus")

    def test_merge(self, catalog):
        g = generate(GeneratorSpec.er(100, 0.1, 2))
        t = run_census(g, catalog)
        both = t + t
        assert np.array_equal(both.pair_count, 2 * t.pair_count)
        assert both.bag_of_cn == {k: 2 * v for k, v in t.bag_of_cn.items()}
        with pytest.raises(CatalogMismatchError):
            t + run_census(g, build_catalog(4))


class TestPersistence:
    def test_round_trip(self, tmp_path, catalog):
        t = run_census(generate(GeneratorSpec.ba(200, 3, 5)), catalog)
        t.to_files(tmp_path / "x")
        assert CensusTable.from_files(tmp_path / "x") == t
        assert CensusTable.from_files(str(tmp_path / "x") + ".census.csv") == t
        meta = json.loads((tmp_path / "x.census.json").read_text())
        assert {"mode", "seed", "cap", "catalog_version", "bag_of_cn"} <= set(meta)

    def test_version_mismatch(self, tmp_path, catalog):
        t = run_census(triangle(), catalog)
        t.to_files(tmp_path / "x")
        meta = json.loads((tmp_path / "x.census.json").read_text())
        meta["catalog_version"] = "minmask-v0-bogus"
        (tmp_path / "x.census.json").write_text(json.dumps(meta))
        with pytest.raises(CatalogMismatchError):
            CensusTable.from_files(tmp_path / "x")
