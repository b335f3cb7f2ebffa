"""Decomposition tests: worked examples frozen from the brute-force
oracles, plus randomized equivalence and structural properties."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hcoreinit.hypergraph import (
    WeightedIncidenceGraph,
    brute_force_core,
    hcore_numbers,
    khypercore,
    whcore_numbers,
)

from oracles import fixed_point_by_enumeration, random_bipartite


def three_edge_graph():
    # Hyperedges e1={a,b}, e2={a,b,c}, e3={a,c,d} with unit weights;
    # vertices a..d are right nodes 0..3.
    edges = [
        (0, 0, 1.0),
        (0, 1, 1.0),
        (1, 0, 1.0),
        (1, 1, 1.0),
        (1, 2, 1.0),
        (2, 0, 1.0),
        (2, 2, 1.0),
        (2, 3, 1.0),
    ]
    return WeightedIncidenceGraph(edges, num_left=3, num_right=4)


class TestGraphStructure:
    def test_duplicate_pairs_merge_by_summing(self):
        g = WeightedIncidenceGraph([(0, 0, 1.0), (0, 0, 2.5)], num_left=1, num_right=1)
        assert list(g.edges()) == [(0, 0, 3.5)]

    def test_zero_weight_edges_are_dropped(self):
        g = WeightedIncidenceGraph(
            [(0, 0, 0.0), (0, 1, 1.0)], num_left=1, num_right=2
        )
        assert list(g.edges()) == [(0, 1, 1.0)]
        assert g.left_cardinality(0) == 1

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError, match="negative weight"):
            WeightedIncidenceGraph([(0, 0, -1.0)])

    def test_edge_to_unknown_node_rejected(self):
        with pytest.raises(ValueError, match="unknown right node"):
            WeightedIncidenceGraph([(0, 5, 1.0)], num_left=1, num_right=2)

    def test_degree_queries_consistent_with_edge_list(self):
        g = three_edge_graph()
        assert g.right_degree(0) == 3
        assert g.right_degree(0, weighted=True) == 3.0
        assert g.right_degree(3) == 1
        assert g.left_cardinality(1) == 3
        assert g.edge_count() == 8

    def test_isolated_nodes_survive_construction(self):
        g = WeightedIncidenceGraph([(0, 0, 1.0)], num_left=2, num_right=3)
        assert g.left_ids == (0, 1)
        assert g.right_ids == (0, 1, 2)
        assert g.right_degree(2) == 0


class TestKHypercore:
    def test_spec_example_k2(self):
        g = three_edge_graph()
        sub = khypercore(g, k=2, l=2)
        # Oracle cross-check, then the frozen expectation.
        assert (list(sub.left_ids), list(sub.right_ids)) == fixed_point_by_enumeration(g, 2, 2)
        assert sub.right_ids == (0, 1, 2)
        assert sub.left_ids == (0, 1, 2)
        assert (2, 3, 1.0) not in list(sub.edges())
        assert sub.edge_count() == 7

    def test_k0_l1_removes_only_empty_hyperedges(self):
        g = WeightedIncidenceGraph([(0, 0, 1.0)], num_left=3, num_right=2)
        sub = khypercore(g, k=0, l=1)
        assert sub.left_ids == (0,)
        assert sub.right_ids == (0, 1)
        assert list(sub.edges()) == [(0, 0, 1.0)]

    def test_k3_empty(self):
        sub = khypercore(three_edge_graph(), k=3, l=2)
        assert sub.right_ids == ()
        assert sub.left_ids == ()

    def test_invalid_arguments(self):
        g = three_edge_graph()
        with pytest.raises(ValueError, match="l must be an integer >= 1"):
            khypercore(g, k=1, l=0)
        with pytest.raises(ValueError, match="l must be an integer >= 1"):
            khypercore(g, k=1, l=2.0)
        with pytest.raises(ValueError, match="k must be >= 0"):
            khypercore(g, k=-0.5, l=2)

    @pytest.mark.parametrize("weighted", [False, True])
    def test_matches_enumeration_on_random_graphs(self, weighted):
        rng = np.random.default_rng(7101)
        for _ in range(60):
            g = random_bipartite(rng, max_left=5, max_right=7, weighted=weighted)
            # Continuous thresholds never coincide with attainable degrees,
            # so exact and tolerant membership agree.
            ks = rng.uniform(0.0, 6.0, size=3)
            for k in ks:
                sub = khypercore(g, float(k), l=2, weighted=weighted)
                expect = fixed_point_by_enumeration(g, float(k), 2, weighted=weighted)
                assert (list(sub.left_ids), list(sub.right_ids)) == expect

    def test_fixed_point_degrees_hold_on_returned_subgraph(self):
        rng = np.random.default_rng(88)
        for _ in range(50):
            g = random_bipartite(rng, weighted=True)
            k = float(rng.uniform(0, 4))
            sub = khypercore(g, k, l=2, weighted=True)
            for x in sub.left_ids:
                assert sub.left_cardinality(x) >= 2
            for r in sub.right_ids:
                assert sub.right_degree(r, weighted=True) >= k

    def test_nesting(self):
        rng = np.random.default_rng(4242)
        for _ in range(40):
            g = random_bipartite(rng, weighted=True)
            k1, k2 = sorted(rng.uniform(0, 4, size=2))
            inner = khypercore(g, float(k2), l=2, weighted=True)
            outer = khypercore(g, float(k1), l=2, weighted=True)
            assert set(inner.right_ids) <= set(outer.right_ids)
            assert set(inner.left_ids) <= set(outer.left_ids)


class TestHcoreNumbers:
    def test_spec_example(self):
        cores = hcore_numbers(three_edge_graph())
        assert cores.as_dict() == {0: 2, 1: 2, 2: 2, 3: 1}

    def test_single_hyperedge_pair(self):
        g = WeightedIncidenceGraph([(0, 0, 1.0), (0, 1, 1.0)], num_left=1, num_right=2)
        assert hcore_numbers(g).as_dict() == {0: 1, 1: 1}

    def test_no_edges_all_zero(self):
        g = WeightedIncidenceGraph([], num_left=2, num_right=3)
        assert hcore_numbers(g).as_dict() == {0: 0, 1: 0, 2: 0}

    def test_membership_consistency_with_khypercore(self):
        rng = np.random.default_rng(99)
        for _ in range(40):
            g = random_bipartite(rng)
            cores = hcore_numbers(g)
            max_core = int(max(cores.values.values(), default=0))
            for k in range(0, max_core + 2):
                member = set(khypercore(g, k, l=2).right_ids)
                for r in g.right_ids:
                    assert (r in member) == (cores[r] >= k)


class TestWHcoreNumbers:
    def test_spec_example_collapsing_hyperedges(self):
        g = WeightedIncidenceGraph(
            [(0, 0, 0.5), (1, 0, 0.4), (0, 1, 0.3), (1, 1, 0.2)],
            num_left=2,
            num_right=2,
        )
        cores = whcore_numbers(g)
        assert cores[1] == pytest.approx(0.5, abs=1e-12)
        assert cores[0] == pytest.approx(0.5, abs=1e-12)

    def test_uniform_weights_scale_hcore(self):
        rng = np.random.default_rng(31)
        for w in (0.25, 1.0, 3.0):
            for _ in range(20):
                g = random_bipartite(rng)
                scaled = WeightedIncidenceGraph(
                    [(x, r, w) for x, r, _ in g.edges()],
                    num_left=len(g.left_ids),
                    num_right=len(g.right_ids),
                )
                hc = hcore_numbers(g)
                wc = whcore_numbers(scaled)
                for r in g.right_ids:
                    assert wc[r] == pytest.approx(w * hc[r], rel=1e-12, abs=1e-12)

    def test_single_right_node_is_zero(self):
        g = WeightedIncidenceGraph(
            [(0, 0, 5.0), (1, 0, 7.0)], num_left=2, num_right=1
        )
        assert whcore_numbers(g).as_dict() == {0: 0.0}

    def test_linear_weight_scaling(self):
        rng = np.random.default_rng(65)
        for _ in range(30):
            g = random_bipartite(rng, weighted=True)
            base = whcore_numbers(g)
            for alpha in (0.5, 2.0, 10.0):
                scaled = WeightedIncidenceGraph(
                    [(x, r, alpha * w) for x, r, w in g.edges()],
                    num_left=len(g.left_ids),
                    num_right=len(g.right_ids),
                )
                got = whcore_numbers(scaled)
                for r in g.right_ids:
                    assert got[r] == pytest.approx(alpha * base[r], rel=1e-9, abs=1e-9)

    def test_deterministic(self):
        rng = np.random.default_rng(12)
        g = random_bipartite(rng, weighted=True)
        first = whcore_numbers(g)
        for _ in range(3):
            assert whcore_numbers(g).values == first.values


class TestGeneralThresholds:
    def test_weighted_delegation(self):
        rng = np.random.default_rng(21)
        g = random_bipartite(rng, weighted=True)
        assert hcore_numbers(g, ignore_weights=False).values == whcore_numbers(g).values

    def test_l3_fixed_point_matches_enumeration(self):
        rng = np.random.default_rng(47)
        for _ in range(25):
            g = random_bipartite(rng, max_left=5, max_right=6)
            k = float(rng.uniform(0.0, 4.0))
            sub = khypercore(g, k, l=3)
            assert (list(sub.left_ids), list(sub.right_ids)) == fixed_point_by_enumeration(
                g, k, l=3
            )

    def test_l3_core_numbers_follow_membership(self):
        rng = np.random.default_rng(48)
        for _ in range(25):
            g = random_bipartite(rng, max_left=6, max_right=7)
            cores = hcore_numbers(g, l=3)
            max_core = int(max(cores.values.values(), default=0))
            for k in range(0, max_core + 2):
                member = set(khypercore(g, k, l=3).right_ids)
                for r in g.right_ids:
                    assert (r in member) == (cores[r] >= k)


@settings(max_examples=60, deadline=None)
@given(
    edges=st.lists(
        st.tuples(st.integers(0, 5), st.integers(0, 7), st.floats(0.01, 3.0)),
        max_size=30,
    ),
    k1=st.floats(0.0, 4.0),
    k2=st.floats(0.0, 4.0),
)
def test_property_nesting_and_determinism(edges, k1, k2):
    g = WeightedIncidenceGraph(edges, num_left=6, num_right=8)
    lo, hi = sorted((k1, k2))
    outer = khypercore(g, lo, l=2, weighted=True)
    inner = khypercore(g, hi, l=2, weighted=True)
    assert set(inner.right_ids) <= set(outer.right_ids)
    assert whcore_numbers(g).values == whcore_numbers(g).values
    for x in inner.left_ids:
        assert inner.left_cardinality(x) >= 2


class TestBruteForceOracle:
    def test_refuses_large_graphs(self):
        g = WeightedIncidenceGraph([], num_left=1, num_right=17)
        with pytest.raises(ValueError, match="refuses"):
            brute_force_core(g)

    def test_empty_graph(self):
        g = WeightedIncidenceGraph([], num_left=0, num_right=4)
        assert brute_force_core(g).as_dict() == {0: 0, 1: 0, 2: 0, 3: 0}

    def test_three_edge_example(self):
        cores = brute_force_core(three_edge_graph())
        assert cores.as_dict() == {0: 2, 1: 2, 2: 2, 3: 1}

    def test_unweighted_peeling_matches_oracle(self):
        rng = np.random.default_rng(2024)
        for _ in range(150):
            g = random_bipartite(rng)
            assert hcore_numbers(g).as_dict() == brute_force_core(g).as_dict()

    def test_weighted_peeling_matches_oracle(self):
        rng = np.random.default_rng(2025)
        for _ in range(150):
            g = random_bipartite(rng, weighted=True)
            got = whcore_numbers(g)
            want = brute_force_core(g, weighted=True)
            for r in g.right_ids:
                assert got[r] == pytest.approx(want[r], abs=1e-9)
