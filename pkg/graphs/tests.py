import math
import tempfile
from pathlib import Path

from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from hypothesis.extra.django import SimpleTestCase as HypothesisTestCase

from graphs.edgelist import EdgeListError, format_edge_list, load_edge_list, parse_edge_list, save_edge_list
from graphs.topology import (
    ChimeraSpec, Graph, GraphError, break_graph, chimera_node, fingerprint, generate_chimera, generate_er,
    generate_hardware_native, stats,
)


class GraphValueTests(SimpleTestCase):
    def test_from_edges_canonicalises_pairs(self):
        g = Graph.from_edges([(3, 1), (1, 3), (2, 0)])
        self.assertEqual(g.node_ids, (0, 1, 2, 3))
        self.assertEqual(g.sorted_edges, ((0, 2), (1, 3)))

    def test_self_loop_is_rejected(self):
        with self.assertRaises(GraphError):
            Graph.from_edges([(2, 2)])

    def test_non_canonical_edge_is_rejected(self):
        with self.assertRaises(GraphError):
            Graph((0, 1), frozenset({(1, 0)}))

    def test_subgraph_and_relabel(self):
        g = Graph.complete(4).subgraph([1, 2, 3])
        self.assertEqual(g.node_ids, (1, 2, 3))
        self.assertEqual(len(g.edges), 3)
        relabelled = g.relabel({1: 0, 2: 1, 3: 2})
        self.assertEqual(relabelled, Graph.complete(3))


class ChimeraTests(SimpleTestCase):
    # --- Feature: ideal Chimera counts ---
    def test_c1_is_a_single_cell(self):
        g = generate_chimera(ChimeraSpec(1))
        self.assertEqual(len(g.node_ids), 8)
        self.assertEqual(len(g.edges), 16)

    def test_c2_counts(self):
        g = generate_chimera(ChimeraSpec(2))
        self.assertEqual(len(g.node_ids), 32)
        self.assertEqual(len(g.edges), 80)

    def test_edge_count_formula(self):
        for m in range(1, 6):
            g = generate_chimera(ChimeraSpec(m))
            self.assertEqual(len(g.edges), 16 * m * m + 8 * m * (m - 1))

    def test_interior_degree_is_six(self):
        g = generate_chimera(ChimeraSpec(3))
        for side in (0, 1):
            for k in range(4):
                self.assertEqual(g.degree(chimera_node(3, 1, 1, side, k)), 6)
        self.assertEqual(stats(g).max_degree, 6)

    def test_bipartite_cell_structure(self):
        g = generate_chimera(ChimeraSpec(2))
        horizontal = [chimera_node(2, 0, 0, 0, k) for k in range(4)]
        vertical = [chimera_node(2, 0, 0, 1, k) for k in range(4)]
        for u in horizontal:
            for v in vertical:
                self.assertTrue(g.has_edge(u, v))
        self.assertFalse(g.has_edge(horizontal[0], horizontal[1]))
        # horizontal qubits couple along the row, vertical ones along the column
        self.assertTrue(g.has_edge(chimera_node(2, 0, 0, 0, 2), chimera_node(2, 0, 1, 0, 2)))
        self.assertTrue(g.has_edge(chimera_node(2, 0, 0, 1, 2), chimera_node(2, 1, 0, 1, 2)))
        self.assertFalse(g.has_edge(chimera_node(2, 0, 0, 0, 2), chimera_node(2, 1, 0, 0, 2)))

    def test_invalid_dimension(self):
        with self.assertRaises(GraphError):
            generate_chimera(ChimeraSpec(0))


class BreakGraphTests(SimpleTestCase):
    def setUp(self):
        self.c2 = generate_chimera(ChimeraSpec(2))

    def test_drop_counts_use_floor(self):
        broken = break_graph(self.c2, 0.1, 0.0, seed=7)
        self.assertEqual(len(broken.node_ids), 32 - math.floor(3.2))

    def test_edges_dropped_after_nodes(self):
        nodes_only = break_graph(self.c2, 0.1, 0.0, seed=7)
        both = break_graph(self.c2, 0.1, 0.25, seed=7)
        self.assertEqual(both.node_ids, nodes_only.node_ids)
        self.assertEqual(len(both.edges), len(nodes_only.edges) - math.floor(0.25 * len(nodes_only.edges)))
        self.assertTrue(both.edges <= nodes_only.edges)

    def test_zero_ratios_keep_the_graph(self):
        self.assertEqual(break_graph(self.c2, 0.0, 0.0, seed=1), self.c2)

    def test_same_seed_same_result(self):
        self.assertEqual(break_graph(self.c2, 0.2, 0.2, 3), break_graph(self.c2, 0.2, 0.2, 3))

    def test_ratio_out_of_range(self):
        with self.assertRaises(GraphError):
            break_graph(self.c2, 1.0, 0.0, seed=0)


class RandomGraphTests(SimpleTestCase):
    def test_er_extremes(self):
        self.assertEqual(len(generate_er(6, 0.0, seed=4).edges), 0)
        self.assertEqual(generate_er(5, 1.0, seed=4), Graph.complete(5))

    def test_er_keeps_every_node(self):
        g = generate_er(10, 0.0, seed=0)
        self.assertEqual(g.node_ids, tuple(range(10)))

    def test_er_is_seeded(self):
        self.assertEqual(generate_er(20, 0.3, seed=11), generate_er(20, 0.3, seed=11))
        self.assertNotEqual(generate_er(20, 0.3, seed=11), generate_er(20, 0.3, seed=12))

    def test_er_rejects_bad_parameters(self):
        with self.assertRaises(GraphError):
            generate_er(0, 0.5, seed=0)
        with self.assertRaises(GraphError):
            generate_er(5, 1.5, seed=0)

    def test_er_mean_density(self):
        densities = [stats(generate_er(100, 0.3, seed=seed)).density for seed in range(200)]
        self.assertTrue(0.27 <= sum(densities) / len(densities) <= 0.33)

    # --- Feature: hardware-native instances ---
    def test_hardware_native_is_an_induced_connected_subgraph(self):
        target = generate_chimera(ChimeraSpec(2))
        g, mapping = generate_hardware_native(target, 12, seed=5)
        self.assertEqual(g.node_ids, tuple(range(12)))
        self.assertTrue(g.nx_graph.number_of_nodes() == 12)
        for u, v in g.sorted_edges:
            self.assertTrue(target.has_edge(mapping[u], mapping[v]))
        chosen = sorted(mapping.values())
        self.assertEqual(len(g.edges), len(target.subgraph(chosen).edges))
        self.assertEqual([mapping[i] for i in range(12)], chosen)

    def test_hardware_native_too_large(self):
        with self.assertRaises(GraphError):
            generate_hardware_native(generate_chimera(ChimeraSpec(1)), 9, seed=0)

    def test_stats_and_fingerprint(self):
        s = stats(Graph.complete(4))
        self.assertEqual((s.n_nodes, s.n_edges, s.density, s.avg_degree, s.max_degree), (4, 6, 1.0, 3.0, 3))
        self.assertEqual(fingerprint(Graph.complete(4)), fingerprint(Graph.complete(4)))
        self.assertNotEqual(fingerprint(Graph.complete(4)), fingerprint(Graph.complete(5)))

    def test_stats_on_a_large_sparse_graph(self):
        n = 5600
        edges = [(i, (i + k) % n) for k in range(1, 8) for i in range(n)]
        edges += [(i, i + 8) for i in range(800)]
        s = stats(Graph.from_edges(edges, range(n)))
        self.assertEqual((s.n_nodes, s.n_edges), (5600, 40000))
        self.assertAlmostEqual(s.density, 0.0025, delta=1e-4)
        self.assertAlmostEqual(s.avg_degree, 80000 / 5600, places=9)


class EdgeListTests(SimpleTestCase):
    def test_parse_with_header_and_comments(self):
        g = parse_edge_list("# a path\nn 4\n0 1\n\n1 2\n")
        self.assertEqual(g.node_ids, (0, 1, 2, 3))
        self.assertEqual(g.sorted_edges, ((0, 1), (1, 2)))

    def test_round_trip_of_a_broken_target(self):
        broken = break_graph(generate_chimera(ChimeraSpec(2)), 0.25, 0.3, seed=2)
        self.assertEqual(parse_edge_list(format_edge_list(broken)), broken)

    def test_dense_graph_gets_a_header(self):
        text = format_edge_list(Graph.from_edges([(0, 1)], range(3)))
        self.assertTrue(text.startswith("n 3\n"))

    def test_self_loop_reports_the_line(self):
        with self.assertRaises(EdgeListError) as ctx:
            parse_edge_list("0 1\n2 2\n")
        self.assertEqual(ctx.exception.line_number, 2)

    def test_endpoint_beyond_declared_count(self):
        with self.assertRaises(EdgeListError) as ctx:
            parse_edge_list("n 3\n0 3\n")
        self.assertEqual(ctx.exception.line_number, 2)

    def test_malformed_lines(self):
        for text in ("0 1 2\n", "a b\n", "0 -1\n", "0 1\nn 4\n"):
            with self.assertRaises(EdgeListError):
                parse_edge_list(text)

    def test_non_ascii_digits_are_malformed(self):
        for text, line_number in (("0 1\n1 \u00b2\n", 2), ("n \u00b3\n", 1), ("\u0661 2\n", 1)):
            with self.assertRaises(EdgeListError) as ctx:
                parse_edge_list(text)
            self.assertEqual(ctx.exception.line_number, line_number)

    def test_file_round_trip(self):
        g = generate_er(9, 0.4, seed=3)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'g.txt'
            save_edge_list(g, path)
            self.assertEqual(load_edge_list(path), g)


class EdgeListPropertyTests(HypothesisTestCase):
    @settings(max_examples=50, deadline=None)
    @given(st.sets(st.tuples(st.integers(0, 30), st.integers(0, 30)).filter(lambda e: e[0] != e[1]), max_size=40),
           st.sets(st.integers(0, 40), max_size=5))
    def test_any_graph_round_trips(self, edges, isolated):
        g = Graph.from_edges(edges, isolated)
        self.assertEqual(parse_edge_list(format_edge_list(g)), g)
