import itertools
import json
from fractions import Fraction

from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from hypothesis.extra.django import SimpleTestCase as HypothesisTestCase
from rest_framework.exceptions import ValidationError

from bench.stats import ols
from graphs.topology import ChimeraSpec, Graph, break_graph, generate_chimera, generate_er
from embedding.clique import (
    CapacityError, UnsupportedTargetError, acl_line, clique_acl, clique_embedding, preprocess,
)
from embedding.core import (
    Embedding, EmbeddingError, exact_valid_solution_fraction, metrics, valid_solution_fraction, validate,
)
from embedding.embedders import CliqueEmbedder, GreedyEmbedder, get_embedder
from embedding.greedy import GreedyParams, embed_probability, greedy_embed
from embedding.serializers import embedding_from_dict


def path(n):
    return Graph.from_edges([(i, i + 1) for i in range(n - 1)], range(n))


class ValidatorTests(SimpleTestCase):
    def setUp(self):
        self.edge = Graph.from_edges([(0, 1)])
        self.target = path(5)
        self.embedding = Embedding.from_chains({0: [0, 1, 2], 1: [3]})

    def test_single_edge_is_valid(self):
        report = validate(self.edge, Graph.from_edges([(0, 1)]), Embedding.from_chains({0: [0], 1: [1]}))
        self.assertTrue(report.valid)

    def test_triangle_on_a_path_misses_an_edge(self):
        report = validate(Graph.complete(3), path(3), Embedding.from_chains({0: [0], 1: [1], 2: [2]}))
        self.assertFalse(report.valid)
        self.assertEqual(report.missing_edges, [(0, 2)])
        self.assertEqual(report.connectivity_violations, [])
        self.assertEqual(report.overlap_pairs, [])

    # --- Feature: mutation classes are each flagged ---
    def test_dropping_an_interior_node_breaks_connectivity(self):
        self.assertTrue(validate(self.edge, self.target, self.embedding).valid)
        report = validate(self.edge, self.target, Embedding.from_chains({0: [0, 2], 1: [3]}))
        self.assertEqual(report.connectivity_violations, [0])
        self.assertEqual(report.overlap_pairs, [])
        self.assertEqual(report.missing_edges, [])

    def test_merging_chains_is_an_overlap(self):
        report = validate(self.edge, self.target, Embedding.from_chains({0: [0, 1, 2], 1: [2, 3]}))
        self.assertEqual(report.overlap_pairs, [(0, 1)])
        self.assertEqual(report.connectivity_violations, [])

    def test_deleting_the_covering_target_edge(self):
        target = Graph(self.target.node_ids, self.target.edges - {(2, 3)})
        report = validate(self.edge, target, self.embedding)
        self.assertEqual(report.missing_edges, [(0, 1)])
        self.assertEqual(report.connectivity_violations, [])

    def test_unembedded_source_node(self):
        report = validate(self.edge, self.target, Embedding.from_chains({0: [0]}))
        self.assertEqual(report.unembedded, [1])
        self.assertFalse(report.valid)

    def test_unknown_nodes_are_errors(self):
        with self.assertRaises(EmbeddingError):
            validate(self.edge, self.target, Embedding.from_chains({0: [0], 1: [1], 7: [2]}))
        with self.assertRaises(EmbeddingError):
            validate(self.edge, self.target, Embedding.from_chains({0: [0], 1: [99]}))

    def test_empty_chain_is_rejected(self):
        with self.assertRaises(EmbeddingError):
            Embedding.from_chains({0: []})


class MetricsTests(SimpleTestCase):
    def test_metrics_examples(self):
        result = metrics(Graph.from_edges([(0, 1)]), Embedding.from_chains({0: [1], 1: [2, 3]}))
        self.assertEqual(result.n_qubits, 3)
        self.assertEqual(result.acl, 1.5)
        self.assertEqual(result.max_chain, 2)
        self.assertEqual(result.chain_length_histogram, {1: 1, 2: 1})

    def test_identity_embedding_has_unit_acl(self):
        g = Graph.complete(4)
        self.assertEqual(metrics(g, Embedding.from_chains({i: [i] for i in range(4)})).acl, 1.0)

    def test_large_embedding_acl(self):
        h = Graph.from_edges([], range(150))
        chains = {i: range(19 * i, 19 * (i + 1)) for i in range(150)}
        result = metrics(h, Embedding.from_chains(chains))
        self.assertEqual(result.n_qubits, 2850)
        self.assertEqual(result.acl, 19.0)

    def test_domain_mismatch(self):
        with self.assertRaises(EmbeddingError):
            metrics(Graph.complete(3), Embedding.from_chains({0: [0]}))

    # --- Feature: share of unbroken embedded states ---
    def test_valid_solution_fraction_formula(self):
        self.assertEqual(valid_solution_fraction(7, 1.0), 1.0)
        self.assertEqual(valid_solution_fraction(2, 1.5), 0.5)
        with self.assertRaises(EmbeddingError):
            valid_solution_fraction(0, 1.0)

    def test_fraction_matches_enumeration(self):
        chains = {0: (0, 1), 1: (2,), 2: (3, 4)}
        qubits = [t for c in chains.values() for t in c]
        unbroken = sum(
            all(len({state[t] for t in chain}) == 1 for chain in chains.values())
            for state in (dict(zip(qubits, bits)) for bits in itertools.product((-1, 1), repeat=len(qubits)))
        )
        exact = exact_valid_solution_fraction(3, 5)
        self.assertEqual(Fraction(unbroken, 2 ** 5), exact)
        self.assertEqual(exact, Fraction(1, 4))
        self.assertEqual(valid_solution_fraction(3, 5 / 3), 0.25)


class UnbrokenFractionPropertyTests(HypothesisTestCase):
    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(1, 4), min_size=1, max_size=4).filter(lambda ls: sum(ls) <= 16))
    def test_enumeration_equals_formula(self, lengths):
        n, total = len(lengths), sum(lengths)
        # chain i owns consecutive qubits; a state is unbroken when each block is constant
        offsets = [sum(lengths[:i]) for i in range(n)]
        unbroken = 0
        for state in range(1 << total):
            bits = [(state >> q) & 1 for q in range(total)]
            if all(len(set(bits[o:o + k])) == 1 for o, k in zip(offsets, lengths)):
                unbroken += 1
        self.assertEqual(Fraction(unbroken, 1 << total), exact_valid_solution_fraction(n, total))
        self.assertAlmostEqual(unbroken / (1 << total), valid_solution_fraction(n, total / n), delta=1e-12)


class GreedyEmbedderTests(SimpleTestCase):
    def setUp(self):
        self.c1 = generate_chimera(ChimeraSpec(1))
        self.c2 = generate_chimera(ChimeraSpec(2))

    def test_identity_on_equal_cliques(self):
        outcome = greedy_embed(Graph.complete(4), Graph.complete(4), GreedyParams(seed=3))
        self.assertTrue(outcome.success)
        self.assertEqual(metrics(Graph.complete(4), outcome.embedding).acl, 1.0)

    def test_k5_does_not_fit_k4(self):
        outcome = greedy_embed(Graph.complete(5), Graph.complete(4))
        self.assertFalse(outcome.success)
        self.assertIsNone(outcome.embedding)

    def test_k5_into_one_chimera_cell(self):
        outcome = greedy_embed(Graph.complete(5), self.c1, GreedyParams(tries=8, seed=1))
        self.assertTrue(outcome.success)
        self.assertTrue(validate(Graph.complete(5), self.c1, outcome.embedding).valid)
        self.assertLessEqual(metrics(Graph.complete(5), outcome.embedding).n_qubits, 8)

    def test_same_seed_same_embedding(self):
        h = generate_er(10, 0.5, seed=2)
        first = greedy_embed(h, self.c2, GreedyParams(seed=5, max_passes=100))
        second = greedy_embed(h, self.c2, GreedyParams(seed=5, max_passes=100))
        self.assertEqual(first.success, second.success)
        self.assertEqual(first.embedding, second.embedding)

    def test_tries_keep_the_smallest_embedding(self):
        h = generate_er(10, 0.6, seed=4)
        single = greedy_embed(h, self.c2, GreedyParams(seed=9, max_passes=100))
        several = greedy_embed(h, self.c2, GreedyParams(seed=9, tries=3, max_passes=100))
        if single.success:
            self.assertTrue(several.success)
            self.assertLessEqual(metrics(h, several.embedding).n_qubits, metrics(h, single.embedding).n_qubits)

    def test_unreachable_target_component(self):
        target = Graph.from_edges([(0, 1), (2, 3)])
        outcome = greedy_embed(path(3), target)
        self.assertFalse(outcome.success)

    def test_timeout_discards_the_run(self):
        outcome = greedy_embed(generate_er(16, 0.5, seed=1), self.c2, GreedyParams(timeout=0.0))
        self.assertFalse(outcome.success)
        self.assertTrue(outcome.timed_out)
        self.assertIsNone(outcome.embedding)

    def test_zero_patience_stops_after_construction(self):
        outcome = greedy_embed(Graph.complete(4), Graph.complete(4), GreedyParams(chain_length_patience=0))
        self.assertTrue(outcome.success)
        self.assertEqual(outcome.passes_used, 0)

    def test_invalid_params(self):
        for kwargs in ({'tries': 0}, {'chain_length_patience': -1}, {'penalty_base': 1.0}, {'max_passes': -1}):
            with self.assertRaises(ValueError):
                GreedyParams(**kwargs)

    def test_empty_graphs_are_errors(self):
        with self.assertRaises(EmbeddingError):
            greedy_embed(Graph((), frozenset()), self.c1)

    # --- Feature: success probability ---
    def test_probability_examples(self):
        self.assertEqual(embed_probability(path(4), self.c1, GreedyParams(), trials=4), 1.0)
        self.assertEqual(embed_probability(Graph.complete(5), Graph.complete(4), trials=3), 0.0)
        self.assertEqual(embed_probability(generate_er(40, 0.9, seed=0), self.c2, trials=64), 0.0)

    # --- Feature: refinement escapes crowded layouts ---
    def test_dense_sources_fit_small_chimera_targets(self):
        c4 = generate_chimera(ChimeraSpec(4))
        cases = (
            (Graph.complete(7), self.c2, 8, 6),
            (Graph.complete(8), c4, 4, 3),
            (Graph.complete(12), c4, 4, 3),
            (generate_er(16, 0.5, seed=1), c4, 4, 3),
        )
        for h, g, seeds, wanted in cases:
            successes = 0
            for seed in range(seeds):
                outcome = greedy_embed(h, g, GreedyParams(seed=seed, chain_length_patience=2, max_passes=200))
                if outcome.success:
                    self.assertTrue(validate(h, g, outcome.embedding).valid)
                    successes += 1
            self.assertGreaterEqual(successes, wanted, (len(h), len(g)))

    def test_max_passes_bounds_a_hopeless_run(self):
        # K6 is not a minor of K_{4,4}: two contractions leave 14 edges
        for max_passes in (5, 25):
            outcome = greedy_embed(Graph.complete(6), self.c1, GreedyParams(seed=2, max_passes=max_passes))
            self.assertFalse(outcome.success)
            self.assertEqual(outcome.passes_used, max_passes)
            self.assertEqual(outcome.reason, 'chains still overlap')
            self.assertGreater(outcome.objective[0], 0)

    def test_longer_patience_continues_the_same_run(self):
        h = generate_er(10, 0.5, seed=6)
        outcomes = [
            greedy_embed(h, self.c2, GreedyParams(seed=2, chain_length_patience=k, max_passes=200))
            for k in (0, 2, 5)
        ]
        for shorter, longer in zip(outcomes, outcomes[1:]):
            self.assertLessEqual(shorter.passes_used, longer.passes_used)
            if shorter.success:
                self.assertTrue(longer.success)
                self.assertLessEqual(longer.objective, shorter.objective)


def assert_mutations_flagged(case, h, g, e):
    """Each mutation class (overlap, broken chain, missing coupler) must be reported."""
    case.assertTrue(validate(h, g, e).valid)
    if not h.edges:
        return
    u, v = h.sorted_edges[0]

    merged = dict(e.chains)
    merged[u] = tuple(sorted(set(e.chains[u]) | {e.chains[v][0]}))
    case.assertIn((u, v), validate(h, g, Embedding(merged)).overlap_pairs)

    chain = set(e.chains[u])
    far = [t for t in g.node_ids if t not in e.qubits and not chain.intersection(g.adjacency[t])]
    if far:
        split = dict(e.chains)
        split[u] = tuple(sorted(chain | {far[0]}))
        case.assertIn(u, validate(h, g, Embedding(split)).connectivity_violations)

    covering = {(min(s, t), max(s, t)) for s in e.chains[u] for t in e.chains[v] if g.has_edge(s, t)}
    pruned = Graph(g.node_ids, g.edges - covering)
    case.assertIn((u, v), validate(h, pruned, e).missing_edges)


class GreedyPropertyTests(HypothesisTestCase):
    @settings(max_examples=15, deadline=None)
    @given(st.integers(2, 9), st.floats(0.2, 0.9), st.integers(0, 10_000))
    def test_successful_embeddings_validate_and_mutations_are_flagged(self, n, p, seed):
        h = generate_er(n, p, seed)
        g = generate_chimera(ChimeraSpec(2))
        outcome = greedy_embed(h, g, GreedyParams(seed=seed, chain_length_patience=2, max_passes=100))
        if outcome.success:
            assert_mutations_flagged(self, h, g, outcome.embedding)


class CliquePropertyTests(HypothesisTestCase):
    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 3), st.data())
    def test_clique_embedding_covers_any_source_that_fits(self, m, data):
        g = generate_chimera(ChimeraSpec(m))
        n = data.draw(st.integers(1, 4 * m))
        h = generate_er(n, data.draw(st.floats(0.0, 1.0)), data.draw(st.integers(0, 10_000)))
        outcome = CliqueEmbedder().embed(h, g)
        self.assertTrue(outcome.success)
        self.assertEqual(sorted(outcome.embedding.chains), list(h.node_ids))
        assert_mutations_flagged(self, h, g, outcome.embedding)


class CliqueEmbedderTests(SimpleTestCase):
    def test_master_embeddings(self):
        for m, chain_length in ((1, 2), (2, 3), (4, 5)):
            cache = preprocess(generate_chimera(ChimeraSpec(m)))
            self.assertEqual(cache.max_clique_size, 4 * m)
            lengths = {len(c) for c in cache.master.chains.values()}
            self.assertEqual(lengths, {chain_length})
        self.assertEqual(len(preprocess(generate_chimera(ChimeraSpec(2))).master.qubits), 24)

    def test_every_clique_validates(self):
        for m in range(1, 5):
            g = generate_chimera(ChimeraSpec(m))
            cache = preprocess(g)
            for n in range(1, 4 * m + 1):
                e = clique_embedding(cache, n)
                self.assertTrue(validate(Graph.complete(n), g, e).valid, (m, n))
                self.assertEqual({len(c) for c in e.chains.values()}, {-(-n // 4) + 1})

    def test_retrieval_examples(self):
        cache = preprocess(generate_chimera(ChimeraSpec(3)))
        self.assertEqual(metrics(Graph.complete(4), clique_embedding(cache, 4)).acl, 2.0)
        self.assertEqual(metrics(Graph.complete(9), clique_embedding(cache, 9)).acl, 4.0)
        self.assertEqual(clique_acl(9), 4)
        with self.assertRaises(CapacityError):
            clique_embedding(cache, 13)
        with self.assertRaises(CapacityError):
            clique_embedding(cache, 0)

    def test_preprocessing_is_deterministic(self):
        g = generate_chimera(ChimeraSpec(3))
        self.assertEqual(preprocess(g).to_json(), preprocess(g).to_json())
        self.assertEqual(clique_embedding(preprocess(g), 7).to_json(), clique_embedding(preprocess(g), 7).to_json())

    def test_acl_grows_by_a_quarter_per_node(self):
        line = acl_line(preprocess(generate_chimera(ChimeraSpec(4))))
        self.assertEqual(len(line), 16)
        self.assertAlmostEqual(ols(line).slope, 0.25, delta=0.02)

    def test_non_chimera_targets(self):
        with self.assertRaises(UnsupportedTargetError):
            preprocess(Graph.complete(8))
        with self.assertRaises(UnsupportedTargetError):
            preprocess(break_graph(generate_chimera(ChimeraSpec(2)), 0.1, 0.0, seed=0))


class EmbedderInterfaceTests(SimpleTestCase):
    def test_clique_embedder_maps_source_nodes(self):
        g = generate_chimera(ChimeraSpec(2))
        h = generate_er(6, 0.5, seed=3).relabel({i: 10 + i for i in range(6)})
        outcome = CliqueEmbedder().embed(h, g)
        self.assertTrue(outcome.success)
        self.assertEqual(sorted(outcome.embedding.chains), list(h.node_ids))
        self.assertTrue(validate(h, g, outcome.embedding).valid)

    def test_clique_embedder_reports_failures(self):
        embedder = get_embedder('clique')
        self.assertFalse(embedder.embed(Graph.complete(9), generate_chimera(ChimeraSpec(2))).success)
        self.assertFalse(embedder.embed(Graph.complete(3), Graph.complete(8)).success)

    def test_greedy_embedder_uses_the_call_seed(self):
        embedder = get_embedder('greedy', chain_length_patience=1)
        self.assertIsInstance(embedder, GreedyEmbedder)
        h, g = generate_er(8, 0.5, seed=1), generate_chimera(ChimeraSpec(2))
        self.assertEqual(embedder.embed(h, g, 4).embedding, greedy_embed(h, g, GreedyParams(chain_length_patience=1, seed=4)).embedding)

    def test_unknown_embedder(self):
        with self.assertRaises(ValueError):
            get_embedder('layout')


class EmbeddingSerializerTests(SimpleTestCase):
    def test_round_trip(self):
        e = Embedding.from_chains({0: [5, 3], 2: [1]})
        self.assertEqual(embedding_from_dict(json.loads(e.to_json())), e)
        self.assertEqual(e.to_json(), '{"chains":{"0":[3,5],"2":[1]}}')

    def test_rejects_bad_documents(self):
        for data in ({'chains': {'0': []}}, {'chains': {'a': [1]}}, {'chains': {'0': [1, 1]}}, {}):
            with self.assertRaises(ValidationError):
                embedding_from_dict(data)
