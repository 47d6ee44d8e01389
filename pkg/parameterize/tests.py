import itertools

from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from hypothesis.extra.django import SimpleTestCase as HypothesisTestCase

from embedding.core import Embedding, EmbeddingError
from embedding.embedders import CliqueEmbedder, GreedyEmbedder
from embedding.greedy import GreedyParams, greedy_embed
from graphs.topology import ChimeraSpec, Graph, generate_chimera, generate_er
from ising.model import IsingModel, energy, random_ising
from ising.solvers import brute_force_min
from parameterize.chains import ChainStrengthSpec, embed_ising, unembed, utc_chain_strength
from parameterize.pipeline import solve_pipeline


def identity(g):
    return Embedding.from_chains({n: [n] for n in g.node_ids})


class ChainStrengthTests(SimpleTestCase):
    def test_utc_on_unit_couplings(self):
        g = Graph.complete(5)
        m = IsingModel(g, {n: 0.0 for n in g.node_ids}, {e: (-1.0) ** sum(e) for e in g.edges})
        self.assertAlmostEqual(utc_chain_strength(m, 1.414), 2.828, places=12)

    def test_utc_without_edges_is_the_prefactor(self):
        m = IsingModel(Graph.from_edges([], range(3)), {0: 0.1, 1: 0.2, 2: 0.3}, {})
        self.assertEqual(utc_chain_strength(m, 0.75), 0.75)

    def test_spec_modes(self):
        m = random_ising(Graph.complete(4), seed=2)
        self.assertEqual(ChainStrengthSpec(mode='fixed', fixed_value=3).resolve(m), 3.0)
        self.assertEqual(ChainStrengthSpec(prefactor=2.0).resolve(m), utc_chain_strength(m, 2.0))
        with self.assertRaises(ValueError):
            ChainStrengthSpec(prefactor=0.0)
        with self.assertRaises(ValueError):
            ChainStrengthSpec(mode='fixed')
        with self.assertRaises(ValueError):
            ChainStrengthSpec(mode='torque')


class EmbedIsingTests(SimpleTestCase):
    def test_identity_embedding_copies_the_model(self):
        m = random_ising(generate_er(6, 0.5, seed=1), seed=1)
        target = Graph.complete(6)
        embedded = embed_ising(m, identity(m.graph), target)
        self.assertEqual(embedded.model.h, m.h)
        self.assertEqual(embedded.model.J, m.J)
        self.assertEqual(embedded.intra_chain_couplers, 0)
        self.assertEqual(embedded.chain_offset, 0.0)

    def test_bias_and_coupling_are_split_uniformly(self):
        # a -> path 0-1-2, b -> 3; source edge carried by (2, 3) and (0, 3)
        target = Graph.from_edges([(0, 1), (1, 2), (2, 3), (0, 3)])
        m = IsingModel(Graph.from_edges([(0, 1)]), {0: 0.6, 1: -0.4}, {(0, 1): 0.5})
        e = Embedding.from_chains({0: [0, 1, 2], 1: [3]})
        embedded = embed_ising(m, e, target, ChainStrengthSpec(mode='fixed', fixed_value=2.0))
        for qubit in (0, 1, 2):
            self.assertAlmostEqual(embedded.model.h[qubit], 0.2)
        self.assertEqual(embedded.model.h[3], -0.4)
        self.assertEqual(embedded.model.J[(0, 3)], 0.25)
        self.assertEqual(embedded.model.J[(2, 3)], 0.25)
        self.assertEqual(embedded.model.J[(0, 1)], -2.0)
        self.assertEqual(embedded.model.J[(1, 2)], -2.0)
        self.assertEqual(embedded.intra_chain_couplers, 2)
        self.assertEqual(embedded.chain_offset, -4.0)

    def test_strong_chain_keeps_the_ground_state(self):
        m = IsingModel(Graph.from_edges([(0, 1)]), {0: 0.0, 1: 0.0}, {(0, 1): -1.0})
        target = Graph.from_edges([(0, 1), (1, 2)])
        e = Embedding.from_chains({0: [0, 1], 1: [2]})
        embedded = embed_ising(m, e, target, ChainStrengthSpec(mode='fixed', fixed_value=5.0))
        state, value = brute_force_min(embedded.model)
        self.assertEqual(state[0], state[1])
        self.assertAlmostEqual(value, -1.0 + embedded.chain_offset, delta=1e-12)
        result = unembed(state, e)
        self.assertEqual(result.chain_break_fraction, 0.0)
        self.assertEqual(result.assignment[0], result.assignment[1])
        self.assertEqual(energy(m, result.assignment), brute_force_min(m)[1])

    def test_invalid_embedding_is_refused(self):
        m = random_ising(Graph.complete(3), seed=0)
        path = Graph.from_edges([(0, 1), (1, 2)])
        with self.assertRaises(EmbeddingError):
            embed_ising(m, identity(m.graph), path)


class EnergyOffsetPropertyTests(HypothesisTestCase):
    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 5), st.floats(0.3, 1.0), st.integers(0, 10_000), st.floats(0.1, 3.0))
    def test_unbroken_states_differ_by_the_chain_offset(self, n, p, seed, strength):
        m = random_ising(generate_er(n, p, seed), seed)
        g = generate_chimera(ChimeraSpec(1))
        outcome = greedy_embed(m.graph, g, GreedyParams(seed=seed, max_passes=100))
        if not outcome.success or len(outcome.embedding.qubits) > 18:
            return
        embedded = embed_ising(m, outcome.embedding, g, ChainStrengthSpec(mode='fixed', fixed_value=strength))
        for spins in itertools.product((-1, 1), repeat=n):
            source_state = dict(zip(m.nodes, spins))
            target_state = {
                t: source_state[s] for s, chain in outcome.embedding.chains.items() for t in chain
            }
            difference = energy(embedded.model, target_state) - energy(m, source_state)
            self.assertAlmostEqual(difference, embedded.chain_offset, delta=1e-9)


class UnembedTests(SimpleTestCase):
    def test_majority_vote(self):
        e = Embedding.from_chains({0: [0, 1, 2]})
        result = unembed({0: 1, 1: 1, 2: -1}, e)
        self.assertEqual(result.assignment, {0: 1})
        self.assertEqual(result.broken_chains, frozenset({0}))
        self.assertEqual(result.chain_break_fraction, 1.0)

    def test_singletons_never_break(self):
        e = Embedding.from_chains({i: [i] for i in range(4)})
        result = unembed({0: 1, 1: -1, 2: -1, 3: 1}, e)
        self.assertEqual(result.chain_break_fraction, 0.0)
        self.assertEqual(result.assignment, {0: 1, 1: -1, 2: -1, 3: 1})

    def test_one_broken_chain_in_ten(self):
        e = Embedding.from_chains({i: [2 * i, 2 * i + 1] for i in range(10)})
        state = {q: 1 for q in range(20)}
        state[7] = -1
        result = unembed(state, e, seed=3)
        self.assertEqual(result.chain_break_fraction, 0.1)
        self.assertEqual(result.broken_chains, frozenset({3}))

    def test_ties_follow_the_seed(self):
        e = Embedding.from_chains({0: [0, 1]})
        first = unembed({0: 1, 1: -1}, e, seed=11)
        self.assertEqual(first.assignment, unembed({0: 1, 1: -1}, e, seed=11).assignment)
        outcomes = {unembed({0: 1, 1: -1}, e, seed=s).assignment[0] for s in range(40)}
        self.assertEqual(outcomes, {-1, 1})

    def test_missing_qubit(self):
        with self.assertRaises(EmbeddingError):
            unembed({0: 1}, Embedding.from_chains({0: [0, 1]}))


class PipelineTests(SimpleTestCase):
    def test_subgraph_source_never_breaks_chains(self):
        m = random_ising(Graph.complete(4), seed=5)
        result = solve_pipeline(
            m, Graph.complete(4), GreedyEmbedder(GreedyParams(chain_length_patience=1)),
            reads=1000, seed=2, sweeps=20,
        )
        self.assertTrue(result.success)
        self.assertEqual(result.metrics.acl, 1.0)
        self.assertEqual(len(result.source_energies), 1000)
        self.assertEqual(len(result.embedded_energies), 1000)
        self.assertEqual(set(result.chain_break_fractions), {0.0})
        # no chains, so embedded reads score exactly like their source states
        for embedded, source in zip(result.embedded_relative_errors, result.relative_errors):
            self.assertAlmostEqual(embedded, source, delta=1e-9)
        self.assertEqual(result.reads_csv().count("\n"), 1001)

    def test_tiny_problem_recovers_the_optimum(self):
        target = generate_chimera(ChimeraSpec(1))
        embedder = GreedyEmbedder(GreedyParams(tries=4, max_passes=200))
        hits = 0
        for seed in range(20):
            m = random_ising(generate_er(6, 0.4, seed=seed), seed=seed)
            result = solve_pipeline(
                m, target, embedder, ChainStrengthSpec(prefactor=1.0), reads=500, seed=seed, sweeps=200,
            )
            if result.success and abs(min(result.source_energies) - brute_force_min(m)[1]) < 1e-9:
                hits += 1
        self.assertGreaterEqual(hits, 18)

    def test_pipeline_is_deterministic(self):
        m = random_ising(generate_er(6, 0.6, seed=1), seed=1)
        target = generate_chimera(ChimeraSpec(2))
        run = lambda: solve_pipeline(m, target, CliqueEmbedder(), reads=30, seed=7, sweeps=30)
        first, second = run(), run()
        self.assertEqual(first.as_dict(timing=False), second.as_dict(timing=False))
        self.assertEqual(first.reads_csv(), second.reads_csv())

    def test_failed_embedding_stops_the_pipeline(self):
        m = random_ising(Graph.complete(9), seed=0)
        result = solve_pipeline(m, generate_chimera(ChimeraSpec(2)), CliqueEmbedder(), reads=10)
        self.assertFalse(result.success)
        self.assertEqual(result.summary, {})
        self.assertFalse(result.as_dict()['success'])
