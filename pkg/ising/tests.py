import itertools
import json

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from hypothesis.extra.django import SimpleTestCase as HypothesisTestCase
from rest_framework.exceptions import ValidationError

from graphs.topology import Graph, generate_er
from ising.model import IsingError, IsingModel, energy, random_ising
from ising.serializers import dump_ising, ising_from_dict, load_ising, model_fingerprint
from ising.solvers import (
    ModelTooLargeError, ReferenceBudget, brute_force_min, reference_energy, relative_error, simulated_annealing,
)
from minorbench.seeds import derive_seed


def single_node(bias):
    return IsingModel(Graph.from_edges([], [0]), {0: bias}, {})


def naive_minimum(m):
    """Independent re-enumeration over itertools.product."""
    return min(
        energy(m, dict(zip(m.nodes, spins)))
        for spins in itertools.product((-1, 1), repeat=len(m.nodes))
    )


class SeedTests(SimpleTestCase):
    def test_derived_seeds_are_stable_and_distinct(self):
        self.assertEqual(derive_seed(0, 8, 0.1, 0), derive_seed(0, 8, 0.1, 0))
        self.assertNotEqual(derive_seed(0, 8, 0.1, 0), derive_seed(0, 8, 0.1, 1))
        self.assertNotEqual(derive_seed(0, 8, 0.1), derive_seed(1, 8, 0.1))
        self.assertLess(derive_seed(3, 'x'), 2 ** 64)


class IsingModelTests(SimpleTestCase):
    # --- Feature: random instances ---
    def test_empty_graph_gives_empty_model(self):
        m = random_ising(Graph((), frozenset()), seed=3)
        self.assertEqual(m.h, {})
        self.assertEqual(m.J, {})

    def test_k3_coefficients_in_range(self):
        m = random_ising(Graph.complete(3), seed=1)
        self.assertEqual(len(m.h), 3)
        self.assertEqual(len(m.J), 3)
        for value in list(m.h.values()) + list(m.J.values()):
            self.assertTrue(-1.0 <= value <= 1.0)

    def test_seeds_give_different_models(self):
        self.assertNotEqual(random_ising(Graph.complete(10), 1).J, random_ising(Graph.complete(10), 2).J)
        self.assertEqual(random_ising(Graph.complete(10), 1).J, random_ising(Graph.complete(10), 1).J)

    def test_keys_must_match_the_graph(self):
        with self.assertRaises(IsingError):
            IsingModel(Graph.complete(2), {0: 1.0}, {(0, 1): 1.0})
        with self.assertRaises(IsingError):
            IsingModel(Graph.complete(2), {0: 1.0, 1: float('nan')}, {(0, 1): 1.0})

    # --- Feature: energy ---
    def test_energy_examples(self):
        self.assertEqual(energy(single_node(0.5), {0: 1}), 0.5)
        m = IsingModel(Graph.complete(2), {0: 0.0, 1: 0.0}, {(0, 1): -1.0})
        self.assertEqual(energy(m, {0: 1, 1: 1}), -1.0)

    def test_energy_matches_vectorised_energies(self):
        m = random_ising(Graph.complete(4), seed=9)
        states = list(itertools.product((-1, 1), repeat=4))
        vectorised = m.energies(np.array(states))
        for state, value in zip(states, vectorised):
            resummed = sum(m.h[i] * state[i] for i in range(4)) + sum(
                w * state[u] * state[v] for (u, v), w in m.J.items()
            )
            self.assertAlmostEqual(energy(m, dict(enumerate(state))), resummed, delta=1e-12)
            self.assertAlmostEqual(float(value), resummed, delta=1e-12)

    def test_missing_node_is_an_error(self):
        with self.assertRaises(IsingError):
            energy(random_ising(Graph.complete(3), 0), {0: 1, 1: -1})


class BruteForceTests(SimpleTestCase):
    def test_uniform_positive_bias(self):
        n = 5
        m = IsingModel(Graph.from_edges([], range(n)), {i: 1.0 for i in range(n)}, {})
        assignment, value = brute_force_min(m)
        self.assertEqual(value, -n)
        self.assertEqual(set(assignment.values()), {-1})

    def test_antiferromagnetic_edge(self):
        m = IsingModel(Graph.complete(2), {0: 0.0, 1: 0.0}, {(0, 1): 2.0})
        assignment, value = brute_force_min(m)
        self.assertEqual(value, -2.0)
        self.assertEqual(assignment[0], -assignment[1])
        # ties go to the lexicographically first state
        self.assertEqual(assignment, {0: -1, 1: 1})

    def test_k10_matches_independent_enumeration(self):
        m = random_ising(Graph.complete(10), seed=21)
        assignment, value = brute_force_min(m)
        self.assertAlmostEqual(value, naive_minimum(m), delta=1e-9)
        self.assertAlmostEqual(energy(m, assignment), value, delta=1e-9)

    def test_limit(self):
        with self.assertRaises(ModelTooLargeError):
            brute_force_min(random_ising(generate_er(8, 0.5, 0), 0), limit=6)


class AnnealingTests(SimpleTestCase):
    def test_single_node_finds_its_ground_state(self):
        sample = simulated_annealing(single_node(-1.0), reads=1000, sweeps=20, seed=4)
        self.assertEqual(sample.num_reads, 1000)
        frequency = float(np.mean(sample.records[:, 0] == 1))
        self.assertGreaterEqual(frequency, 0.99)

    def test_energies_match_records(self):
        m = random_ising(generate_er(12, 0.5, seed=2), seed=2)
        sample = simulated_annealing(m, reads=8, sweeps=50, seed=1)
        for assignment, value in zip(sample.assignments, sample.energies):
            self.assertAlmostEqual(energy(m, assignment), float(value), delta=1e-9)

    def test_reads_do_not_depend_on_batch_size(self):
        m = random_ising(generate_er(10, 0.5, seed=5), seed=5)
        few = simulated_annealing(m, reads=3, sweeps=70, seed=8)
        many = simulated_annealing(m, reads=6, sweeps=70, seed=8)
        np.testing.assert_array_equal(few.records, many.records[:3])

    def test_best_of_100_reads_finds_the_optimum(self):
        hits = 0
        for seed in range(100):
            m = random_ising(generate_er(16, 0.5, seed=seed), seed=seed)
            sample = simulated_annealing(m, reads=100, sweeps=300, seed=seed)
            if abs(float(sample.energies.min()) - brute_force_min(m)[1]) < 1e-9:
                hits += 1
        self.assertGreaterEqual(hits, 95)

    def test_invalid_arguments(self):
        m = single_node(1.0)
        for kwargs in ({'reads': 0}, {'reads': 1, 'sweeps': 0}, {'reads': 1, 'beta_range': (1.0, 0.5)}):
            with self.assertRaises(IsingError):
                simulated_annealing(m, **kwargs)


class ReferenceEnergyTests(SimpleTestCase):
    def test_tiny_model_uses_the_exact_optimum(self):
        m = random_ising(Graph.complete(6), seed=3)
        self.assertEqual(reference_energy(m), brute_force_min(m)[1])

    def test_sampling_branch_is_a_minimum_over_runs(self):
        m = random_ising(generate_er(30, 0.5, seed=1), seed=1)
        budget = ReferenceBudget(restarts=2, reads=10, sweeps=100, seed=6)
        value = reference_energy(m, budget)
        first = simulated_annealing(m, reads=10, sweeps=100, seed=derive_seed(6, 'reference', 0))
        self.assertLessEqual(value, float(first.energies.min()))

    def test_forced_sampling_recovers_small_optimum(self):
        hits = 0
        for seed in range(5):
            m = random_ising(generate_er(12, 0.5, seed=seed), seed=seed)
            budget = ReferenceBudget(restarts=2, reads=20, sweeps=300, seed=seed, force_sampling=True)
            if abs(reference_energy(m, budget) - brute_force_min(m)[1]) < 1e-9:
                hits += 1
        self.assertGreaterEqual(hits, 4)

    def test_relative_error(self):
        self.assertAlmostEqual(relative_error(-10.0, -9.0), 0.1)
        self.assertEqual(relative_error(-3.5, -3.5), 0.0)
        self.assertAlmostEqual(relative_error(0.0, 0.3), 0.3)


class IsingSerializerTests(SimpleTestCase):
    def test_round_trip(self):
        m = random_ising(generate_er(7, 0.6, seed=4), seed=4)
        loaded = load_ising(dump_ising(m))
        self.assertEqual(loaded.graph, m.graph)
        self.assertEqual(loaded.h, m.h)
        self.assertEqual(loaded.J, m.J)
        self.assertEqual(model_fingerprint(loaded), model_fingerprint(m))

    def test_count_mismatch(self):
        with self.assertRaises(ValidationError):
            ising_from_dict({'n': 3, 'h': {'0': 0.1, '1': 0.2}, 'J': []})

    def test_coupling_to_unknown_node(self):
        with self.assertRaises(ValidationError):
            ising_from_dict({'n': 2, 'h': {'0': 0.1, '1': 0.2}, 'J': [[0, 5, 1.0]]})

    def test_malformed_coupling(self):
        with self.assertRaises(ValidationError):
            ising_from_dict(json.loads('{"n": 2, "h": {"0": 0, "1": 0}, "J": [[0, 1]]}'))

    def test_infinite_endpoint(self):
        for text in ('[[0, Infinity, 1.0]]', '[[-Infinity, 1, 1.0]]', '[[0, NaN, 1.0]]'):
            with self.assertRaises(ValidationError):
                ising_from_dict(json.loads('{"n": 2, "h": {"0": 0, "1": 0}, "J": ' + text + '}'))


class EnergyPropertyTests(HypothesisTestCase):
    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 7), st.floats(0.0, 1.0), st.integers(0, 2 ** 32 - 1))
    def test_brute_force_is_the_minimum(self, n, p, seed):
        m = random_ising(generate_er(n, p, seed), seed)
        self.assertAlmostEqual(brute_force_min(m)[1], naive_minimum(m), delta=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8), st.floats(0.0, 1.0), st.integers(0, 2 ** 32 - 1), st.data())
    def test_zero_bias_energy_ignores_a_global_flip(self, n, p, seed, data):
        g = generate_er(n, p, seed)
        m = random_ising(g, seed)
        m = IsingModel(g, {node: 0.0 for node in g.node_ids}, m.J)
        spins = data.draw(st.lists(st.sampled_from((-1, 1)), min_size=n, max_size=n))
        state = dict(zip(g.node_ids, spins))
        flipped = {node: -s for node, s in state.items()}
        self.assertEqual(energy(m, state), energy(m, flipped))
