"""Ising models over a :class:`graphs.topology.Graph` and their energies.

    E(s) = sum_i h_i s_i + sum_(i,j) J_ij s_i s_j,   s_i in {-1, +1}
"""
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from graphs.topology import Graph


class IsingError(ValueError):
    pass


@dataclass(frozen=True)
class IsingModel:
    graph: Graph
    h: dict
    J: dict

    def __post_init__(self):
        if set(self.h) != set(self.graph.node_ids):
            raise IsingError("h must be keyed exactly on the graph's nodes")
        if set(self.J) != set(self.graph.edges):
            raise IsingError("J must be keyed exactly on the graph's edges")
        for value in list(self.h.values()) + list(self.J.values()):
            if not math.isfinite(value):
                raise IsingError(f"non-finite coefficient {value}")

    @property
    def nodes(self):
        return self.graph.node_ids

    @cached_property
    def index(self):
        return {node: i for i, node in enumerate(self.graph.node_ids)}

    @cached_property
    def h_vector(self):
        return np.array([self.h[n] for n in self.graph.node_ids], dtype=float)

    @cached_property
    def edge_arrays(self):
        """Column indices ``(us, vs)`` and weights for every edge, sorted."""
        edges = self.graph.sorted_edges
        us = np.array([self.index[u] for u, _ in edges], dtype=np.intp)
        vs = np.array([self.index[v] for _, v in edges], dtype=np.intp)
        weights = np.array([self.J[e] for e in edges], dtype=float)
        return us, vs, weights

    @cached_property
    def neighbour_arrays(self):
        """Per node (in node order): neighbour column indices and weights."""
        result = []
        for node in self.graph.node_ids:
            nbrs = self.graph.adjacency[node]
            cols = np.array([self.index[n] for n in nbrs], dtype=np.intp)
            weights = np.array(
                [self.J[(node, n) if node < n else (n, node)] for n in nbrs], dtype=float
            )
            result.append((cols, weights))
        return result

    def energies(self, spins):
        """Energies of a ``(reads, n)`` array of spins given in node order."""
        spins = np.asarray(spins, dtype=float)
        us, vs, weights = self.edge_arrays
        total = spins @ self.h_vector
        if weights.size:
            total = total + (spins[:, us] * spins[:, vs]) @ weights
        return total


SpinAssignment = dict


@dataclass(eq=False)
class SampleSet:
    """Reads of one sampler call.

    ``records`` is a ``(num_reads, n)`` array of ±1 in the order of ``nodes``.
    """

    nodes: tuple
    records: np.ndarray
    energies: np.ndarray
    seed: int
    info: dict = field(default_factory=dict)

    @property
    def num_reads(self):
        return len(self.energies)

    @property
    def assignments(self):
        return [dict(zip(self.nodes, row.tolist())) for row in self.records]

    def lowest(self):
        i = int(np.argmin(self.energies))
        return dict(zip(self.nodes, self.records[i].tolist())), float(self.energies[i])


def random_ising(g, seed):
    """Biases and couplings drawn uniformly from [-1, 1]."""
    rng = np.random.default_rng(seed)
    h_values = rng.uniform(-1.0, 1.0, size=len(g.node_ids))
    j_values = rng.uniform(-1.0, 1.0, size=len(g.edges))
    return IsingModel(
        graph=g,
        h=dict(zip(g.node_ids, h_values.tolist())),
        J=dict(zip(g.sorted_edges, j_values.tolist())),
    )


def energy(m, x):
    missing = [n for n in m.graph.node_ids if n not in x]
    if missing:
        raise IsingError(f"assignment is missing nodes {missing[:10]}")
    total = 0.0
    for node, bias in m.h.items():
        total += bias * x[node]
    for (u, v), weight in m.J.items():
        total += weight * x[u] * x[v]
    return total
