"""Source and target graphs: the shared ``Graph`` value, hardware-like
generators, random instances and summary statistics."""
import hashlib
import logging
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph over non-negative integer node ids.

    ``node_ids`` is kept ascending and ``edges`` holds ``(u, v)`` pairs with
    ``u < v``. Use :meth:`from_edges` to build one from arbitrary input.
    """

    node_ids: tuple
    edges: frozenset

    def __post_init__(self):
        nodes = set(self.node_ids)
        if len(nodes) != len(self.node_ids):
            raise GraphError("duplicate node ids")
        if list(self.node_ids) != sorted(self.node_ids):
            raise GraphError("node ids must be ascending")
        if self.node_ids and self.node_ids[0] < 0:
            raise GraphError("node ids must be non-negative")
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            if u > v:
                raise GraphError(f"edge ({u}, {v}) is not canonical")
            if u not in nodes or v not in nodes:
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside the node set")

    @classmethod
    def from_edges(cls, edges, nodes=()):
        canonical = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            canonical.add((u, v) if u < v else (v, u))
        all_nodes = {int(n) for n in nodes}
        for u, v in canonical:
            all_nodes.update((u, v))
        return cls(tuple(sorted(all_nodes)), frozenset(canonical))

    @classmethod
    def complete(cls, n):
        return cls.from_edges(((u, v) for u in range(n) for v in range(u + 1, n)), range(n))

    def __len__(self):
        return len(self.node_ids)

    def __contains__(self, node):
        return node in self.adjacency

    @cached_property
    def sorted_edges(self):
        return tuple(sorted(self.edges))

    @cached_property
    def adjacency(self):
        adj = {n: set() for n in self.node_ids}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {n: tuple(sorted(nbrs)) for n, nbrs in adj.items()}

    def degree(self, node):
        return len(self.adjacency[node])

    def has_edge(self, u, v):
        return ((u, v) if u < v else (v, u)) in self.edges

    @cached_property
    def nx_graph(self):
        g = nx.Graph()
        g.add_nodes_from(self.node_ids)
        g.add_edges_from(self.sorted_edges)
        return g

    def subgraph(self, nodes):
        keep = set(nodes)
        return Graph(
            tuple(n for n in self.node_ids if n in keep),
            frozenset(e for e in self.edges if e[0] in keep and e[1] in keep),
        )

    def relabel(self, mapping):
        return Graph.from_edges(
            ((mapping[u], mapping[v]) for u, v in self.edges),
            (mapping[n] for n in self.node_ids),
        )


@dataclass(frozen=True)
class GraphStats:
    n_nodes: int
    n_edges: int
    density: float
    avg_degree: float
    max_degree: int


@dataclass(frozen=True)
class ChimeraSpec:
    """An m×m grid of K_{4,4} cells."""

    m: int


def chimera_node(m, row, col, side, index):
    # side 0 = horizontal, 1 = vertical
    return 8 * (row * m + col) + 4 * side + index


def generate_chimera(spec):
    m = spec.m
    if m < 1:
        raise GraphError(f"Chimera grid dimension must be >= 1, got {m}")
    edges = []
    for row in range(m):
        for col in range(m):
            for k in range(4):
                for j in range(4):
                    edges.append((chimera_node(m, row, col, 0, k), chimera_node(m, row, col, 1, j)))
            for k in range(4):
                if col + 1 < m:
                    edges.append((chimera_node(m, row, col, 0, k), chimera_node(m, row, col + 1, 0, k)))
                if row + 1 < m:
                    edges.append((chimera_node(m, row, col, 1, k), chimera_node(m, row + 1, col, 1, k)))
    return Graph.from_edges(edges, range(8 * m * m))


def break_graph(g, node_drop, edge_drop, seed):
    """Remove a seeded uniform sample of nodes, then of the remaining edges."""
    for name, ratio in (("node_drop", node_drop), ("edge_drop", edge_drop)):
        if not 0 <= ratio < 1:
            raise GraphError(f"{name} must be in [0, 1), got {ratio}")
    rng = np.random.default_rng(seed)

    n_drop = math.floor(node_drop * len(g.node_ids))
    dropped = set()
    if n_drop:
        dropped = {int(n) for n in rng.choice(np.array(g.node_ids), size=n_drop, replace=False)}
    nodes = [n for n in g.node_ids if n not in dropped]
    edges = [e for e in g.sorted_edges if e[0] not in dropped and e[1] not in dropped]

    e_drop = math.floor(edge_drop * len(edges))
    if e_drop:
        removed = set(rng.choice(len(edges), size=e_drop, replace=False).tolist())
        edges = [e for i, e in enumerate(edges) if i not in removed]

    logger.debug(f"Broke graph: dropped {n_drop} nodes and {e_drop} edges (seed {seed})")
    return Graph(tuple(nodes), frozenset(edges))


def generate_er(n, p, seed):
    """Erdős–Rényi G(n, p): each pair, in lexicographic order, kept with probability p."""
    if n < 1:
        raise GraphError(f"n must be >= 1, got {n}")
    if not 0 <= p <= 1:
        raise GraphError(f"p must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.size) < p
    return Graph.from_edges(zip(rows[keep].tolist(), cols[keep].tolist()), range(n))


def generate_hardware_native(g, n, seed):
    """Connected n-node subgraph of ``g``, relabelled to 0..n-1.

    Nodes are grown breadth-first from a seeded random root, visiting
    neighbours in a seeded order. The relabelling keeps the target's node
    order, so the identity-style embedding ``i -> original node`` is valid.
    """
    if n < 1:
        raise GraphError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    components = sorted(
        (sorted(c) for c in nx.connected_components(g.nx_graph) if len(c) >= n),
        key=lambda c: c[0],
    )
    if not components:
        raise GraphError(f"target has no connected component with {n} nodes")
    component = components[int(rng.integers(len(components)))]
    root = component[int(rng.integers(len(component)))]

    chosen = [root]
    seen = {root}
    queue = deque([root])
    while queue and len(chosen) < n:
        node = queue.popleft()
        nbrs = list(g.adjacency[node])
        rng.shuffle(nbrs)
        for nbr in nbrs:
            if nbr not in seen:
                seen.add(nbr)
                chosen.append(nbr)
                queue.append(nbr)
                if len(chosen) == n:
                    break

    picked = sorted(chosen)
    sub = g.subgraph(picked)
    mapping = {node: i for i, node in enumerate(picked)}
    return sub.relabel(mapping), {i: node for node, i in mapping.items()}


def stats(g):
    n = len(g.node_ids)
    m = len(g.edges)
    degrees = [len(nbrs) for nbrs in g.adjacency.values()]
    return GraphStats(
        n_nodes=n,
        n_edges=m,
        density=m / (n * (n - 1) / 2) if n >= 2 else 0.0,
        avg_degree=2 * m / n if n >= 1 else 0.0,
        max_degree=max(degrees, default=0),
    )


def fingerprint(g):
    """SHA-256 over the canonical node count and sorted edge list."""
    digest = hashlib.sha256()
    digest.update(f"n {len(g.node_ids)}\n".encode())
    for u, v in g.sorted_edges:
        digest.update(f"{u} {v}\n".encode())
    return digest.hexdigest()
