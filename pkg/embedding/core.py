"""Minor-embeddings, their validation and quality metrics.

An embedding maps each source node to a chain of target nodes. It is valid
when every chain is non-empty and connected in the target, chains are
pairwise disjoint, every source edge is carried by at least one target edge
between the two chains, and every source node has a chain.
"""
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import networkx as nx

logger = logging.getLogger(__name__)


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class Embedding:
    """``chains`` maps source node -> ascending tuple of target nodes."""

    chains: dict

    def __post_init__(self):
        for source, chain in self.chains.items():
            if not chain:
                raise EmbeddingError(f"chain of {source} is empty")
            if len(set(chain)) != len(chain):
                raise EmbeddingError(f"chain of {source} repeats a target node")

    @classmethod
    def from_chains(cls, chains):
        return cls({int(s): tuple(sorted(int(t) for t in chain)) for s, chain in sorted(chains.items())})

    def __len__(self):
        return len(self.chains)

    def __getitem__(self, source):
        return self.chains[source]

    def __iter__(self):
        return iter(self.chains)

    @cached_property
    def qubits(self):
        return frozenset(t for chain in self.chains.values() for t in chain)

    @cached_property
    def owner(self):
        """Target node -> source node; only meaningful for disjoint chains."""
        return {t: s for s, chain in self.chains.items() for t in chain}

    def restrict(self, sources):
        keep = set(sources)
        return Embedding({s: c for s, c in self.chains.items() if s in keep})

    def to_json(self):
        payload = {'chains': {str(s): list(self.chains[s]) for s in sorted(self.chains)}}
        return json.dumps(payload, separators=(',', ':'))


@dataclass(frozen=True)
class ValidationReport:
    connectivity_violations: list = field(default_factory=list)
    missing_edges: list = field(default_factory=list)
    overlap_pairs: list = field(default_factory=list)
    unembedded: list = field(default_factory=list)

    @property
    def valid(self):
        return not (
            self.connectivity_violations or self.missing_edges
            or self.overlap_pairs or self.unembedded
        )

    def as_dict(self):
        return {
            'valid': self.valid,
            'connectivity_violations': self.connectivity_violations,
            'missing_edges': [list(e) for e in self.missing_edges],
            'overlap_pairs': [list(p) for p in self.overlap_pairs],
            'unembedded': self.unembedded,
        }


@dataclass(frozen=True)
class EmbeddingMetrics:
    n_qubits: int
    acl: float
    max_chain: int
    chain_length_histogram: dict

    def as_dict(self):
        return {
            'n_qubits': self.n_qubits,
            'acl': self.acl,
            'max_chain': self.max_chain,
            'chain_length_histogram': {str(k): v for k, v in sorted(self.chain_length_histogram.items())},
        }


def validate(h, g, e):
    """Check every embedding condition and report all violations found."""
    unknown_sources = [s for s in e if s not in h]
    if unknown_sources:
        raise EmbeddingError(f"chains for unknown source nodes {unknown_sources[:10]}")
    for source, chain in e.chains.items():
        unknown = [t for t in chain if t not in g]
        if unknown:
            raise EmbeddingError(f"chain of {source} references unknown target nodes {unknown[:10]}")

    target = g.nx_graph
    connectivity = [
        s for s in sorted(e.chains)
        if not nx.is_connected(target.subgraph(e.chains[s]))
    ]

    users = {}
    for s in sorted(e.chains):
        for t in e.chains[s]:
            users.setdefault(t, []).append(s)
    overlaps = sorted({
        (a, b)
        for sources in users.values()
        for i, a in enumerate(sources)
        for b in sources[i + 1:]
    })

    missing = []
    for u, v in h.sorted_edges:
        if u not in e.chains or v not in e.chains:
            continue
        chain_v = set(e.chains[v])
        if not any(n in chain_v for t in e.chains[u] for n in g.adjacency[t]):
            missing.append((u, v))

    report = ValidationReport(
        connectivity_violations=connectivity,
        missing_edges=missing,
        overlap_pairs=overlaps,
        unembedded=[s for s in h.node_ids if s not in e.chains],
    )
    if not report.valid:
        logger.debug(f"Invalid embedding: {report.as_dict()}")
    return report


def metrics(h, e):
    if set(e.chains) != set(h.node_ids):
        raise EmbeddingError("embedding domain does not match the source nodes")
    lengths = [len(e.chains[s]) for s in h.node_ids]
    n_qubits = sum(lengths)
    return EmbeddingMetrics(
        n_qubits=n_qubits,
        acl=n_qubits / len(lengths) if lengths else 0.0,
        max_chain=max(lengths, default=0),
        chain_length_histogram=dict(sorted(Counter(lengths).items())),
    )


def valid_solution_fraction(n, acl):
    """Share of embedded states whose chains are all unbroken: 2^(n(1-acl))."""
    if n < 1 or acl < 1:
        raise EmbeddingError("need n >= 1 and acl >= 1")
    return 2.0 ** (n * (1 - acl))


def exact_valid_solution_fraction(n, n_qubits):
    """The same share as an exact rational, 2^n / 2^n_qubits."""
    return Fraction(2 ** n, 2 ** n_qubits)
