"""Embedded Ising models and majority-vote unembedding."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from embedding.core import EmbeddingError, validate
from graphs.topology import Graph
from ising.model import IsingModel
from ising.serializers import model_fingerprint

logger = logging.getLogger(__name__)

DEFAULT_PREFACTOR = 1.414


@dataclass(frozen=True)
class ChainStrengthSpec:
    mode: str = 'utc'
    prefactor: float = DEFAULT_PREFACTOR
    fixed_value: float = None

    def __post_init__(self):
        if self.mode not in ('utc', 'fixed'):
            raise ValueError(f"unknown chain strength mode {self.mode!r}")
        if self.mode == 'utc' and self.prefactor <= 0:
            raise ValueError(f"prefactor must be > 0, got {self.prefactor}")
        if self.mode == 'fixed' and self.fixed_value is None:
            raise ValueError("fixed mode needs fixed_value")

    def resolve(self, m):
        if self.mode == 'fixed':
            return float(self.fixed_value)
        return utc_chain_strength(m, self.prefactor)


@dataclass(frozen=True)
class EmbeddedIsing:
    model: IsingModel
    chains: object
    chain_strength: float
    source_ref: str
    intra_chain_couplers: int

    @property
    def chain_offset(self):
        """Energy every unbroken state gains from the chain penalties."""
        return -self.chain_strength * self.intra_chain_couplers


@dataclass(frozen=True)
class UnembeddedSample:
    assignment: dict
    broken_chains: frozenset
    chain_break_fraction: float


def utc_chain_strength(m, prefactor=DEFAULT_PREFACTOR):
    """prefactor * rms(J) * sqrt(average degree); just the prefactor without edges."""
    if not m.nodes:
        raise ValueError("model has no nodes")
    if not m.J:
        return prefactor
    weights = np.fromiter(m.J.values(), dtype=float)
    rms = math.sqrt(float(np.mean(weights ** 2)))
    avg_degree = 2 * len(m.J) / len(m.nodes)
    return prefactor * rms * math.sqrt(avg_degree)


def embed_ising(m, e, g, cs=ChainStrengthSpec()):
    report = validate(m.graph, g, e)
    if not report.valid:
        raise EmbeddingError(f"cannot parameterize an invalid embedding: {report.as_dict()}")
    strength = cs.resolve(m)

    h = {}
    for source, chain in e.chains.items():
        share = m.h[source] / len(chain)
        for t in chain:
            h[t] = share

    couplings = {}
    for (u, v), weight in m.J.items():
        chain_v = set(e.chains[v])
        couplers = [
            (a, b) if a < b else (b, a)
            for a in e.chains[u]
            for b in g.adjacency[a]
            if b in chain_v
        ]
        share = weight / len(couplers)
        for key in couplers:
            couplings[key] = share

    intra = 0
    for chain in e.chains.values():
        members = set(chain)
        for a in chain:
            for b in g.adjacency[a]:
                if a < b and b in members:
                    couplings[(a, b)] = -strength
                    intra += 1

    graph = Graph.from_edges(couplings, h)
    return EmbeddedIsing(
        model=IsingModel(graph=graph, h=h, J=couplings),
        chains=e,
        chain_strength=strength,
        source_ref=model_fingerprint(m),
        intra_chain_couplers=intra,
    )


def unembed(s, e, seed=0):
    """Majority vote per chain; exact ties go to a seeded fair coin."""
    rng = np.random.default_rng(seed)
    assignment = {}
    broken = set()
    for source in sorted(e.chains):
        try:
            spins = [s[t] for t in e.chains[source]]
        except KeyError as exc:
            raise EmbeddingError(f"no value for qubit {exc.args[0]} of chain {source}")
        total = sum(spins)
        if abs(total) == len(spins):
            assignment[source] = spins[0]
            continue
        broken.add(source)
        if total > 0:
            assignment[source] = 1
        elif total < 0:
            assignment[source] = -1
        else:
            assignment[source] = 1 if rng.random() < 0.5 else -1
    return UnembeddedSample(
        assignment=assignment,
        broken_chains=frozenset(broken),
        chain_break_fraction=len(broken) / len(e.chains) if e.chains else 0.0,
    )
