"""Deterministic clique embedding on ideal Chimera targets.

Variable ``i`` (block ``c = i // 4``, lane ``u = i % 4``) runs down the
vertical qubits ``u`` of column ``c`` from row 0 to row ``c``, turns in cell
``(c, c)`` and runs along the horizontal qubits ``u`` of row ``c`` to the last
column. Two chains always meet in one cell through an intra-cell coupler.
"""
import json
import logging
import math
import time
from dataclasses import dataclass

from graphs.topology import ChimeraSpec, GraphError, chimera_node, fingerprint, generate_chimera

from .core import Embedding

logger = logging.getLogger(__name__)


class UnsupportedTargetError(GraphError):
    pass


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class CliqueCache:
    target_fingerprint: str
    m: int
    max_clique_size: int
    master: Embedding
    preprocess_time: float = 0.0

    def to_json(self):
        payload = {
            'fingerprint': self.target_fingerprint,
            'm': self.m,
            'max_clique_size': self.max_clique_size,
            'chains': {str(s): list(self.master.chains[s]) for s in sorted(self.master.chains)},
        }
        return json.dumps(payload, separators=(',', ':'))


def chimera_dimension(g):
    """Grid size m when ``g`` is exactly the ideal Chimera C_m, else None."""
    m = math.isqrt(len(g.node_ids) // 8) if g.node_ids else 0
    if m < 1 or 8 * m * m != len(g.node_ids):
        return None
    if g != generate_chimera(ChimeraSpec(m)):
        return None
    return m


def triangle_chains(m, k, n):
    """Chains of the first ``n`` variables of the construction on the top-left
    k×k cells of C_m."""
    chains = {}
    for i in range(n):
        block, lane = divmod(i, 4)
        chain = [chimera_node(m, row, block, 1, lane) for row in range(block + 1)]
        chain += [chimera_node(m, block, col, 0, lane) for col in range(block, k)]
        chains[i] = chain
    return Embedding.from_chains(chains)


def preprocess(g):
    started = time.perf_counter()
    m = chimera_dimension(g)
    if m is None:
        raise UnsupportedTargetError("clique embedding needs an ideal Chimera target")
    cache = CliqueCache(
        target_fingerprint=fingerprint(g),
        m=m,
        max_clique_size=4 * m,
        master=triangle_chains(m, m, 4 * m),
        preprocess_time=time.perf_counter() - started,
    )
    logger.info(f"Clique cache ready for C_{m}: K_{cache.max_clique_size}")
    return cache


def clique_embedding(cache, n):
    if not 1 <= n <= cache.max_clique_size:
        raise CapacityError(f"K_{n} exceeds the clique capacity {cache.max_clique_size}")
    return triangle_chains(cache.m, math.ceil(n / 4), n)


def clique_acl(n):
    return math.ceil(n / 4) + 1


def acl_line(cache):
    line = []
    for n in range(1, cache.max_clique_size + 1):
        chains = clique_embedding(cache, n).chains.values()
        line.append((n, sum(len(c) for c in chains) / n))
    return line
