"""Greedy minor-embedding with exponential node-usage penalties.

Construction places source vertices one by one, hardest (highest degree)
first. A vertex's chain is a root target node plus one cheapest path to each
already placed neighbour chain, where entering a target node costs
``penalty_base ** usage``. Chains may overlap while the search runs; the
refinement passes rip up and re-place every vertex until no target node is
shared and the qubit count stops improving.

Each refinement pass visits the vertices in a fresh seeded order. While
overlap remains, every overloaded node also gathers a history charge that
multiplies its cost, and a pass that brings no improvement is followed by
ripping up the owners of overloaded nodes together with their source
neighbours and re-placing them in a fresh seeded order. The history is
cleared as soon as a pass ends with disjoint chains.
"""
import logging
import math
import time
from collections import Counter
from dataclasses import dataclass, replace

import networkx as nx
import numpy as np

from minorbench.seeds import derive_seed

from .core import Embedding, EmbeddingError, validate

logger = logging.getLogger(__name__)

COST_CEILING = 1e15


@dataclass(frozen=True)
class GreedyParams:
    tries: int = 1
    chain_length_patience: int = 10
    max_passes: int = 1000
    penalty_base: float = 10.0
    seed: int = 0
    # Wall-clock budget in seconds for one try; None means unlimited.
    timeout: float = None

    def __post_init__(self):
        if self.tries < 1:
            raise ValueError(f"tries must be >= 1, got {self.tries}")
        if self.chain_length_patience < 0:
            raise ValueError(f"chain_length_patience must be >= 0, got {self.chain_length_patience}")
        if self.max_passes < 0:
            raise ValueError(f"max_passes must be >= 0, got {self.max_passes}")
        if self.penalty_base <= 1:
            raise ValueError(f"penalty_base must be > 1, got {self.penalty_base}")


@dataclass(frozen=True)
class EmbedOutcome:
    embedding: Embedding = None
    success: bool = False
    passes_used: int = 0
    wall_time: float = 0.0
    try_index: int = 0
    timed_out: bool = False
    # (overloaded target nodes, total qubits, longest chain) of the best state
    objective: tuple = None
    reason: str = ''

    def as_dict(self, timing=True):
        data = {
            'success': self.success,
            'passes_used': self.passes_used,
            'try_index': self.try_index,
            'timed_out': self.timed_out,
            'objective': list(self.objective) if self.objective else None,
            'reason': self.reason,
        }
        if timing:
            data['wall_time'] = self.wall_time
        return data


class _Timeout(Exception):
    pass


class _Unreachable(Exception):
    pass


class GreedyRun:
    """One deterministic attempt; ``run()`` returns an :class:`EmbedOutcome`."""

    def __init__(self, h, g, params):
        self.h = h
        self.g = g
        self.params = params
        self.rng = np.random.default_rng(params.seed)
        self.target = g.nx_graph
        self.chains = {}
        self.usage = Counter()
        # passes each target node has spent overloaded since chains were last disjoint
        self.history = Counter()
        self.max_exponent = math.floor(math.log(COST_CEILING) / math.log(params.penalty_base))
        self.started = None

    def cost(self, node):
        used = self.usage[node]
        if used >= self.max_exponent:
            return COST_CEILING
        return min(COST_CEILING, self.params.penalty_base ** used * (1 + self.history[node]))

    def check_clock(self):
        timeout = self.params.timeout
        if timeout is not None and time.perf_counter() - self.started > timeout:
            raise _Timeout()

    def vertex_order(self):
        order = list(self.h.node_ids)
        self.rng.shuffle(order)
        order.sort(key=lambda v: -self.h.degree(v))
        return order

    def shuffled(self, vertices):
        order = sorted(vertices)
        self.rng.shuffle(order)
        return order

    def pick(self, candidates):
        return candidates[int(self.rng.integers(len(candidates)))]

    def place(self, u):
        """Choose a chain for ``u`` against the current usage map."""
        costs = {t: self.cost(t) for t in self.g.node_ids}
        neighbour_chains = [self.chains[v] for v in self.h.adjacency[u] if v in self.chains]

        if not neighbour_chains:
            cheapest = min(costs.values())
            return {self.pick([t for t in self.g.node_ids if costs[t] == cheapest])}

        weight = lambda _a, b, _d: costs[b]
        searches = []
        for chain in neighbour_chains:
            distances, paths = nx.multi_source_dijkstra(self.target, chain, weight=weight)
            searches.append((chain, distances, paths))

        scores = {}
        for t in self.g.node_ids:
            total = costs[t]
            for chain, distances, _ in searches:
                if t not in distances:
                    break
                if t not in chain:
                    total += distances[t] - costs[t]
            else:
                scores[t] = total
        if not scores:
            raise _Unreachable(u)

        best = min(scores.values())
        root = self.pick([t for t in self.g.node_ids if t in scores and scores[t] <= best])
        new_chain = {root}
        for chain, _, paths in searches:
            new_chain.update(n for n in paths[root] if n not in chain)
        return new_chain

    def assign(self, u, chain):
        old = self.chains.pop(u, ())
        self.usage.subtract(old)
        self.chains[u] = chain
        self.usage.update(chain)

    def rip_up(self, u):
        self.usage.subtract(self.chains.pop(u))

    def objective(self):
        overloaded = sum(1 for used in self.usage.values() if used > 1)
        lengths = [len(c) for c in self.chains.values()]
        return overloaded, sum(lengths), max(lengths, default=0)

    def snapshot(self):
        return {u: frozenset(c) for u, c in self.chains.items()}

    def overloaded(self):
        return {t for t, used in self.usage.items() if used > 1}

    def reroute(self, order):
        for u in order:
            self.check_clock()
            self.rip_up(u)
            self.assign(u, self.place(u))

    def replace_congested(self, hot):
        """Rip up every owner of a node in ``hot`` and its source neighbours, then re-place them."""
        owners = {u for u, chain in self.chains.items() if chain & hot}
        group = owners.union(*(self.h.adjacency[u] for u in owners))
        order = self.shuffled(group)
        for u in order:
            self.rip_up(u)
        for u in order:
            self.check_clock()
            self.assign(u, self.place(u))

    def run(self):
        self.started = time.perf_counter()
        params = self.params
        passes = 0
        try:
            for u in self.vertex_order():
                self.check_clock()
                self.assign(u, self.place(u))

            best = self.objective()
            best_chains = self.snapshot()
            stall = 0
            while not (best[0] == 0 and stall >= params.chain_length_patience):
                if passes >= params.max_passes:
                    break
                passes += 1
                self.reroute(self.shuffled(self.h.node_ids))
                current = self.objective()
                logger.debug(f"pass {passes}: objective {current}, best {best}")
                hot = self.overloaded()
                if hot:
                    self.history.update(hot)
                else:
                    self.history.clear()
                if current < best:
                    best, best_chains, stall = current, self.snapshot(), 0
                else:
                    stall += 1
                    if hot:
                        self.replace_congested(hot)
        except _Timeout:
            return self.failure(passes, 'timeout', timed_out=True)
        except _Unreachable as exc:
            return self.failure(passes, f'no reachable root for source node {exc.args[0]}')

        if best[0] > 0:
            return self.failure(passes, 'chains still overlap', objective=best)

        embedding = Embedding.from_chains(best_chains)
        report = validate(self.h, self.g, embedding)
        if not report.valid:
            raise EmbeddingError(f"greedy embedder produced an invalid embedding: {report.as_dict()}")
        return EmbedOutcome(
            embedding=embedding,
            success=True,
            passes_used=passes,
            wall_time=time.perf_counter() - self.started,
            objective=best,
        )

    def failure(self, passes, reason, timed_out=False, objective=None):
        logger.info(f"Greedy embedding failed after {passes} passes: {reason}")
        return EmbedOutcome(
            success=False,
            passes_used=passes,
            wall_time=time.perf_counter() - self.started,
            timed_out=timed_out,
            objective=objective,
            reason=reason,
        )


def _try_seed(seed, try_index):
    return seed if try_index == 0 else derive_seed(seed, 'try', try_index)


def greedy_embed(h, g, p=GreedyParams()):
    """Best valid outcome over ``p.tries`` attempts (fewest qubits, then earliest)."""
    if not h.node_ids:
        raise EmbeddingError("source graph has no nodes")
    if not g.node_ids:
        raise EmbeddingError("target graph has no nodes")
    if len(h.node_ids) > len(g.node_ids):
        return EmbedOutcome(reason=f"{len(h.node_ids)} source nodes exceed {len(g.node_ids)} target nodes")

    best = None
    last = None
    elapsed = 0.0
    for try_index in range(p.tries):
        outcome = GreedyRun(h, g, replace(p, seed=_try_seed(p.seed, try_index))).run()
        outcome = replace(outcome, try_index=try_index)
        elapsed += outcome.wall_time
        last = outcome
        if outcome.success and (best is None or _qubits(outcome) < _qubits(best)):
            best = outcome
    chosen = best if best is not None else last
    return replace(chosen, wall_time=elapsed)


def _qubits(outcome):
    return sum(len(c) for c in outcome.embedding.chains.values())


def embed_probability(h, g, p=GreedyParams(), trials=1):
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    successes = sum(
        greedy_embed(h, g, replace(p, seed=derive_seed(p.seed, 'trial', t))).success
        for t in range(trials)
    )
    return successes / trials
