"""Uniform embedder interface used by the pipeline and the bench.

An embedder has a ``name`` and ``embed(h, g, seed) -> EmbedOutcome``.
"""
import logging
import time
from dataclasses import replace

from graphs.topology import fingerprint

from .clique import CapacityError, UnsupportedTargetError, clique_embedding, preprocess
from .core import Embedding
from .greedy import EmbedOutcome, GreedyParams, greedy_embed

logger = logging.getLogger(__name__)


class GreedyEmbedder:
    name = 'greedy'

    def __init__(self, params=GreedyParams()):
        self.params = params

    def embed(self, h, g, seed):
        return greedy_embed(h, g, replace(self.params, seed=seed))


class CliqueEmbedder:
    """Embeds any source with n nodes through the K_n clique embedding.

    Caches are kept per target fingerprint, so preprocessing runs once.
    """

    name = 'clique'

    def __init__(self):
        self._caches = {}

    def add_cache(self, cache):
        self._caches[cache.target_fingerprint] = cache

    def cache_for(self, g):
        key = fingerprint(g)
        if key not in self._caches:
            self._caches[key] = preprocess(g)
        return self._caches[key]

    def embed(self, h, g, seed=None):
        started = time.perf_counter()
        try:
            cache = self.cache_for(g)
            clique = clique_embedding(cache, len(h.node_ids))
        except (UnsupportedTargetError, CapacityError) as exc:
            logger.info(f"Clique embedding unavailable: {exc}")
            return EmbedOutcome(wall_time=time.perf_counter() - started, reason=str(exc))
        embedding = Embedding({s: clique.chains[i] for i, s in enumerate(h.node_ids)})
        return EmbedOutcome(
            embedding=embedding,
            success=True,
            wall_time=time.perf_counter() - started,
        )


def get_embedder(name, **options):
    if name == GreedyEmbedder.name:
        return GreedyEmbedder(GreedyParams(**options))
    if name == CliqueEmbedder.name:
        return CliqueEmbedder()
    raise ValueError(f"unknown embedder {name!r}")
