"""Embed, parameterize, sample and unembed one Ising problem."""
import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from embedding.core import metrics
from ising.model import energy
from ising.solvers import (
    DEFAULT_BETA_RANGE, DEFAULT_SWEEPS, ReferenceBudget, reference_energy, relative_error,
    simulated_annealing,
)
from minorbench.seeds import derive_seed

from .chains import ChainStrengthSpec, embed_ising, unembed

logger = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    success: bool
    outcome: object
    metrics: object = None
    chain_strength: float = None
    chain_offset: float = None
    reference_energy: float = None
    embedded_energies: list = field(default_factory=list)
    source_energies: list = field(default_factory=list)
    chain_break_fractions: list = field(default_factory=list)
    embedded_relative_errors: list = field(default_factory=list)
    relative_errors: list = field(default_factory=list)

    @property
    def summary(self):
        if not self.success:
            return {}
        return {
            'median_embedded_energy': _median(self.embedded_energies),
            'min_embedded_energy': min(self.embedded_energies),
            'median_source_energy': _median(self.source_energies),
            'min_source_energy': min(self.source_energies),
            'median_relative_error': _median(self.relative_errors),
            'min_relative_error': min(self.relative_errors),
            'median_embedded_relative_error': _median(self.embedded_relative_errors),
            'min_embedded_relative_error': min(self.embedded_relative_errors),
            'median_chain_break_fraction': _median(self.chain_break_fractions),
            'min_chain_break_fraction': min(self.chain_break_fractions),
        }

    def as_dict(self, timing=True):
        embedding = self.outcome.embedding
        return {
            'success': self.success,
            'embedding': self.outcome.as_dict(timing),
            'chains': {str(s): list(embedding.chains[s]) for s in sorted(embedding.chains)} if embedding is not None else None,
            'metrics': self.metrics.as_dict() if self.metrics else None,
            'chain_strength': self.chain_strength,
            'chain_offset': self.chain_offset,
            'reference_energy': self.reference_energy,
            'reads': len(self.source_energies),
            'summary': self.summary,
        }

    def reads_csv(self):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow([
            'read_index', 'embedded_energy', 'source_energy', 'chain_break_fraction',
            'embedded_relative_error', 'relative_error',
        ])
        rows = zip(
            self.embedded_energies, self.source_energies, self.chain_break_fractions,
            self.embedded_relative_errors, self.relative_errors,
        )
        for i, row in enumerate(rows):
            writer.writerow([i] + [repr(float(v)) for v in row])
        return buffer.getvalue()


def _median(values):
    return float(np.median(values))


def sample_embedding(m, e, g, cs, reads, seed, sweeps=DEFAULT_SWEEPS,
                     beta_range=DEFAULT_BETA_RANGE, reference=None, budget=None):
    """Sample an already embedded problem and score every read.

    Embedded energies are scored with the constant chain offset removed, so
    an unbroken read scores exactly like its unembedded source state.
    """
    embedded = embed_ising(m, e, g, cs)
    if reference is None:
        reference = reference_energy(m, budget or ReferenceBudget(seed=derive_seed(seed, 'reference')))

    sample = simulated_annealing(
        embedded.model, reads=reads, sweeps=sweeps, beta_range=beta_range,
        seed=derive_seed(seed, 'sample'),
    )
    result = PipelineResult(
        success=True,
        outcome=None,
        metrics=metrics(m.graph, e),
        chain_strength=embedded.chain_strength,
        chain_offset=embedded.chain_offset,
        reference_energy=reference,
    )
    for read_index, assignment in enumerate(sample.assignments):
        raw = float(sample.energies[read_index])
        unembedded = unembed(assignment, e, seed=derive_seed(seed, 'unembed', read_index))
        source = energy(m, unembedded.assignment)
        result.embedded_energies.append(raw)
        result.source_energies.append(source)
        result.chain_break_fractions.append(unembedded.chain_break_fraction)
        result.embedded_relative_errors.append(relative_error(reference, raw - embedded.chain_offset))
        result.relative_errors.append(relative_error(reference, source))
    return result


def solve_pipeline(m, g, embedder, cs=ChainStrengthSpec(), reads=1000, seed=0,
                   sweeps=DEFAULT_SWEEPS, beta_range=DEFAULT_BETA_RANGE,
                   reference=None, budget=None):
    outcome = embedder.embed(m.graph, g, derive_seed(seed, 'embed'))
    if not outcome.success:
        logger.info(f"Pipeline stopped: {embedder.name} embedding failed ({outcome.reason})")
        return PipelineResult(success=False, outcome=outcome)
    result = sample_embedding(
        m, outcome.embedding, g, cs, reads, seed,
        sweeps=sweeps, beta_range=beta_range, reference=reference, budget=budget,
    )
    result.outcome = outcome
    return result
