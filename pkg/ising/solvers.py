"""Classical solvers: exact enumeration, simulated annealing, and the
reference energy used to score samples."""
import logging
from dataclasses import dataclass

import numpy as np

from minorbench.seeds import derive_seed

from .model import IsingError, SampleSet

logger = logging.getLogger(__name__)

EXACT_LIMIT = 26
DEFAULT_SWEEPS = 1000
DEFAULT_BETA_RANGE = (0.1, 10.0)
RELATIVE_ERROR_FLOOR = 1e-9

# Uniform draws are taken per read in blocks of this many sweeps.
_SWEEP_BLOCK = 64
_ENUMERATION_CHUNK = 1 << 16


class ModelTooLargeError(IsingError):
    pass


def brute_force_min(m, limit=EXACT_LIMIT):
    """Global minimum by exhaustive enumeration.

    States are enumerated so that integer order equals lexicographic order of
    the assignment (node order, -1 before +1); the first minimum wins ties.
    """
    n = len(m.nodes)
    if n > limit:
        raise ModelTooLargeError(f"{n} variables exceed the exhaustive limit of {limit}")
    if n == 0:
        return {}, 0.0

    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    best_energy = np.inf
    best_index = 0
    total = 1 << n
    for start in range(0, total, _ENUMERATION_CHUNK):
        idx = np.arange(start, min(start + _ENUMERATION_CHUNK, total), dtype=np.int64)
        spins = ((idx[:, None] >> shifts) & 1) * 2 - 1
        chunk_energies = m.energies(spins)
        i = int(np.argmin(chunk_energies))
        if chunk_energies[i] < best_energy:
            best_energy = float(chunk_energies[i])
            best_index = start + i

    bits = (best_index >> shifts) & 1
    assignment = {node: int(b) * 2 - 1 for node, b in zip(m.nodes, bits.tolist())}
    return assignment, best_energy


def simulated_annealing(m, reads, sweeps=DEFAULT_SWEEPS, beta_range=DEFAULT_BETA_RANGE, seed=0):
    """Metropolis annealing with a geometric inverse-temperature schedule.

    All reads advance together, one node at a time in ascending node order;
    each read draws its initial state and acceptance uniforms from its own
    generator seeded with ``(seed, read_index)``, so a read's result does not
    depend on how many reads run alongside it.
    """
    beta_min, beta_max = beta_range
    if reads < 1:
        raise IsingError(f"reads must be >= 1, got {reads}")
    if sweeps < 1:
        raise IsingError(f"sweeps must be >= 1, got {sweeps}")
    if not 0 < beta_min < beta_max:
        raise IsingError(f"beta_range must satisfy 0 < min < max, got {beta_range}")

    n = len(m.nodes)
    generators = [np.random.default_rng([seed, r]) for r in range(reads)]
    spins = np.array([g.integers(0, 2, size=n) * 2 - 1 for g in generators], dtype=float)
    spins = spins.reshape(reads, n)
    betas = np.geomspace(beta_min, beta_max, num=sweeps) if sweeps > 1 else np.array([beta_max])

    h = m.h_vector
    neighbours = m.neighbour_arrays
    for block_start in range(0, sweeps, _SWEEP_BLOCK):
        block = min(_SWEEP_BLOCK, sweeps - block_start)
        # (block, reads, n)
        uniforms = np.stack([g.random((block, n)) for g in generators], axis=1)
        for offset in range(block):
            beta = betas[block_start + offset]
            draws = uniforms[offset]
            for i in range(n):
                cols, weights = neighbours[i]
                field = h[i] + (spins[:, cols] @ weights if weights.size else 0.0)
                delta = -2.0 * spins[:, i] * field
                accept = (delta <= 0) | (draws[:, i] < np.exp(-beta * np.maximum(delta, 0.0)))
                spins[accept, i] *= -1

    records = spins.astype(np.int8)
    return SampleSet(
        nodes=m.nodes,
        records=records,
        energies=m.energies(records),
        seed=seed,
        info={'sweeps': sweeps, 'beta_range': (beta_min, beta_max)},
    )


@dataclass(frozen=True)
class ReferenceBudget:
    restarts: int = 4
    reads: int = 50
    sweeps: int = DEFAULT_SWEEPS
    beta_range: tuple = DEFAULT_BETA_RANGE
    exact_limit: int = EXACT_LIMIT
    seed: int = 0
    force_sampling: bool = False


def reference_energy(m, budget=ReferenceBudget()):
    """Exact optimum for small models, otherwise the best multistart SA energy."""
    if not m.nodes:
        return 0.0
    if len(m.nodes) <= budget.exact_limit and not budget.force_sampling:
        return brute_force_min(m, limit=budget.exact_limit)[1]
    best = np.inf
    for restart in range(budget.restarts):
        sample = simulated_annealing(
            m,
            reads=budget.reads,
            sweeps=budget.sweeps,
            beta_range=budget.beta_range,
            seed=derive_seed(budget.seed, 'reference', restart),
        )
        best = min(best, float(sample.energies.min()))
    logger.debug(f"Reference energy {best} from {budget.restarts} annealing restarts")
    return best


def relative_error(e_ref, e_qa):
    if abs(e_ref) >= RELATIVE_ERROR_FLOOR:
        return abs((e_ref - e_qa) / e_ref)
    return abs(e_ref - e_qa)
