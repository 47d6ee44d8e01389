"""Desk-scale reproductions of the embedding-quality studies.

* ``run_rq1_general``: solution quality against embedding size over a grid
  of random instances, embeddings varied through the patience sweep.
* ``run_rq1_stressed``: one hard cell, every embedding sampled under several
  chain-strength prefactors, with regression slopes against ACL.
* ``run_rq2``: success probability, ACL level, ACL dispersion and run time of
  heuristic embedders over a size × density grid, against the clique
  embedder's constant ACL.

Every randomized step takes a seed derived from the base seed and the job's
grid coordinates, so tables are identical across reruns and worker counts.
"""
import logging
import time

import numpy as np

from embedding.clique import CapacityError, UnsupportedTargetError, clique_acl, clique_embedding, preprocess
from embedding.core import metrics
from embedding.embedders import GreedyEmbedder
from embedding.greedy import GreedyParams, greedy_embed
from graphs.topology import GraphError, generate_er, generate_hardware_native, stats
from ising.model import random_ising
from ising.solvers import ReferenceBudget, reference_energy
from minorbench.seeds import derive_seed
from parameterize.chains import ChainStrengthSpec
from parameterize.pipeline import sample_embedding

from .jobs import run_jobs
from .stats import DegenerateInputError, box_stats, ols, spearman

logger = logging.getLogger(__name__)

STRESSED_RESPONSES = (
    'median_relative_error', 'min_relative_error',
    'median_chain_break_fraction', 'min_chain_break_fraction',
)


def _problem(cfg, size, density, problem):
    seed = derive_seed(cfg.base_seed, size, density, problem)
    source = generate_er(size, density, derive_seed(seed, 'graph'))
    return random_ising(source, derive_seed(seed, 'ising'))


def _reference(cfg, model, size, density, problem):
    budget = ReferenceBudget(
        restarts=cfg.reference_restarts,
        sweeps=cfg.sweeps,
        seed=derive_seed(cfg.base_seed, size, density, problem, 'reference'),
    )
    return reference_energy(model, budget)


def _greedy_params(cfg, patience, seed):
    return GreedyParams(
        tries=cfg.tries,
        chain_length_patience=patience,
        max_passes=cfg.max_passes,
        seed=seed,
        timeout=cfg.timeout,
    )


def _quality_columns(result):
    summary = result.summary
    return {
        'n_qubits': result.metrics.n_qubits,
        'acl': result.metrics.acl,
        'chain_strength': result.chain_strength,
        'median_relative_error': summary['median_relative_error'],
        'min_relative_error': summary['min_relative_error'],
        'median_embedded_relative_error': summary['median_embedded_relative_error'],
        'min_embedded_relative_error': summary['min_embedded_relative_error'],
        'median_chain_break_fraction': summary['median_chain_break_fraction'],
        'min_chain_break_fraction': summary['min_chain_break_fraction'],
    }


# Chain length against solution quality, one cell per problem.


def _rq1_general_problem(cfg, target, size, density, problem):
    model = _problem(cfg, size, density, problem)
    reference = _reference(cfg, model, size, density, problem)
    spec = ChainStrengthSpec(prefactor=cfg.general_prefactor)
    rows = []
    for k in range(cfg.embeddings_per_problem):
        patience = cfg.patience_values[k % len(cfg.patience_values)]
        seed = derive_seed(cfg.base_seed, size, density, problem, k)
        outcome = greedy_embed(model.graph, target, _greedy_params(cfg, patience, seed))
        row = {
            'size': size, 'density': density, 'problem': problem, 'embedding': k,
            'patience': patience, 'success': outcome.success,
            'reference_energy': reference,
        }
        if outcome.success:
            result = sample_embedding(
                model, outcome.embedding, target, spec, cfg.reads, derive_seed(seed, 'pipeline'),
                sweeps=cfg.sweeps, reference=reference,
            )
            row.update(_quality_columns(result))
        rows.append(row)
    logger.info(f"rq1 general: size {size}, density {density}, problem {problem} done")
    return rows


def run_rq1_general(cfg, jobs=1):
    target = cfg.target()
    arguments = [
        (cfg, target, size, density, problem)
        for size in cfg.sizes
        for density in cfg.densities
        for problem in range(cfg.problems_per_cell)
    ]
    return [row for rows in run_jobs(_rq1_general_problem, arguments, jobs) for row in rows]


# Fixed problem, many embeddings, swept chain-strength prefactor.


def _rq1_stressed_embedding(cfg, target, model, reference, problem, k):
    size, density = cfg.sizes[0], cfg.densities[0]
    patience = cfg.patience_values[k % len(cfg.patience_values)]
    seed = derive_seed(cfg.base_seed, size, density, problem, k)
    outcome = greedy_embed(model.graph, target, _greedy_params(cfg, patience, seed))
    base = {'problem': problem, 'embedding': k, 'patience': patience, 'success': outcome.success}
    if not outcome.success:
        return [dict(base, prefactor=prefactor) for prefactor in cfg.prefactors]
    rows = []
    for prefactor in cfg.prefactors:
        result = sample_embedding(
            model, outcome.embedding, target, ChainStrengthSpec(prefactor=prefactor), cfg.reads,
            derive_seed(seed, 'pipeline', prefactor), sweeps=cfg.sweeps, reference=reference,
        )
        rows.append(dict(base, prefactor=prefactor, **_quality_columns(result)))
    return rows


def _slope_rows(rows, prefactors, label, problem_filter):
    slopes = []
    for prefactor in prefactors:
        selected = [
            r for r in rows
            if r['success'] and r['prefactor'] == prefactor and problem_filter(r)
        ]
        for response in STRESSED_RESPONSES:
            row = {'problem': label, 'prefactor': prefactor, 'response': response,
                   'slope': None, 'intercept': None, 'r': None, 'spearman': None, 'n_points': len(selected)}
            try:
                fit = ols((r['acl'], r[response]) for r in selected)
            except DegenerateInputError:
                pass
            else:
                row.update(slope=fit.slope, intercept=fit.intercept, r=fit.r)
            try:
                row['spearman'] = spearman([r['acl'] for r in selected], [r[response] for r in selected])
            except DegenerateInputError:
                pass
            slopes.append(row)
    return slopes


def run_rq1_stressed(cfg, jobs=1):
    if len(cfg.sizes) != 1 or len(cfg.densities) != 1:
        raise ValueError("the stressed experiment runs on exactly one size and one density")
    if not cfg.prefactors:
        raise ValueError("the stressed experiment needs at least one prefactor")
    size, density = cfg.sizes[0], cfg.densities[0]
    target = cfg.target()
    arguments = []
    for problem in range(cfg.problems_per_cell):
        model = _problem(cfg, size, density, problem)
        reference = _reference(cfg, model, size, density, problem)
        arguments.extend(
            (cfg, target, model, reference, problem, k) for k in range(cfg.embeddings_per_problem)
        )
    rows = [row for chunk in run_jobs(_rq1_stressed_embedding, arguments, jobs) for row in chunk]

    slopes = []
    for problem in range(cfg.problems_per_cell):
        slopes.extend(_slope_rows(rows, cfg.prefactors, problem, lambda r, p=problem: r['problem'] == p))
    slopes.extend(_slope_rows(rows, cfg.prefactors, 'all', lambda r: True))
    return {'rows': rows, 'slopes': slopes}


# Greedy against clique embedding over size and density.


def _rq2_instances(cfg, target):
    """(instance kind, size, density, source graph) for every grid cell."""
    instances = []
    for size in cfg.sizes:
        if cfg.hardware_native:
            try:
                source, _ = generate_hardware_native(target, size, derive_seed(cfg.base_seed, size, 'hn'))
            except GraphError:
                logger.info(f"No hardware-native instance of size {size} fits the target")
            else:
                instances.append(('hn', size, round(stats(source).density, 6), source))
        for density in cfg.densities:
            source = generate_er(size, density, derive_seed(cfg.base_seed, size, density, 0, 'graph'))
            instances.append(('er', size, density, source))
    return instances


def _rq2_cell(cfg, embedder, target, kind, size, density, source):
    trials = []
    for trial in range(cfg.trial_count):
        seed = derive_seed(cfg.base_seed, size, density if kind == 'er' else 'hn', 0, trial)
        outcome = embedder.embed(source, target, seed)
        trials.append({
            'success': outcome.success,
            'acl': metrics(source, outcome.embedding).acl if outcome.success else None,
            'wall_time': outcome.wall_time,
            'timed_out': outcome.timed_out,
        })
    logger.info(
        f"rq2 {embedder.name}: {kind} size {size}, density {density}: "
        f"{sum(t['success'] for t in trials)}/{len(trials)} valid"
    )
    return trials


def _clique_baseline(cfg, target):
    try:
        cache = preprocess(target)
    except UnsupportedTargetError:
        logger.info("Clique baseline unavailable on this target")
        return None, [{'size': size, 'available': False, 'capacity': None, 'ce_acl': None} for size in cfg.sizes], {}
    baseline = []
    retrieval = 0.0
    for size in cfg.sizes:
        started = time.perf_counter()
        try:
            clique_embedding(cache, size)
        except CapacityError:
            baseline.append({'size': size, 'available': True, 'capacity': cache.max_clique_size, 'ce_acl': None})
            continue
        retrieval = max(retrieval, time.perf_counter() - started)
        baseline.append({
            'size': size, 'available': True, 'capacity': cache.max_clique_size,
            'ce_acl': float(clique_acl(size)),
        })
    timing = {'preprocess_time': cache.preprocess_time, 'max_retrieval_time': retrieval}
    return cache, baseline, timing


def _box_row(key, values, ce_acl):
    row = dict(key, n_valid=len(values), ce_acl=ce_acl)
    if values:
        row.update(box_stats(values).as_dict())
    return row


def run_rq2(cfg, embedders=None, jobs=1):
    if cfg.trial_count < 2:
        raise ValueError("trial_count must be >= 2")
    if embedders is None:
        embedders = {'greedy': GreedyEmbedder(_greedy_params(cfg, cfg.rq2_patience, cfg.base_seed))}
    target = cfg.target()
    instances = _rq2_instances(cfg, target)
    arguments = [
        (cfg, embedder, target, kind, size, density, source)
        for embedder in embedders.values()
        for kind, size, density, source in instances
    ]
    results = run_jobs(_rq2_cell, arguments, jobs)

    _, ce_baseline, ce_timing = _clique_baseline(cfg, target)
    ce_by_size = {row['size']: row['ce_acl'] for row in ce_baseline}
    box_size = cfg.box_size if cfg.box_size is not None else max(cfg.sizes)

    tables = {name: [] for name in (
        'boundary_map', 'acl_grid', 'dispersion_grid', 'time_grid', 'acl_difference',
        'box_by_size', 'box_by_density',
    )}
    for (_, embedder, _, kind, size, density, _), trials in zip(arguments, results):
        key = {'embedder': embedder.name, 'instance': kind, 'size': size, 'density': density}
        acls = [t['acl'] for t in trials if t['success']]
        successes = len(acls)
        tables['boundary_map'].append(dict(
            key, trials=len(trials), successes=successes, failures=len(trials) - successes,
            timeouts=sum(t['timed_out'] for t in trials), probability=successes / len(trials),
        ))
        tables['acl_grid'].append(dict(
            key, n_valid=successes,
            acl_mean=float(np.mean(acls)) if acls else None,
            acl_median=float(np.median(acls)) if acls else None,
            acl_min=min(acls) if acls else None,
            acl_max=max(acls) if acls else None,
        ))
        tables['dispersion_grid'].append(dict(
            key, n_valid=successes, acl_std=float(np.std(acls)) if acls else None,
        ))
        times = [t['wall_time'] for t in trials]
        tables['time_grid'].append(dict(
            key, total_time=sum(times), mean_time=sum(times) / len(times), max_time=max(times),
            timeouts=sum(t['timed_out'] for t in trials),
        ))
        if kind != 'er':
            continue
        ce_acl = ce_by_size.get(size)
        if acls and ce_acl is not None:
            mean = float(np.mean(acls))
            tables['acl_difference'].append(dict(key, acl_mean=mean, ce_acl=ce_acl, difference=mean - ce_acl))
        if abs(density - cfg.box_density) < 1e-9:
            tables['box_by_size'].append(_box_row(key, acls, ce_acl))
        if size == box_size:
            tables['box_by_density'].append(_box_row(key, acls, ce_acl))

    tables['ce_baseline'] = ce_baseline
    tables['ce_timing'] = [ce_timing] if ce_timing else []
    return tables
