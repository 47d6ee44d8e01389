import math
import tempfile
from pathlib import Path

from django.test import SimpleTestCase
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.django import SimpleTestCase as HypothesisTestCase
from rest_framework.exceptions import ValidationError

from bench.config import ExperimentConfig, config_from_mapping, load_config
from bench.experiments import STRESSED_RESPONSES, run_rq1_general, run_rq1_stressed, run_rq2
from bench.jobs import run_jobs
from bench.stats import DegenerateInputError, box_stats, ols, spearman
from bench.tables import format_table, read_table, write_table
from graphs.topology import ChimeraSpec, generate_chimera, stats


def mid_ranks(values):
    ordered = sorted(values)
    return [
        sum(i + 1 for i, v in enumerate(ordered) if v == x) / ordered.count(x)
        for x in values
    ]


def pearson(xs, ys):
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    return sxy / math.sqrt(sxx * syy)


def linear_quantile(values, q):
    ordered = sorted(values)
    position = (len(ordered) - 1) * q
    lo = math.floor(position)
    hi = min(lo + 1, len(ordered) - 1)
    return ordered[lo] + (position - lo) * (ordered[hi] - ordered[lo])


def square(x):
    return x * x


class StatsKernelTests(SimpleTestCase):
    # --- Feature: least squares ---
    def test_two_points(self):
        fit = ols([(0, 1), (1, 3)])
        self.assertEqual((fit.slope, fit.intercept, fit.r, fit.n_points), (2.0, 1.0, 1.0, 2))

    def test_exact_line_is_recovered(self):
        points = [(x, -0.37 * x + 4.2) for x in range(20)]
        fit = ols(points)
        self.assertAlmostEqual(fit.slope, -0.37, delta=1e-9)
        self.assertAlmostEqual(fit.intercept, 4.2, delta=1e-9)
        self.assertAlmostEqual(fit.r, -1.0, delta=1e-9)

    def test_constant_response_has_zero_correlation(self):
        fit = ols([(0, 2), (1, 2), (5, 2)])
        self.assertEqual(fit.slope, 0.0)
        self.assertEqual(fit.r, 0.0)

    def test_degenerate_fits(self):
        with self.assertRaises(DegenerateInputError):
            ols([(1, 1)])
        with self.assertRaises(DegenerateInputError):
            ols([(1, 1), (1, 2)])

    # --- Feature: rank correlation ---
    def test_increasing_map_has_unit_spearman(self):
        xs = [0.3, 1.0, 2.5, 7.0, 11.0]
        self.assertEqual(spearman(xs, [math.exp(x) for x in xs]), 1.0)
        self.assertEqual(spearman(xs, [-x for x in xs]), -1.0)

    def test_spearman_degenerate(self):
        with self.assertRaises(DegenerateInputError):
            spearman([1, 2], [3, 3])
        with self.assertRaises(DegenerateInputError):
            spearman([1], [1])
        with self.assertRaises(DegenerateInputError):
            spearman([1, 2], [1, 2, 3])

    # --- Feature: box summaries ---
    def test_box_of_one_to_hundred(self):
        box = box_stats(range(1, 101))
        self.assertEqual(box.median, 50.5)
        self.assertEqual(box.q1, 25.75)
        self.assertEqual(box.q3, 75.25)
        self.assertEqual((box.whisker_lo, box.whisker_hi), (1.0, 100.0))
        self.assertEqual(box.outliers, ())

    def test_outliers_sit_beyond_the_whiskers(self):
        box = box_stats([1, 2, 2, 3, 3, 3, 4, 40])
        self.assertEqual(box.outliers, (40.0,))
        self.assertEqual(box.whisker_hi, 4.0)
        self.assertEqual(box.as_dict()['n_outliers'], 1)

    def test_empty_box(self):
        with self.assertRaises(DegenerateInputError):
            box_stats([])


class StatsPropertyTests(HypothesisTestCase):
    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=2, max_size=30))
    def test_spearman_matches_brute_force(self, pairs):
        xs, ys = [p[0] for p in pairs], [p[1] for p in pairs]
        assume(len(set(xs)) > 1 and len(set(ys)) > 1)
        self.assertAlmostEqual(spearman(xs, ys), pearson(mid_ranks(xs), mid_ranks(ys)), delta=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=40))
    def test_box_stats_matches_brute_force(self, values):
        box = box_stats(values)
        q1, q3 = linear_quantile(values, 0.25), linear_quantile(values, 0.75)
        self.assertEqual(box.q1, q1)
        self.assertEqual(box.median, linear_quantile(values, 0.5))
        self.assertEqual(box.q3, q3)
        iqr = q3 - q1
        inside = [v for v in values if q1 - 1.5 * iqr <= v <= q3 + 1.5 * iqr]
        self.assertEqual(box.whisker_lo, min(inside))
        self.assertEqual(box.whisker_hi, max(inside))
        self.assertEqual(len(box.outliers), len(values) - len(inside))

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-5, 5), st.floats(-5, 5), st.lists(st.integers(-20, 20), min_size=2, max_size=15, unique=True))
    def test_ols_recovers_lines(self, slope, intercept, xs):
        fit = ols([(x, slope * x + intercept) for x in xs])
        self.assertAlmostEqual(fit.slope, slope, delta=1e-9)
        self.assertAlmostEqual(fit.intercept, intercept, delta=1e-9)


class ConfigTests(SimpleTestCase):
    def test_defaults_are_the_desk_grid(self):
        cfg = ExperimentConfig()
        self.assertEqual(cfg.sizes, tuple(range(8, 49, 4)))
        self.assertEqual(cfg.trial_count, 32)
        self.assertEqual(cfg.reads, 500)
        self.assertEqual(cfg.general_prefactor, 1.414)
        self.assertEqual(len(cfg.target().node_ids), 128)

    def test_load_flat_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'rq2.env'
            path.write_text(
                "# small grid\nSIZES=8,12\nDENSITIES=0.2, 0.4\nTRIAL_COUNT=4\n"
                "CHIMERA_M=2\nNODE_DROP=0.05\nHARDWARE_NATIVE=false\nTIMEOUT=\n"
            )
            cfg = load_config(path)
        self.assertEqual(cfg.sizes, (8, 12))
        self.assertEqual(cfg.densities, (0.2, 0.4))
        self.assertEqual(cfg.trial_count, 4)
        self.assertFalse(cfg.hardware_native)
        self.assertIsNone(cfg.timeout)
        self.assertEqual(len(cfg.target().node_ids), 32 - math.floor(0.05 * 32))

    def test_unknown_and_invalid_keys(self):
        with self.assertRaises(ValidationError):
            config_from_mapping({'SIZEZ': '8'})
        with self.assertRaises(ValidationError):
            config_from_mapping({'DENSITIES': '0.5,1.5'})
        with self.assertRaises(ValidationError):
            config_from_mapping({'PREFACTORS': '1.0,0'})

    def test_echo_is_plain_json(self):
        echo = ExperimentConfig(sizes=(8,)).echo()
        self.assertEqual(echo['sizes'], [8])
        self.assertEqual(echo['base_seed'], 0)


class JobsAndTablesTests(SimpleTestCase):
    def test_results_keep_submission_order(self):
        arguments = [(i,) for i in range(6)]
        self.assertEqual(run_jobs(square, arguments), [0, 1, 4, 9, 16, 25])
        self.assertEqual(run_jobs(square, arguments, jobs=2), [0, 1, 4, 9, 16, 25])

    def test_table_format(self):
        rows = [{'a': 1, 'b': 0.1, 'c': True}, {'a': 2, 'd': None}]
        self.assertEqual(format_table(rows), "a,b,c,d\n1,0.1,true,\n2,,,\n")

    def test_write_and_read(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_table(Path(tmp) / 'sub' / 't.csv', [{'x': 1, 'y': 2.5}])
            self.assertEqual(read_table(path), [{'x': '1', 'y': '2.5'}])


def small_config(**overrides):
    values = dict(
        sizes=(6,), densities=(0.5,), problems_per_cell=1, embeddings_per_problem=3,
        patience_values=(0, 1, 2), prefactors=(0.5, 2.0), reads=20, sweeps=20, chimera_m=2,
        trial_count=3, reference_restarts=1, hardware_native=False, max_passes=50,
    )
    values.update(overrides)
    return ExperimentConfig(**values)


class ExperimentTests(SimpleTestCase):
    # --- Feature: solution quality against embedding size ---
    def test_rq1_general_rows(self):
        cfg = small_config(sizes=(6, 8))
        rows = run_rq1_general(cfg)
        self.assertEqual(len(rows), 2 * 1 * 1 * 3)
        self.assertEqual([r['patience'] for r in rows[:3]], [0, 1, 2])
        for row in rows:
            if row['success']:
                self.assertGreaterEqual(row['acl'], 1.0)
                self.assertGreaterEqual(row['median_relative_error'], row['min_relative_error'])
                self.assertIn('median_embedded_relative_error', row)
            else:
                self.assertNotIn('acl', row)

    def test_rq1_general_is_deterministic_across_workers(self):
        cfg = small_config()
        self.assertEqual(format_table(run_rq1_general(cfg)), format_table(run_rq1_general(cfg, jobs=2)))

    # --- Feature: stressed cell with prefactor sweep ---
    def test_rq1_stressed_rows_and_slopes(self):
        cfg = small_config(problems_per_cell=2)
        result = run_rq1_stressed(cfg)
        self.assertEqual(len(result['rows']), 2 * 3 * 2)
        self.assertEqual(len(result['slopes']), (2 + 1) * 2 * len(STRESSED_RESPONSES))
        for row in result['slopes']:
            if row['r'] is not None:
                self.assertTrue(-1.0 <= row['r'] <= 1.0)
            if row['spearman'] is not None:
                self.assertTrue(-1.0 <= row['spearman'] <= 1.0)

    def test_rq1_stressed_needs_one_cell(self):
        with self.assertRaises(ValueError):
            run_rq1_stressed(small_config(sizes=(6, 8)))
        with self.assertRaises(ValueError):
            run_rq1_stressed(small_config(prefactors=()))

    # --- Feature: embeddability grid ---
    def test_rq2_grid_bookkeeping(self):
        cfg = small_config(sizes=(6, 40), densities=(0.2, 0.8))
        tables = run_rq2(cfg)
        boundary = tables['boundary_map']
        self.assertEqual(len(boundary), 4)
        for row in boundary:
            self.assertEqual(row['trials'], 3)
            self.assertEqual(row['successes'] + row['failures'], 3)
        oversized = [r for r in boundary if r['size'] == 40]
        self.assertEqual({r['probability'] for r in oversized}, {0.0})
        empty = [r for r in tables['acl_grid'] if r['size'] == 40]
        self.assertEqual({r['acl_mean'] for r in empty}, {None})
        self.assertEqual({r['acl_std'] for r in tables['dispersion_grid'] if r['size'] == 40}, {None})
        baseline = {r['size']: r for r in tables['ce_baseline']}
        self.assertEqual(baseline[6]['ce_acl'], 3.0)
        self.assertIsNone(baseline[40]['ce_acl'])
        self.assertEqual(len(tables['ce_timing']), 1)
        self.assertEqual({r['size'] for r in tables['box_by_density']}, {40})

    def test_rq2_hardware_native_cells_always_embed(self):
        cfg = small_config(sizes=(8,), densities=(0.3,), hardware_native=True)
        tables = run_rq2(cfg)
        native = [r for r in tables['boundary_map'] if r['instance'] == 'hn']
        self.assertEqual(len(native), 1)
        self.assertEqual(native[0]['probability'], 1.0)

    def test_rq2_without_clique_target(self):
        tables = run_rq2(small_config(node_drop=0.1))
        self.assertEqual(tables['ce_timing'], [])
        self.assertFalse(tables['ce_baseline'][0]['available'])

    def test_rq2_is_reproducible(self):
        cfg = small_config(densities=(0.3, 0.6))
        first, second = run_rq2(cfg), run_rq2(cfg, jobs=2)
        for name in ('boundary_map', 'acl_grid', 'dispersion_grid', 'ce_baseline', 'acl_difference'):
            self.assertEqual(format_table(first[name]), format_table(second[name]))

    def test_rq2_needs_two_trials(self):
        with self.assertRaises(ValueError):
            run_rq2(small_config(trial_count=1))

    def test_target_is_chimera(self):
        self.assertEqual(small_config().target(), generate_chimera(ChimeraSpec(2)))


class DeskScaleTrendTests(SimpleTestCase):
    """Reduced-scale checks of the benchmark trends."""

    def stressed_config(self, base_seed):
        return small_config(
            sizes=(12,), densities=(0.5,), embeddings_per_problem=20, patience_values=tuple(range(10)),
            prefactors=(0.5, 1.0, 2.0), reads=100, sweeps=10, chimera_m=3, node_drop=0.05,
            max_passes=200, base_seed=base_seed,
        )

    # --- Feature: longer chains mean worse samples ---
    def test_acl_ranks_with_error_and_chain_breaks(self):
        passing = 0
        for base_seed in range(3):
            slopes = run_rq1_stressed(self.stressed_config(base_seed))['slopes']
            pooled = {
                r['response']: r for r in slopes if r['problem'] == 'all' and r['prefactor'] == 1.0
            }
            error, breaks = pooled['median_relative_error'], pooled['median_chain_break_fraction']
            self.assertGreaterEqual(error['n_points'], 15)
            if (error['spearman'] or 0.0) >= 0.3 and (breaks['spearman'] or 0.0) >= 0.3:
                passing += 1
        self.assertGreaterEqual(passing, 2)

    def test_stronger_chains_break_less(self):
        rows = run_rq1_stressed(self.stressed_config(0))['rows']
        by_embedding = {}
        for row in rows:
            if row['success']:
                by_embedding.setdefault((row['problem'], row['embedding']), {})[row['prefactor']] = \
                    row['median_chain_break_fraction']
        self.assertTrue(by_embedding)
        monotone = sum(
            fractions[0.5] >= fractions[1.0] >= fractions[2.0] for fractions in by_embedding.values()
        )
        self.assertGreaterEqual(monotone / len(by_embedding), 0.8)

    # --- Feature: embeddability boundary ---
    def test_success_probability_falls_with_density(self):
        cfg = small_config(
            sizes=(8, 12, 40), densities=(0.2, 0.5, 0.8, 1.0), chimera_m=2, trial_count=4,
            hardware_native=True, rq2_patience=1,
        )
        boundary = run_rq2(cfg)['boundary_map']
        native = [r for r in boundary if r['instance'] == 'hn']
        self.assertEqual({r['size'] for r in native}, {8, 12})
        self.assertEqual({r['probability'] for r in native}, {1.0})
        self.assertEqual({r['probability'] for r in boundary if r['size'] == 40}, {0.0})
        for size in (8, 12):
            cells = sorted((r['density'], r['probability']) for r in boundary
                           if r['instance'] == 'er' and r['size'] == size)
            probabilities = [p for _, p in cells]
            if len(set(probabilities)) > 1:
                self.assertLessEqual(spearman([d for d, _ in cells], probabilities), 0.0, size)

    # --- Feature: dispersion grows with size and density ---
    def test_acl_spread_is_widest_on_large_dense_cells(self):
        cfg = small_config(
            sizes=(6, 8, 10, 12), densities=(0.2, 0.4, 0.6, 0.8), chimera_m=3, trial_count=6,
            rq2_patience=2, max_passes=100,
        )
        spreads = [r['acl_std'] for r in run_rq2(cfg)['dispersion_grid'] if r['acl_std']]
        self.assertGreaterEqual(len(spreads), 2)
        self.assertGreaterEqual(max(spreads), 2 * min(spreads))

    # --- Feature: clique embedding wins on dense sources ---
    def test_greedy_chains_exceed_the_clique_baseline_on_dense_sources(self):
        cfg = small_config(
            sizes=(10, 11, 12), densities=(0.9, 1.0), chimera_m=3, trial_count=3,
            rq2_patience=0, max_passes=100,
        )
        target_degree = stats(cfg.target()).avg_degree
        region = [r for r in run_rq2(cfg)['acl_difference'] if r['difference'] > 0]
        self.assertTrue(region)
        for row in region:
            self.assertGreater((row['size'] - 1) * row['density'], target_degree)
