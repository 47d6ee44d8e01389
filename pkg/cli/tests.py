import json
import tempfile
from io import StringIO
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings

from bench.tables import read_table
from cli.management.commands.embed import Command as EmbedCommand
from cli.management.commands.gen import Command as GenCommand
from cli.manifest import file_digest, verify
from cli.models import RunRecord
from cli.plots import plot
from graphs.edgelist import load_edge_list, save_edge_list
from graphs.topology import ChimeraSpec, Graph, generate_chimera, generate_er
from ising.serializers import load_ising
from ising.solvers import brute_force_min


class CommandTestMixin:
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def run_command(self, *args):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO())
        return out.getvalue()

    def graph_file(self, name, g):
        path = self.tmp / name
        save_edge_list(g, path)
        return str(path)

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as ctx:
            self.run_command(*args)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class GenCommandTests(CommandTestMixin, SimpleTestCase):
    # --- Feature: generation commands ---
    def test_gen_chimera(self):
        out = self.tmp / 'c2.txt'
        self.run_command('gen', 'chimera', '--m', '2', '--out', str(out))
        self.assertEqual(load_edge_list(out), generate_chimera(ChimeraSpec(2)))
        manifest = json.loads((self.tmp / 'c2.manifest.json').read_text())
        self.assertEqual(manifest['command'], 'gen')
        self.assertEqual(manifest['digests'], {'c2.txt': file_digest(out)})
        self.assertEqual(verify(self.tmp / 'c2.manifest.json'), [])

    def test_gen_er_complete(self):
        out = self.tmp / 'k5.txt'
        self.run_command('gen', 'er', '--n', '5', '--p', '1', '--seed', '3', '--out', str(out))
        self.assertEqual(load_edge_list(out), Graph.complete(5))

    def test_missing_flag_is_a_usage_error(self):
        with self.assertRaises(SystemExit) as ctx:
            GenCommand(stdout=StringIO(), stderr=StringIO()).run_from_argv(['manage.py', 'gen', 'chimera'])
        self.assertEqual(ctx.exception.code, 2)
        with self.assertRaises(SystemExit) as ctx:
            EmbedCommand(stdout=StringIO(), stderr=StringIO()).run_from_argv(['manage.py', 'embed', '--target', 'x'])
        self.assertEqual(ctx.exception.code, 2)

    def test_invalid_values_are_usage_errors(self):
        self.assertExitCode(2, 'gen', 'er', '--n', '5', '--p', '1.5', '--out', str(self.tmp / 'x.txt'))
        self.assertExitCode(2, 'gen', 'chimera', '--m', '0', '--out', str(self.tmp / 'x.txt'))

    def test_gen_ising_break_and_hardware_native(self):
        target = self.graph_file('c2.txt', generate_chimera(ChimeraSpec(2)))
        source = self.graph_file('er.txt', generate_er(7, 0.5, seed=1))
        self.run_command('gen', 'ising', '--graph', source, '--seed', '4', '--out', str(self.tmp / 'm.json'))
        model = load_ising((self.tmp / 'm.json').read_text())
        self.assertEqual(model.graph, generate_er(7, 0.5, seed=1))

        self.run_command('gen', 'break', '--target', target, '--nodes', '0.25', '--edges', '0.1',
                         '--seed', '2', '--out', str(self.tmp / 'broken.txt'))
        self.assertEqual(len(load_edge_list(self.tmp / 'broken.txt').node_ids), 24)

        self.run_command('gen', 'hn', '--target', target, '--n', '10', '--out', str(self.tmp / 'hn.txt'))
        self.assertEqual(len(load_edge_list(self.tmp / 'hn.txt').node_ids), 10)
        mapping = json.loads((self.tmp / 'hn.mapping.json').read_text())
        self.assertEqual(len(mapping['chains']), 10)

    def test_gen_clique_cache(self):
        target = self.graph_file('c2.txt', generate_chimera(ChimeraSpec(2)))
        self.run_command('gen', 'clique-cache', '--target', target, '--out', str(self.tmp / 'cache.json'))
        cache = json.loads((self.tmp / 'cache.json').read_text())
        self.assertEqual(cache['max_clique_size'], 8)
        self.assertEqual((self.tmp / 'cache.acl.csv').read_text().count("\n"), 9)
        self.assertExitCode(2, 'gen', 'clique-cache', '--target', self.graph_file('k8.txt', Graph.complete(8)),
                            '--out', str(self.tmp / 'bad.json'))

    def test_missing_input_is_an_io_error(self):
        self.assertExitCode(5, 'gen', 'ising', '--graph', str(self.tmp / 'nope.txt'))

    def test_malformed_input_is_an_io_error(self):
        bad = self.tmp / 'bad.txt'
        bad.write_text("0 0\n")
        self.assertExitCode(5, 'gen', 'ising', '--graph', str(bad))

    def test_default_output_directory(self):
        with override_settings(MINOR_EMBEDDING={**settings.MINOR_EMBEDDING, 'OUTPUT_DIR': self.tmp / 'runs'}):
            self.run_command('gen', 'chimera', '--m', '1')
        self.assertTrue((self.tmp / 'runs' / 'chimera_m1.txt').exists())


class EmbedCommandTests(CommandTestMixin, SimpleTestCase):
    def test_identity_embeddable_source(self):
        k4 = self.graph_file('k4.txt', Graph.complete(4))
        out = self.tmp / 'e.json'
        self.run_command('embed', '--source', k4, '--target', k4, '--algo', 'greedy', '--patience', '2',
                         '--tries', '2', '--seed', '1', '--out', str(out))
        payload = json.loads(out.read_text())
        self.assertEqual(payload['metrics']['acl'], 1.0)
        self.assertEqual(payload['metrics']['valid_solution_fraction'], 1.0)
        self.assertNotIn('wall_time', payload['outcome'])
        self.run_command('validate', '--source', k4, '--target', k4, '--embedding', str(out))

    def test_failure_writes_json_and_exits_3(self):
        k5 = self.graph_file('k5.txt', Graph.complete(5))
        k4 = self.graph_file('k4.txt', Graph.complete(4))
        out = self.tmp / 'fail.json'
        self.assertExitCode(3, 'embed', '--source', k5, '--target', k4, '--out', str(out))
        payload = json.loads(out.read_text())
        self.assertFalse(payload['outcome']['success'])
        self.assertTrue(payload['outcome']['reason'])
        self.assertTrue((self.tmp / 'fail.manifest.json').exists())

    def test_clique_embedding_with_a_saved_cache(self):
        c2 = self.graph_file('c2.txt', generate_chimera(ChimeraSpec(2)))
        source = self.graph_file('er.txt', generate_er(6, 0.7, seed=2))
        self.run_command('gen', 'clique-cache', '--target', c2, '--out', str(self.tmp / 'cache.json'))
        out = self.tmp / 'e.json'
        self.run_command('embed', '--source', source, '--target', c2, '--algo', 'clique',
                         '--cache', str(self.tmp / 'cache.json'), '--out', str(out))
        self.assertEqual(json.loads(out.read_text())['metrics']['acl'], 3.0)

    def test_success_probability_estimate(self):
        c1 = self.graph_file('c1.txt', generate_chimera(ChimeraSpec(1)))
        source = self.graph_file('p.txt', Graph.from_edges([(0, 1), (1, 2)]))
        out = self.tmp / 'e.json'
        self.run_command('embed', '--source', source, '--target', c1, '--trials', '3', '--out', str(out))
        self.assertEqual(json.loads(out.read_text())['success_probability'], 1.0)

    def test_validate_flags_a_corrupted_file(self):
        source = self.graph_file('tri.txt', Graph.complete(3))
        target = self.graph_file('path.txt', Graph.from_edges([(0, 1), (1, 2), (2, 3)]))
        corrupted = self.tmp / 'bad.json'
        corrupted.write_text(json.dumps({'chains': {'0': [0, 2], '1': [1], '2': [2, 3]}}))
        out = StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command('validate', '--source', source, '--target', target, '--embedding', str(corrupted), stdout=out)
        self.assertEqual(ctx.exception.returncode, 4)
        report = json.loads(out.getvalue())
        self.assertFalse(report['valid'])
        self.assertEqual(report['connectivity_violations'], [0])
        self.assertEqual(report['overlap_pairs'], [[0, 2]])

    def test_validate_unknown_target_node(self):
        k2 = self.graph_file('k2.txt', Graph.complete(2))
        bad = self.tmp / 'bad.json'
        bad.write_text(json.dumps({'chains': {'0': [0], '1': [9]}}))
        self.assertExitCode(4, 'validate', '--source', k2, '--target', k2, '--embedding', str(bad))


class SolveCommandTests(CommandTestMixin, SimpleTestCase):
    def test_end_to_end_recovers_the_optimum(self):
        target = self.graph_file('c1.txt', generate_chimera(ChimeraSpec(1)))
        hits = 0
        for seed in range(20):
            source = self.graph_file(f'er{seed}.txt', generate_er(6, 0.4, seed=seed))
            model_path = self.tmp / f'm{seed}.json'
            self.run_command('gen', 'ising', '--graph', source, '--seed', str(seed), '--out', str(model_path))
            out = self.tmp / f'solve{seed}.json'
            try:
                self.run_command('solve', '--ising', str(model_path), '--target', target, '--prefactor', '1.0',
                                 '--reads', '500', '--sweeps', '200', '--tries', '4', '--max-passes', '200',
                                 '--seed', str(seed), '--out', str(out))
            except CommandError:
                continue
            result = json.loads(out.read_text())
            optimum = brute_force_min(load_ising(model_path.read_text()))[1]
            self.assertAlmostEqual(result['reference_energy'], optimum, delta=1e-9)
            self.assertEqual((self.tmp / f'solve{seed}.reads.csv').read_text().count("\n"), 501)
            if abs(result['summary']['min_source_energy'] - optimum) < 1e-9:
                hits += 1
        self.assertGreaterEqual(hits, 18)

    def test_solve_is_reproducible(self):
        source = self.graph_file('er.txt', generate_er(6, 0.4, seed=3))
        target = self.graph_file('c2.txt', generate_chimera(ChimeraSpec(2)))
        model_path = self.tmp / 'm.json'
        self.run_command('gen', 'ising', '--graph', source, '--seed', '3', '--out', str(model_path))
        out = self.tmp / 'solve.json'
        args = ('solve', '--ising', str(model_path), '--target', target, '--prefactor', '1.0',
                '--reads', '200', '--sweeps', '200', '--tries', '4', '--seed', '5', '--out', str(out))
        self.run_command(*args)
        self.assertTrue(json.loads(out.read_text())['success'])
        first = file_digest(out)
        self.run_command(*args)
        self.assertEqual(file_digest(out), first)
        self.assertEqual(verify(self.tmp / 'solve.manifest.json'), [])

    def test_embedding_failure_exits_3(self):
        source = self.graph_file('k9.txt', Graph.complete(9))
        self.run_command('gen', 'ising', '--graph', source, '--out', str(self.tmp / 'm.json'))
        target = self.graph_file('c2.txt', generate_chimera(ChimeraSpec(2)))
        out = StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command('solve', '--ising', str(self.tmp / 'm.json'), '--target', target, '--algo', 'clique',
                         '--reads', '5', '--out', str(self.tmp / 's.json'), stdout=out, stderr=StringIO())
        self.assertEqual(ctx.exception.returncode, 3)
        outcome = json.loads(out.getvalue())
        self.assertFalse(outcome['success'])
        self.assertTrue(outcome['reason'])
        self.assertNotIn('wall_time', outcome)

    def test_malformed_ising_file(self):
        bad = self.tmp / 'm.json'
        bad.write_text('{"n": 2, "h": {"0": 1.0}, "J": []}')
        target = self.graph_file('c1.txt', generate_chimera(ChimeraSpec(1)))
        self.assertExitCode(5, 'solve', '--ising', str(bad), '--target', target)


class BenchCommandTests(CommandTestMixin, SimpleTestCase):
    def write_config(self, text):
        path = self.tmp / 'bench.env'
        path.write_text(text)
        return str(path)

    def test_rq2_tables_and_digests(self):
        config = self.write_config(
            "SIZES=6,10\nDENSITIES=0.3,0.6\nTRIAL_COUNT=2\nCHIMERA_M=2\nHARDWARE_NATIVE=false\nMAX_PASSES=30\n"
        )
        out_dir = self.tmp / 'rq2'
        self.run_command('bench', 'rq2', '--config', config, '--out-dir', str(out_dir))
        lines = (out_dir / 'boundary_map.csv').read_text().splitlines()
        self.assertEqual(len(lines), 1 + 2 * 2)
        manifest = json.loads((out_dir / 'manifest.json').read_text())
        self.assertIn('ce_baseline.csv', manifest['digests'])
        self.assertEqual(manifest['base_seed'], 0)
        self.assertEqual(manifest['config']['sizes'], [6, 10])

        rerun = self.tmp / 'rq2-again'
        self.run_command('bench', 'rq2', '--config', config, '--out-dir', str(rerun), '--jobs', '2')
        again = json.loads((rerun / 'manifest.json').read_text())
        for name, digest in manifest['digests'].items():
            if name not in ('time_grid.csv', 'ce_timing.csv'):
                self.assertEqual(again['digests'][name], digest, name)

    def test_rq1_tables(self):
        config = self.write_config(
            "SIZES=6\nDENSITIES=0.5\nEMBEDDINGS_PER_PROBLEM=2\nPATIENCE_VALUES=0,3\nPREFACTORS=0.5,1.0\n"
            "READS=10\nSWEEPS=10\nCHIMERA_M=2\nREFERENCE_RESTARTS=1\n"
        )
        self.run_command('bench', 'rq1a', '--config', config, '--out-dir', str(self.tmp / 'a'))
        self.assertEqual(len((self.tmp / 'a' / 'rq1_general.csv').read_text().splitlines()), 3)
        self.run_command('bench', 'rq1b', '--config', config, '--out-dir', str(self.tmp / 'b'))
        self.assertEqual(len((self.tmp / 'b' / 'rq1_stressed.csv').read_text().splitlines()), 5)
        self.assertTrue((self.tmp / 'b' / 'rq1_slopes.csv').exists())

    def test_config_errors(self):
        self.assertExitCode(5, 'bench', 'rq2', '--config', str(self.tmp / 'missing.env'))
        self.assertExitCode(5, 'bench', 'rq2', '--config', self.write_config("SIZES=0\n"))
        self.assertExitCode(5, 'bench', 'rq1b', '--config', self.write_config("SIZES=6,8\nDENSITIES=0.5\n"),
                            '--out-dir', str(self.tmp / 'x'))


class ReportCommandTests(CommandTestMixin, SimpleTestCase):
    def csv_file(self, text):
        path = self.tmp / 'table.csv'
        path.write_text(text)
        return str(path)

    def test_heatmap_has_one_cell_per_row(self):
        table = self.csv_file("size,density,probability\n8,0.1,1.0\n8,0.5,0.5\n12,0.1,0.75\n12,0.5,0.0\n")
        out = self.tmp / 'map.svg'
        self.run_command('report', 'heatmap', '--in', table, '--x', 'size', '--y', 'density',
                         '--value', 'probability', '--out', str(out))
        svg = out.read_text()
        self.assertTrue(svg.startswith('<?xml'))
        self.assertIn('viewBox="0 0 900 600"', svg)
        self.assertIn('probability', svg)
        fig = plot('heatmap', read_table(Path(table)), 'size', 'density', value='probability')
        ax = fig.axes[0]
        self.assertEqual(sorted(t.get_text() for t in ax.texts), ['0', '0.5', '0.75', '1'])
        self.assertEqual([t.get_text() for t in ax.get_xticklabels()], ['8', '12'])
        self.assertEqual([t.get_text() for t in ax.get_yticklabels()], ['0.5', '0.1'])

    def test_blank_values_are_left_empty(self):
        table = self.csv_file("size,density,acl\n8,0.1,1.5\n8,0.5,\n")
        out = self.tmp / 'map.svg'
        self.run_command('report', 'heatmap', '--in', table, '--x', 'size', '--y', 'density',
                         '--value', 'acl', '--out', str(out))
        self.assertTrue(out.exists())
        fig = plot('heatmap', read_table(Path(table)), 'size', 'density', value='acl')
        self.assertEqual([t.get_text() for t in fig.axes[0].texts], ['1.5'])

    def test_scatter_overlay_passes_through_the_endpoints(self):
        table = self.csv_file("acl,error\n0,1\n1,3\n2,5\n")
        out = self.tmp / 'scatter.svg'
        self.run_command('report', 'scatter', '--in', table, '--x', 'acl', '--y', 'error', '--ols', '--out', str(out))
        svg = out.read_text()
        self.assertIn('id="points"', svg)
        self.assertIn('id="ols"', svg)
        ax = plot('scatter', read_table(Path(table)), 'acl', 'error', with_ols=True).axes[0]
        fit = next(artist for artist in ax.lines if artist.get_gid() == 'ols')
        self.assertEqual(list(fit.get_xdata()), [0.0, 2.0])
        for got, wanted in zip(fit.get_ydata(), [1.0, 5.0]):
            self.assertAlmostEqual(got, wanted, delta=1e-9)
        self.assertEqual(len(ax.collections[0].get_offsets()), 3)

    def test_line_plot_draws_a_box_per_x(self):
        table = self.csv_file("size,acl\n8,1.0\n8,1.5\n8,2.0\n12,2.0\n12,2.5\n16,3.0\n")
        out = self.tmp / 'line.svg'
        self.run_command('report', 'line', '--in', table, '--x', 'size', '--y', 'acl', '--out', str(out))
        svg = out.read_text()
        for i in range(3):
            self.assertIn(f'id="box-{i}"', svg)
        self.assertNotIn('id="box-3"', svg)
        self.assertIn('id="medians"', svg)
        ax = plot('line', read_table(Path(table)), 'size', 'acl').axes[0]
        medians = next(artist for artist in ax.lines if artist.get_gid() == 'medians')
        self.assertEqual(list(medians.get_ydata()), [1.5, 2.25, 3.0])

    def test_rendering_is_byte_identical(self):
        table = self.csv_file("acl,error\n0,1\n1,3\n2,5\n")
        first, second = self.tmp / 'a.svg', self.tmp / 'b.svg'
        for out in (first, second):
            self.run_command('report', 'scatter', '--in', table, '--x', 'acl', '--y', 'error', '--ols',
                             '--out', str(out))
        self.assertEqual(file_digest(first), file_digest(second))
        self.assertNotIn('<dc:date>', first.read_text())

    def test_report_errors(self):
        table = self.csv_file("size,acl\n8,1.0\n")
        self.assertExitCode(2, 'report', 'scatter', '--in', table, '--x', 'size', '--y', 'nope')
        self.assertExitCode(2, 'report', 'heatmap', '--in', table, '--x', 'size', '--y', 'acl')
        self.assertExitCode(5, 'report', 'scatter', '--in', self.csv_file(""), '--x', 'size', '--y', 'acl')
        self.assertExitCode(5, 'report', 'line', '--in', str(self.tmp / 'missing.csv'), '--x', 'a', '--y', 'b')


class RunRecordTests(CommandTestMixin, TestCase):
    def test_manifest_is_recorded_when_enabled(self):
        with override_settings(MINOR_EMBEDDING={**settings.MINOR_EMBEDDING, 'RECORD_RUNS': True}):
            self.run_command('gen', 'er', '--n', '6', '--p', '0.5', '--seed', '9', '--out', str(self.tmp / 'g.txt'))
        record = RunRecord.objects.get()
        self.assertEqual(record.command, RunRecord.Command.GEN)
        self.assertEqual(record.arguments, 'er')
        self.assertEqual(record.base_seed, 9)
        self.assertEqual(record.digests, {'g.txt': file_digest(self.tmp / 'g.txt')})
        self.assertGreaterEqual(record.duration, 0.0)
        self.assertIn('gen er', str(record))

    def test_nothing_is_recorded_by_default(self):
        with override_settings(MINOR_EMBEDDING={**settings.MINOR_EMBEDDING, 'RECORD_RUNS': False}):
            self.run_command('gen', 'chimera', '--m', '1', '--out', str(self.tmp / 'c1.txt'))
        self.assertEqual(RunRecord.objects.count(), 0)
