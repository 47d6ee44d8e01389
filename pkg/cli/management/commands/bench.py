import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from bench.config import ExperimentConfig, load_config
from bench.experiments import run_rq1_general, run_rq1_stressed, run_rq2
from bench.tables import write_table
from cli.files import io_error, output_dir
from cli.manifest import RunManifest
from graphs.topology import GraphError

logger = logging.getLogger(__name__)

RQ2_TABLES = (
    'boundary_map', 'acl_grid', 'dispersion_grid', 'time_grid', 'acl_difference',
    'ce_baseline', 'ce_timing', 'box_by_size', 'box_by_density',
)


class Command(BaseCommand):
    help = "Run one of the embedding-quality experiments and write its tables as CSV"

    def add_arguments(self, parser):
        parser.add_argument('experiment', choices=['rq1a', 'rq1b', 'rq2'])
        parser.add_argument('--config', help="flat KEY=value config file (desk defaults when omitted)")
        parser.add_argument('--out-dir', help="directory for the CSV tables and the manifest")
        parser.add_argument('--jobs', type=int, default=1)

    def load(self, path):
        if path is None:
            return ExperimentConfig()
        if not Path(path).is_file():
            raise io_error(f"config file not found: {path}")
        try:
            return load_config(path)
        except ValidationError as exc:
            raise io_error(f"invalid config file {path}: {exc.detail}")

    def handle(self, *args, **options):
        experiment = options['experiment']
        if options['jobs'] < 1:
            raise CommandError("--jobs must be >= 1", returncode=2)
        cfg = self.load(options['config'])
        out_dir = Path(options['out_dir']) if options['out_dir'] else output_dir() / experiment
        manifest = RunManifest(
            'bench', arguments=experiment,
            config=dict(cfg.echo(), jobs=options['jobs']),
            base_seed=cfg.base_seed,
        )
        logger.info(f"Running {experiment} into {out_dir}")
        try:
            tables = self.run(experiment, cfg, options['jobs'])
        except (GraphError, OSError) as exc:
            raise io_error(f"cannot build the target graph: {exc}")
        except ValueError as exc:
            raise io_error(f"invalid config: {exc}")

        try:
            for name, rows in tables.items():
                path = write_table(out_dir / f"{name}.csv", rows)
                manifest.add_output(path)
                self.stdout.write(f"{path}: {len(rows)} rows")
            manifest.write(out_dir / 'manifest.json')
        except OSError as exc:
            raise io_error(f"cannot write results to {out_dir}: {exc}")

    def run(self, experiment, cfg, jobs):
        if experiment == 'rq1a':
            return {'rq1_general': run_rq1_general(cfg, jobs)}
        if experiment == 'rq1b':
            result = run_rq1_stressed(cfg, jobs)
            return {'rq1_stressed': result['rows'], 'rq1_slopes': result['slopes']}
        tables = run_rq2(cfg, jobs=jobs)
        return {name: tables[name] for name in RQ2_TABLES}
