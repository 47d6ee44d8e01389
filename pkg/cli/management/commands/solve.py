import json
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from cli.files import EXIT_EMBEDDING_FAILED, output_dir, read_graph, read_ising, write_json, write_text
from cli.management.commands.embed import add_embedder_arguments, build_embedder
from cli.manifest import RunManifest, config_echo, manifest_path_for
from embedding.core import EmbeddingError
from ising.solvers import ReferenceBudget
from minorbench.seeds import derive_seed
from parameterize.chains import ChainStrengthSpec
from parameterize.pipeline import solve_pipeline

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Embed, parameterize, sample and unembed an Ising model"

    def add_arguments(self, parser):
        parser.add_argument('--ising', required=True, help="Ising model JSON")
        add_embedder_arguments(parser)
        parser.add_argument('--prefactor', type=float, help="UTC chain-strength prefactor")
        parser.add_argument('--chain-strength', type=float, help="fixed chain strength, overrides --prefactor")
        parser.add_argument('--reads', type=int, default=1000)
        parser.add_argument('--sweeps', type=int)

    def handle(self, *args, **options):
        defaults = settings.MINOR_EMBEDDING
        manifest = RunManifest('solve', arguments=options['algo'], config=config_echo(options),
                               base_seed=options['seed'])
        model = read_ising(options['ising'])
        target = read_graph(options['target'])
        embedder = build_embedder(options)
        sweeps = options['sweeps'] or defaults['SA_SWEEPS']
        try:
            if options['chain_strength'] is not None:
                chain_strength = ChainStrengthSpec(mode='fixed', fixed_value=options['chain_strength'])
            else:
                chain_strength = ChainStrengthSpec(prefactor=options['prefactor'] or defaults['UTC_PREFACTOR'])
        except ValueError as exc:
            raise CommandError(str(exc), returncode=2)
        budget = ReferenceBudget(
            restarts=defaults['REFERENCE_RESTARTS'],
            sweeps=sweeps,
            beta_range=defaults['SA_BETA_RANGE'],
            exact_limit=defaults['EXACT_LIMIT'],
            seed=derive_seed(options['seed'], 'reference'),
        )
        try:
            result = solve_pipeline(
                model, target, embedder, chain_strength, reads=options['reads'], seed=options['seed'],
                sweeps=sweeps, beta_range=defaults['SA_BETA_RANGE'], budget=budget,
            )
        except EmbeddingError as exc:
            raise CommandError(str(exc), returncode=EXIT_EMBEDDING_FAILED)
        except ValueError as exc:
            raise CommandError(str(exc), returncode=2)

        out = options['out'] or output_dir() / f"solve_{options['algo']}_s{options['seed']}.json"
        out = write_json(out, result.as_dict(timing=False))
        manifest.add_output(out)
        if result.success:
            reads = write_text(out.with_name(f"{out.stem}.reads.csv"), result.reads_csv())
            manifest.add_output(reads)
        manifest.write(manifest_path_for(out))
        if not result.success:
            self.stdout.write(json.dumps(result.outcome.as_dict(timing=False), sort_keys=True))
            raise CommandError(f"embedding failed: {result.outcome.reason}", returncode=EXIT_EMBEDDING_FAILED)
        summary = result.summary
        self.stdout.write(
            f"{out}: min energy {summary['min_source_energy']:g}, "
            f"reference {result.reference_energy:g}, "
            f"median chain breaks {summary['median_chain_break_fraction']:g}"
        )
