import json
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from cli.files import EXIT_EMBEDDING_FAILED, output_dir, read_clique_cache, read_graph, write_json
from cli.manifest import RunManifest, config_echo, manifest_path_for
from embedding.core import EmbeddingError, metrics, valid_solution_fraction
from embedding.embedders import CliqueEmbedder, GreedyEmbedder, get_embedder
from embedding.greedy import embed_probability

logger = logging.getLogger(__name__)


def greedy_options(options):
    defaults = settings.MINOR_EMBEDDING
    patience = options['patience']
    return dict(
        tries=options['tries'],
        chain_length_patience=defaults['CHAIN_LENGTH_PATIENCE'] if patience is None else patience,
        max_passes=options['max_passes'],
        penalty_base=defaults['PENALTY_BASE'],
        seed=options['seed'],
        timeout=options['timeout'],
    )


def add_embedder_arguments(parser):
    parser.add_argument('--target', required=True, help="target edge list")
    parser.add_argument('--algo', choices=['greedy', 'clique'], default='greedy')
    parser.add_argument('--patience', type=int, help="chain-length patience of the greedy embedder")
    parser.add_argument('--tries', type=int, default=1)
    parser.add_argument('--max-passes', type=int, default=1000)
    parser.add_argument('--timeout', type=float, help="wall-clock budget in seconds")
    parser.add_argument('--cache', help="clique cache written by 'gen clique-cache'")
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--out')


def build_embedder(options):
    try:
        if options['algo'] == CliqueEmbedder.name:
            embedder = get_embedder(CliqueEmbedder.name)
            if options['cache']:
                embedder.add_cache(read_clique_cache(options['cache']))
            return embedder
        return get_embedder(GreedyEmbedder.name, **greedy_options(options))
    except ValueError as exc:
        raise CommandError(str(exc), returncode=2)


class Command(BaseCommand):
    help = "Embed a source graph into a target graph"

    def add_arguments(self, parser):
        parser.add_argument('--source', required=True, help="source edge list")
        add_embedder_arguments(parser)
        parser.add_argument('--trials', type=int, default=0,
                            help="also estimate the greedy success probability over this many seeds")

    def handle(self, *args, **options):
        manifest = RunManifest('embed', arguments=options['algo'], config=config_echo(options),
                               base_seed=options['seed'])
        source = read_graph(options['source'])
        target = read_graph(options['target'])
        embedder = build_embedder(options)
        try:
            outcome = embedder.embed(source, target, options['seed'])
        except EmbeddingError as exc:
            raise CommandError(str(exc), returncode=EXIT_EMBEDDING_FAILED)
        out = options['out'] or output_dir() / f"embedding_{options['algo']}_s{options['seed']}.json"

        payload = {'algo': embedder.name, 'outcome': outcome.as_dict(timing=False)}
        if outcome.success:
            stats = metrics(source, outcome.embedding)
            payload.update(json.loads(outcome.embedding.to_json()))
            payload['metrics'] = dict(
                stats.as_dict(),
                valid_solution_fraction=valid_solution_fraction(len(source.node_ids), stats.acl),
            )
        if options['trials'] and options['algo'] == 'greedy':
            payload['success_probability'] = embed_probability(
                source, target, embedder.params, trials=options['trials'],
            )
        logger.info(f"{embedder.name} embedding took {outcome.wall_time:.3f}s")

        out = write_json(out, payload)
        manifest.add_output(out)
        manifest.write(manifest_path_for(out))
        if not outcome.success:
            self.stdout.write(json.dumps(payload['outcome'], sort_keys=True))
            raise CommandError(f"embedding failed: {outcome.reason}", returncode=EXIT_EMBEDDING_FAILED)
        self.stdout.write(f"{out}: {stats.n_qubits} qubits, acl {stats.acl:g}")
