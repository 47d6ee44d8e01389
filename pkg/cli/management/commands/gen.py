import logging

from django.core.management.base import BaseCommand, CommandError

from bench.tables import format_table
from cli.files import output_dir, read_graph, write_json, write_text
from cli.manifest import RunManifest, config_echo, manifest_path_for
from embedding.clique import acl_line, preprocess
from graphs.edgelist import format_edge_list
from graphs.topology import ChimeraSpec, GraphError, break_graph, generate_chimera, generate_er, generate_hardware_native
from ising.model import random_ising
from ising.serializers import dump_ising

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Generate target topologies, source graphs, Ising instances and clique caches"

    def add_arguments(self, parser):
        sub = parser.add_subparsers(dest='kind', required=True)

        chimera = sub.add_parser('chimera', help="ideal Chimera C_m edge list")
        chimera.add_argument('--m', type=int, required=True)

        er = sub.add_parser('er', help="seeded Erdős-Rényi graph G(n, p)")
        er.add_argument('--n', type=int, required=True)
        er.add_argument('--p', type=float, required=True)
        er.add_argument('--seed', type=int, default=0)

        hn = sub.add_parser('hn', help="hardware-native subgraph of a target")
        hn.add_argument('--target', required=True)
        hn.add_argument('--n', type=int, required=True)
        hn.add_argument('--seed', type=int, default=0)

        ising = sub.add_parser('ising', help="random Ising model on a source graph")
        ising.add_argument('--graph', required=True)
        ising.add_argument('--seed', type=int, default=0)

        broken = sub.add_parser('break', help="drop a share of target nodes and edges")
        broken.add_argument('--target', required=True)
        broken.add_argument('--nodes', type=float, default=0.0)
        broken.add_argument('--edges', type=float, default=0.0)
        broken.add_argument('--seed', type=int, default=0)

        cache = sub.add_parser('clique-cache', help="clique embedding cache for a Chimera target")
        cache.add_argument('--target', required=True)

        for subparser in (chimera, er, hn, ising, broken, cache):
            subparser.add_argument('--out', help="output file (default: under the output directory)")

    def handle(self, *args, **options):
        kind = options['kind']
        manifest = RunManifest('gen', arguments=kind, config=config_echo(options), base_seed=options.get('seed'))
        try:
            outputs = getattr(self, f"gen_{kind.replace('-', '_')}")(options)
        except (GraphError, ValueError) as exc:
            raise CommandError(str(exc), returncode=2)
        for path in outputs:
            manifest.add_output(path)
        manifest.write(manifest_path_for(outputs[0]))
        for path in outputs:
            self.stdout.write(str(path))

    def _out(self, options, default_name):
        return options['out'] or output_dir() / default_name

    def gen_chimera(self, options):
        g = generate_chimera(ChimeraSpec(options['m']))
        return [write_text(self._out(options, f"chimera_m{options['m']}.txt"), format_edge_list(g))]

    def gen_er(self, options):
        g = generate_er(options['n'], options['p'], options['seed'])
        name = f"er_n{options['n']}_p{options['p']:g}_s{options['seed']}.txt"
        return [write_text(self._out(options, name), format_edge_list(g))]

    def gen_hn(self, options):
        target = read_graph(options['target'])
        g, mapping = generate_hardware_native(target, options['n'], options['seed'])
        out = write_text(self._out(options, f"hn_n{options['n']}_s{options['seed']}.txt"), format_edge_list(g))
        mapping_path = write_json(
            out.with_name(f"{out.stem}.mapping.json"),
            {'chains': {str(i): [node] for i, node in sorted(mapping.items())}},
        )
        return [out, mapping_path]

    def gen_ising(self, options):
        model = random_ising(read_graph(options['graph']), options['seed'])
        return [write_text(self._out(options, f"ising_s{options['seed']}.json"), dump_ising(model))]

    def gen_break(self, options):
        target = read_graph(options['target'])
        g = break_graph(target, options['nodes'], options['edges'], options['seed'])
        name = f"broken_{options['nodes']:g}_{options['edges']:g}_s{options['seed']}.txt"
        return [write_text(self._out(options, name), format_edge_list(g))]

    def gen_clique_cache(self, options):
        target = read_graph(options['target'])
        cache = preprocess(target)
        out = write_text(self._out(options, f"clique_cache_m{cache.m}.json"), cache.to_json() + "\n")
        rows = [{'n': n, 'acl': acl} for n, acl in acl_line(cache)]
        return [out, write_text(out.with_name(f"{out.stem}.acl.csv"), format_table(rows))]
