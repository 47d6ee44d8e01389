from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from bench.tables import read_table
from cli.files import io_error, write_text
from cli.manifest import RunManifest, config_echo, manifest_path_for
from cli.plots import PlotError, UnknownColumnError, render


class Command(BaseCommand):
    help = "Render a result CSV as an SVG heatmap, scatter or box/line plot"

    def add_arguments(self, parser):
        parser.add_argument('kind', choices=['heatmap', 'scatter', 'line'])
        parser.add_argument('--in', dest='input', required=True, help="CSV table with a header row")
        parser.add_argument('--x', required=True)
        parser.add_argument('--y', required=True)
        parser.add_argument('--value', help="cell value column of a heatmap")
        parser.add_argument('--ols', action='store_true', help="overlay a least-squares line on a scatter plot")
        parser.add_argument('--title', default='')
        parser.add_argument('--out', help="SVG file (default: next to the input)")

    def handle(self, *args, **options):
        manifest = RunManifest('report', arguments=options['kind'], config=config_echo(options))
        source = Path(options['input'])
        try:
            rows = read_table(source)
        except (OSError, UnicodeDecodeError) as exc:
            raise io_error(f"cannot read {source}: {exc}")
        try:
            svg = render(
                options['kind'], rows, options['x'], options['y'],
                value=options['value'], with_ols=options['ols'], title=options['title'],
            )
        except UnknownColumnError as exc:
            raise CommandError(str(exc), returncode=2)
        except PlotError as exc:
            if options['kind'] == 'heatmap' and not options['value']:
                raise CommandError(str(exc), returncode=2)
            raise io_error(f"cannot plot {source}: {exc}")
        out = write_text(options['out'] or source.with_suffix('.svg'), svg)
        manifest.add_output(out)
        manifest.write(manifest_path_for(out))
        self.stdout.write(str(out))
