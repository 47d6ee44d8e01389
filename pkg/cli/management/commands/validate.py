import json

from django.core.management.base import BaseCommand, CommandError

from cli.files import EXIT_INVALID, read_embedding, read_graph
from embedding.core import EmbeddingError, validate


class Command(BaseCommand):
    help = "Check an embedding file against its source and target graphs"

    def add_arguments(self, parser):
        parser.add_argument('--source', required=True)
        parser.add_argument('--target', required=True)
        parser.add_argument('--embedding', required=True)

    def handle(self, *args, **options):
        source = read_graph(options['source'])
        target = read_graph(options['target'])
        embedding = read_embedding(options['embedding'])
        try:
            report = validate(source, target, embedding)
        except EmbeddingError as exc:
            raise CommandError(str(exc), returncode=EXIT_INVALID)
        self.stdout.write(json.dumps(report.as_dict(), sort_keys=True))
        if not report.valid:
            raise CommandError("embedding is invalid", returncode=EXIT_INVALID)
