"""Reading inputs and writing outputs for the management commands.

Unreadable or malformed inputs become ``CommandError`` with the I/O exit code.
"""
import json
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError
from rest_framework.exceptions import ValidationError

from embedding.clique import CliqueCache
from embedding.core import EmbeddingError
from embedding.serializers import CliqueCacheSerializer, embedding_from_dict
from graphs.edgelist import load_edge_list
from graphs.topology import GraphError
from ising.model import IsingError
from ising.serializers import load_ising

logger = logging.getLogger(__name__)

EXIT_EMBEDDING_FAILED = 3
EXIT_INVALID = 4
EXIT_IO = 5


def io_error(message):
    return CommandError(message, returncode=EXIT_IO)


def _read(path, loader, what):
    try:
        return loader(path)
    except FileNotFoundError:
        raise io_error(f"{what} file not found: {path}")
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise io_error(f"cannot read {what} file {path}: {exc}")
    except ValidationError as exc:
        raise io_error(f"invalid {what} file {path}: {exc.detail}")
    except (GraphError, IsingError, EmbeddingError) as exc:
        raise io_error(f"invalid {what} file {path}: {exc}")


def read_graph(path):
    return _read(path, load_edge_list, 'edge-list')


def read_ising(path):
    return _read(path, lambda p: load_ising(Path(p).read_text(encoding='utf-8')), 'Ising')


def read_embedding(path):
    return _read(path, lambda p: embedding_from_dict(_json(p)), 'embedding')


def read_clique_cache(path):
    def load(p):
        serializer = CliqueCacheSerializer(data=_json(p))
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data
        return CliqueCache(
            target_fingerprint=data['fingerprint'],
            m=data['m'],
            max_clique_size=data['max_clique_size'],
            master=serializer.save(),
        )

    return _read(path, load, 'clique cache')


def _json(path):
    return json.loads(Path(path).read_text(encoding='utf-8'))


def output_dir(path=None):
    return Path(path) if path else Path(settings.MINOR_EMBEDDING['OUTPUT_DIR'])


def write_text(path, text):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding='utf-8')
    except OSError as exc:
        raise io_error(f"cannot write {path}: {exc}")
    logger.info(f"Wrote {path}")
    return path


def write_json(path, payload):
    return write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
