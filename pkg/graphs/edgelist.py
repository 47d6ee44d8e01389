"""Plain-text edge lists.

One ``u v`` pair per line, ``#`` comments, and an optional ``n <count>``
header that declares nodes ``0..count-1``. A line holding a single id
declares one isolated node, which lets graphs with gaps in their ids (broken
targets) round-trip.
"""
import logging
import re
from pathlib import Path

from .topology import Graph, GraphError

logger = logging.getLogger(__name__)


class EdgeListError(GraphError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


def _is_count(token):
    # ASCII only; str.isdigit also accepts superscripts that int() rejects
    return re.fullmatch(r"[0-9]+", token) is not None


def parse_edge_list(text):
    declared = None
    nodes = []
    edges = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        parts = line.split()
        if parts[0] == 'n':
            if declared is not None or edges or nodes:
                raise EdgeListError("node count header must come first", line_number)
            if len(parts) != 2 or not _is_count(parts[1]):
                raise EdgeListError(f"malformed header {line!r}", line_number)
            declared = int(parts[1])
            continue
        if len(parts) > 2 or not all(_is_count(p) for p in parts):
            raise EdgeListError(f"expected two non-negative integers, got {line!r}", line_number)
        ids = [int(p) for p in parts]
        if declared is not None and max(ids) >= declared:
            raise EdgeListError(f"endpoint {max(ids)} >= declared n {declared}", line_number)
        if len(ids) == 1:
            nodes.append(ids[0])
            continue
        u, v = ids
        if u == v:
            raise EdgeListError(f"self-loop on node {u}", line_number)
        edges.append((u, v))
    if declared is not None:
        nodes.extend(range(declared))
    return Graph.from_edges(edges, nodes)


def format_edge_list(g):
    lines = []
    if g.node_ids and g.node_ids == tuple(range(len(g.node_ids))):
        lines.append(f"n {len(g.node_ids)}")
    else:
        lines.extend(str(n) for n in g.node_ids if not g.adjacency[n])
    lines.extend(f"{u} {v}" for u, v in g.sorted_edges)
    return "\n".join(lines) + "\n"


def load_edge_list(path):
    g = parse_edge_list(Path(path).read_text(encoding='utf-8'))
    logger.debug(f"Loaded {len(g.node_ids)} nodes and {len(g.edges)} edges from {path}")
    return g


def save_edge_list(g, path):
    Path(path).write_text(format_edge_list(g), encoding='utf-8')
