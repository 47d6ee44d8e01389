"""CSV output for experiment tables."""
import csv
import io
import logging
from pathlib import Path

logger = logging.getLogger(__name__)


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def table_columns(rows):
    """Union of row keys, in order of first appearance."""
    columns = {}
    for row in rows:
        for key in row:
            columns.setdefault(key, None)
    return list(columns)


def format_table(rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    columns = table_columns(rows)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def write_table(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_table(rows), encoding='utf-8')
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def read_table(path):
    """Rows of a CSV file as dicts of strings."""
    with open(path, newline='', encoding='utf-8') as handle:
        return list(csv.DictReader(handle))
