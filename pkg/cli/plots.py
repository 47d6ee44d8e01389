"""Heatmap, scatter and box/line plots of result tables, saved as SVG.

Figures are built on the object API (no pyplot state) and written with a
fixed hash salt and no date, so the same table always yields the same file.
"""
import io
import logging
import math

import matplotlib
import numpy as np
import seaborn as sns
from matplotlib.figure import Figure

from bench.stats import DegenerateInputError, box_stats, ols

logger = logging.getLogger(__name__)

# inches at 72 points each: a 900 x 600 SVG view box
FIGSIZE = (900 / 72, 600 / 72)
STYLE = 'white'
RC_PARAMS = {
    'svg.hashsalt': 'minorbench',
    'svg.fonttype': 'none',
}


class PlotError(ValueError):
    pass


class UnknownColumnError(PlotError):
    pass


def _number(value):
    return f"{value:g}"


def _column(rows, name):
    if name not in rows[0]:
        raise UnknownColumnError(f"unknown column {name!r}; available: {', '.join(rows[0])}")
    return name


def _float(value):
    if value in (None, ''):
        return None
    try:
        number = float(value)
    except ValueError:
        raise PlotError(f"non-numeric value {value!r}")
    if not math.isfinite(number):
        raise PlotError(f"non-finite value {value!r}")
    return number


def _points(rows, *names):
    """Rows whose named columns are all present, as float tuples."""
    if not rows:
        raise PlotError("input table is empty")
    for name in names:
        _column(rows, name)
    points = []
    for row in rows:
        values = tuple(_float(row[name]) for name in names)
        if None not in values:
            points.append(values)
    if not points:
        raise PlotError(f"no rows with values for {', '.join(names)}")
    return points


def _axes(title, x_label, y_label):
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot()
    ax.set_title(title)
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    return fig, ax


def heatmap(rows, x, y, value, title=''):
    """One annotated cell per (x, y) row with a value; blank values stay empty."""
    points = _points(rows, x, y, value)
    xs = sorted({p[0] for p in points})
    # highest y on top
    ys = sorted({p[1] for p in points}, reverse=True)
    grid = np.full((len(ys), len(xs)), np.nan)
    for px, py, pv in points:
        grid[ys.index(py), xs.index(px)] = pv
    fig, ax = _axes(title or value, x, y)
    sns.heatmap(
        grid, ax=ax, cmap='Blues', annot=True, fmt='g', linewidths=0.5,
        xticklabels=[_number(v) for v in xs], yticklabels=[_number(v) for v in ys],
        cbar_kws={'label': value},
    )
    return fig


def scatter(rows, x, y, with_ols=False, title=''):
    points = _points(rows, x, y)
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    fig, ax = _axes(title or f"{y} vs {x}", x, y)
    ax.scatter(xs, ys, s=18, color=sns.color_palette()[0], gid='points')
    if with_ols:
        try:
            fit = ols(points)
        except DegenerateInputError as exc:
            raise PlotError(f"cannot fit a line: {exc}")
        x0, x1 = min(xs), max(xs)
        ax.plot(
            [x0, x1], [fit.intercept + fit.slope * x0, fit.intercept + fit.slope * x1],
            color=sns.color_palette()[3], gid='ols',
            label=f"slope {_number(fit.slope)}, intercept {_number(fit.intercept)}, r {_number(fit.r)}",
        )
        ax.legend(loc='best')
    return fig


def line(rows, x, y, title=''):
    """Box summary of y at every distinct x, medians joined by a line."""
    points = _points(rows, x, y)
    groups = {}
    for px, py in points:
        groups.setdefault(px, []).append(py)
    xs = sorted(groups)
    summaries = []
    for px in xs:
        box = box_stats(groups[px])
        summaries.append({
            'label': _number(px),
            'med': box.median,
            'q1': box.q1,
            'q3': box.q3,
            'whislo': box.whisker_lo,
            'whishi': box.whisker_hi,
            'fliers': list(box.outliers),
        })
    positions = list(range(len(xs)))
    fig, ax = _axes(title or f"{y} by {x}", x, y)
    artists = ax.bxp(summaries, positions=positions, widths=0.5, patch_artist=True)
    for i, patch in enumerate(artists['boxes']):
        patch.set_facecolor(sns.color_palette()[0])
        patch.set_gid(f'box-{i}')
    ax.plot(positions, [s['med'] for s in summaries], color=sns.color_palette()[1], marker='o', gid='medians')
    return fig


def plot(kind, rows, x, y, value=None, with_ols=False, title=''):
    if kind == 'heatmap':
        if not value:
            raise PlotError("a heatmap needs a value column")
        return heatmap(rows, x, y, value, title)
    if kind == 'scatter':
        return scatter(rows, x, y, with_ols, title)
    if kind == 'line':
        return line(rows, x, y, title)
    raise PlotError(f"unknown plot kind {kind!r}")


def render(kind, rows, x, y, value=None, with_ols=False, title=''):
    """The plot as SVG text."""
    with sns.axes_style(STYLE), matplotlib.rc_context(RC_PARAMS):
        fig = plot(kind, rows, x, y, value=value, with_ols=with_ols, title=title)
        buffer = io.BytesIO()
        fig.savefig(buffer, format='svg', metadata={'Date': None})
    logger.debug(f"Rendered {kind} of {y} against {x}")
    return buffer.getvalue().decode('utf-8')
