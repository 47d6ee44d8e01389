"""Small statistics kernels: least squares, rank correlation, box summaries."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r: float
    n_points: int


@dataclass(frozen=True)
class BoxStats:
    median: float
    q1: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    outliers: tuple

    def as_dict(self):
        return {
            'median': self.median,
            'q1': self.q1,
            'q3': self.q3,
            'whisker_lo': self.whisker_lo,
            'whisker_hi': self.whisker_hi,
            'n_outliers': len(self.outliers),
        }


def ols(points):
    """Closed-form least squares of y on x. ``r`` is 0.0 when y is constant."""
    points = list(points)
    if len(points) < 2:
        raise DegenerateInputError("least squares needs at least two points")
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = float(dx @ dx)
    if sxx == 0:
        raise DegenerateInputError("all x values are equal")
    sxy = float(dx @ dy)
    syy = float(dy @ dy)
    slope = sxy / sxx
    r = sxy / math.sqrt(sxx * syy) if syy > 0 else 0.0
    return RegressionFit(
        slope=slope,
        intercept=float(ys.mean()) - slope * float(xs.mean()),
        r=max(-1.0, min(1.0, r)),
        n_points=len(points),
    )


def spearman(xs, ys):
    """Pearson correlation of mid-ranks."""
    if len(xs) != len(ys):
        raise DegenerateInputError("series differ in length")
    if len(xs) < 2:
        raise DegenerateInputError("rank correlation needs at least two points")
    rx = rankdata(xs, method='average')
    ry = rankdata(ys, method='average')
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denominator = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denominator == 0:
        raise DegenerateInputError("a constant series has no rank correlation")
    return max(-1.0, min(1.0, float(dx @ dy) / denominator))


def box_stats(values):
    """Quartiles by linear interpolation; whiskers at the furthest data points
    within 1.5 IQR of the box."""
    data = np.sort(np.asarray(list(values), dtype=float))
    if data.size == 0:
        raise DegenerateInputError("box summary needs at least one value")
    q1, median, q3 = np.percentile(data, [25, 50, 75], method='linear')
    iqr = q3 - q1
    low_fence = q1 - 1.5 * iqr
    high_fence = q3 + 1.5 * iqr
    inside = data[(data >= low_fence) & (data <= high_fence)]
    outliers = data[(data < low_fence) | (data > high_fence)]
    return BoxStats(
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        whisker_lo=float(inside.min()),
        whisker_hi=float(inside.max()),
        outliers=tuple(outliers.tolist()),
    )
