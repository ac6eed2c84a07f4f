"""Small numerical summaries used by the plot views and acceptance checks."""

from __future__ import annotations

import math

import numpy as np


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx = np.log(np.asarray(xs, float))
    ly = np.log(np.asarray(ys, float))
    if len(lx) < 2:
        raise ValueError("need at least two points for a slope")
    return float(np.polyfit(lx, ly, 1)[0])


def crossing_point(xs, lower_d, higher_d) -> float | None:
    """Physical rate where two logical-rate curves cross.

    ``lower_d`` and ``higher_d`` are the logical rates of the smaller and the
    larger code at increasing ``xs``. Below threshold the larger code wins.
    The first sign change of ``log(higher/lower)`` is interpolated
    linearly in ``log x``. Returns ``None`` without a sign change or when a
    rate is zero at the bracketing points.
    """
    xs = list(xs)
    diff = []
    for a, b in zip(lower_d, higher_d):
        diff.append(math.log(b / a) if a > 0 and b > 0 else None)
    for k in range(len(xs) - 1):
        u, v = diff[k], diff[k + 1]
        if u is None or v is None:
            continue
        if u == 0:
            return float(xs[k])
        if u < 0 <= v:
            t = u / (u - v)
            return float(math.exp(math.log(xs[k]) + t * (math.log(xs[k + 1]) - math.log(xs[k]))))
    return None


def combined_sigma(se_a: float, se_b: float) -> float:
    return math.hypot(se_a, se_b)
