"""Least-squares line fit used by the slope chart."""

from __future__ import annotations

import math
from typing import Sequence


def least_squares_line(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Slope and intercept minimizing squared residuals."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("need at least two points")
    xbar = math.fsum(xs) / len(xs)
    ybar = math.fsum(ys) / len(ys)
    den = math.fsum((x - xbar) ** 2 for x in xs)
    if den == 0.0:
        raise ValueError("degenerate x values")
    slope = math.fsum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / den
    return slope, ybar - slope * xbar
