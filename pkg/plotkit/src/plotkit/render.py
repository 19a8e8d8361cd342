"""Deterministic chart rendering for the four figure kinds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fit import least_squares_line
from .reader import Row, read_rows

FIGURE_KINDS = ("variance-vs-n", "bias-vs-pe", "timing-cuberoot", "slope-fit")

_STYLE = {
    "figure.figsize": (5.2, 3.6),
    "figure.dpi": 130,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "plotkit",
}
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"]


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    kind: str
    out_path: str

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")


def _modes(rows: list[Row]) -> list[str]:
    seen: list[str] = []
    for row in rows:
        if row.mode not in seen:
            seen.append(row.mode)
    return seen


def _variance_vs_n(ax, rows: list[Row]) -> None:
    for color, mode in zip(_COLORS, _modes(rows)):
        pts = sorted((r.n, r.variance) for r in rows if r.mode == mode)
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], "o-", color=color, label=mode)
    ax.set_xlabel("qubits")
    ax.set_ylabel("single-shot variance")
    ax.legend()


def _bias_vs_pe(ax, rows: list[Row]) -> None:
    for color, mode in zip(_COLORS, _modes(rows)):
        pts = sorted((r.p_e, r.estimate, r.stderr) for r in rows if r.mode == mode)
        ax.errorbar(
            [p[0] for p in pts],
            [p[1] for p in pts],
            yerr=[p[2] for p in pts],
            fmt="o-",
            capsize=2.5,
            color=color,
            label=mode,
        )
    ax.axhline(1.0, color="0.4", lw=0.8, ls="--")
    ax.set_xlabel("gate error rate")
    ax.set_ylabel("fidelity estimate")
    ax.legend()


def _timing_cuberoot(ax, rows: list[Row]) -> None:
    pts = sorted((r.n, r.time_ms) for r in rows)
    ax.plot([p[0] for p in pts], [p[1] ** (1.0 / 3.0) for p in pts], "o-", color=_COLORS[0])
    ax.set_xlabel("qubits")
    ax.set_ylabel("cube root of time per snapshot (ms$^{1/3}$)")


def _slope_fit(ax, rows: list[Row]) -> float:
    pts = sorted((r.p_e, math.log(r.variance)) for r in rows)
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    slope, intercept = least_squares_line(xs, ys)
    ax.plot(xs, ys, "o", color=_COLORS[0], label="measured")
    grid = np.linspace(min(xs), max(xs), 64)
    ax.plot(grid, slope * grid + intercept, "-", color=_COLORS[1],
            label=f"fit: slope {slope:.2f}")
    ax.set_xlabel("gate error rate")
    ax.set_ylabel("log variance")
    ax.legend()
    return slope


def render(spec: PlotSpec) -> Optional[float]:
    """Render the figure; slope-fit returns (and prints) the slope."""
    rows = read_rows(spec.csv_path)
    slope = None
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        if spec.kind == "variance-vs-n":
            _variance_vs_n(ax, rows)
        elif spec.kind == "bias-vs-pe":
            _bias_vs_pe(ax, rows)
        elif spec.kind == "timing-cuberoot":
            _timing_cuberoot(ax, rows)
        else:
            slope = _slope_fit(ax, rows)
        ax.set_title(f"{rows[0].experiment} ({spec.kind})")
        fig.tight_layout()
        fig.savefig(spec.out_path, metadata=_blank_metadata(spec.out_path))
        plt.close(fig)
    if slope is not None:
        print(f"slope {slope!r}")
    return slope


def _blank_metadata(out_path: str) -> dict:
    # strip writer metadata so identical input gives identical bytes
    if out_path.endswith(".png"):
        return {"Software": None}
    if out_path.endswith(".svg"):
        return {"Date": None}
    return {}
