"""Chart rendering for the experiment CSV schema.

Consumes only the public CSV format written by the phaseshadow CLI;
the estimation toolkit itself is not imported.
"""

from .render import FIGURE_KINDS, PlotSpec, render
from .reader import SCHEMA, read_rows

__all__ = ["FIGURE_KINDS", "PlotSpec", "render", "read_rows", "SCHEMA"]
