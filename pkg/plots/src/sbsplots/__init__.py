"""Offline figure scripts for simulation CSV outputs.

Strictly downstream consumers: every number plotted comes straight from the
CSV, no recomputation. Figures are deterministic (fixed style, no embedded
timestamps), emitted as both PNG and SVG.
"""

from .figures import FIGURE_KINDS, PlotJob, render
from .io import MissingColumnError, read_columns

__all__ = ["FIGURE_KINDS", "PlotJob", "render", "MissingColumnError", "read_columns"]

__version__ = "0.1.0"
