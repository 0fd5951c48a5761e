"""Offline figure generation from simulation CSV artifacts."""

from report_plots.figures import KINDS, PlotSpec, build, render
from report_plots.schema import EmptyInputError, SchemaError

__all__ = ["KINDS", "PlotSpec", "build", "render", "SchemaError",
           "EmptyInputError"]
__version__ = "0.1.0"
