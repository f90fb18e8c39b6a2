"""Offline figure rendering for qrmux sweep result CSVs."""

from .render import (
    PLOT_KINDS,
    STYLE_VERSION,
    PlotSchemaError,
    PlotSpec,
    render,
)

__version__ = "0.1.0"

__all__ = ["PLOT_KINDS", "STYLE_VERSION", "PlotSchemaError", "PlotSpec", "render"]
