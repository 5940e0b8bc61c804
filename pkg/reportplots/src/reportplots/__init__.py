"""reportplots: offline figures from slerho experiment CSVs."""

__version__ = "0.1.0"

from .render import PlotSpec, RenderResult, SchemaError, render  # noqa: F401
