"""Figure rendering for ris-crs experiment CSVs."""

from .render import (DEFAULT_STYLES, FIGURE_AXES, PlotJob, SchemaError,
                     aggregate, load_rows, render)

__all__ = ["DEFAULT_STYLES", "FIGURE_AXES", "PlotJob", "SchemaError",
           "aggregate", "load_rows", "render"]
__version__ = "0.1.0"
