from .curves import CSV_COLUMNS, CurveFile, read_curves, write_curves
from .emdb import FetchError, fetch_emdb
from .mrc import (
    BadMagicError,
    MrcError,
    MrcHeader,
    TruncatedError,
    UnsupportedModeError,
    read_mrc,
    read_mrc_with_header,
    write_mrc,
)
from .plot import render_decomposition, render_plot

__all__ = [
    "CSV_COLUMNS", "CurveFile", "read_curves", "write_curves",
    "FetchError", "fetch_emdb",
    "BadMagicError", "MrcError", "MrcHeader", "TruncatedError", "UnsupportedModeError",
    "read_mrc", "read_mrc_with_header", "write_mrc",
    "render_decomposition", "render_plot",
]
