"""
Utility functions for locinfo
"""

from .common import (
    setup_logger,
    load_json,
    save_json,
    to_jsonable,
    parameter_grid,
    format_seconds,
)

__all__ = [
    "setup_logger",
    "load_json",
    "save_json",
    "to_jsonable",
    "parameter_grid",
    "format_seconds",
]
