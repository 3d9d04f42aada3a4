"""
Common utility functions used across locinfo
"""

import json
import logging
import math
import sys
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any, List, Optional

import numpy as np

from ..config import LOG_DIR, LOG_FORMAT, LOG_LEVEL, LOG_TO_FILE


def setup_logger(name: str, log_file: Optional[str] = None) -> logging.Logger:
    """
    Setup a logger with a stderr console handler and an optional file handler

    Args:
        name: Logger name
        log_file: Optional log file name (saved in LOG_DIR when LOG_TO_FILE is on)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))

    # Avoid duplicate handlers
    if logger.handlers:
        return logger

    # Console handler (stderr)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(console_handler)

    if log_file and LOG_TO_FILE:
        LOG_DIR.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(LOG_DIR / log_file)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger


def load_json(file_path: Path) -> Any:
    """
    Load data from JSON file

    Args:
        file_path: Path to JSON file

    Returns:
        Loaded JSON data

    Raises:
        FileNotFoundError: If file doesn't exist
        json.JSONDecodeError: If file is not valid JSON
    """
    with open(file_path, 'r', encoding='utf-8') as f:
        return json.load(f)


def to_jsonable(value: Any) -> Any:
    """
    Convert dataclasses, numpy scalars/arrays and non-finite floats into
    plain JSON values. +inf becomes the string "inf"; NaN becomes null.
    """
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def save_json(data: Any, file_path: Path, indent: int = 2) -> None:
    """
    Save data to JSON file

    Args:
        data: Data to save
        file_path: Path to output JSON file
        indent: JSON indentation (default: 2)
    """
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, 'w', encoding='utf-8') as f:
        json.dump(to_jsonable(data), f, indent=indent, ensure_ascii=False)


def parameter_grid(start: float, stop: float, step: float) -> List[float]:
    """
    Inclusive grid start, start+step, ... up to stop.

    Points are computed as start + k*step and rounded to 12 decimals, so
    the same triple always yields the same floats.

    Raises:
        ValueError: If step is not positive or stop < start
    """
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"empty range: from {start} > to {stop}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def format_seconds(seconds: float) -> str:
    """Format an elapsed time for log lines."""
    if seconds < 1.0:
        return f"{seconds * 1000:.1f} ms"
    return f"{seconds:.2f} seconds"
