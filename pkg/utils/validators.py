"""
Input validation utilities for experiment configuration.
Parses key=value files, numeric grids and positivity constraints.
"""

from typing import Dict, Iterable, List, Optional, Tuple
import logging
import math

import numpy as np

logger = logging.getLogger(__name__)

_GRID_MAX_POINTS = 1_000_000


def parse_key_value_text(text: str) -> Tuple[bool, Optional[Dict[str, str]], str]:
    """
    Parse plain-text key=value lines.

    Blank lines are skipped and '#' starts a comment anywhere on a line.
    Keys are lowercased and dashes become underscores.

    Args:
        text: File contents

    Returns:
        Tuple of (is_valid, mapping, error_message)
    """
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            return (False, None, f"line {number}: expected key=value, got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            return (False, None, f"line {number}: empty key")
        key = key.lower().replace("-", "_")
        if key in values:
            return (False, None, f"line {number}: duplicate key '{key}'")
        values[key] = value
    return (True, values, "")


def validate_float(text: str, name: str = "value") -> Tuple[bool, Optional[float], str]:
    """
    Parse a finite real number.

    Returns:
        Tuple of (is_valid, parsed_value, error_message)
    """
    try:
        value = float(text)
    except (TypeError, ValueError):
        return (False, None, f"{name}: '{text}' is not a number")
    if not math.isfinite(value):
        return (False, None, f"{name}: must be finite")
    return (True, value, "")


def validate_positive(text: str, name: str = "value") -> Tuple[bool, Optional[float], str]:
    ok, value, error = validate_float(text, name)
    if not ok:
        return (False, None, error)
    if value <= 0.0:
        return (False, None, f"{name}: must be positive, got {value:g}")
    return (True, value, "")


def validate_positive_int(text: str, name: str = "value") -> Tuple[bool, Optional[int], str]:
    """
    Parse a positive integer; accepts forms like 1e7 that are whole numbers.

    Returns:
        Tuple of (is_valid, parsed_value, error_message)
    """
    ok, value, error = validate_positive(text, name)
    if not ok:
        return (False, None, error)
    if value != int(value):
        return (False, None, f"{name}: must be an integer, got {value:g}")
    return (True, int(value), "")


def parse_grid(text: str, name: str = "grid") -> Tuple[bool, Optional[np.ndarray], str]:
    """
    Parse a start:stop:step grid, stop included, or a comma-separated list.

    Args:
        text: e.g. "0:3:0.02" or "10,20,30"
        name: Key name for error messages

    Returns:
        Tuple of (is_valid, grid, error_message)
    """
    text = text.strip()
    if not text:
        return (False, None, f"{name}: empty grid")
    if ":" not in text:
        points = []
        for item in text.split(","):
            ok, value, error = validate_float(item.strip(), name)
            if not ok:
                return (False, None, error)
            points.append(value)
        return (True, np.array(points), "")

    parts = text.split(":")
    if len(parts) != 3:
        return (False, None, f"{name}: expected start:stop:step, got '{text}'")
    parsed = []
    for part in parts:
        ok, value, error = validate_float(part.strip(), name)
        if not ok:
            return (False, None, error)
        parsed.append(value)
    start, stop, step = parsed
    if step <= 0.0:
        return (False, None, f"{name}: step must be positive")
    if stop < start:
        return (False, None, f"{name}: stop {stop:g} is below start {start:g}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count > _GRID_MAX_POINTS:
        return (False, None, f"{name}: {count} points exceed the limit of {_GRID_MAX_POINTS}")
    # start + k step, never a running sum
    return (True, start + step * np.arange(count), "")


def check_unknown_keys(keys: Iterable[str], allowed: Iterable[str]) -> Tuple[bool, List[str], str]:
    """
    Detect keys outside the allowed set.

    Returns:
        Tuple of (is_valid, unknown_keys, error_message)
    """
    allowed_set = set(allowed)
    unknown = sorted(k for k in keys if k not in allowed_set)
    if unknown:
        return (False, unknown, f"unknown key(s): {', '.join(unknown)}")
    return (True, [], "")
