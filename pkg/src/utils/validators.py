"""
Input validation utilities
Parsers for the comma-separated vectors, sweep ranges and epsilon lists used
in config files and on the command line
"""
import math
from typing import List, Tuple


def parse_float(text: str, name: str) -> float:
    """
    Parse a finite decimal number

    Args:
        text: Raw text
        name: Key or flag the value belongs to (used in the error message)

    Returns:
        Parsed float
    """
    try:
        value = float(text.strip())
    except (TypeError, ValueError):
        raise ValueError(f"{name}: malformed number '{text}'") from None
    if not math.isfinite(value):
        raise ValueError(f"{name}: value must be finite, got '{text}'")
    return value


def parse_vector(text: str, name: str = "reeb", min_length: int = 2) -> Tuple[float, ...]:
    """
    Parse a comma-separated list such as ``0.5,1.5``

    Args:
        text: Raw text
        name: Key or flag the value belongs to
        min_length: Minimum number of entries

    Returns:
        Tuple of floats
    """
    parts = [p for p in text.replace(" ", "").split(",") if p != ""]
    if len(parts) < min_length:
        raise ValueError(f"{name}: expected at least {min_length} comma-separated numbers, got '{text}'")
    return tuple(parse_float(p, name) for p in parts)


def parse_sweep(text: str, name: str = "sweep") -> Tuple[float, float, int]:
    """
    Parse a sweep range ``r_min:r_max:steps``

    Returns:
        (r_min, r_max, steps) with 0 < r_min <= r_max and steps >= 1
    """
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise ValueError(f"{name}: expected r_min:r_max:steps, got '{text}'")
    r_min = parse_float(parts[0], name)
    r_max = parse_float(parts[1], name)
    try:
        steps = int(parts[2])
    except ValueError:
        raise ValueError(f"{name}: steps must be an integer, got '{parts[2]}'") from None
    if r_min <= 0 or r_max < r_min:
        raise ValueError(f"{name}: need 0 < r_min <= r_max, got '{text}'")
    if steps < 1:
        raise ValueError(f"{name}: steps must be >= 1, got {steps}")
    return r_min, r_max, steps


def sweep_values(r_min: float, r_max: float, steps: int) -> List[float]:
    """Evenly spaced sweep points, endpoints included"""
    if steps == 1:
        return [r_min]
    return [r_min + (r_max - r_min) * k / (steps - 1) for k in range(steps)]


def parse_bool(text: str, name: str) -> bool:
    """Parse true/false, yes/no, 1/0"""
    value = text.strip().lower()
    if value in ("true", "yes", "1", "on"):
        return True
    if value in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"{name}: expected true or false, got '{text}'")
