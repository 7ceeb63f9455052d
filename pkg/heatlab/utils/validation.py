"""
Validation and Parsing Utilities

This module turns command-line strings into validated heatlab models and
rejects malformed input early with a ValueError.
"""

import math
import re
from typing import List, Optional, Sequence, Tuple
import logging

from ..state import BasisTerm, Interval, StableIndex, TGrid

logger = logging.getLogger(__name__)

_NUMBER = r'[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?'


def parse_number_list(text: str, expected: Optional[int] = None) -> List[float]:
    """
    Parse a comma-separated list of finite numbers.

    Args:
        text: Input such as "0,1" or "1e-6, 1e-3, 20"
        expected: Required number of entries, if any

    Returns:
        List of floats

    Raises:
        ValueError: If an entry is not a finite number or the count is wrong
    """
    if not text or not isinstance(text, str):
        raise ValueError("Expected a comma-separated list of numbers")
    parts = [p.strip() for p in text.split(',')]
    values = []
    for part in parts:
        if not re.fullmatch(_NUMBER, part):
            raise ValueError(f"Not a number: {part!r}")
        value = float(part)
        if not math.isfinite(value):
            raise ValueError(f"Not a finite number: {part!r}")
        values.append(value)
    if expected is not None and len(values) != expected:
        raise ValueError(f"Expected {expected} comma-separated numbers, got {len(values)}")
    return values


def parse_alpha(text: str) -> StableIndex:
    """
    Parse a stable index.

    Raises:
        ValueError: If alpha is not a number in (0, 2)
    """
    (value,) = parse_number_list(str(text), expected=1)
    if not 0.0 < value < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {value}")
    return StableIndex(alpha=value)


def parse_interval(text: str) -> Interval:
    """Parse "a,b" into an Interval with a < b."""
    a, b = parse_number_list(text, expected=2)
    if a >= b:
        raise ValueError(f"Interval requires a < b, got {text!r}")
    return Interval(a=a, b=b)


def parse_t_grid(text: str) -> TGrid:
    """Parse "t_min,t_max,points" into a log-spaced TGrid."""
    t_min, t_max, points = parse_number_list(text, expected=3)
    if not points.is_integer() or points < 2:
        raise ValueError("A time grid needs an integer number of points >= 2")
    if not 0 < t_min < t_max:
        raise ValueError(f"Time grid requires 0 < t_min < t_max, got {text!r}")
    return TGrid(t_min=t_min, t_max=t_max, points=int(points))


def parse_window(text: str) -> Tuple[float, float]:
    """Parse "t_min,t_max" for a fitting window."""
    t_min, t_max = parse_number_list(text, expected=2)
    if not 0 < t_min < t_max:
        raise ValueError(f"Window requires 0 < t_min < t_max, got {text!r}")
    return t_min, t_max


def parse_basis(text: str) -> List[BasisTerm]:
    """
    Parse a basis such as "t^(1/alpha),t".

    Raises:
        ValueError: On unknown or repeated terms
    """
    known = {term.value: term for term in BasisTerm}
    terms = []
    for part in (p.strip() for p in text.split(',')):
        if part not in known:
            raise ValueError(f"Unknown basis term {part!r}; choose from {sorted(known)}")
        if known[part] in terms:
            raise ValueError(f"Basis term {part!r} repeated")
        terms.append(known[part])
    return terms


def expand_points(values: Optional[Sequence[float]], grid: Optional[str]) -> List[float]:
    """
    Combine explicit points with an optional "lo,hi,points" log grid.

    A grid with lo = 0 starts at 0 and is log-spaced from its second point.
    """
    points = list(values or [])
    if grid:
        lo, hi, count = parse_number_list(grid, expected=3)
        if not count.is_integer() or count < 2 or lo < 0 or hi <= lo:
            raise ValueError(f"Invalid grid {grid!r}; expected lo,hi,points with 0 <= lo < hi")
        count = int(count)
        if lo == 0:
            start = hi / 10 ** 3
            step = (math.log(hi) - math.log(start)) / (count - 2) if count > 2 else 0.0
            points.extend([0.0] + [math.exp(math.log(start) + i * step) for i in range(count - 1)])
        else:
            step = (math.log(hi) - math.log(lo)) / (count - 1)
            points.extend(math.exp(math.log(lo) + i * step) for i in range(count))
    if not points:
        raise ValueError("No evaluation points given")
    return points
