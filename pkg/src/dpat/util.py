"""Small shared helpers: exact rationals and stable JSON."""
import json
from fractions import Fraction
from numbers import Rational

import numpy as np


def as_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, float or a string like "1/32"."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        # 0.1 should mean 1/10, not the nearest binary float
        return Fraction(repr(value))
    return Fraction(value)


def at_least_fraction(count, delta: Fraction, scale) -> bool:
    """count >= delta * scale, exactly."""
    return count * delta.denominator >= delta.numerator * scale


def below_fraction(count, delta: Fraction, scale) -> bool:
    """count < delta * scale, exactly."""
    return count * delta.denominator < delta.numerator * scale


def simplest_fraction(x: float, max_denominator: int = 64, tol: float = 1e-3):
    """Smallest-denominator fraction within ``tol`` of ``x``, or None."""
    for b in range(1, max_denominator + 1):
        a = round(x * b)
        if a > 0 and abs(a / b - x) <= tol:
            return Fraction(a, b)
    return None


def _default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, default=_default, indent=2, sort_keys=False) + "\n"
