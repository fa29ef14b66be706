"""Dimension/density fits for cardinality series and the small/dense dichotomy.

For a uniformly definable family the counts behave like ``mu * q**d`` with an
error of order ``q**(d - 1/2)``. The fit picks the integer ``d`` under which
the ratios ``count / q**d`` are flattest and takes ``mu`` as their
precision-weighted median (weight ``q``; the ratio error shrinks like
``q**-1/2``), so the small fields that carry the largest error term do not
drag the estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import sqrt
from typing import List, Optional, Sequence, Tuple

from .errors import TooFewPoints
from .util import as_fraction, at_least_fraction, below_fraction, simplest_fraction

DEFAULT_TOLERANCE = 4.0


@dataclass(frozen=True)
class CardPoint:
    q: int
    count: int
    n: int = 1


def _normalize_series(series) -> List[CardPoint]:
    points = []
    for item in series:
        if isinstance(item, CardPoint):
            points.append(item)
        elif len(item) == 2:
            points.append(CardPoint(int(item[0]), int(item[1]), 1))
        else:
            points.append(CardPoint(int(item[0]), int(item[1]), int(item[2])))
    for a, b in zip(points, points[1:]):
        if b.q <= a.q:
            raise ValueError("field orders must be strictly increasing")
    for pt in points:
        if not 0 <= pt.count <= pt.q ** pt.n:
            raise ValueError(f"count {pt.count} is outside [0, q^n] for q={pt.q}, n={pt.n}")
    return points


def weighted_median(values: Sequence[float], weights: Sequence[float]) -> float:
    order = sorted(range(len(values)), key=lambda i: values[i])
    total = sum(weights)
    acc = 0.0
    for i in order:
        acc += weights[i]
        if 2 * acc >= total:
            return values[i]
    return values[order[-1]]


@dataclass
class EstimateReport:
    d: int
    mu: Optional[object]            # Fraction when a small-denominator rational fits, else float
    mu_value: Optional[float]
    max_normalized_error: Optional[float]
    verdict: str                    # Consistent | Inconsistent | Empty
    threshold: float
    points: int = 0

    def to_dict(self):
        return {
            "d": self.d,
            "mu": str(self.mu) if isinstance(self.mu, Fraction) else self.mu,
            "mu_value": self.mu_value,
            "max_normalized_error": self.max_normalized_error,
            "verdict": self.verdict,
            "threshold": self.threshold,
            "points": self.points,
        }


def fit_dimension_density(series, tolerance: float = DEFAULT_TOLERANCE) -> EstimateReport:
    """Fit ``count ~ mu * q**d`` to ``(q, count, n)`` points.

    Empty fibers (count 0) are excluded; at least three nonempty points are
    required. An all-zero series gives verdict ``Empty``.
    """
    points = _normalize_series(series)
    nonzero = [pt for pt in points if pt.count > 0]
    if points and not nonzero:
        return EstimateReport(0, None, None, None, "Empty", tolerance, len(points))
    if len(nonzero) < 3:
        raise TooFewPoints(f"need at least 3 nonempty points, got {len(nonzero)}")
    n = max(pt.n for pt in nonzero)
    weights = [float(pt.q) for pt in nonzero]
    best = None
    for d in range(n + 1):
        ratios = [pt.count / pt.q ** d for pt in nonzero]
        center = weighted_median(ratios, weights)
        spread = (max(ratios) - min(ratios)) / center
        if best is None or spread < best[0]:
            best = (spread, d, center)
    _, d, mu_value = best
    err = max(abs(pt.count - mu_value * pt.q ** d) / pt.q ** (d - 0.5) for pt in nonzero)
    frac = simplest_fraction(mu_value)
    verdict = "Consistent" if err <= tolerance else "Inconsistent"
    return EstimateReport(d, frac if frac is not None else mu_value, mu_value, err, verdict,
                          tolerance, len(nonzero))


@dataclass
class DichotomyReport:
    classes: List[str]              # Small | Dense | Violation per fiber
    ell: int
    delta: Fraction
    fibers: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return self.classes.count("Violation")

    def to_dict(self):
        return {
            "ell": self.ell,
            "delta": str(self.delta),
            "classes": self.classes,
            "counts": {k: self.classes.count(k) for k in ("Small", "Dense", "Violation")},
            "fibers": [list(f) for f in self.fibers],
        }


def classify_fiber(q: int, count: int, ell: int, delta) -> str:
    delta = as_fraction(delta)
    if count <= ell:
        return "Small"
    if at_least_fraction(count, delta, q):
        return "Dense"
    return "Violation"


def dichotomy_classify(fibers, ell: int, delta) -> DichotomyReport:
    """Small iff count <= ell, Dense iff count >= delta*q, otherwise Violation."""
    delta = as_fraction(delta)
    if ell < 0 or not 0 < delta <= 1:
        raise ValueError("need ell >= 0 and 0 < delta <= 1")
    fibers = [(int(q), int(c)) for q, c in fibers]
    return DichotomyReport([classify_fiber(q, c, ell, delta) for q, c in fibers], int(ell), delta, fibers)


def full_dim_test(series, delta) -> List[str]:
    """Per point: Deficient iff count < delta * q**n, else FullDim."""
    delta = as_fraction(delta)
    if not 0 < delta <= 1:
        raise ValueError("need 0 < delta <= 1")
    return ["Deficient" if below_fraction(pt.count, delta, pt.q ** pt.n) else "FullDim"
            for pt in _normalize_series(series)]


def normalized_error(q: int, count: int, d: int, mu: float) -> float:
    return abs(count - mu * q ** d) / (q ** d / sqrt(q))
