"""Pattern counts over finite fields: 3-APs with gaps in a subgroup, shifts
into a set W, and skew corners with polynomial gap maps.

All counts include the trivial witness g = 0 (or w = 0) unless the caller
passes ``include_zero=False``; every report records which convention it used.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from . import kernels
from .errors import CharacteristicTwo, ConstantGapMap, FieldMismatch, OrderExceedsCap
from .finfield import FiniteField, SubgroupSpec, poly_eval
from .mset import MembershipSet
from .util import as_fraction, at_least_fraction, below_fraction

SKEW_ORDER_CAP = 4096

__all__ = [
    "poly_eval", "APProfile", "ShiftProfile", "SkewReport", "ap3_profile", "bad_points", "dense_points",
    "sarkozy_profile", "skew_corner_counts", "skew_corner_naive", "exceptional_gaps", "gap_values",
]


def _unary_mask(s: MembershipSet, field: FiniteField, what: str) -> np.ndarray:
    if s.field != field:
        raise FieldMismatch(f"{what} lives over {s.field!r}, expected {field!r}")
    if s.arity != 1:
        raise ValueError(f"{what} must have arity 1")
    return s.flat_mask()


# ------------------------------------------------------------------ 3-APs

@dataclass(frozen=True, eq=False)
class APProfile:
    field: FiniteField
    X: MembershipSet
    H: SubgroupSpec
    counts: np.ndarray          # c(x) for x in X, 0 elsewhere; length q
    include_zero: bool = True

    def members(self) -> np.ndarray:
        return np.flatnonzero(self.X.flat_mask())

    def count(self, x: int) -> int:
        return int(self.counts[x])

    def as_dict(self) -> dict:
        return {int(x): int(self.counts[x]) for x in self.members()}

    def rows(self, r: Optional[int] = None, delta=None) -> List[tuple]:
        """(x, c(x), class) per x in X; class is bad, dense or mid."""
        q = self.field.q
        d = None if delta is None else as_fraction(delta)
        out = []
        for x in self.members().tolist():
            c = int(self.counts[x])
            if r is not None and c <= r:
                label = "bad"
            elif d is not None and at_least_fraction(c, d, q):
                label = "dense"
            else:
                label = "mid"
            out.append((x, c, label))
        return out

    def to_dict(self, r=None, delta=None) -> dict:
        return {
            "pattern": "ap3",
            "field": self.field.to_dict(),
            "subgroup": self.H.to_dict(),
            "include_zero": self.include_zero,
            "size_X": self.X.cardinality,
            "counts": [[x, c] for x, c, _ in self.rows()],
        }


def ap3_profile(X: MembershipSet, H: SubgroupSpec, field: FiniteField, include_zero: bool = True,
                backend: Optional[str] = None) -> APProfile:
    """c(x) = #{g in H : x, x+g, x+2g in X} for every x in X."""
    if field.p == 2:
        raise CharacteristicTwo("3-AP profiles need odd characteristic")
    if H.field != field:
        raise FieldMismatch("subgroup lives over a different field")
    xmask = _unary_mask(X, field, "X")
    hmask = H.mask()
    if not include_zero:
        hmask[0] = False
    counts = kernels.ap3_counts(xmask, hmask, field.p, field.n, backend=backend)
    return APProfile(field, X, H, counts, include_zero)


def bad_points(profile: APProfile, r: int) -> List[int]:
    """{x in X : c(x) <= r}."""
    m = profile.members()
    return m[profile.counts[m] <= int(r)].tolist()


def dense_points(profile: APProfile, delta) -> List[int]:
    """{x in X : c(x) >= delta * q}, compared exactly."""
    d = as_fraction(delta)
    m = profile.members()
    c = profile.counts[m]
    keep = c * d.denominator >= d.numerator * profile.field.q
    return m[keep].tolist()


# ------------------------------------------------------------------ shifts

@dataclass(frozen=True, eq=False)
class ShiftProfile:
    field: FiniteField
    X: MembershipSet
    W: MembershipSet
    counts: np.ndarray          # s(x) for x in X, 0 elsewhere
    include_zero: bool = True

    def members(self) -> np.ndarray:
        return np.flatnonzero(self.X.flat_mask())

    def count(self, x: int) -> int:
        return int(self.counts[x])

    def rows(self, floor=None) -> List[tuple]:
        """(x, s(x), class) per x in X; class is low when s(x) < floor."""
        out = []
        for x in self.members().tolist():
            c = int(self.counts[x])
            label = "low" if floor is not None and c < floor else "ok"
            out.append((x, c, label))
        return out

    def to_dict(self) -> dict:
        return {
            "pattern": "sarkozy",
            "field": self.field.to_dict(),
            "include_zero": self.include_zero,
            "size_X": self.X.cardinality,
            "size_W": self.W.cardinality,
            "counts": [[x, c] for x, c, _ in self.rows()],
        }


def sarkozy_profile(X: MembershipSet, W: MembershipSet, field: FiniteField, include_zero: bool = True,
                    backend: Optional[str] = None) -> ShiftProfile:
    """s(x) = #{w in W : x + w in X} for every x in X."""
    xmask = _unary_mask(X, field, "X")
    wmask = _unary_mask(W, field, "W")
    if not include_zero:
        wmask = wmask.copy()
        wmask[0] = False
    counts = kernels.shift_counts(xmask, wmask, field.p, field.n, backend=backend)
    return ShiftProfile(field, X, W, counts, include_zero)


# ------------------------------------------------------------------ skew corners

def _coeffs(coeffs: Sequence[int], field: FiniteField) -> tuple:
    if len(coeffs) == 0:
        raise ValueError("coefficient list must be non-empty")
    out = []
    for c in coeffs:
        c = int(c)
        if field.n == 1:
            c %= field.p
        elif not 0 <= c < field.q:
            raise ValueError(f"coefficient {c} is not an element index of F_{field.q}")
        out.append(c)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


def gap_values(coeffs: Sequence[int], field: FiniteField) -> np.ndarray:
    """P(g) for every g in k, in index order."""
    return np.asarray(poly_eval(list(_coeffs(coeffs, field)), field.elements(), field), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class SkewReport:
    field: FiniteField
    S: MembershipSet
    P1: tuple
    P2: tuple
    gaps: np.ndarray            # the g values reported, in index order
    counts: np.ndarray          # N(g) aligned with ``gaps``
    include_zero: bool = True
    delta_prime: Optional[Fraction] = None
    exceptional: Optional[List[int]] = dc_field(default=None)

    def count(self, g: int) -> int:
        hit = np.flatnonzero(self.gaps == g)
        if hit.size == 0:
            raise KeyError(g)
        return int(self.counts[hit[0]])

    def normalized(self) -> np.ndarray:
        return self.counts / float(self.field.q) ** 3

    def rows(self, delta_prime=None) -> List[tuple]:
        """(g, N(g), class) per gap; class is exceptional when N(g) < delta' q^3."""
        d = as_fraction(delta_prime) if delta_prime is not None else self.delta_prime
        q3 = self.field.q ** 3
        out = []
        for g, c in zip(self.gaps.tolist(), self.counts.tolist()):
            label = "exceptional" if d is not None and below_fraction(c, d, q3) else "ok"
            out.append((g, c, label))
        return out

    def to_dict(self) -> dict:
        return {
            "pattern": "skew",
            "field": self.field.to_dict(),
            "P1": list(self.P1),
            "P2": list(self.P2),
            "include_zero": self.include_zero,
            "size_S": self.S.cardinality,
            "delta_prime": self.delta_prime,
            "exceptional": self.exceptional,
            "counts": [[g, c] for g, c in zip(self.gaps.tolist(), self.counts.tolist())],
        }


def skew_corner_counts(S: MembershipSet, P1: Sequence[int], P2: Sequence[int], field: FiniteField,
                       allow_constant: bool = False, include_zero: bool = True, delta_prime=None,
                       max_degree: Optional[int] = None, backend: Optional[str] = None) -> SkewReport:
    """N(g) = sum_x |R_x & R_{x+P1(g)}| * |R_x & (R_x - P2(g))| for every gap g.

    With ``include_zero=False`` the gap g = 0 is left out of the report.
    """
    if S.field != field:
        raise FieldMismatch("S lives over a different field")
    if S.arity != 2:
        raise ValueError("S must have arity 2")
    if field.q > SKEW_ORDER_CAP:
        raise OrderExceedsCap(f"skew-corner counts need q <= {SKEW_ORDER_CAP}, got {field.q}")
    c1, c2 = _coeffs(P1, field), _coeffs(P2, field)
    for name, c in (("P1", c1), ("P2", c2)):
        if max_degree is not None and len(c) - 1 > max_degree:
            raise ValueError(f"{name} has degree {len(c) - 1} > {max_degree}")
        if len(c) == 1 and not allow_constant:
            raise ConstantGapMap(f"{name} is constant; pass allow_constant to count anyway")
    v1, v2 = gap_values(c1, field), gap_values(c2, field)
    gaps = field.elements() if include_zero else field.elements()[1:]
    counts = kernels.skew_counts(S.rows(), v1[gaps], v2[gaps], field.p, field.n, backend=backend)
    report = SkewReport(field, S, c1, c2, gaps, counts, include_zero)
    if delta_prime is not None:
        d = as_fraction(delta_prime)
        report = SkewReport(field, S, c1, c2, gaps, counts, include_zero, d, _exceptional(gaps, counts, d, field.q))
    return report


def skew_corner_naive(S: MembershipSet, P1: Sequence[int], P2: Sequence[int], field: FiniteField, g: int) -> int:
    """Count (x, y, y') with (x,y), (x,y'), (x+P1(g),y), (x,y'+P2(g)) all in S."""
    m = S.mask()
    a = int(poly_eval(list(_coeffs(P1, field)), int(g), field))
    b = int(poly_eval(list(_coeffs(P2, field)), int(g), field))
    q = field.q
    total = 0
    for x in range(q):
        xa = field.add(x, a)
        for y in range(q):
            if not (m[x, y] and m[xa, y]):
                continue
            for y2 in range(q):
                if m[x, y2] and m[x, field.add(y2, b)]:
                    total += 1
    return total


def _exceptional(gaps, counts, d: Fraction, q: int) -> List[int]:
    keep = counts * d.denominator < d.numerator * q ** 3
    return gaps[keep].tolist()


def exceptional_gaps(report: SkewReport, delta_prime) -> List[int]:
    """{g : N(g) < delta' * q^3}, compared exactly."""
    return _exceptional(report.gaps, report.counts, as_fraction(delta_prime), report.field.q)
