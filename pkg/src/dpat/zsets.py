"""Constructible subsets of Z^n over (Z, +, SF) and (Z, +, PR).

A constructible set is a finite union of basic sets; a basic set is a
conjunction of congruences ``t(x) = r (mod m)`` and predicate literals
``t(x) in P_k`` or ``t(x) not in P_k``, where ``t`` is an affine form,
``P_k = {v in kZ : v/k in P}`` and P is SF (square-free) or PR (+-prime).

JSON layout::

    {"vars": ["x", "y"],
     "union": [{"congruences": [{"coeffs": [1, -1], "const": 0, "residue": 0, "modulus": 4}],
                "literals":    [{"coeffs": {"x": 1}, "const": 0, "k": 1, "sign": 1, "kind": "SF"}]}]}

``coeffs`` is either a list aligned with ``vars`` or a map from variable
name to coefficient; missing entries are zero.

Conventions: SF(0) is false and SF(+-1) true; PR(0) and PR(+-1) are false;
both predicates are symmetric under negation. Z-side 3-AP counts exclude the
gap g = 0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .errors import ArityMismatch, MagnitudeExceeded, WindowTooLarge
from .numtheory import is_prime, is_squarefree, prime_segment, squarefree_segment

MAGNITUDE_LIMIT = 2**62
SIEVE_LIMIT = 10**8
WINDOW_LIMIT = 10**8
SKEW_SIDE_LIMIT = 4000
KINDS = ("SF", "PR")

_BLOCK_BITS = 20
_CHUNK = 1 << 22


# ------------------------------------------------------------ predicates

@lru_cache(maxsize=64)
def _sf_block(block: int) -> np.ndarray:
    lo = block << _BLOCK_BITS
    return squarefree_segment(lo, lo + (1 << _BLOCK_BITS) - 1)


def _check_magnitude(n: int) -> int:
    n = int(n)
    if abs(n) >= MAGNITUDE_LIMIT:
        raise MagnitudeExceeded(f"|{n}| >= 2^62")
    return n


def sf_member(n: int) -> bool:
    """n != 0 and no prime square divides n."""
    a = abs(_check_magnitude(n))
    if a <= SIEVE_LIMIT:
        return bool(_sf_block(a >> _BLOCK_BITS)[a & ((1 << _BLOCK_BITS) - 1)])
    return is_squarefree(a)


def pr_member(n: int) -> bool:
    """|n| is prime."""
    return is_prime(abs(_check_magnitude(n)))


def _kind_scalar(kind: str, v: int) -> bool:
    return sf_member(v) if kind == "SF" else pr_member(v)


def predicate_mask(kind: str, values: np.ndarray) -> np.ndarray:
    """Vectorized SF / PR membership for an int64 array of values."""
    values = np.asarray(values, dtype=np.int64)
    if values.size == 0:
        return np.zeros(values.shape, dtype=bool)
    a = np.abs(values)
    lo, hi = int(a.min()), int(a.max())
    if hi >= MAGNITUDE_LIMIT:
        raise MagnitudeExceeded("predicate argument exceeds 2^62")
    if hi - lo <= 4 * max(values.size, 1 << 16):
        seg = squarefree_segment(lo, hi) if kind == "SF" else prime_segment(lo, hi)
        return seg[a - lo]
    flat = [_kind_scalar(kind, int(v)) for v in a.ravel().tolist()]
    return np.array(flat, dtype=bool).reshape(values.shape)


# ------------------------------------------------------------ syntax

@dataclass(frozen=True)
class AffineForm:
    """const + sum(coeffs[i] * x_i) over the owning set's variable list."""
    coeffs: Tuple[int, ...]
    const: int = 0

    def value(self, point: Sequence[int]) -> int:
        v = self.const + sum(c * int(x) for c, x in zip(self.coeffs, point))
        return _check_magnitude(v)

    def bound(self, ranges: Sequence[Tuple[int, int]]) -> int:
        """Largest |value| over a box, computed exactly."""
        return abs(self.const) + sum(abs(c) * max(abs(lo), abs(hi)) for c, (lo, hi) in zip(self.coeffs, ranges))

    def values(self, grids: Sequence[np.ndarray]) -> np.ndarray:
        out = np.int64(self.const)
        for c, g in zip(self.coeffs, grids):
            if c:
                out = out + np.int64(c) * g
        return out


@dataclass(frozen=True)
class Congruence:
    form: AffineForm
    residue: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 2 or self.modulus >= MAGNITUDE_LIMIT:
            raise ValueError(f"modulus must satisfy 2 <= m < 2^62, got {self.modulus}")
        object.__setattr__(self, "residue", self.residue % self.modulus)

    def holds(self, point) -> bool:
        return self.form.value(point) % self.modulus == self.residue

    def mask(self, grids) -> np.ndarray:
        return self.form.values(grids) % self.modulus == self.residue


@dataclass(frozen=True)
class PredicateLiteral:
    """t(x) in P_k (sign +1) or t(x) not in P_k (sign -1)."""
    form: AffineForm
    k: int = 1
    sign: int = 1
    kind: str = "SF"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("scale k must be >= 1")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be SF or PR, got {self.kind!r}")

    def holds(self, point) -> bool:
        v = self.form.value(point)
        inside = v % self.k == 0 and _kind_scalar(self.kind, v // self.k)
        return inside if self.sign == 1 else not inside

    def mask(self, grids) -> np.ndarray:
        v = np.broadcast_to(self.form.values(grids), np.broadcast_shapes(*(np.shape(g) for g in grids)))
        divisible = v % self.k == 0
        inside = np.zeros(v.shape, dtype=bool)
        inside[divisible] = predicate_mask(self.kind, v[divisible] // self.k)
        return inside if self.sign == 1 else ~inside


@dataclass(frozen=True)
class BasicSet:
    congruences: Tuple[Congruence, ...] = ()
    literals: Tuple[PredicateLiteral, ...] = ()

    def forms(self) -> Iterable[AffineForm]:
        for c in self.congruences:
            yield c.form
        for lit in self.literals:
            yield lit.form

    def holds(self, point) -> bool:
        return all(c.holds(point) for c in self.congruences) and all(l.holds(point) for l in self.literals)

    def mask(self, grids, shape) -> np.ndarray:
        out = np.ones(shape, dtype=bool)
        for c in self.congruences:
            out &= c.mask(grids)
        for lit in self.literals:
            if not out.any():
                break
            out &= lit.mask(grids)
        return out


def _coeff_tuple(raw, variables) -> Tuple[int, ...]:
    if isinstance(raw, Mapping):
        unknown = set(raw) - set(variables)
        if unknown:
            raise ValueError(f"coefficients mention unknown variables {sorted(unknown)}")
        return tuple(int(raw.get(v, 0)) for v in variables)
    raw = [int(c) for c in raw]
    if len(raw) != len(variables):
        raise ArityMismatch(f"{len(raw)} coefficients for {len(variables)} variables")
    return tuple(raw)


def _parse_sign(raw) -> int:
    if raw in ("+", "+1", 1, "1"):
        return 1
    if raw in ("-", "-1", -1):
        return -1
    raise ValueError(f"sign must be +1 or -1, got {raw!r}")


@dataclass(frozen=True)
class ConstructibleSet:
    vars: Tuple[str, ...]
    union: Tuple[BasicSet, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.vars)

    # -- construction

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ConstructibleSet":
        variables = tuple(doc["vars"])
        if not variables or len(set(variables)) != len(variables):
            raise ValueError("vars must be a non-empty list of distinct names")
        union = []
        for basic in doc.get("union", []):
            congs = tuple(
                Congruence(AffineForm(_coeff_tuple(c["coeffs"], variables), int(c.get("const", 0))),
                           int(c.get("residue", 0)), int(c["modulus"]))
                for c in basic.get("congruences", []))
            lits = tuple(
                PredicateLiteral(AffineForm(_coeff_tuple(l["coeffs"], variables), int(l.get("const", 0))),
                                 int(l.get("k", 1)), _parse_sign(l.get("sign", 1)), str(l.get("kind", "SF")).upper())
                for l in basic.get("literals", []))
            union.append(BasicSet(congs, lits))
        return cls(variables, tuple(union))

    @classmethod
    def from_json(cls, text_or_path) -> "ConstructibleSet":
        text = str(text_or_path)
        if not text.lstrip().startswith("{"):
            with open(text) as fh:
                text = fh.read()
        return cls.from_dict(json.loads(text))

    @classmethod
    def everything(cls, variables=("x",)) -> "ConstructibleSet":
        return cls(tuple(variables), (BasicSet(),))

    @classmethod
    def nothing(cls, variables=("x",)) -> "ConstructibleSet":
        return cls(tuple(variables), ())

    @classmethod
    def predicate(cls, kind: str, k: int = 1, sign: int = 1, var: str = "x") -> "ConstructibleSet":
        """The one-variable set P_k (or its complement for sign -1)."""
        return cls((var,), (BasicSet((), (PredicateLiteral(AffineForm((1,)), k, sign, kind),)),))

    def to_dict(self) -> dict:
        def form(f):
            return {"coeffs": list(f.coeffs), "const": f.const}
        return {
            "vars": list(self.vars),
            "union": [{
                "congruences": [{**form(c.form), "residue": c.residue, "modulus": c.modulus} for c in b.congruences],
                "literals": [{**form(l.form), "k": l.k, "sign": l.sign, "kind": l.kind} for l in b.literals],
            } for b in self.union],
        }

    # -- evaluation

    def mask_box(self, ranges: Sequence[Tuple[int, int]]) -> np.ndarray:
        """Membership over the box prod [lo_i, hi_i], chunked along the first axis."""
        if len(ranges) != self.arity:
            raise ArityMismatch(f"{len(ranges)} ranges for {self.arity} variables")
        ranges = [(int(lo), int(hi)) for lo, hi in ranges]
        for basic in self.union:
            for f in basic.forms():
                if f.bound(ranges) >= MAGNITUDE_LIMIT:
                    raise MagnitudeExceeded("an affine form leaves the 2^62 range on this box")
        shape = tuple(hi - lo + 1 for lo, hi in ranges)
        out = np.zeros(shape, dtype=bool)
        if not self.union:
            return out
        inner = int(np.prod(shape[1:], dtype=np.int64)) if len(shape) > 1 else 1
        step = max(1, _CHUNK // inner)
        tail_axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in ranges[1:]]
        for start in range(0, shape[0], step):
            stop = min(shape[0], start + step)
            first = np.arange(ranges[0][0] + start, ranges[0][0] + stop, dtype=np.int64)
            axes = [first] + tail_axes
            grids = np.meshgrid(*axes, indexing="ij", sparse=True) if len(axes) > 1 else axes
            cshape = (stop - start,) + shape[1:]
            acc = np.zeros(cshape, dtype=bool)
            for basic in self.union:
                acc |= basic.mask(grids, cshape)
                if acc.all():
                    break
            out[start:stop] = acc
        return out


def member(C: ConstructibleSet, point) -> bool:
    if isinstance(point, (int, np.integer)):
        point = (int(point),)
    point = tuple(int(v) for v in point)
    if len(point) != C.arity:
        raise ArityMismatch(f"point of length {len(point)} for a set in {C.arity} variables")
    for v in point:
        _check_magnitude(v)
    return any(b.holds(point) for b in C.union)


def _one_var(C: ConstructibleSet):
    if C.arity != 1:
        raise ArityMismatch(f"expected a set in one variable, got {C.arity}")


def window_mask(C: ConstructibleSet, lo: int, hi: int) -> np.ndarray:
    _one_var(C)
    if lo > hi:
        raise WindowTooLarge(f"empty window [{lo}, {hi}]")
    if hi - lo > WINDOW_LIMIT:
        raise WindowTooLarge(f"window [{lo}, {hi}] is wider than {WINDOW_LIMIT}")
    return C.mask_box([(lo, hi)])


def window_enumerate(C: ConstructibleSet, lo: int, hi: int) -> List[int]:
    """Sorted members of C in [lo, hi]."""
    return (np.flatnonzero(window_mask(C, lo, hi)) + int(lo)).tolist()


# ------------------------------------------------------------ pattern counts

def ap3_counts_z(C: ConstructibleSet, k: int, a: int, G: int) -> int:
    """#{g in kZ, 0 < |g| <= G : a, a+g, a+2g all in C}."""
    _one_var(C)
    if k < 1:
        raise ValueError("k must be >= 1")
    G = int(G)
    a = int(a)
    _check_magnitude(abs(a) + 2 * max(G, 0))
    steps = G // k
    if steps <= 0:
        return 0
    reach = 2 * steps * k
    m = window_mask(C, a - reach, a + reach)
    if not m[reach]:
        return 0
    j = np.arange(1, steps + 1, dtype=np.int64) * k
    total = 0
    for sgn in (1, -1):
        total += int((m[reach + sgn * j] & m[reach + 2 * sgn * j]).sum())
    return total


def sarkozy_counts_z(C: ConstructibleSet, kind: str, a: int, N: int) -> int:
    """#{n in [1, N] : kind(n) and a + (n - 1) in C}."""
    _one_var(C)
    kind = kind.upper()
    if kind not in KINDS:
        raise ValueError(f"kind must be SF or PR, got {kind!r}")
    N = int(N)
    if N <= 0:
        return 0
    _check_magnitude(N)
    _check_magnitude(abs(int(a)) + N)
    seg = squarefree_segment(1, N) if kind == "SF" else prime_segment(1, N)
    shifted = window_mask(C, int(a), int(a) + N - 1)
    return int((seg & shifted).sum())


@dataclass(frozen=True)
class Hyperplane:
    """{u : sum(coeffs[j] * u_j) = target}."""
    coeffs: Tuple[int, ...]
    target: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if not any(self.coeffs):
            raise ValueError("a hyperplane needs a nonzero coefficient")

    @property
    def arity(self) -> int:
        return len(self.coeffs)

    def contains(self, point) -> bool:
        if len(point) != self.arity:
            raise ArityMismatch(f"point of length {len(point)} for a plane in {self.arity} variables")
        return sum(c * int(u) for c, u in zip(self.coeffs, point)) == self.target

    def to_dict(self):
        return {"coeffs": list(self.coeffs), "target": self.target}


def hyperplane_union_contains(planes: Sequence[Hyperplane], points) -> bool:
    """True iff every point lies on at least one plane."""
    for pt in points:
        if not any(h.contains(pt) for h in planes):
            return False
    return True


def _fiber_covered(x, ys, y2s, planes) -> bool:
    """Do the planes cover {x} x ys x y2s (coordinates (x, y, y'))?"""
    lines = []
    for h in planes:
        m1, m2, m3 = h.coeffs
        rest = h.target - m1 * x
        if m2 == 0 and m3 == 0:
            if rest == 0:
                return True
            continue
        lines.append((m2, m3, rest))
    total = len(ys) * len(y2s)
    if total > len(lines) * max(len(ys), len(y2s)):
        return False
    yset, y2set = set(ys), set(y2s)
    covered = set()
    for m2, m3, rest in lines:
        if m3 == 0:
            if rest % m2 == 0 and rest // m2 in yset:
                covered.update((rest // m2, v) for v in y2s)
        else:
            for y in ys:
                num = rest - m2 * y
                if num % m3 == 0 and num // m3 in y2set:
                    covered.add((y, num // m3))
        if len(covered) == total:
            return True
    return len(covered) == total


@dataclass(frozen=True)
class SkewGapRow:
    g: int
    count: int
    contained: bool


def skew_gap_scan_z(S: ConstructibleSet, k: int, lo: int, hi: int, planes: Sequence[Hyperplane] = (),
                    gap_bound: int = 0) -> List[SkewGapRow]:
    """For g in kZ with |g| <= gap_bound: the number of (x, y, y') in [lo, hi]^3
    with (x,y), (x,y'), (x+g,y), (x,y'+g) in S, and whether the planes (over
    (x, y, y')) contain every such triple.

    Shifted probes x+g and y'+g may leave the window; S is evaluated there
    directly, so no triple is lost to the boundary.
    """
    if S.arity != 2:
        raise ArityMismatch("skew scans need a set in two variables")
    if k < 1:
        raise ValueError("k must be >= 1")
    for h in planes:
        if h.arity != 3:
            raise ArityMismatch("planes for skew scans live in Z^3")
    if lo > hi or hi - lo + 1 > SKEW_SIDE_LIMIT:
        raise WindowTooLarge(f"window side must be between 1 and {SKEW_SIDE_LIMIT}")
    side = hi - lo + 1
    reach = (int(gap_bound) // k) * k
    if reach > SKEW_SIDE_LIMIT:
        raise WindowTooLarge(f"gap bound {gap_bound} exceeds {SKEW_SIDE_LIMIT}")
    box = S.mask_box([(lo - reach, hi + reach), (lo - reach, hi + reach)])
    core = box[reach:reach + side, reach:reach + side]
    rows = []
    for g in range(-reach, reach + 1, k):
        shifted_rows = box[reach + g:reach + g + side, reach:reach + side]
        shifted_cols = box[reach:reach + side, reach + g:reach + g + side]
        ys_ok = core & shifted_rows
        y2s_ok = core & shifted_cols
        first = ys_ok.sum(axis=1, dtype=np.int64)
        second = y2s_ok.sum(axis=1, dtype=np.int64)
        count = int(np.dot(first, second))
        contained = True
        for i in np.flatnonzero(first * second).tolist():
            ys = (np.flatnonzero(ys_ok[i]) + lo).tolist()
            y2s = (np.flatnonzero(y2s_ok[i]) + lo).tolist()
            if not _fiber_covered(lo + i, ys, y2s, planes):
                contained = False
                break
        rows.append(SkewGapRow(g, count, contained))
    return rows
