"""Arithmetic in F_p and F_{p^n}, plus the subgroups the pattern counters use.

Elements are integers in ``[0, q)``: the base-p digits of an index are the
coefficients (low to high) of a polynomial in ``t`` reduced by the field
modulus. Index 0 is zero, index 1 is one, and the prime subfield is
``{0, ..., p-1}``. Every arithmetic method accepts python ints or integer numpy
arrays (broadcasting like numpy) and returns the same kind.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DegreeZero, DivisionByZero, NotPrime, OrderExceedsCap
from .numtheory import factorize, is_prime

DEFAULT_ORDER_CAP = 2**20
MAX_CHARACTERISTIC = 2**31


# ------------------------------------------------- polynomials over F_p

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mulmod(a, b, f, p):
    """a*b mod f over F_p; f monic, coefficient lists low to high."""
    n = len(f) - 1
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for k in range(len(prod) - 1, n - 1, -1):
        c = prod[k]
        if c:
            for j in range(n + 1):
                prod[k - n + j] = (prod[k - n + j] - c * f[j]) % p
    return _trim(prod[:n])


def poly_powmod(a, e, f, p):
    result, base = [1], list(a)
    while e:
        if e & 1:
            result = poly_mulmod(result, base, f, p)
        base = poly_mulmod(base, base, f, p)
        e >>= 1
    return result


def poly_divmod(a, b, p):
    a = _trim(a)
    b = _trim(b)
    inv_lead = pow(b[-1], p - 2, p)
    quot = [0] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b) and a:
        c = a[-1] * inv_lead % p
        shift = len(a) - len(b)
        quot[shift] = c
        for j, bj in enumerate(b):
            a[shift + j] = (a[shift + j] - c * bj) % p
        a = _trim(a)
    return quot, a


def poly_gcd(a, b, p):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, poly_divmod(a, b, p)[1]
    return a


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Rabin's irreducibility test for a monic f over F_p."""
    f = list(f)
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    t = [0, 1]

    def frob_power(k):
        r = t
        for _ in range(k):
            r = poly_powmod(r, p, f, p)
        return r

    if _trim([(x - y) % p for x, y in itertools.zip_longest(frob_power(n), t, fillvalue=0)]):
        return False
    for r in factorize(n):
        h = [(x - y) % p for x, y in itertools.zip_longest(frob_power(n // r), t, fillvalue=0)]
        g = poly_gcd(f, h, p)
        if len(g) != 1:
            return False
    return True


def smallest_irreducible(p: int, n: int) -> Tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree n.

    Candidates are compared on the tuple (c_0, c_1, ..., c_{n-1}) of their
    non-leading coefficients.
    """
    for lower in itertools.product(range(p), repeat=n):
        f = list(lower) + [1]
        if lower[0] == 0:
            continue
        if is_irreducible(f, p):
            return tuple(f)
    raise AssertionError("no irreducible polynomial found")  # unreachable


# --------------------------------------------------------------- fields

class FiniteField:
    """The field F_q, q = p**n. Build instances with :func:`make_field`."""

    def __init__(self, p: int, n: int, modulus: Tuple[int, ...] = ()):
        self.p = int(p)
        self.n = int(n)
        self.q = self.p ** self.n
        self.modulus = tuple(modulus)
        self._powers = np.array([self.p ** i for i in range(self.n)], dtype=np.int64)
        self._exp: Optional[np.ndarray] = None
        self._log: Optional[np.ndarray] = None

    def __repr__(self):
        if self.n == 1:
            return f"FiniteField({self.p})"
        return f"FiniteField({self.p}^{self.n}, modulus={self.modulus})"

    def __eq__(self, other):
        return isinstance(other, FiniteField) and (self.p, self.n, self.modulus) == (other.p, other.n, other.modulus)

    def __hash__(self):
        return hash((self.p, self.n, self.modulus))

    @property
    def order(self):
        return self.q

    @property
    def is_prime_field(self):
        return self.n == 1

    def to_dict(self):
        return {"p": self.p, "n": self.n, "modulus": list(self.modulus)}

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    # -- representation

    def to_coeffs(self, a):
        """Coefficient vector(s) of ``a``; arrays gain a trailing axis of length n."""
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self._powers) % self.p

    def from_coeffs(self, coeffs):
        c = np.asarray(coeffs, dtype=np.int64) % self.p
        out = (c * self._powers).sum(axis=-1)
        return int(out) if out.ndim == 0 else out

    def element(self, value):
        """Embed a python integer as n*1 in the prime subfield."""
        return int(value) % self.p

    # -- arithmetic

    def add(self, a, b):
        if self.n == 1:
            return (a + b) % self.p
        p = self.p
        out = 0
        for pw in self._powers.tolist():
            out = out + ((a // pw + b // pw) % p) * pw
        return out

    def neg(self, a):
        if self.n == 1:
            return (-a) % self.p
        p = self.p
        out = 0
        for pw in self._powers.tolist():
            out = out + ((-(a // pw)) % p) * pw
        return out

    def sub(self, a, b):
        if self.n == 1:
            return (a - b) % self.p
        p = self.p
        out = 0
        for pw in self._powers.tolist():
            out = out + ((a // pw - b // pw) % p) * pw
        return out

    def mul(self, a, b):
        if self.n == 1:
            if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
                return (np.asarray(a, dtype=np.int64) * np.asarray(b, dtype=np.int64)) % self.p
            return (a * b) % self.p
        exp, log = self._tables()
        m = self.q - 1
        if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
            a = np.asarray(a, dtype=np.int64)
            b = np.asarray(b, dtype=np.int64)
            r = exp[(log[a] + log[b]) % m]
            return np.where((a == 0) | (b == 0), 0, r)
        if a == 0 or b == 0:
            return 0
        return int(exp[(log[a] + log[b]) % m])

    def inv(self, a):
        if isinstance(a, np.ndarray):
            if np.any(a == 0):
                raise DivisionByZero("inverse of zero")
            return self.pow(a, -1)
        if a == 0:
            raise DivisionByZero("inverse of zero")
        return self.pow(a, -1)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e: int):
        e = int(e)
        if self.n == 1:
            p = self.p
            if isinstance(a, np.ndarray):
                a = np.asarray(a, dtype=np.int64) % p
                if e < 0:
                    if np.any(a == 0):
                        raise DivisionByZero("negative power of zero")
                    e = e % (p - 1)
                result = np.ones_like(a)
                base = a.copy()
                while e:
                    if e & 1:
                        result = result * base % p
                    base = base * base % p
                    e >>= 1
                return result
            if e < 0:
                if a % p == 0:
                    raise DivisionByZero("negative power of zero")
                e = e % (p - 1)
            return pow(int(a), e, p)
        exp, log = self._tables()
        m = self.q - 1
        if isinstance(a, np.ndarray):
            a = np.asarray(a, dtype=np.int64)
            zero = a == 0
            if e < 0 and np.any(zero):
                raise DivisionByZero("negative power of zero")
            r = exp[(log[a] * (e % m)) % m]
            return np.where(zero, 1 if e == 0 else 0, r)
        if a == 0:
            if e < 0:
                raise DivisionByZero("negative power of zero")
            return 1 if e == 0 else 0
        return int(exp[(int(log[a]) * (e % m)) % m])

    def two_inverse(self):
        return self.inv(self.element(2))

    # -- log tables for extension fields

    def _tables(self):
        if self._exp is None:
            self._exp, self._log = _build_log_tables(self)
        return self._exp, self._log

    def primitive_element(self) -> int:
        if self.n == 1:
            return _prime_field_generator(self.p)
        return int(self._tables()[0][1])

    def _scalar_mul_matrix(self, c: int) -> np.ndarray:
        """Matrix of u -> c*u on coefficient vectors (row-vector convention)."""
        cc = _trim(self.to_coeffs(c).tolist())
        rows = []
        for j in range(self.n):
            basis = [0] * j + [1]
            prod = poly_mulmod(basis, cc, list(self.modulus), self.p) if cc else []
            rows.append(prod + [0] * (self.n - len(prod)))
        return np.array(rows, dtype=np.int64)

    def _poly_pow_elem(self, a: int, e: int) -> int:
        coeffs = poly_powmod(_trim(self.to_coeffs(a).tolist()), e, list(self.modulus), self.p)
        return self.from_coeffs(coeffs + [0] * (self.n - len(coeffs))) if coeffs else 0


def _prime_field_generator(p):
    if p == 2:
        return 1
    factors = list(factorize(p - 1))
    for g in range(2, p):
        if all(pow(g, (p - 1) // r, p) != 1 for r in factors):
            return g
    raise AssertionError("unreachable")


def _build_log_tables(field: FiniteField):
    q, n = field.q, field.n
    m = q - 1
    factors = list(factorize(m))
    gen = None
    for cand in range(2, q):
        if all(field._poly_pow_elem(cand, m // r) != 1 for r in factors):
            gen = cand
            break
    assert gen is not None
    # exp[k] = gen**k, doubled block by block with the linear map of gen**L
    exp_digits = np.zeros((1, n), dtype=np.int64)
    exp_digits[0, 0] = 1
    length = 1
    while length < m:
        mat = field._scalar_mul_matrix(field._poly_pow_elem(gen, length))
        block = (exp_digits @ mat) % field.p
        exp_digits = np.vstack([exp_digits, block])
        length *= 2
    exp = (exp_digits[:m] * field._powers).sum(axis=1)
    log = np.full(q, -1, dtype=np.int64)
    log[exp] = np.arange(m, dtype=np.int64)
    if np.any(log[1:] < 0):  # pragma: no cover - gen is primitive
        raise AssertionError("generator is not primitive")
    log[0] = 0
    return exp, log


@lru_cache(maxsize=64)
def _cached_field(p, n):
    modulus = () if n == 1 else smallest_irreducible(p, n)
    return FiniteField(p, n, modulus)


def make_field(p: int, n: int = 1, cap: int = DEFAULT_ORDER_CAP) -> FiniteField:
    """F_{p^n} with the lexicographically smallest monic irreducible modulus."""
    p, n = int(p), int(n)
    if n < 1:
        raise DegreeZero(f"degree must be at least 1, got {n}")
    if p > MAX_CHARACTERISTIC or not is_prime(p):
        raise NotPrime(f"{p} is not a prime <= 2^31")
    if p ** n > cap:
        raise OrderExceedsCap(f"field order {p}^{n} exceeds the cap {cap}")
    return _cached_field(p, n)


FieldSpec = FiniteField


# ------------------------------------------------------------ subgroups

@dataclass(frozen=True, eq=False)
class SubgroupSpec:
    field: FiniteField
    kind: str            # additive_span | multiplicative_powers | full | trivial
    elements: np.ndarray
    index: int
    ambient: str         # "additive" (k) or "multiplicative" (k^x)
    generators: Tuple[int, ...] = ()
    exponent: Optional[int] = None

    @property
    def size(self) -> int:
        return int(self.elements.size)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.field.q, dtype=bool)
        m[self.elements] = True
        return m

    def __contains__(self, a):
        return bool(self.mask()[a])

    def to_dict(self):
        d = {"kind": self.kind, "ambient": self.ambient, "size": self.size, "index": self.index}
        if self.ambient == "additive":
            d["generators"] = list(self.generators)
        else:
            d["exponent"] = self.exponent
        return d


def multiplicative_subgroup(field: FiniteField, d: int) -> SubgroupSpec:
    """{u**d : u in k^x}; size (q-1)/gcd(d, q-1)."""
    if d < 1:
        raise ValueError("exponent d must be >= 1")
    units = np.arange(1, field.q, dtype=np.int64)
    elems = np.unique(field.pow(units, d))
    return SubgroupSpec(field, "multiplicative_powers", elems, gcd(d, field.q - 1), "multiplicative", exponent=d)


def _row_reduce(vectors, p):
    basis = []
    pivots = []
    for v in vectors:
        v = [int(x) % p for x in v]
        for b, col in zip(basis, pivots):
            if v[col]:
                c = v[col]
                v = [(x - c * y) % p for x, y in zip(v, b)]
        nz = next((i for i, x in enumerate(v) if x), None)
        if nz is None:
            continue
        inv = pow(v[nz], p - 2, p)
        v = [x * inv % p for x in v]
        for i, b in enumerate(basis):
            if b[nz]:
                c = b[nz]
                basis[i] = [(x - c * y) % p for x, y in zip(b, v)]
        basis.append(v)
        pivots.append(nz)
    return basis


def additive_subgroup(field: FiniteField, generators: Sequence[int]) -> SubgroupSpec:
    """F_p-linear span of ``generators``."""
    gens = tuple(int(g) for g in generators)
    basis = _row_reduce([field.to_coeffs(g).tolist() for g in gens], field.p)
    elems = np.zeros(1, dtype=np.int64)
    scalars = np.arange(field.p, dtype=np.int64)
    for b in basis:
        bi = field.from_coeffs(b)
        multiples = field.mul(np.full(field.p, bi, dtype=np.int64), scalars)
        elems = field.add(elems[:, None], multiples[None, :]).ravel()
    elems = np.unique(elems)
    rank = len(basis)
    kind = "full" if rank == field.n else "trivial" if rank == 0 else "additive_span"
    return SubgroupSpec(field, kind, elems, field.p ** (field.n - rank), "additive", generators=gens)


def full_subgroup(field: FiniteField) -> SubgroupSpec:
    return SubgroupSpec(field, "full", field.elements(), 1, "additive", generators=(1,) if field.n == 1 else ())


def poly_eval(coeffs: Sequence[int], g, field: FiniteField):
    """Horner evaluation of sum(coeffs[i] * g**i); g may be an array."""
    if len(coeffs) == 0:
        raise ValueError("coefficient list must be non-empty")
    acc = int(coeffs[-1]) if not isinstance(g, np.ndarray) else np.full(np.shape(g), int(coeffs[-1]), dtype=np.int64)
    for c in reversed(coeffs[:-1]):
        acc = field.add(field.mul(acc, g), int(c))
    return acc
