"""Primality, factorization and segmented sieves for prime / square-free tests."""
from functools import lru_cache
from math import gcd, isqrt

import numpy as np

# Deterministic for every n < 3.3e24, in particular all 64-bit integers.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 2**64."""
    n = abs(int(n))
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n as an int64 array (plain Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return np.flatnonzero(sieve).astype(np.int64)


@lru_cache(maxsize=8)
def _base_primes(limit: int) -> np.ndarray:
    return primes_up_to(limit)


def _base_primes_for(hi: int) -> np.ndarray:
    # round the limit up so that the cache is reused across nearby windows
    limit = max(1024, 1 << (isqrt(max(hi, 1)) + 1).bit_length())
    ps = _base_primes(limit)
    return ps[ps <= isqrt(max(hi, 1))]


def prime_segment(lo: int, hi: int) -> np.ndarray:
    """Boolean mask of primality for the integers lo..hi (0 <= lo <= hi)."""
    if lo < 0 or hi < lo:
        raise ValueError("prime_segment needs 0 <= lo <= hi")
    mask = np.ones(hi - lo + 1, dtype=bool)
    for p in _base_primes_for(hi):
        p = int(p)
        start = max(p * p, -(-lo // p) * p)
        if start <= hi:
            mask[start - lo::p] = False
    mask[:max(0, min(2, hi + 1) - lo)] = False
    return mask


def squarefree_segment(lo: int, hi: int) -> np.ndarray:
    """Boolean mask of square-freeness for lo..hi (0 <= lo <= hi); 0 is not square-free."""
    if lo < 0 or hi < lo:
        raise ValueError("squarefree_segment needs 0 <= lo <= hi")
    mask = np.ones(hi - lo + 1, dtype=bool)
    for p in _base_primes_for(hi):
        sq = int(p) * int(p)
        start = -(-lo // sq) * sq
        if start <= hi:
            mask[start - lo::sq] = False
    if lo == 0:
        mask[0] = False
    return mask


def is_squarefree(n: int) -> bool:
    """Square-freeness of a single integer by trial division to the cube root.

    After removing every prime <= n**(1/3) the cofactor has at most two prime
    factors, so it is square-free exactly when it is not a perfect square.
    """
    n = abs(int(n))
    if n == 0:
        return False
    for p in (2, 3, 5):
        if n % (p * p) == 0:
            return False
        if n % p == 0:
            n //= p
    f = 7
    step = 4
    while f * f * f <= n:
        if n % f == 0:
            n //= f
            if n % f == 0:
                return False
        f += step
        step = 6 - step
    if n > 1:
        r = isqrt(n)
        if r * r == n:
            return False
    return True


def factorize(n: int) -> dict:
    """Prime factorization by trial division (intended for n < 2**40)."""
    n = int(n)
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def primes_in_range(lo: int, hi: int) -> list:
    lo = max(lo, 2)
    if hi < lo:
        return []
    return [lo + int(i) for i in np.flatnonzero(prime_segment(lo, hi))]


__all__ = [
    "gcd", "is_prime", "is_squarefree", "factorize", "primes_up_to", "primes_in_range",
    "prime_segment", "squarefree_segment",
]
