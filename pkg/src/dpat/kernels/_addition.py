"""Chunked addition tables for F_{p^n} element indices.

Indices are base-p digit vectors, so a + b is digit-wise addition mod p. The
digits are grouped into chunks of c digits with m = p**c <= 1024; one m x m
table adds a chunk, and t = ceil(n / c) lookups add a full index.
"""
from functools import lru_cache

import numpy as np

TABLE_SIDE_LIMIT = 1024


@lru_cache(maxsize=64)
def addition_table(p: int, n: int):
    """(table, m, t) with a + b = sum_j table[a_j, b_j] * m**j over base-m digits."""
    if n == 1:
        return np.zeros((1, 1), dtype=np.int32), 1, 0
    c = 1
    while c < n and p ** (c + 1) <= TABLE_SIDE_LIMIT:
        c += 1
    m = p ** c
    idx = np.arange(m, dtype=np.int64)
    table = np.zeros((m, m), dtype=np.int64)
    pw = 1
    for _ in range(c):
        table += ((idx[:, None] // pw + idx[None, :] // pw) % p) * pw
        pw *= p
    table = table.astype(np.int32)
    table.setflags(write=False)
    return table, m, -(-n // c)


@lru_cache(maxsize=64)
def element_digits(p: int, n: int) -> np.ndarray:
    """digits[a, j] = j-th base-m digit of index a, with m from ``addition_table``."""
    _, m, t = addition_table(p, n)
    if t == 0:
        return np.zeros((1, 1), dtype=np.int64)
    idx = np.arange(p ** n, dtype=np.int64)
    digits = np.stack([(idx // m ** j) % m for j in range(t)], axis=1)
    digits.setflags(write=False)
    return digits
