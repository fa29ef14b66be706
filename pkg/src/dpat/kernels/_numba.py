"""Numba counting kernels. Same contracts as :mod:`dpat.kernels._numpy`."""
import numpy as np

from .._accel import njit

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_ONE = np.uint64(1)
_TWO = np.uint64(2)
_FOUR = np.uint64(4)
_FIFTYSIX = np.uint64(56)
_SIXTYFOUR = np.uint64(64)


@njit
def popcount64(x):
    x = x - ((x >> _ONE) & _M1)
    x = (x & _M2) + ((x >> _TWO) & _M2)
    x = (x + (x >> _FOUR)) & _M4
    return np.int64((x * _H01) >> _FIFTYSIX)


@njit
def field_add(a, b, p, table, m, t):
    """a + b in F_{p^n}; ``table, m, t`` come from ``addition_table`` (t = 0 for prime fields)."""
    if t == 0:
        s = a + b
        return s - p if s >= p else s
    out = 0
    pw = 1
    for _ in range(t):
        out += table[(a // pw) % m, (b // pw) % m] * pw
        pw *= m
    return out


@njit
def _digit_add(da, db, table, m, t, out):
    """Add two base-m digit rows through ``table``; fills ``out`` and returns the index."""
    idx = 0
    pw = 1
    for j in range(t):
        d = table[da[j], db[j]]
        out[j] = d
        idx += d * pw
        pw *= m
    return idx


@njit
def ap3_counts(x_mask, gaps, p, table, m, t, digits):
    q = x_mask.size
    out = np.zeros(q, dtype=np.int64)
    dy = np.zeros(max(t, 1), dtype=np.int64)
    dz = np.zeros(max(t, 1), dtype=np.int64)
    for x in range(q):
        if not x_mask[x]:
            continue
        c = 0
        for i in range(gaps.size):
            g = gaps[i]
            if t == 0:
                y = x + g
                if y >= p:
                    y -= p
                z = y + g
                if z >= p:
                    z -= p
            else:
                y = _digit_add(digits[x], digits[g], table, m, t, dy)
                if not x_mask[y]:
                    continue
                z = _digit_add(dy, digits[g], table, m, t, dz)
            if x_mask[y] and x_mask[z]:
                c += 1
        out[x] = c
    return out


@njit
def shift_counts(x_mask, shifts, p, table, m, t, digits):
    q = x_mask.size
    out = np.zeros(q, dtype=np.int64)
    dy = np.zeros(max(t, 1), dtype=np.int64)
    for x in range(q):
        if not x_mask[x]:
            continue
        c = 0
        for i in range(shifts.size):
            w = shifts[i]
            if t == 0:
                y = x + w
                if y >= p:
                    y -= p
            else:
                y = _digit_add(digits[x], digits[w], table, m, t, dy)
            if x_mask[y]:
                c += 1
        out[x] = c
    return out


@njit
def row_overlaps_packed(packed):
    q, nwords = packed.shape
    out = np.zeros((q, q), dtype=np.int64)
    for i in range(q):
        for j in range(i, q):
            s = 0
            for w in range(nwords):
                s += popcount64(packed[i, w] & packed[j, w])
            out[i, j] = s
            out[j, i] = s
    return out


@njit
def _window64(doubled, start):
    """64 bits of ``doubled`` beginning at bit ``start``."""
    k = start >> 6
    r = np.uint64(start & 63)
    lo = doubled[k]
    if r == 0:
        return lo
    hi = doubled[k + 1] if k + 1 < doubled.size else np.uint64(0)
    return (lo >> r) | (hi << (_SIXTYFOUR - r))


@njit
def row_autocorrelation_prime(packed, doubled, p):
    """Prime fields: R_x - c is the rotation of R_x, read from the row R_x R_x."""
    q, nwords = packed.shape
    out = np.zeros((q, q), dtype=np.int64)
    tail = p & 63
    tail_mask = (_ONE << np.uint64(tail)) - _ONE if tail else ~np.uint64(0)
    for x in range(q):
        row = packed[x]
        dbl = doubled[x]
        for c in range(p):
            s = 0
            for w in range(nwords):
                bits = _window64(dbl, c + 64 * w)
                if w == nwords - 1:
                    bits &= tail_mask
                s += popcount64(row[w] & bits)
            out[x, c] = s
    return out


@njit
def _walsh_hadamard(v):
    h = 1
    q = v.size
    while h < q:
        for start in range(0, q, 2 * h):
            for k in range(start, start + h):
                a = v[k]
                b = v[k + h]
                v[k] = a + b
                v[k + h] = a - b
        h *= 2


@njit
def row_autocorrelation_binary(rows):
    """A[x, c] = |R_x & (R_x + c)| over (Z/2)^n, exactly, via the Walsh-Hadamard transform."""
    nrows, q = rows.shape
    out = np.zeros((nrows, q), dtype=np.int64)
    v = np.zeros(q, dtype=np.int64)
    for x in range(nrows):
        for y in range(q):
            v[y] = 1 if rows[x, y] else 0
        _walsh_hadamard(v)
        for y in range(q):
            v[y] = v[y] * v[y]
        _walsh_hadamard(v)
        for y in range(q):
            out[x, y] = v[y] // q
    return out


@njit
def combine_skew(overlaps, autocorr, p1vals, p2vals, p, table, m, t, digits):
    q = overlaps.shape[0]
    out = np.zeros(p1vals.size, dtype=np.int64)
    dy = np.zeros(max(t, 1), dtype=np.int64)
    for g in range(p1vals.size):
        a = p1vals[g]
        b = p2vals[g]
        s = 0
        for x in range(q):
            if t == 0:
                y = x + a
                if y >= p:
                    y -= p
            else:
                y = _digit_add(digits[x], digits[a], table, m, t, dy)
            s += overlaps[x, y] * autocorr[x, b]
        out[g] = s
    return out
