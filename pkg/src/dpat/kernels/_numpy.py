"""Pure-numpy counting kernels (fallback path).

Field elements are indices in [0, p**n); addition is digit-wise mod p.
"""
import numpy as np

from ._addition import addition_table

_CHUNK_CELLS = 1 << 22


def field_add(a, b, p, n):
    if n == 1:
        return (a + b) % p
    table, m, t = addition_table(p, n)
    out = 0
    pw = 1
    for _ in range(t):
        out = out + table[(a // pw) % m, (b // pw) % m] * pw
        pw *= m
    return out


def _chunks(items, width):
    step = max(1, _CHUNK_CELLS // max(width, 1))
    for start in range(0, len(items), step):
        yield items[start:start + step]


def ap3_counts(x_mask, h_mask, p, n):
    """c[x] = #{g in H : x, x+g, x+2g in X} for x in X, 0 elsewhere."""
    q = x_mask.size
    g = np.flatnonzero(h_mask)
    g2 = field_add(g, g, p, n)
    out = np.zeros(q, dtype=np.int64)
    for xs in _chunks(np.flatnonzero(x_mask), g.size):
        first = x_mask[field_add(xs[:, None], g[None, :], p, n)]
        second = x_mask[field_add(xs[:, None], g2[None, :], p, n)]
        out[xs] = (first & second).sum(axis=1)
    return out


def shift_counts(x_mask, w_mask, p, n):
    """s[x] = #{w in W : x+w in X} for x in X, 0 elsewhere."""
    q = x_mask.size
    w = np.flatnonzero(w_mask)
    out = np.zeros(q, dtype=np.int64)
    for xs in _chunks(np.flatnonzero(x_mask), w.size):
        out[xs] = x_mask[field_add(xs[:, None], w[None, :], p, n)].sum(axis=1)
    return out


def row_overlaps(rows):
    """C[x, x'] = |R_x & R_x'|; exact because float32 holds integers < 2**24."""
    r = rows.astype(np.float32)
    return np.rint(r @ r.T).astype(np.int64)


def row_autocorrelation(rows, p, n):
    """A[x, c] = #{y : y in R_x and y + c in R_x}, via FFT over (Z/p)^n."""
    q = rows.shape[1]
    shape = (rows.shape[0],) + (p,) * n
    axes = tuple(range(1, n + 1))
    spec = np.fft.fftn(rows.reshape(shape).astype(np.float64), axes=axes)
    corr = np.fft.ifftn(np.conj(spec) * spec, axes=axes).real
    return np.rint(corr).astype(np.int64).reshape(rows.shape[0], q)


def combine_skew(overlaps, autocorr, p1vals, p2vals, p, n):
    """N[g] = sum_x C[x, x + P1(g)] * A[x, P2(g)]."""
    q = overlaps.shape[0]
    xs = np.arange(q, dtype=np.int64)
    out = np.zeros(p1vals.size, dtype=np.int64)
    gs = np.arange(p1vals.size)
    for chunk in _chunks(gs, q):
        cols = field_add(xs[:, None], p1vals[None, chunk], p, n)
        first = np.take_along_axis(overlaps, cols, axis=1)
        second = autocorr[:, p2vals[chunk]]
        out[chunk] = (first * second).sum(axis=0)
    return out


def skew_counts(rows, p1vals, p2vals, p, n):
    return combine_skew(row_overlaps(rows), row_autocorrelation(rows, p, n), p1vals, p2vals, p, n)
