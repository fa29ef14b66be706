"""Backend dispatch for the counting kernels.

The default backend is numba when it is importable and ``DPAT_DISABLE_NUMBA``
is unset; every entry point also takes ``backend="numba" | "numpy"`` so both
paths can be compared directly.
"""
import numpy as np

from .._accel import HAVE_NUMBA, default_backend
from . import _numpy
from ._addition import addition_table, element_digits

if HAVE_NUMBA:
    from . import _numba
else:  # pragma: no cover
    _numba = None

BACKENDS = ("numba", "numpy") if HAVE_NUMBA else ("numpy",)


def _resolve(backend):
    backend = backend or default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def _mask(a):
    return np.ascontiguousarray(a, dtype=np.bool_)


def _ints(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def _field_args(p, n):
    p, n = int(p), int(n)
    table, m, t = addition_table(p, n)
    return p, table, m, t, element_digits(p, n)


def ap3_counts(x_mask, h_mask, p, n, backend=None):
    x_mask, h_mask = _mask(x_mask), _mask(h_mask)
    if _resolve(backend) == "numba":
        return _numba.ap3_counts(x_mask, _ints(np.flatnonzero(h_mask)), *_field_args(p, n))
    return _numpy.ap3_counts(x_mask, h_mask, int(p), int(n))


def shift_counts(x_mask, w_mask, p, n, backend=None):
    x_mask, w_mask = _mask(x_mask), _mask(w_mask)
    if _resolve(backend) == "numba":
        return _numba.shift_counts(x_mask, _ints(np.flatnonzero(w_mask)), *_field_args(p, n))
    return _numpy.shift_counts(x_mask, w_mask, int(p), int(n))


def _pack_rows(rows):
    q, width = rows.shape
    nwords = -(-width // 64)
    padded = np.zeros((q, nwords * 64), dtype=bool)
    padded[:, :width] = rows
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").astype(np.uint64).reshape(q, nwords)


def row_overlaps(rows, backend=None):
    rows = _mask(rows)
    if _resolve(backend) == "numba":
        return _numba.row_overlaps_packed(_pack_rows(rows))
    return _numpy.row_overlaps(rows)


def row_autocorrelation(rows, p, n, backend=None):
    """A[x, c] = |R_x & (R_x - c)|.

    The numba backend uses packed rotations over prime fields and an integer
    Walsh-Hadamard transform in characteristic 2. Other extension fields use
    the FFT over (Z/p)^n in both backends, since a direct loop is cubic in q.
    """
    rows = _mask(rows)
    if _resolve(backend) == "numba":
        if n == 1:
            doubled = _pack_rows(np.concatenate([rows, rows], axis=1))
            return _numba.row_autocorrelation_prime(_pack_rows(rows), doubled, int(p))
        if p == 2:
            return _numba.row_autocorrelation_binary(rows)
    return _numpy.row_autocorrelation(rows, int(p), int(n))


def skew_counts(rows, p1vals, p2vals, p, n, backend=None):
    """N[g] = sum_x |R_x & R_{x+P1(g)}| * |R_x & (R_x - P2(g))| for every g."""
    backend = _resolve(backend)
    overlaps = row_overlaps(rows, backend)
    autocorr = row_autocorrelation(rows, p, n, backend)
    p1vals, p2vals = _ints(p1vals), _ints(p2vals)
    if backend == "numba":
        return _numba.combine_skew(overlaps, autocorr, p1vals, p2vals, *_field_args(p, n))
    return _numpy.combine_skew(overlaps, autocorr, p1vals, p2vals, int(p), int(n))


__all__ = ["BACKENDS", "ap3_counts", "shift_counts", "row_overlaps", "row_autocorrelation", "skew_counts"]
