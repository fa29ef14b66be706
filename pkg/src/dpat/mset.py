"""Bit-packed extensional subsets of k^a, a in {1, 2, 3}.

A tuple ``(e_0, ..., e_{a-1})`` has flat index ``e_0*q**(a-1) + ... + e_{a-1}``
(first coordinate most significant), so for a = 2 the row ``R_x`` is the bit
range ``[x*q, (x+1)*q)``. Bit ``i`` lives in word ``i // 64`` at position
``i % 64``; padding bits past ``q**a`` are always zero.

Binary file layout (all little-endian)::

    offset 0   4 bytes   magic b"MSET"
    offset 4   uint32    format version (1)
    offset 8   uint32    p
    offset 12  uint32    n
    offset 16  uint32    arity
    offset 20  uint64[]  ceil(q**arity / 64) words
"""
from __future__ import annotations

import os
import struct
import tempfile
from typing import Iterable

import numpy as np

from .errors import FieldMismatch, MembershipFormatError
from .finfield import FiniteField, make_field

MAGIC = b"MSET"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIII")
_WORD = np.dtype("<u8")


def pack_bits(mask: np.ndarray) -> np.ndarray:
    flat = np.ascontiguousarray(mask, dtype=bool).ravel()
    nwords = -(-flat.size // 64)
    padded = np.zeros(nwords * 64, dtype=bool)
    padded[:flat.size] = flat
    return np.packbits(padded, bitorder="little").view(_WORD).astype(np.uint64)


def unpack_bits(words: np.ndarray, nbits: int) -> np.ndarray:
    raw = np.ascontiguousarray(words, dtype=_WORD).view(np.uint8)
    return np.unpackbits(raw, bitorder="little", count=nbits).astype(bool)


class MembershipSet:
    """Immutable bit vector over k^arity with a cached popcount."""

    def __init__(self, field: FiniteField, arity: int, words: np.ndarray):
        if arity not in (1, 2, 3):
            raise ValueError("arity must be 1, 2 or 3")
        self.field = field
        self.arity = arity
        self.nbits = field.q ** arity
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (-(-self.nbits // 64),):
            raise ValueError(f"expected {-(-self.nbits // 64)} words, got {words.shape}")
        self.words = words
        self.words.flags.writeable = False
        self._cardinality = None

    # -- constructors

    @classmethod
    def from_mask(cls, field: FiniteField, mask, arity: int = None) -> "MembershipSet":
        mask = np.asarray(mask, dtype=bool)
        if arity is None:
            arity = mask.ndim
        if mask.size != field.q ** arity:
            raise ValueError("mask size does not match q**arity")
        return cls(field, arity, pack_bits(mask))

    @classmethod
    def from_elements(cls, field: FiniteField, elements: Iterable, arity: int = 1) -> "MembershipSet":
        mask = np.zeros((field.q,) * arity, dtype=bool)
        for e in elements:
            mask[e if arity > 1 else int(e)] = True
        return cls.from_mask(field, mask, arity)

    @classmethod
    def empty(cls, field, arity=1):
        return cls.from_mask(field, np.zeros((field.q,) * arity, dtype=bool), arity)

    @classmethod
    def full(cls, field, arity=1):
        return cls.from_mask(field, np.ones((field.q,) * arity, dtype=bool), arity)

    # -- views

    @property
    def cardinality(self) -> int:
        if self._cardinality is None:
            self._cardinality = int(np.bitwise_count(self.words).sum())
        return self._cardinality

    def __len__(self):
        return self.cardinality

    def mask(self) -> np.ndarray:
        return unpack_bits(self.words, self.nbits).reshape((self.field.q,) * self.arity)

    def flat_mask(self) -> np.ndarray:
        return unpack_bits(self.words, self.nbits)

    def elements(self) -> list:
        idx = np.flatnonzero(self.flat_mask())
        if self.arity == 1:
            return idx.tolist()
        return [tuple(int(c) for c in t) for t in zip(*np.unravel_index(idx, (self.field.q,) * self.arity))]

    def __contains__(self, item) -> bool:
        q = self.field.q
        if self.arity == 1:
            i = int(item[0] if isinstance(item, tuple) else item)
        else:
            i = 0
            for c in item:
                i = i * q + int(c)
        return bool((int(self.words[i >> 6]) >> (i & 63)) & 1)

    def row(self, x: int) -> np.ndarray:
        """R_x = {y : (x, y) in S} for an arity-2 set."""
        if self.arity != 2:
            raise ValueError("row views exist only for arity-2 sets")
        q = self.field.q
        return self.flat_mask()[x * q:(x + 1) * q]

    def rows(self) -> np.ndarray:
        if self.arity != 2:
            raise ValueError("row views exist only for arity-2 sets")
        return self.mask()

    def packed_rows(self) -> np.ndarray:
        """Each row of an arity-2 set packed into its own run of 64-bit words."""
        rows = self.rows()
        q = self.field.q
        nwords = -(-q // 64)
        padded = np.zeros((q, nwords * 64), dtype=bool)
        padded[:, :q] = rows
        return np.packbits(padded, axis=1, bitorder="little").view(_WORD).astype(np.uint64).reshape(q, nwords)

    # -- algebra

    def _same(self, other):
        if self.field != other.field or self.arity != other.arity:
            raise FieldMismatch("sets live over different fields or arities")

    def __and__(self, other):
        self._same(other)
        return MembershipSet(self.field, self.arity, self.words & other.words)

    def __or__(self, other):
        self._same(other)
        return MembershipSet(self.field, self.arity, self.words | other.words)

    def __invert__(self):
        return MembershipSet.from_mask(self.field, ~self.flat_mask(), self.arity)

    def __eq__(self, other):
        return (isinstance(other, MembershipSet) and self.field == other.field
                and self.arity == other.arity and np.array_equal(self.words, other.words))

    def __hash__(self):
        return hash((self.field, self.arity, self.words.tobytes()))

    def __repr__(self):
        return f"MembershipSet(q={self.field.q}, arity={self.arity}, cardinality={self.cardinality})"

    # -- serialization

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(MAGIC, FORMAT_VERSION, self.field.p, self.field.n, self.arity)
        return header + self.words.astype(_WORD).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "MembershipSet":
        if len(data) < _HEADER.size:
            raise MembershipFormatError("truncated header")
        magic, version, p, n, arity = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise MembershipFormatError(f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise MembershipFormatError(f"unsupported version {version}")
        if arity not in (1, 2, 3):
            raise MembershipFormatError(f"unsupported arity {arity}")
        field = make_field(p, n)
        nbits = field.q ** arity
        nwords = -(-nbits // 64)
        body = data[_HEADER.size:]
        if len(body) != 8 * nwords:
            raise MembershipFormatError(f"expected {8 * nwords} payload bytes, got {len(body)}")
        words = np.frombuffer(body, dtype=_WORD).astype(np.uint64)
        tail = nbits % 64
        if tail and int(words[-1]) >> tail:
            raise MembershipFormatError("padding bits are set")
        return cls(field, arity, words)

    def save(self, path) -> None:
        write_atomic(path, self.to_bytes())

    @classmethod
    def load(cls, path) -> "MembershipSet":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def write_atomic(path, data) -> None:
    """Write bytes or text through a temp file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data.encode() if isinstance(data, str) else data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
