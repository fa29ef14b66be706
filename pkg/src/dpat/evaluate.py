"""Extensional evaluation of ring formulas over a finite field.

Each subformula is evaluated to a boolean numpy array with one axis per
variable in scope; an axis has length q when the subformula depends on that
variable and length 1 otherwise, so connectives are plain broadcasting.
Quantifiers append an axis for the bound variable and reduce it. When that
intermediate would exceed ``cell_cap`` cells the quantifier instead loops
over the field, fixing the bound variable to one value at a time; results of
subformulas that do not mention the loop variable are memoized across
iterations, keyed on the subformula and the bindings of its free variables.
"""
from __future__ import annotations

import itertools
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import formula as fm
from .errors import EnumerationCapExceeded, UncoveredFreeVariable
from .finfield import FiniteField
from .mset import MembershipSet

DEFAULT_BIT_CAP = 2**24
DEFAULT_CELL_CAP = 2**25

Assignment = Mapping[str, int]


class _Engine:
    def __init__(self, field: FiniteField, cell_cap: int):
        self.F = field
        self.q = field.q
        self.cell_cap = cell_cap
        self._free: Dict[int, frozenset] = {}
        self._memo: Dict[tuple, np.ndarray] = {}
        self._looping: set = set()

    def free(self, node) -> frozenset:
        key = id(node)
        out = self._free.get(key)
        if out is None:
            if isinstance(node, fm.QUANTIFIERS):
                out = self.free(node.body) - {node.var}
            elif isinstance(node, fm.Eq):
                out = frozenset(fm.term_vars(node.left)) | frozenset(fm.term_vars(node.right))
            elif isinstance(node, fm.Not):
                out = self.free(node.arg)
            else:
                out = self.free(node.left) | self.free(node.right)
            self._free[key] = out
        return out

    # -- terms

    def term(self, t, env, ndim) -> np.ndarray:
        F = self.F
        if isinstance(t, fm.Var):
            kind, where = env[t.name]
            if kind == "val":
                return np.full((1,) * ndim, where, dtype=np.int64)
            shape = [1] * ndim
            shape[where] = self.q
            return np.arange(self.q, dtype=np.int64).reshape(shape)
        if isinstance(t, fm.Zero):
            return np.zeros((1,) * ndim, dtype=np.int64)
        if isinstance(t, fm.One):
            return np.ones((1,) * ndim, dtype=np.int64)
        if isinstance(t, fm.IntConst):
            return np.full((1,) * ndim, F.element(t.value), dtype=np.int64)
        if isinstance(t, fm.Neg):
            return F.neg(self.term(t.arg, env, ndim))
        a = self.term(t.left, env, ndim)
        b = self.term(t.right, env, ndim)
        if isinstance(t, fm.Add):
            return F.add(a, b)
        if isinstance(t, fm.Sub):
            return F.sub(a, b)
        return F.mul(a, b)

    # -- formulas

    def formula(self, f, env, ndim) -> np.ndarray:
        fv = self.free(f)
        key = (id(f), ndim, tuple(sorted((v, env[v]) for v in fv)))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        out = self._formula(f, env, ndim)
        if not (fv & self._looping):
            self._memo[key] = out
        return out

    def _formula(self, f, env, ndim):
        if isinstance(f, fm.Eq):
            return self.term(f.left, env, ndim) == self.term(f.right, env, ndim)
        if isinstance(f, fm.Not):
            return ~self.formula(f.arg, env, ndim)
        if isinstance(f, fm.And):
            return self.formula(f.left, env, ndim) & self.formula(f.right, env, ndim)
        if isinstance(f, fm.Or):
            return self.formula(f.left, env, ndim) | self.formula(f.right, env, ndim)
        if isinstance(f, fm.Implies):
            return ~self.formula(f.left, env, ndim) | self.formula(f.right, env, ndim)
        return self._quantifier(f, env, ndim)

    def _quantifier(self, f, env, ndim):
        q = self.q
        body_fv = self.free(f.body)
        if f.var not in body_fv:
            # vacuous binding: the body is constant in the bound variable
            inner = {k: v for k, v in env.items() if k != f.var}
            b = self.formula(f.body, inner, ndim)
            if isinstance(f, (fm.Exists, fm.Forall)):
                return b
            return self._compare(f, b.astype(np.int64) * q)
        outer_axes = {env[v][1] for v in body_fv - {f.var} if env[v][0] == "axis"}
        cells = q ** (len(outer_axes) + 1)
        if cells <= self.cell_cap:
            b = self.formula(f.body, {**env, f.var: ("axis", ndim)}, ndim + 1)
            if isinstance(f, fm.Exists):
                return b.any(axis=-1)
            if isinstance(f, fm.Forall):
                return b.all(axis=-1)
            return self._compare(f, b.sum(axis=-1, dtype=np.int64))
        acc = None
        self._looping.add(f.var)
        for e in range(q):
            b = self.formula(f.body, {**env, f.var: ("val", e)}, ndim)
            if isinstance(f, fm.Exists):
                acc = b if acc is None else acc | b
                if acc.all():
                    break
            elif isinstance(f, fm.Forall):
                acc = b if acc is None else acc & b
                if not acc.any():
                    break
            else:
                acc = b.astype(np.int64) if acc is None else acc + b
        self._looping.discard(f.var)
        if isinstance(f, (fm.Exists, fm.Forall)):
            return acc
        return self._compare(f, acc)

    @staticmethod
    def _compare(f, counts):
        if isinstance(f, fm.CountAtLeast):
            return counts >= f.bound
        return counts <= f.bound


def _check_params(field, params):
    out = {}
    for name, value in (params or {}).items():
        v = int(value)
        if not 0 <= v < field.q:
            raise ValueError(f"parameter {name}={value} is not an element of F_{field.q}")
        out[name] = v
    return out


def evaluate_mask(f, field: FiniteField, params: Optional[Assignment], axes: Sequence[str],
                  cell_cap: int = DEFAULT_CELL_CAP) -> np.ndarray:
    """Boolean array of shape (q,)*len(axes) for ``f`` with ``axes`` free."""
    f = fm.as_formula(f)
    axes = list(axes)
    if len(set(axes)) != len(axes):
        raise ValueError("free variable list has duplicates")
    params = _check_params(field, params)
    missing = [v for v in fm.free_vars(f) if v not in axes and v not in params]
    if missing:
        raise UncoveredFreeVariable(f"free variables not covered by parameters: {', '.join(missing)}")
    env = {name: ("val", v) for name, v in params.items() if name not in axes}
    env.update({name: ("axis", i) for i, name in enumerate(axes)})
    engine = _Engine(field, cell_cap)
    out = engine.formula(f, env, len(axes))
    return np.broadcast_to(out, (field.q,) * len(axes))


def evaluate(f: Union[str, "fm.Formula"], field: FiniteField, params: Optional[Assignment] = None,
             free: Sequence[str] = ("x",), bit_cap: int = DEFAULT_BIT_CAP,
             cell_cap: int = DEFAULT_CELL_CAP) -> MembershipSet:
    """The set f(k^a, params) as a bit-packed MembershipSet, a = len(free)."""
    free = list(free)
    if not 1 <= len(free) <= 3:
        raise ValueError("between 1 and 3 free variables are supported")
    if field.q ** len(free) > bit_cap:
        raise EnumerationCapExceeded(f"q^{len(free)} = {field.q ** len(free)} bits exceeds the cap {bit_cap}")
    mask = evaluate_mask(f, field, params, free, cell_cap)
    return MembershipSet.from_mask(field, mask, len(free))


def cardinality(s: MembershipSet) -> int:
    return s.cardinality


def family_scan(f, field: FiniteField, free: Sequence[str], params: Sequence[str],
                cap: Optional[int] = None, fixed: Optional[Assignment] = None,
                bit_cap: int = DEFAULT_BIT_CAP, cell_cap: int = DEFAULT_CELL_CAP) -> List[Tuple[Tuple[int, ...], int]]:
    """Fiber cardinalities |f(k^a, b)| for parameter tuples b in index order.

    When ``q**len(params)`` exceeds ``cap`` only the first ``cap`` tuples (in
    index order, first parameter most significant) are visited.
    """
    f = fm.as_formula(f)
    free, params = list(free), list(params)
    if not params:
        raise ValueError("family_scan needs at least one parameter variable")
    if set(free) & set(params):
        raise ValueError("free and parameter variables overlap")
    q = field.q
    if q ** len(free) > bit_cap:
        raise EnumerationCapExceeded(f"fiber size q^{len(free)} exceeds the cap {bit_cap}")
    total = q ** len(params)
    visit = total if cap is None else min(total, int(cap))
    fixed = dict(fixed or {})
    if visit == total and q ** (len(params) + len(free)) <= cell_cap:
        mask = evaluate_mask(f, field, fixed, params + free, cell_cap)
        counts = mask.reshape(total, -1).sum(axis=1)
        tuples = itertools.product(range(q), repeat=len(params))
        return [(t, int(c)) for t, c in zip(tuples, counts.tolist())]
    out = []
    for t in itertools.islice(itertools.product(range(q), repeat=len(params)), visit):
        assignment = {**fixed, **dict(zip(params, t))}
        mask = evaluate_mask(f, field, assignment, free, cell_cap)
        out.append((t, int(mask.sum())))
    return out
