"""Hypothesis strategies for random terms, formulas and field sets."""
from hypothesis import strategies as st

from dpat import formula as fm

VARS = ("x", "y", "z", "u")

literals = st.one_of(
    st.just(fm.Zero()),
    st.just(fm.One()),
    st.integers(2, 5).map(fm.IntConst),
    st.integers(-5, -1).map(fm.IntConst),
)


def terms(variables=VARS):
    leaves = st.one_of(st.sampled_from(variables).map(fm.Var), literals)
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.builds(fm.Add, sub, sub),
            st.builds(fm.Sub, sub, sub),
            st.builds(fm.Mul, sub, sub),
            st.builds(fm.Neg, sub),
        ),
        max_leaves=5,
    )


def formulas(variables=VARS, max_leaves=4):
    atoms = st.builds(fm.Eq, terms(variables), terms(variables))
    var = st.sampled_from(variables)
    return st.recursive(
        atoms,
        lambda sub: st.one_of(
            st.builds(fm.Not, sub),
            st.builds(fm.And, sub, sub),
            st.builds(fm.Or, sub, sub),
            st.builds(fm.Implies, sub, sub),
            st.builds(fm.Exists, var, sub),
            st.builds(fm.Forall, var, sub),
            st.builds(fm.CountAtLeast, st.integers(1, 4), var, sub),
            st.builds(fm.CountAtMost, st.integers(0, 4), var, sub),
        ),
        max_leaves=max_leaves,
    )


SMALL_FIELDS = [(2, 1), (3, 1), (5, 1), (7, 1), (11, 1), (2, 2), (3, 2)]
