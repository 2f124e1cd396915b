from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from borelcert.exact_linalg import (DimensionMismatch, SparseMatrix, Subspace, kernel_basis, rank,
                                    rank_of_rows, rref)

small = st.integers(min_value=-3, max_value=3)


@st.composite
def matrices(draw, max_rows=6, max_cols=6, fractions=False):
    m = draw(st.integers(1, max_rows))
    n = draw(st.integers(1, max_cols))
    entry = small
    if fractions:
        entry = st.builds(Fraction, small, st.integers(1, 4))
    return [[draw(entry) for _ in range(n)] for _ in range(m)]


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_rank_matches_sympy(rows):
    assert rank(SparseMatrix.from_dense(rows)) == sympy.Matrix(rows).rank()


@settings(max_examples=80, deadline=None)
@given(matrices(fractions=True))
def test_rank_methods_agree_on_rationals(rows):
    dicts = [{j: c for j, c in enumerate(r) if c} for r in rows]
    expected = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in r]
                             for r in rows]).rank()
    assert rank_of_rows(dicts, method="rational") == expected
    assert rank_of_rows(dicts) == expected


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_kernel_is_annihilated_and_has_right_dimension(rows):
    m = SparseMatrix.from_dense(rows)
    ker = kernel_basis(m)
    assert ker.dim == m.shape[1] - rank(m)
    for vec in ker.basis:
        assert all(v == 0 for v in m.apply(vec).values())


@settings(max_examples=60, deadline=None)
@given(matrices(max_cols=5), matrices(max_cols=5))
def test_intersection_and_sum_dimensions(a, b):
    n = min(len(a[0]), len(b[0]))
    S = Subspace(n, [{j: c for j, c in enumerate(r[:n]) if c} for r in a])
    T = Subspace(n, [{j: c for j, c in enumerate(r[:n]) if c} for r in b])
    inter, total = S & T, S + T
    assert inter.dim + total.dim == S.dim + T.dim
    assert inter <= S and inter <= T
    assert S <= total and T <= total


@settings(max_examples=60, deadline=None)
@given(matrices(max_cols=5))
def test_annihilator_is_an_involution(a):
    n = len(a[0])
    S = Subspace(n, [{j: c for j, c in enumerate(r) if c} for r in a])
    ann = S.annihilator()
    assert ann.dim == S.codim
    assert ann.annihilator() == S
    for x in S.basis:
        for y in ann.basis:
            assert sum(c * y.get(k, 0) for k, c in x.items()) == 0


def test_subspace_equality_ignores_spanning_set():
    S = Subspace(3, [{0: 1, 1: 1}, {1: 1}])
    T = Subspace(3, [{0: 2}, {0: 1, 1: -3}])
    assert S == T and hash(S) == hash(T)
    assert {0: 5, 1: 7} in S and {2: 1} not in S


def test_rref_pivots():
    m = SparseMatrix.from_dense([[0, 2, 4], [0, 1, 2], [1, 0, 1]])
    r, piv = rref(m)
    assert piv == (0, 1)
    assert r.shape[0] == 2


def test_dimension_mismatch_is_reported():
    with pytest.raises(DimensionMismatch):
        Subspace(3).intersect(Subspace(4))


def test_zero_and_full():
    assert Subspace.zero(4).dim == 0
    assert Subspace.full(4).codim == 0
