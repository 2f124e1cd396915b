import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from borelcert import mamu_bounds as mb
from borelcert.exact_linalg import Subspace
from borelcert.rep_tensor import (det3_tensor, enumerate_borel_fixed, isotypic_dims, mamu_problem,
                                  mamu_tensor, reduced_210_kernel, skew_kernel_dim, weight_basis)


def test_matrix_multiplication_tensor_is_concise():
    t = mamu_tensor(2, 2, 2)
    assert t.is_concise()
    assert [t.flattening(k).dim for k in range(3)] == [4, 4, 4]
    assert det3_tensor().is_concise()


@pytest.mark.parametrize("v,expected", [(2, [1, 1, 1]), (3, [1, 2, 3, 2, 3, 2, 1, 1])])
def test_borel_fixed_cells_of_sl(v, expected):
    space, sl = mb._sl_space(v)
    got = [len(enumerate_borel_fixed(space, d, sl)) for d in range(1, v * v)]
    assert got == expected


def test_four_dimensional_sl3_cells_form_one_line_of_weight_zero_vectors():
    space, sl = mb._sl_space(3)
    fams = enumerate_borel_fixed(space, 4, sl)
    assert sorted(f.discrete for f in fams) == [False, True]
    nonzero = [{w: v for w, v in f.weight_vectors() if any(w)} for f in fams]
    assert nonzero[0] == nonzero[1]


@pytest.mark.parametrize("v", [2, 3, 4])
def test_isotypic_part_removes_two_copies_of_v(v):
    sym, alt = isotypic_dims(v)
    assert 2 * sym == v ** 3 + v ** 2 - 2 * v
    assert 2 * alt == v ** 3 - v ** 2 - 2 * v


def test_borel_fixed_family_members_are_closed_under_raising():
    P = mamu_problem(2, 2, 2)
    space = P.pair_space((0, 1))
    fams = enumerate_borel_fixed(space, 2, P.complement((0, 1)), P.ops)
    assert fams
    for fam in fams:
        sub = fam.subspace() if fam.discrete else None
        if sub is None:
            continue
        for op in P.ops:
            for vec in sub.basis:
                assert space.raise_vec(op, vec) in sub


SL3 = mb.inner_structures(3)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(range(len(SL3))), st.integers(1, 3), st.integers(1, 3),
       st.sampled_from(range(len(SL3))))
def test_reduced_and_full_210_kernels_agree(i, s, t, k):
    """Reduced map kernel equals the full skew kernel on Borel-fixed rectangles."""
    X = SL3[i][1]
    filler = SL3[k][1] + X
    P = mamu_problem(3, 3, 3)
    A, B, _ = P.factors
    space = P.pair_space((0, 1))
    extra = []
    for s2 in range(1, s + 1):
        for t2 in range(1, t + 1):
            extra += mb._site_vectors(X if (s2, t2) == (s, t) else filler, 3, 3, 3, s2, t2)
    base = list(P.pair_flattening((0, 1)).basis)
    E = Subspace(space.dim, base + extra)
    if E.dim == len(base):
        return
    full = skew_kernel_dim(weight_basis(space, E), A, B, 0)
    extra_sub = Subspace(space.dim, extra)
    red = reduced_210_kernel(weight_basis(space, extra_sub), 3, 3, 3)
    assert full == red
