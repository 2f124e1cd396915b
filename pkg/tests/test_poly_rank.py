import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from borelcert.poly import Poly
from borelcert.poly_rank import (LocusRecord, PolyMatrix, export_ideal, import_ideal,
                                 locus_status, rank_locus, rank_strata, specialize)

x, y = Poly.var("x"), Poly.var("y")
ATOMS = [0, 1, -1, 2, x, y, x + 1, x - y, x * y, y * y - 1]


@st.composite
def poly_matrices(draw):
    m = draw(st.integers(1, 3))
    n = draw(st.integers(1, 3))
    rows = [{j: draw(st.sampled_from(ATOMS)) for j in range(n)} for _ in range(m)]
    return PolyMatrix.from_rows(n, rows)


def point_rank(m, pt):
    dense = [[0] * m.ncols for _ in range(m.nrows)]
    for (i, j), v in m.entries.items():
        dense[i][j] = v.evaluate(pt) if isinstance(v, Poly) else v
    return sympy.Matrix(dense).rank()


POINTS = [{"x": a, "y": b} for a in (-2, -1, 0, 1, 2) for b in (-1, 0, 1, 3)]


@settings(max_examples=60, deadline=None)
@given(poly_matrices(), st.integers(1, 3))
def test_rank_locus_partitions_the_drop_set(m, bound):
    bound = min(bound, m.nrows, m.ncols)
    recs = rank_locus(m, bound)
    for pt in POINTS:
        inside = [r for r in recs if r.contains(pt)]
        assert len(inside) <= 1
        assert bool(inside) == (point_rank(m, pt) < bound)


@settings(max_examples=60, deadline=None)
@given(poly_matrices())
def test_strata_ranks_are_pointwise_ranks(m):
    for br, rk in rank_strata([m]):
        rec = br.record()
        for pt in POINTS:
            if rec.contains(pt):
                assert point_rank(m, pt) == rk


def test_block_diagonal_ranks_add():
    a = PolyMatrix.from_rows(2, [{0: x, 1: 1}])
    b = PolyMatrix.from_rows(1, [{0: y}])
    ranks = {}
    for br, rk in rank_strata([a, b]):
        for pt in POINTS:
            if br.record().contains(pt):
                ranks[(pt["x"], pt["y"])] = rk
    assert ranks[(0, 0)] == 1 and ranks[(1, 1)] == 2


def test_need_cuts_off_full_rank_branches():
    m = PolyMatrix.from_rows(2, [{0: x, 1: y}, {0: y, 1: x}])
    for _, rk in rank_strata([m], need=2):
        assert rk is None or rk < 2


def test_specialize_requires_all_variables():
    m = PolyMatrix.from_rows(2, [{0: x, 1: y}])
    with pytest.raises(KeyError):
        specialize(m, {"x": 1})
    assert specialize(m, {"x": 2, "y": 0}).to_dense() == [[2, 0]]


def test_locus_status_cases():
    assert locus_status(LocusRecord((x, x - 1))).is_empty
    assert locus_status(LocusRecord((x * x - 2,), (x - 1,))).kind == "nonempty"
    found = locus_status(LocusRecord((x - y,), (x,)))
    assert found.kind == "nonempty" and found.witness["x"] == found.witness["y"] != 0


@pytest.mark.parametrize("rec", [
    LocusRecord((x * x - y,), (x, y + 1)),
    LocusRecord((), (x * y,)),
    LocusRecord((x, y - 2)),
])
def test_ideal_roundtrip(rec):
    assert import_ideal(export_ideal(rec)) == rec


def test_import_rejects_missing_header():
    with pytest.raises(ValueError):
        import_ideal("x\n")
