import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from borelcert import mamu_bounds as mb
from borelcert.acceptance import REF_2NN, check_tables
from borelcert.exact_linalg import Subspace
from borelcert.rep_tensor import mamu_problem, skew_kernel_dim, weight_basis

TABLES = {"sl2": mb.SL2_TABLE, "sl3": mb.SL3_TABLE}


def brute_bound(n, table):
    rho = 0
    while (tableau_best := mb.tableau_max_min(n, table, rho)) is None or tableau_best < n * n + rho:
        rho += 1
    return n * n + rho


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("name", sorted(TABLES))
def test_ladder_matches_brute_force(n, name):
    table = TABLES[name]
    got = mb.first_unrefuted(n, table)
    assert got.bound == brute_bound(n, table)
    assert got.refuted == (n * n, got.bound - 1)
    assert min(mb.tableau_sums(got.witness, table, n)) >= got.bound


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10), st.sampled_from(sorted(TABLES)))
def test_search_agrees_with_enumeration(n, rho, name):
    table = TABLES[name]
    best = mb.tableau_max_min(n, table, rho)
    r = n * n + rho
    wit = mb.tableau_search(n, table, r)
    assert (wit is not None) == (best is not None and best >= r)
    if wit is not None:
        assert sum(map(sum, wit)) == rho
        assert min(mb.tableau_sums(wit, table, n)) >= r


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 12), st.sampled_from(sorted(TABLES)))
def test_closed_form_dominates_every_tableau(n, rho, name):
    table = TABLES[name]
    best = mb.tableau_max_min(n, table, rho)
    if best is not None:
        assert mb.closed_form_bound(rho, table, n) >= best


@pytest.mark.parametrize("n", range(4, 11))
def test_sl2_bounds_reproduce_reference(n):
    assert mb.first_unrefuted(n, mb.SL2_TABLE).bound == REF_2NN[n]


def test_bound_table_is_independent_of_worker_split():
    ns = list(range(4, 10))
    one = mb.bound_table(ns, mb.SL2_TABLE, workers=1)
    three = mb.bound_table(ns, mb.SL2_TABLE, workers=3)
    assert [b.bound for b in one] == [b.bound for b in three]


def test_sl2_engine_table_equals_published_rows():
    got = [(r.a, r.b_n, r.b_0) for r in mb.engine_table(2).rows]
    assert got == [(r.a, r.b_n, r.b_0) for r in mb.SL2_TABLE.rows]


def test_sl2_contributions_do_not_depend_on_the_filler():
    structs = mb.inner_structures(2)
    for _, X in structs:
        vals = {mb.site_contribution(X, 2, 1, 4, 4, "210", F)
                for _, F in structs if X <= F}
        assert len(vals) == 1


@pytest.mark.parametrize("side", ["210", "120"])
def test_closed_form_matches_operational_count(side):
    for _, X in mb.inner_structures(3):
        for s in (1, 2):
            st_ = (s, 1) if side == "210" else (1, s)
            assert (mb.site_contribution_closed_form(X, *st_, 4, 4, side)
                    == mb.site_contribution(X, *st_, 4, 4, side))


def test_table_rejects_decreasing_rows():
    with pytest.raises(ValueError):
        mb.ContributionTable(2, (mb.Row(3, 0, 0), mb.Row(2, 0, 0)))


@settings(max_examples=200, deadline=None)
@given(st.fractions(-50, 50, max_denominator=20), st.fractions(-50, 50, max_denominator=20),
       st.sampled_from([2, 3, 6, 78]))
def test_surd_sign_and_floor_agree_with_floats(p, q, d):
    s = mb.Surd(p, q, d)
    x = float(p) + float(q) * math.sqrt(d)
    if abs(x) > 1e-9:
        assert s.sign() == (1 if x > 0 else -1)
    if abs(x - round(x)) > 1e-9:
        assert s.floor() == math.floor(x)
        assert s.ceil() == math.ceil(x)


@settings(max_examples=100, deadline=None)
@given(st.fractions(-9, 9, max_denominator=7), st.fractions(-9, 9, max_denominator=7),
       st.fractions(-9, 9, max_denominator=7), st.fractions(-9, 9, max_denominator=7))
def test_surd_field_operations(a, b, c, e):
    x, y = mb.Surd(a, b, 2), mb.Surd(c, e, 2)
    assert float(x * y) == pytest.approx(float(x) * float(y), abs=1e-9)
    if y != 0:
        assert (x / y) * y == x


@pytest.mark.parametrize("family,eps", [("2nn", Fraction(1, 8)), ("3nn", Fraction(1, 4))])
def test_asymptotic_bound_only_above_threshold(family, eps):
    n0 = mb.threshold_n(family, eps)
    assert n0 > mb.threshold(family, eps) >= n0 - 1
    with pytest.raises(ValueError):
        mb.asymptotic_bound(n0 - 1, family, eps)
    c = float(mb.slope(family, eps))
    assert mb.asymptotic_bound(n0, family, eps) == n0 * n0 + math.ceil(c * n0) + 1


@pytest.mark.parametrize("family,eps", [("2nn", Fraction(1, 4)), ("3nn", 0), ("4nn", Fraction(1, 8))])
def test_eps_outside_range_is_rejected(family, eps):
    with pytest.raises(ValueError):
        mb.slope(family, eps)


def test_partitions_satisfy_the_single_bound():
    for m in range(1, 16):
        parts = list(mb.partitions(m))
        assert len(parts) == len(set(parts))
        for lam in parts:
            assert sum(lam) == m
            assert mb.conjugate(mb.conjugate(lam)) == tuple(lam)
            assert mb.singlebound_check(lam)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=3),
       st.lists(st.fractions(0, 1, max_denominator=6), min_size=6, max_size=6))
def test_opt_bound_dominates_feasible_points(c, raw):
    k = len(c)
    d = [(-1) ** i * (i + 1) for i in range(k)]
    xs = sorted(raw[:k], reverse=True)
    ys = sorted(raw[3:3 + k], reverse=True)
    total = sum(xs) + sum(ys)
    if total == 0:
        return
    xs = [x / total for x in xs]
    ys = [y / total for y in ys]
    assert mb.opt_lhs(c, d, xs, ys) <= mb.opt_bound(c, d, 1)


def test_hook_space_pieces_overlap_at_the_corner():
    for sg, tau in ((1, 1), (2, 1), (2, 2), (3, 2)):
        assert mb.hook_space(sg, tau, 3, 6).dim == 2 * sg * tau - 1


def test_hook_needs_tau_below_v():
    with pytest.raises(ValueError):
        mb.hook_space(1, 3, 3, 6)


def test_barrier_ratio_tends_to_two_root_two():
    b = mb.barrier_check(4000)
    assert b.rho / 4000 == pytest.approx(2 * math.sqrt(2), abs=1e-3)
    assert mb.hook_kernel(b.product, 1) >= b.cap


def test_lickteig_shift_adds_one_per_step():
    assert mb.lickteig_shift(22, 4, 2) == 24
    with pytest.raises(ValueError):
        mb.lickteig_shift(22, 1, 2)


def test_tsv_layout():
    rows = mb.bound_table([4, 5], mb.SL2_TABLE)
    lines = mb.bounds_tsv(rows, "2nn").splitlines()
    assert lines[0] == "n\tfamily\tbound\twitness-refuted-range"
    assert lines[1] == "4\t2nn\t22\t16-21"
    assert lines[2] == "5\t2nn\t32\t25-31"


def _kernel(P, vecs, side):
    A, B, _ = P.factors
    space = P.pair_space((0, 1))
    return skew_kernel_dim(weight_basis(space, Subspace(space.dim, vecs)), A, B, side)


@pytest.mark.parametrize("n", [3, 4])
def test_filtration_order_does_not_change_site_counts(n):
    """Row-major and column-major build orders give the same per-site kernel growth."""
    chain = dict(mb.inner_structures(2))
    P = mamu_problem(n, 2, n)
    base = list(P.pair_flattening((0, 1)).basis)
    start = {side: _kernel(P, base, side) for side in (0, 1)}
    for rho in range(1, 10):
        for tab in mb.labeled_tableaux(rho, 3, n):
            sites = [(s, t, j) for s, row in enumerate(tab, 1) for t, j in enumerate(row, 1)]
            if len(sites) > 6:
                continue
            totals = []
            for order in (sites, sorted(sites, key=lambda x: (x[1], x[0]))):
                vecs, prev = list(base), dict(start)
                for s, t, j in order:
                    vecs += mb._site_vectors(chain[j], 2, n, n, s, t)
                    for side, c in ((0, s), (1, t)):
                        k = _kernel(P, vecs, side)
                        assert k - prev[side] == mb.SL2_TABLE.value(j, c, n)
                        prev[side] = k
                totals.append((prev[0] - start[0], prev[1] - start[1]))
            assert totals[0] == totals[1] == mb.tableau_sums(tab, mb.SL2_TABLE, n)


@pytest.mark.slow
def test_sl2_site_contributions_follow_the_table_up_to_n8():
    for j, X in mb.inner_structures(2):
        for n in range(2, 9):
            for s in range(1, n + 1):
                for t in range(1, n + 1):
                    want = mb.SL2_TABLE.value(j, s, n), mb.SL2_TABLE.value(j, t, n)
                    got = (mb.site_contribution(X, s, t, n, n, "210"),
                           mb.site_contribution(X, s, t, n, n, "120"))
                    assert got == want, (j, n, s, t)


def test_tampered_table_is_reported_by_name():
    rows = list(mb.SL2_TABLE.rows)
    rows[1] = mb.Row(3, 1, 1)
    out = check_tables(table2=mb.ContributionTable(2, tuple(rows)))
    assert not out.ok
    assert out.detail["sl2_mismatches"]
