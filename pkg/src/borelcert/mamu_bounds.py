"""Kernel-count bounds for M<m,n,n>: per-site contributions, tableau search,
closed forms, partition inequalities and asymptotic thresholds.

A candidate E' inside U*⊗sl(V)⊗W is described by a tableau on the n×n grid
of (U*, W) weights: the label at (s, t) is the dimension of the Borel-fixed
inner structure X ⊆ sl(V) sitting there. Adding a site with inner structure
X raises the (210) kernel by a·s + b and the (120) kernel by a·t + b.
"""
from __future__ import annotations

import itertools
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .exact_linalg import Subspace
from .rep_tensor import (Tensor, Torus, enumerate_borel_fixed, mamu_problem, reduced_210_kernel,
                         skew_kernel_dim, weight_basis)

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# contribution tables


@dataclass(frozen=True)
class Row:
    a: int
    b_n: int
    b_0: int
    exact: bool = True

    def b(self, n: int) -> int:
        return self.b_n * n + self.b_0


@dataclass(frozen=True)
class ContributionTable:
    v: int
    rows: tuple[Row, ...]

    def __post_init__(self):
        a = [r.a for r in self.rows]
        if any(x > y for x, y in zip(a, a[1:])) or (a and a[0] < 0):
            raise ValueError("a_j must be non-negative and non-decreasing")

    @property
    def k(self) -> int:
        return len(self.rows)

    def a(self, j: int) -> int:
        return self.rows[j - 1].a

    def b(self, j: int, n: int) -> int:
        return self.rows[j - 1].b(n)

    def value(self, j: int, s: int, n: int) -> int:
        return self.a(j) * s + self.b(j, n)

    def coefficients(self, n: int) -> tuple[list[int], list[int]]:
        return [r.a for r in self.rows], [r.b(n) for r in self.rows]


SL2_TABLE = ContributionTable(2, (Row(2, 0, 0), Row(3, 1, 0), Row(4, 2, 0)))
SL3_TABLE = ContributionTable(3, (
    Row(1, 0, 0), Row(4, 0, -1), Row(10, 0, -4, False), Row(11, 0, -4, False),
    Row(15, 1, -4), Row(20, 1, -6, False), Row(21, 2, -6, False), Row(21, 3, -6)))


def contribution_table(v: int) -> ContributionTable:
    """The exact table for sl2 and the upper-bound table for sl3.

    Other v fall back to :func:`engine_table`.
    """
    if v == 2:
        return SL2_TABLE
    if v == 3:
        return SL3_TABLE
    return engine_table(v)


# ---------------------------------------------------------------------------
# inner structures and exact site contributions


def _sl_space(v: int):
    torus = Torus([("V", v)])
    space = Tensor(torus.factor("V"), torus.factor("V", True))
    sl = Subspace(v * v, [{i * v + i: 1 for i in range(v)}]).annihilator()
    return space, sl


_SAMPLE = (0, 1, -1, 2, Fraction(1, 2))


@lru_cache(maxsize=None)
def inner_structures(v: int, j: int | None = None) -> tuple[tuple[int, Subspace], ...]:
    """Borel-fixed subspaces of sl(V) as (dim, subspace) pairs.

    Families are sampled at a few points of their cell where the closure
    equations hold; indices are p*v + q for v_p ⊗ v^q.
    """
    space, sl = _sl_space(v)
    dims = range(1, v * v) if j is None else (j,)
    out = []
    for d in dims:
        for fam in enumerate_borel_fixed(space, d, sl, param_prefix="x"):
            if fam.discrete:
                out.append((d, fam.subspace()))
                continue
            free = sorted(set(fam.params))
            seen = set()
            for vals in itertools.product(_SAMPLE, repeat=len(free)):
                pt = dict(zip(free, vals))
                if not fam.branch.record().contains(pt):
                    continue
                sub = fam.specialize(pt)
                if sub.dim == d and sub not in seen:
                    seen.add(sub)
                    out.append((d, sub))
    return tuple(out)


def _site_vectors(X: Subspace, v: int, u_dim: int, w_dim: int, s: int, t: int):
    """Vectors u^{n-s+1} ⊗ X ⊗ w_t in A⊗B coordinates of mamu(u, v, w)."""
    i, k = u_dim - s, t - 1
    out = []
    for x in X.basis:
        vec = {}
        for idx, c in x.items():
            p, q = divmod(idx, v)
            vec[(i * v + p) * (v * w_dim) + q * w_dim + k] = c
        out.append(vec)
    return out


def site_contribution(X: Subspace, s: int, t: int, u_dim: int, w_dim: int,
                      side: str = "210", filler: Subspace | None = None) -> int:
    """Kernel growth from adding inner structure X at grid site (s, t).

    The previous filtrand holds T(C*) and ``filler`` (default X) at every
    other site of the rectangle [1..s]×[1..t], which keeps it Borel-fixed.
    """
    v = math.isqrt(X.ambient)
    filler = X if filler is None else filler
    if not X <= filler:
        raise ValueError("filler must contain X")
    P = mamu_problem(u_dim, v, w_dim)
    A, B, _ = P.factors
    space = P.pair_space((0, 1))
    prev = list(P.pair_flattening((0, 1)).basis)
    for s2 in range(1, s + 1):
        for t2 in range(1, t + 1):
            if (s2, t2) != (s, t):
                prev += _site_vectors(filler, v, u_dim, w_dim, s2, t2)
    new = prev + _site_vectors(X, v, u_dim, w_dim, s, t)
    k = 0 if side == "210" else 1
    before = skew_kernel_dim(weight_basis(space, Subspace(space.dim, prev)), A, B, k)
    after = skew_kernel_dim(weight_basis(space, Subspace(space.dim, new)), A, B, k)
    return after - before


def _vvx(X: Subspace, v: int) -> Subspace:
    """V⊗X inside V⊗V⊗V*, index (p*v + q)*v + s for v_p⊗v_q⊗v^s."""
    vecs = []
    for p in range(v):
        for x in X.basis:
            vec = {}
            for idx, c in x.items():
                q, s = divmod(idx, v)
                vec[(p * v + q) * v + s] = c
            vecs.append(vec)
    return Subspace(v ** 3, vecs)


@lru_cache(maxsize=None)
def _pieces(v: int) -> tuple[Subspace, Subspace, Subspace]:
    """S²V⊗V*, Λ²V⊗V* and the V-isotypic part of V⊗V⊗V*."""
    amb = v ** 3

    def idx(p, q, s):
        return (p * v + q) * v + s

    sym, alt, iso = [], [], []
    for p in range(v):
        for q in range(p, v):
            for s in range(v):
                sym.append({idx(p, q, s): 1, idx(q, p, s): 1} if p != q else {idx(p, p, s): 1})
                if p != q:
                    alt.append({idx(p, q, s): 1, idx(q, p, s): -1})
    for m in range(v):
        iso.append({idx(m, j, j): 1 for j in range(v)})
        iso.append({idx(j, m, j): 1 for j in range(v)})
    return Subspace(amb, sym), Subspace(amb, alt), Subspace(amb, iso)


def inner_dims(X: Subspace) -> tuple[int, int, int]:
    """(d_sym, d_alt, d_iso) for an inner structure X.

    With K = V⊗X ⊆ V⊗V⊗V* and I its V-isotypic component (two copies of V):
    d_sym = dim K∩(S²V⊗V* + I), d_alt = dim K∩(Λ²V⊗V* + I), d_iso = dim K∩I.
    """
    v = math.isqrt(X.ambient)
    K = _vvx(X, v)
    sym, alt, iso = _pieces(v)
    return (K & (sym + iso)).dim, (K & (alt + iso)).dim, (K & iso).dim


def anti_transpose(X: Subspace) -> Subspace:
    """Image of X under v_p⊗v^q ↦ v_{v-1-q}⊗v^{v-1-p}; preserves Borel-fixedness."""
    v = math.isqrt(X.ambient)
    return Subspace(X.ambient, [{(v - 1 - i % v) * v + (v - 1 - i // v): c for i, c in x.items()}
                                for x in X.basis])


def site_contribution_closed_form(X: Subspace, s: int, t: int, u_dim: int, w_dim: int,
                                  side: str = "210") -> int:
    """Closed form of :func:`site_contribution` when the filler is X itself.

    The (120) side is the (210) side of the anti-transposed structure.
    """
    if side == "210":
        c, dim = s, u_dim
    else:
        X, c, dim = anti_transpose(X), t, w_dim
    d_sym, d_alt, d_iso = inner_dims(X)
    return c * (d_sym - d_iso) + (c - 1) * (d_alt - d_iso) + dim * d_iso


def inner_coefficients(X: Subspace) -> tuple[int, int, int]:
    """(a, b_n, b_0) with closed-form contribution a·s + b_n·n + b_0."""
    d_sym, d_alt, d_iso = inner_dims(X)
    return d_sym + d_alt - 2 * d_iso, d_iso, d_iso - d_alt


def _fit(points):
    """(slope, intercept) of exact values at s = 1, 2, 3; raises if not affine."""
    (s1, c1), (s2, c2), (s3, c3) = points
    a = c2 - c1
    if c3 - c2 != a or s2 - s1 != 1 or s3 - s2 != 1:
        raise ArithmeticError("site contribution is not affine in the site coordinate")
    return a, c1 - a * s1


def measured_rows(v: int, n: int, fillers: bool = True) -> dict[int, list[tuple]]:
    """Affine contribution laws measured by the engine on an n×n grid.

    For each inner structure X, each filler Y ⊇ X (or Y = X only) and each
    side, the contribution of X at sites (s, 1) for 210 (resp. (1, t) for
    120), s = 1, 2, 3, is fitted to α·s + β. Returns j -> [(α, β, side, X, Y)].
    """
    cat = inner_structures(v)
    out: dict[int, list[tuple]] = {}
    for d, X in cat:
        fill = [Y for _, Y in cat if X <= Y] if fillers else [X]
        for Y in fill:
            for side in ("210", "120"):
                pts = []
                for c in (1, 2, 3):
                    st = (c, 1) if side == "210" else (1, c)
                    pts.append((c, site_contribution(X, *st, n, n, side, filler=Y)))
                a, b = _fit(pts)
                out.setdefault(d, []).append((a, b, side, X, Y))
    return out


def dominating_row(laws: Sequence[tuple[int, int]], a_min: int = 0) -> tuple[int, int]:
    """Smallest-slope affine row a·s + b with a ≥ a_min dominating every law for s ≥ 1."""
    a = max([a_min] + [x for x, _ in laws])
    return a, max(x + y - a for x, y in laws)


def engine_table(v: int, fillers: bool = True, ns: tuple[int, int] = (4, 5)) -> ContributionTable:
    """A table dominating every measured contribution law.

    Laws are measured at two grid sizes and b is extrapolated linearly in n;
    slopes are made non-decreasing. With ``fillers`` the earlier rectangle
    sites may carry any catalogued structure containing X.
    """
    n1, n2 = ns
    m1, m2 = measured_rows(v, n1, fillers), measured_rows(v, n2, fillers)
    rows = []
    run_a = 0
    for j in range(1, v * v):
        a1, b1 = dominating_row([(x, y) for x, y, *_ in m1[j]], run_a)
        a2, b2 = dominating_row([(x, y) for x, y, *_ in m2[j]], run_a)
        a = max(a1, a2)
        b1 += a1 - a
        b2 += a2 - a
        if (b2 - b1) % (n2 - n1):
            raise ArithmeticError("intercept is not affine in n")
        b_n = (b2 - b1) // (n2 - n1)
        run_a = a
        single = len({(x, y) for x, y, *_ in m1[j]}) == 1
        rows.append(Row(a, b_n, b1 - b_n * n1, single))
    return ContributionTable(v, tuple(rows))


# ---------------------------------------------------------------------------
# tableau search


def tableau_sums(tab: Sequence[Sequence[int]], table: ContributionTable, n: int):
    a, b = table.coefficients(n)
    s1 = sum(a[j - 1] * s + b[j - 1] for s, row in enumerate(tab, 1) for j in row)
    s2 = sum(a[j - 1] * t + b[j - 1] for row in tab for t, j in enumerate(row, 1))
    return s1, s2


class _Search:
    """Existence of a label-monotone tableau with both kernel sums ≥ r.

    Rows are processed top to bottom. A state is (row index, previous row
    truncated to what the remaining budget can still use, remaining label
    budget). Upper bounds for S1, S2 and S1+S2 over completions are memoized
    per state and used to prune the depth-first search.
    """

    _W = ((1, 0), (0, 1), (1, 1))
    _NONE = None

    def __init__(self, n: int, table: ContributionTable):
        self.n = n
        self.a, self.b = table.coefficients(n)
        self.k = table.k
        self._rows: dict = {}
        self._H: dict = {}

    def rows(self, prev, rem):
        key = (prev, rem)
        out = self._rows.get(key)
        if out is not None:
            return out
        out = []
        a, b = self.a, self.b

        def rec(i, cur, maxv, rm, A, At, B):
            if cur:
                out.append((A, At, B, rm, tuple(min(x, rm) for x in cur[:rm]), tuple(cur)))
            if i >= len(prev):
                return
            for v in range(min(maxv, prev[i], rm), 0, -1):
                cur.append(v)
                rec(i + 1, cur, v, rm - v, A + a[v - 1], At + a[v - 1] * (i + 1), B + b[v - 1])
                cur.pop()

        rec(0, [], prev[0] if prev else 0, rem, 0, 0, 0)
        self._rows[key] = out
        return out

    def bounds(self, s, prev, rem):
        if rem == 0:
            return (0, 0, 0)
        if s > self.n:
            return None
        key = (s, prev, rem)
        if key in self._H:
            return self._H[key]
        best = None
        for A, At, B, rm, nxt, _ in self.rows(prev, rem):
            h = self.bounds(s + 1, nxt, rm)
            if h is None:
                continue
            d1, d2 = s * A + B, At + B
            cand = (h[0] + d1, h[1] + d2, h[2] + d1 + d2)
            best = cand if best is None else tuple(map(max, best, cand))
        self._H[key] = best
        return best

    def root(self, rho):
        return tuple(min(self.k, rho) for _ in range(min(self.n, rho)))

    def find(self, rho: int, r: int):
        """A passing tableau of label sum rho, or None."""
        fails: dict = {}

        def dfs(s, prev, rem, S1, S2, acc):
            if rem == 0:
                return list(acc) if S1 >= r and S2 >= r else None
            h = self.bounds(s, prev, rem)
            if h is None or S1 + h[0] < r or S2 + h[1] < r or S1 + S2 + h[2] < 2 * r:
                return None
            key = (s, prev, rem)
            for f1, f2 in fails.get(key, ()):
                if S1 <= f1 and S2 <= f2:
                    return None
            for A, At, B, rm, nxt, row in self.rows(prev, rem):
                acc.append(row)
                got = dfs(s + 1, nxt, rm, S1 + s * A + B, S2 + At + B, acc)
                acc.pop()
                if got is not None:
                    return got
            fails.setdefault(key, []).append((S1, S2))
            return None

        return dfs(1, self.root(rho), rho, 0, 0, [])


def _limit():
    if sys.getrecursionlimit() < 10000:
        sys.setrecursionlimit(10000)


def tableau_search(n: int, table: ContributionTable, r: int, _search: _Search | None = None):
    """A tableau with label sum r − n² whose two kernel sums are both ≥ r, or None.

    None means no candidate of that size passes both pairwise tests under
    the table, so r is refuted.
    """
    if r < n * n:
        raise ValueError("r must be at least n^2")
    _limit()
    srch = _search or _Search(n, table)
    return srch.find(r - n * n, r)


@dataclass(frozen=True)
class TableauBound:
    n: int
    bound: int
    refuted: tuple[int, int]  # inclusive range of refuted r
    witness: tuple[tuple[int, ...], ...]


def first_unrefuted(n: int, table: ContributionTable, hint: int | None = None) -> TableauBound:
    """Smallest r ≥ n² at which some tableau passes both tests.

    Passing is monotone in the label sum: appending a label-1 box at an outer
    corner (s, t) adds a_1·s + b_1 ≥ 1 and a_1·t + b_1 ≥ 1 to the two sums,
    so a pass at r gives a pass at r + 1. Hence one exact refutation at
    r − 1 covers the whole range [n², r − 1].

    Passes are cheap (a witness turns up early) and refutations are not, so
    the scan starts slightly above the closed-form point (or at ``hint``,
    a label sum) and walks down while passes succeed. The refutation just
    below the answer is always an exact search, never the closed form.
    """
    a, b = table.coefficients(n)
    if a[0] + b[0] < 1:
        raise ValueError("the monotone ladder needs a_1 + b_1 >= 1")
    _limit()
    srch = _Search(n, table)
    low = closed_form_ladder(n, table) - n * n
    rho = max(low, hint if hint is not None else low + 2)
    wit = srch.find(rho, n * n + rho)
    if wit is None:
        rho += 1
        while (wit := srch.find(rho, n * n + rho)) is None:
            rho += 1
    else:
        while rho > 0:
            w = srch.find(rho - 1, n * n + rho - 1)
            if w is None:
                break
            rho, wit = rho - 1, w
    r = n * n + rho
    return TableauBound(n, r, (n * n, r - 1), tuple(tuple(x) for x in wit))


def _bound_chunk(args):
    ns, table = args
    out, hint = [], None
    for n in ns:
        if hint is not None:
            hint = max(hint, closed_form_ladder(n, table) - n * n + 2)
        res = first_unrefuted(n, table, hint)
        out.append(res)
        hint = res.bound - n * n + 2
    return out


def bound_table(ns: Sequence[int], table: ContributionTable, workers: int = 1) -> list[TableauBound]:
    """first_unrefuted over several n; the result order follows ``ns``.

    Work is split into contiguous runs of n so each worker can seed its
    next start from the previous answer; results do not depend on the split.
    """
    ns = list(ns)
    workers = max(1, min(workers, len(ns)))
    if workers == 1:
        return _bound_chunk((ns, table))
    chunks = [ns[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(_bound_chunk, [(c, table) for c in chunks]))
    got = {b.n: b for part in parts for b in part}
    return [got[n] for n in ns]


# ---------------------------------------------------------------------------
# closed forms


def closed_form_terms(rho, table: ContributionTable, n: int) -> list[Fraction]:
    rho = Fraction(rho)
    a, b = table.coefficients(n)
    return [Fraction(a[j - 1]) * rho * rho / (8 * j * j) + Fraction(a[j - 1] + b[j - 1]) * rho / j
            for j in range(1, table.k + 1)]


def closed_form_bound(rho, table: ContributionTable, n: int) -> Fraction:
    """Upper bound on min of the two kernel sums over tableaux of label sum rho."""
    return max(closed_form_terms(rho, table, n))


def closed_form_term(table: ContributionTable, j: int) -> tuple[Fraction, Fraction, Fraction]:
    """Coefficients (c2, c1, c1n) of the j-th term c2·ρ² + (c1 + c1n·n)·ρ."""
    row = table.rows[j - 1]
    return Fraction(row.a, 8 * j * j), Fraction(row.a + row.b_0, j), Fraction(row.b_n, j)


def tableau_max_min(n: int, table: ContributionTable, rho: int) -> int | None:
    """Brute-force max over all tableaux of label sum rho of min(S1, S2)."""
    best = None
    for tab in labeled_tableaux(rho, table.k, n):
        m = min(tableau_sums(tab, table, n))
        best = m if best is None or m > best else best
    return best


def labeled_tableaux(rho: int, k: int, n: int):
    """All label-monotone tableaux in an n×n grid with labels ≤ k summing to rho."""
    def rec(prev, rem):
        if rem == 0:
            yield []
            return
        for row in _rows_under(prev, rem):
            for rest in rec(row, rem - sum(row)):
                yield [row] + rest

    def go(prev, rem, depth):
        if rem == 0:
            yield []
            return
        if depth == n:
            return
        for row in _rows_under(prev, rem):
            for rest in go(row, rem - sum(row), depth + 1):
                yield [row] + rest

    yield from go((k,) * n, rho, 0)


def _rows_under(prev, rem):
    out = []

    def rec(i, cur, maxv, rm):
        if cur:
            out.append(tuple(cur))
        if i >= len(prev):
            return
        for v in range(min(maxv, prev[i], rm), 0, -1):
            cur.append(v)
            rec(i + 1, cur, v, rm - v)
            cur.pop()

    rec(0, [], prev[0] if prev else 0, rem)
    return out


# ---------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class PartitionStats:
    partition: tuple[int, ...]
    size: int
    n_value: int
    conjugate: tuple[int, ...]
    length: int


def conjugate(lam: Sequence[int]) -> tuple[int, ...]:
    lam = [x for x in lam if x > 0]
    return tuple(sum(1 for x in lam if x > i) for i in range(lam[0])) if lam else ()


def partition_props(lam: Sequence[int]) -> PartitionStats:
    lam = tuple(x for x in lam if x > 0)
    if any(x < y for x, y in zip(lam, lam[1:])):
        raise ValueError("not a partition")
    return PartitionStats(lam, sum(lam), sum(i * x for i, x in enumerate(lam)),
                          conjugate(lam), len(lam))


def _excluded(lam) -> bool:
    return len(lam) == 2 and lam[1] == 2


def singlebound_check(lam: Sequence[int]) -> bool:
    """n(λ) ≤ (|λ| + λ'_1 − λ_1)²/8, minus 1/8 unless λ = (m, 2)."""
    st = partition_props(lam)
    if not st.partition:
        return True
    q = Fraction((st.size + st.conjugate[0] - st.partition[0]) ** 2, 8)
    if not _excluded(st.partition):
        q -= Fraction(1, 8)
    return st.n_value <= q


def partitions(m: int, maxpart: int | None = None):
    maxpart = m if maxpart is None else maxpart
    if m == 0:
        yield ()
        return
    for first in range(min(m, maxpart), 0, -1):
        for rest in partitions(m - first, first):
            yield (first,) + rest


def opt_bound(c: Sequence, d: Sequence, rho) -> Fraction:
    """max_j ρ²C_j/(4j²) + ρD_j/j with C, D the prefix sums of c, d."""
    rho = Fraction(rho)
    best = None
    C = D = Fraction(0)
    for j, (ci, di) in enumerate(zip(c, d), 1):
        C += Fraction(ci)
        D += Fraction(di)
        val = rho * rho * C / (4 * j * j) + rho * D / j
        best = val if best is None or val > best else best
    return best


def opt_lhs(c: Sequence, d: Sequence, x: Sequence, y: Sequence):
    """min of Σ c_i x_i² + d_i(x_i+y_i) and Σ c_i y_i² + d_i(x_i+y_i)."""
    common = sum(di * (xi + yi) for di, xi, yi in zip(d, x, y))
    return min(sum(ci * xi * xi for ci, xi in zip(c, x)) + common,
               sum(ci * yi * yi for ci, yi in zip(c, y)) + common)


# ---------------------------------------------------------------------------
# exact quadratic surds


@dataclass(frozen=True)
class Surd:
    """p + q·√d with rational p, q and squarefree d > 1."""
    p: Fraction
    q: Fraction
    d: int

    @classmethod
    def of(cls, p, q=0, d=2):
        return cls(Fraction(p), Fraction(q), d)

    def _lift(self, o):
        if isinstance(o, Surd):
            if o.d != self.d and o.q and self.q:
                raise ValueError("mixed radicands")
            return o
        return Surd(Fraction(o), Fraction(0), self.d)

    def __add__(self, o):
        o = self._lift(o)
        return Surd(self.p + o.p, self.q + o.q, self.d)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.p, -self.q, self.d)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        return Surd(self.p * o.p + self.q * o.q * self.d, self.p * o.q + self.q * o.p, self.d)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        den = o.p * o.p - o.q * o.q * self.d
        if den == 0:
            raise ZeroDivisionError("division by zero surd")
        num = self * Surd(o.p, -o.q, self.d)
        return Surd(num.p / den, num.q / den, self.d)

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def sign(self) -> int:
        """Exact sign of p + q√d."""
        sp = (self.p > 0) - (self.p < 0)
        sq = (self.q > 0) - (self.q < 0)
        if sp == sq or sq == 0:
            return sp
        if sp == 0:
            return sq
        # opposite signs: compare p² with q²d
        diff = self.p * self.p - self.q * self.q * self.d
        return sp if diff > 0 else (sq if diff < 0 else 0)

    def __lt__(self, o):
        return (self - o).sign() < 0

    def __le__(self, o):
        return (self - o).sign() <= 0

    def __gt__(self, o):
        return (self - o).sign() > 0

    def __ge__(self, o):
        return (self - o).sign() >= 0

    def __eq__(self, o):
        if not isinstance(o, (Surd, int, Fraction)):
            return NotImplemented
        return (self - o).sign() == 0

    def __hash__(self):
        return hash((self.p, self.q, self.d))

    def floor(self) -> int:
        lo = math.floor(float(self)) - 2
        while Surd.of(lo + 1, 0, self.d) <= self:
            lo += 1
        return lo

    def ceil(self) -> int:
        f = self.floor()
        return f if self == f else f + 1

    def __float__(self):
        return float(self.p) + float(self.q) * math.sqrt(self.d)

    def __str__(self):
        return f"{self.p} + {self.q}*sqrt({self.d})"


FAMILIES = ("2nn", "3nn")


def _eps_range(family):
    return Fraction(1, 4) if family == "2nn" else Fraction(1, 2)


def _check_eps(family, eps):
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    eps = Fraction(eps)
    if not 0 < eps < _eps_range(family):
        raise ValueError(f"eps must lie in (0, {_eps_range(family)}) for {family}")
    return eps


def slope(family: str, eps) -> Surd:
    """Linear coefficient c with bound n² + c·n + 1 above the threshold."""
    eps = _check_eps(family, eps)
    if family == "2nn":
        return Surd.of(-6 - eps, 3, 6)
    return Surd.of(Fraction(-32, 7) - eps, Fraction(16, 21), 78)


def threshold(family: str, eps) -> Surd:
    """The n beyond which the asymptotic bound holds (strict inequality)."""
    eps = _check_eps(family, eps)
    if family == "2nn":
        return Surd.of(6 - eps, 3, 6) / Surd.of(-eps, 6, 6) * (Fraction(6) / eps)
    return Surd.of(-96 - 21 * eps, 16, 78) / Surd.of(-21 * eps, 32, 78) * (Fraction(64, 3) / eps)


def threshold_n(family: str, eps) -> int:
    """Smallest integer n strictly above :func:`threshold`."""
    return threshold(family, eps).floor() + 1


def asymptotic_bound(n: int, family: str, eps) -> int:
    """n² + ⌈c·n⌉ + 1 for n above the threshold."""
    if n <= threshold(family, eps):
        raise ValueError("n is not above the threshold")
    return n * n + (slope(family, eps) * n).ceil() + 1


def closed_form_ladder(n: int, table: ContributionTable) -> int:
    """Smallest r = n² + ρ not refuted by the closed form."""
    rho = 0
    while closed_form_bound(rho, table, n) < n * n + rho:
        rho += 1
    return n * n + rho


def bound_at(n: int, family: str, search_limit: int | None = None) -> int:
    """Lower bound for M<2nn> or M<3nn> from these tests.

    Uses the exact tableau ladder up to ``search_limit`` (24 for 2nn, 21 for
    3nn by default) and the closed-form ladder above it.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    table = SL2_TABLE if family == "2nn" else SL3_TABLE
    limit = search_limit if search_limit is not None else (24 if family == "2nn" else 21)
    if n <= limit:
        return first_unrefuted(n, table).bound
    return closed_form_ladder(n, table)


def lickteig_shift(base_bound: int, m: int, base_m: int) -> int:
    """Border rank bound for M<m,n,n> from one for M<base_m,n,n>, one per step."""
    if m < base_m:
        raise ValueError("m must be at least base_m")
    return base_bound + (m - base_m)


# ---------------------------------------------------------------------------
# the hook family


def hook_kernel(sigma: int, tau: int) -> int:
    """C(στ+1, 2) + στ: the symmetric left-side count plus the right-side count."""
    st = sigma * tau
    return st * (st + 1) // 2 + st


def hook_space(sigma: int, tau: int, v: int, n: int) -> Subspace:
    """U*_(σ)⊗⟨v_1..v_τ⟩⊗v^v⊗w_1 + u^n⊗v_1⊗⟨v^v..v^{v−τ+1}⟩⊗W_(σ)."""
    if not (1 <= tau <= v - 1 and 1 <= sigma <= n):
        raise ValueError("need 1 <= tau <= v-1 and 1 <= sigma <= n")
    vecs = []

    def vec(i, p, q, k):
        return {(i * v + p) * (v * n) + q * n + k: 1}

    for s in range(sigma):
        for p in range(tau):
            vecs.append(vec(n - 1 - s, p, v - 1, 0))
    for q in range(tau):
        for k in range(sigma):
            vecs.append(vec(n - 1, 0, v - 1 - q, k))
    return Subspace(n * v * v * n, vecs)


def hook_engine_kernel(sigma: int, tau: int, v: int, n: int) -> int:
    return reduced_210_kernel(hook_space(sigma, tau, v, n), n, v, n)


@dataclass(frozen=True)
class Barrier:
    product: int  # σ·τ
    rho: int
    cap: int


def barrier_check(n: int) -> Barrier:
    """Smallest hook (by σ·τ) whose counted kernel reaches n² + dim.

    Uses :func:`hook_kernel` with dim E' = 2στ − 1. Beyond ``cap`` no bound
    can come from the (210) and (120) tests; ρ/n tends to 2√2.
    """
    p = 1
    while hook_kernel(p, 1) < n * n + 2 * p - 1:
        p += 1
    rho = 2 * p - 1
    return Barrier(p, rho, n * n + rho)


# ---------------------------------------------------------------------------
# TSV


def bounds_tsv(rows: Sequence[TableauBound], family: str) -> str:
    lines = ["n\tfamily\tbound\twitness-refuted-range"]
    for b in rows:
        lines.append(f"{b.n}\t{family}\t{b.bound}\t{b.refuted[0]}-{b.refuted[1]}")
    return "\n".join(lines) + "\n"
