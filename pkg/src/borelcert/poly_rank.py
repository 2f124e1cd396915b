"""Rank-drop loci of matrices whose entries are polynomials in a few parameters.

The locus where ``rank(M) < r_bound`` is computed by recursive splitting.
Units (nonzero constants, or products of polynomials assumed invertible on the
current branch) are used as pivots. When no unit is available, the nonzero
entry ``p`` of smallest total degree is chosen and the computation branches
into ``p = 0`` (the quotient) and ``p != 0`` (the localization).

Each branch is a locally closed set: generators vanish, inverted polynomials
do not. The returned records partition the locus.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .exact_linalg import SparseMatrix, Subspace
from .poly import Poly, as_const, factor, is_zero, mono_key


# ---------------------------------------------------------------------------
# matrices


class PolyMatrix:
    """Sparse matrix with Poly or numeric entries."""

    __slots__ = ("nrows", "ncols", "_entries")

    def __init__(self, nrows: int, ncols: int, entries: Mapping[tuple[int, int], object] = ()):
        self.nrows, self.ncols = nrows, ncols
        self._entries = {}
        for (i, j), v in dict(entries).items():
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError(f"entry {(i, j)} outside {nrows}x{ncols}")
            if isinstance(v, Poly) and v.is_const():
                v = v.const_value()
            if not is_zero(v):
                self._entries[(i, j)] = v

    @classmethod
    def from_rows(cls, ncols: int, rows: Sequence[Mapping[int, object]]):
        return cls(len(rows), ncols, {(i, j): v for i, r in enumerate(rows) for j, v in r.items()})

    @property
    def entries(self):
        return dict(self._entries)

    @property
    def variables(self) -> tuple[str, ...]:
        vs = set()
        for v in self._entries.values():
            if isinstance(v, Poly):
                vs.update(v.variables)
        return tuple(sorted(vs))

    def rows(self) -> list[dict[int, object]]:
        out = [dict() for _ in range(self.nrows)]
        for (i, j), v in self._entries.items():
            out[i][j] = v
        return out

    def __repr__(self):
        return f"PolyMatrix({self.nrows}x{self.ncols}, nnz={len(self._entries)})"


def specialize(m: PolyMatrix, assignment: Mapping[str, object]) -> SparseMatrix:
    missing = [v for v in m.variables if v not in assignment]
    if missing:
        raise KeyError(f"assignment misses variables {missing}")
    ent = {}
    for k, v in m.entries.items():
        ent[k] = v.evaluate(assignment) if isinstance(v, Poly) else v
    return SparseMatrix(m.nrows, m.ncols, ent)


# ---------------------------------------------------------------------------
# branch contexts


@dataclass(frozen=True)
class LocusRecord:
    generators: tuple[Poly, ...]
    inverted: tuple[Poly, ...] = ()
    branch_trace: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(sorted(
            {g.normalized() for g in self.generators}, key=_canon_key)))
        object.__setattr__(self, "inverted", tuple(sorted(
            {q.normalized() for q in self.inverted}, key=_canon_key)))
        if any(g.is_zero() for g in self.generators):
            raise ValueError("generators must be nonzero")
        if any(q.is_zero() for q in self.inverted):
            raise ValueError("inverted polynomials must be nonzero")

    def contains(self, point: Mapping[str, object]) -> bool:
        return (all(g.evaluate(point) == 0 for g in self.generators)
                and all(q.evaluate(point) != 0 for q in self.inverted))


def _canon_key(p: Poly):
    return (p.total_degree(), str(p))


class Branch:
    """Context of one branch: substitutions, residual generators, inverted factors.

    Inverted polynomials are stored as irreducible factors so that unit
    detection is exact for products of them.
    """

    __slots__ = ("subs", "gens", "inv", "trace")

    def __init__(self):
        self.subs: dict[str, Poly] = {}
        self.gens: list[Poly] = []
        self.inv: list[Poly] = []
        self.trace: tuple[str, ...] = ()

    def copy(self) -> "Branch":
        b = Branch()
        b.subs = dict(self.subs)
        b.gens = list(self.gens)
        b.inv = list(self.inv)
        b.trace = self.trace
        return b

    def reduce(self, x):
        if not isinstance(x, Poly):
            return x
        p = x.subs(self.subs) if self.subs else x
        if self.gens and not p.is_const():
            p = self._linear_normal_form(p)
        for g in self.gens:
            for var in g.variables:
                c = g.coeff_in(var)
                if as_const(c[max(c)]) and p.degree_in(var) >= max(c):
                    p = p.reduce_by(g, var)
        if not p.is_const():
            for g in self.gens:
                if p.divexact(g) is not None:
                    return 0
        return p.const_value() if p.is_const() else p

    def _linear_normal_form(self, p: Poly) -> Poly:
        """Subtract constant multiples of generators at their leading monomials."""
        vs = tuple(sorted({v for g in self.gens for v in g.variables} | set(p.variables)))
        for g in sorted(self.gens, key=lambda g: mono_key(g.leading(vs)[0], vs), reverse=True):
            lm, lc = g.leading(vs)
            c = p.terms.get(lm)
            if c:
                p = p - g * (Fraction(c) / lc)
        return p

    def _strip_units(self, p: Poly) -> Poly:
        for q in self.inv:
            while True:
                d = p.divexact(q)
                if d is None:
                    break
                p = d
                if p.is_const():
                    return p
        return p

    def is_unit(self, x) -> bool:
        x = self.reduce(x)
        if not isinstance(x, Poly):
            return x != 0
        return bool(self.inv) and self._strip_units(x).is_const()

    def with_zero(self, p, note: str | None = None) -> "Branch | None":
        b = self.copy()
        b.trace = self.trace + (note or f"zero {Poly.lift(p)}",)
        return b if b._add_zero(p) else None

    def with_nonzero(self, p, note: str | None = None) -> "Branch | None":
        b = self.copy()
        b.trace = self.trace + (note or f"inv {Poly.lift(p)}",)
        return b if b._add_inv(p) else None

    def _add_inv(self, p) -> bool:
        p = self.reduce(p)
        if is_zero(p):
            return False
        if not isinstance(p, Poly):
            return True
        for f, _ in factor(p):
            f = self.reduce(f)
            if is_zero(f):
                return False
            if isinstance(f, Poly) and f.normalized() not in self.inv:
                self.inv.append(f.normalized())
        return True

    def _add_zero(self, p) -> bool:
        p = self.reduce(p)
        if is_zero(p):
            return True
        if not isinstance(p, Poly):
            return False
        p = self._strip_units(p)
        if p.is_const():
            return False
        var = _linear_var(p)
        if var is None:
            self.gens.append(p.normalized())
            return self._linear_reduce()
        c = p.coeff_in(var)
        expr = -c.get(0, Poly()) / c[1].const_value()
        self.subs = {k: v.subs({var: expr}) for k, v in self.subs.items()}
        self.subs[var] = expr
        old_gens, old_inv = self.gens, self.inv
        self.gens, self.inv = [], []
        for q in old_inv:
            if not self._add_inv(q):
                return False
        for g in old_gens:
            if not self._add_zero(g):
                return False
        return True

    def _linear_reduce(self) -> bool:
        """Echelonize generators over their monomials.

        Row operations keep the ideal. A constant row means the branch is
        empty; a row linear in some variable becomes a substitution, which
        removes that variable, so the recursion terminates.
        """
        if len(self.gens) < 2:
            return True
        vs = tuple(sorted({v for g in self.gens for v in g.variables}))
        monos = sorted({m for g in self.gens for m in g.terms},
                       key=lambda m: mono_key(m, vs), reverse=True)
        col = {m: i for i, m in enumerate(monos)}
        rows = [{col[m]: c for m, c in g.terms.items()} for g in self.gens]
        gens = [Poly({monos[i]: c for i, c in r.items()}).normalized()
                for r in Subspace(len(monos), rows).basis]
        if any(g.is_const() for g in gens):
            return False
        lin = [g for g in gens if _linear_var(g) is not None]
        if not lin:
            self.gens = gens
            return True
        self.gens = [g for g in gens if g is not lin[0]]
        return self._add_zero(lin[0])

    def record(self) -> LocusRecord:
        gens = [Poly.var(v) - e for v, e in self.subs.items()] + list(self.gens)
        return LocusRecord(tuple(gens), tuple(self.inv), self.trace)

    @classmethod
    def from_record(cls, rec: LocusRecord) -> "Branch | None":
        b = cls()
        b.trace = rec.branch_trace
        for q in rec.inverted:
            if not b._add_inv(q):
                return None
        # linear generators first so that substitutions simplify the rest
        for g in sorted(rec.generators, key=lambda g: (g.total_degree(), str(g))):
            if not b._add_zero(g):
                return None
        return b


def _linear_var(p: Poly):
    """A variable in which p is linear with constant coefficient, if any."""
    for var in p.variables:
        c = p.coeff_in(var)
        if max(c) == 1 and c[1].is_const():
            return var
    return None


# ---------------------------------------------------------------------------
# rank strata


def _nonzero_cols(rows):
    return {j for r in rows for j in r}


def rank_strata(blocks: Sequence[PolyMatrix | Sequence[Mapping[int, object]]],
                branch: Branch | None = None, need: int | None = None):
    """Split ``branch`` by the rank of a block-diagonal matrix.

    Returns a list of ``(Branch, rank)``. When ``need`` is given, branches
    where the rank reaches ``need`` are dropped and every returned branch has
    rank < need; ranks on branches cut off early are lower-bounded only by
    what was needed to prove rank < need, so they are reported as ``None``.
    """
    branch = branch or Branch()
    block_rows = [b.rows() if isinstance(b, PolyMatrix) else [dict(r) for r in b] for b in blocks]
    caps = [min(len([r for r in rows if r]), len(_nonzero_cols(rows))) for rows in block_rows]
    tails = [sum(caps[i:]) for i in range(len(caps) + 1)]
    out = []

    def go(k, br, acc):
        if need is not None and acc >= need:
            return
        if k == len(block_rows):
            out.append((br, acc))
            return
        if need is not None and acc + tails[k] < need:
            out.append((br, None))
            return
        for br2, rk in _strata_block(block_rows[k], br, None if need is None else need - acc,
                                     tails[k + 1]):
            if rk is None:
                out.append((br2, None))
            else:
                go(k + 1, br2, acc + rk)

    go(0, branch, 0)
    return out


def _strata_block(rows, branch, need, slack):
    """Strata of one block. ``slack`` is the max rank still obtainable later."""
    out = []

    def go(rows, br, acc):
        if need is not None and acc >= need:
            return
        rows = [r for r in ({j: br.reduce(v) for j, v in r.items()} for r in rows)]
        rows = [{j: v for j, v in r.items() if not is_zero(v)} for r in rows]
        rows = [r for r in rows if r]
        if not rows:
            out.append((br, acc))
            return
        cap = min(len(rows), len(_nonzero_cols(rows)))
        if need is not None and acc + cap + slack < need:
            out.append((br, None))
            return
        piv = _find_pivot(rows, br)
        if piv is not None:
            i, j = piv
            go(_eliminate(rows, i, j), br, acc + 1)
            return
        i, j = _branch_entry(rows)
        p = rows[i][j]
        b0 = br.with_zero(p)
        if b0 is not None:
            go(rows, b0, acc)
        b1 = br.with_nonzero(p)
        if b1 is not None:
            go(rows, b1, acc)

    go(rows, branch, 0)
    return out


def _find_pivot(rows, br):
    best = None
    for i, r in enumerate(rows):
        for j, v in r.items():
            if not isinstance(v, Poly):
                key = (0, len(r), j, i)
                if best is None or key < best[0]:
                    best = (key, (i, j))
    if best is not None:
        return best[1]
    for i, r in enumerate(rows):
        for j, v in sorted(r.items()):
            if br.inv and br.is_unit(v):
                key = (1, v.total_degree(), len(r), j, i)
                if best is None or key < best[0]:
                    best = (key, (i, j))
    return None if best is None else best[1]


def _branch_entry(rows):
    best = None
    for i, r in enumerate(rows):
        for j, v in r.items():
            key = (v.total_degree(), len(v.terms), j, i)
            if best is None or key < best[0]:
                best = (key, (i, j))
    return best[1]


def _eliminate(rows, i, j):
    prow = rows[i]
    u = prow[j]
    const = not isinstance(u, Poly)
    out = []
    for k, r in enumerate(rows):
        if k == i:
            continue
        f = r.get(j)
        if f is None or is_zero(f):
            out.append({c: v for c, v in r.items() if c != j})
            continue
        if const:
            fac = f * Fraction(1, 1) / u if not isinstance(f, Poly) else f / u
            new = dict(r)
            for c, v in prow.items():
                new[c] = new.get(c, 0) - fac * v
        else:
            new = {c: u * v for c, v in r.items()}
            for c, v in prow.items():
                new[c] = new.get(c, 0) - f * v
        new.pop(j, None)
        out.append({c: (v.const_value() if isinstance(v, Poly) and v.is_const() else v)
                    for c, v in new.items()})
    return out


# ---------------------------------------------------------------------------
# public API


def rank_locus(m: PolyMatrix, r_bound: int, branch: Branch | None = None) -> list[LocusRecord]:
    """Records whose union is the locus where rank(m) < r_bound."""
    if r_bound > min(m.nrows, m.ncols):
        raise ValueError("r_bound exceeds matrix size")
    return [b.record() for b, _ in rank_strata([m], branch, need=r_bound)]


@dataclass(frozen=True)
class LocusStatus:
    kind: str  # "empty" | "nonempty" | "undecided"
    witness: dict | None = None
    note: str = ""

    @property
    def is_empty(self):
        return self.kind == "empty"


_GRID = (0, 1, -1, 2, -2, 3)


def _univariate_roots(p: Poly) -> list[Fraction]:
    import sympy

    (var,) = p.variables
    x = sympy.Symbol(var)
    expr = sum((sympy.Rational(Fraction(c).numerator, Fraction(c).denominator)
                * x ** dict(m).get(var, 0)) for m, c in p.terms.items())
    roots = []
    for fac, _ in sympy.factor_list(expr)[1]:
        fp = sympy.Poly(fac, x)
        if fp.degree() == 1:
            a, b = fp.all_coeffs()
            r = -sympy.Rational(b) / sympy.Rational(a)
            roots.append(Fraction(int(r.p), int(r.q)))
    return sorted(set(roots))


def _solve(br: Branch, free: list[str], depth=0):
    """Search a rational point of the branch; returns assignment or None."""
    if depth > 8:
        return None
    if br.gens:
        uni = [g for g in br.gens if len(g.variables) == 1]
        if uni:
            g = min(uni, key=lambda g: (g.total_degree(), str(g)))
            var = g.variables[0]
            for root in _univariate_roots(g):
                b2 = br.with_zero(Poly.var(var) - root)
                if b2 is not None:
                    pt = _solve(b2, free, depth + 1)
                    if pt is not None:
                        return pt
            return None
        var = sorted({v for g in br.gens for v in g.variables})[0]
        for val in _GRID[:3]:
            b2 = br.with_zero(Poly.var(var) - val)
            if b2 is not None:
                pt = _solve(b2, free, depth + 1)
                if pt is not None:
                    return pt
        return None
    rest = sorted(set(free) - set(br.subs))
    for vals in itertools.product(_GRID, repeat=len(rest)) if len(rest) <= 3 else []:
        pt = dict(zip(rest, vals))
        if all(q.evaluate({**pt, **{v: e.evaluate(pt) for v, e in br.subs.items()}}) != 0
               for q in br.inv):
            full = dict(pt)
            for v, e in br.subs.items():
                full[v] = e.evaluate(pt)
            return full
    return None


def locus_status(rec: LocusRecord) -> LocusStatus:
    br = Branch.from_record(rec)
    if br is None:
        return LocusStatus("empty", note="unit in ideal")
    free = sorted({v for p in rec.generators + rec.inverted for v in p.variables})
    pt = _solve(br, free)
    if pt is not None:
        pt = {k: (v.numerator if isinstance(v, Fraction) and v.denominator == 1 else v)
              for k, v in pt.items()}
        if rec.contains(pt):
            return LocusStatus("nonempty", pt)
    # univariate residual with a root off the inverted set exists over C
    if br.gens and all(len(g.variables) == 1 for g in br.gens):
        vs = {g.variables[0] for g in br.gens}
        if len(vs) == 1 and not br.subs and all(set(q.variables) <= vs for q in br.inv):
            import sympy
            (v,) = vs
            x = sympy.Symbol(v)
            conv = lambda p: sympy.sympify(str(p).replace("^", "**"))
            g = conv(br.gens[0])
            for h in br.gens[1:]:
                g = sympy.gcd(g, conv(h))
            for q in br.inv:
                while sympy.degree(sympy.gcd(g, conv(q)), x) > 0:
                    g = sympy.quo(g, sympy.gcd(g, conv(q)))
            if sympy.degree(g, x) > 0:
                return LocusStatus("nonempty", None, f"root of {g} over C")
    return LocusStatus("undecided")


def export_ideal(rec: LocusRecord) -> str:
    head = "inv:" + (" " + ", ".join(str(q) for q in rec.inverted) if rec.inverted else "")
    return head + "\n" + "".join(f"{g}\n" for g in rec.generators)


def import_ideal(text: str) -> LocusRecord:
    lines = text.split("\n")
    if not lines or not lines[0].startswith("inv:"):
        raise ValueError("missing inv: header")
    inv_txt = lines[0][4:].strip()
    inv = tuple(Poly.parse(s) for s in inv_txt.split(",")) if inv_txt else ()
    gens = tuple(Poly.parse(s) for s in lines[1:] if s.strip())
    return LocusRecord(gens, inv)
