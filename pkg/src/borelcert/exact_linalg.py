"""Exact sparse linear algebra over the rationals.

Rows are stored as ``{column: value}`` dicts with no zero entries. Values are
Python ints whenever integral and :class:`fractions.Fraction` otherwise, so
integer matrices never touch fraction arithmetic.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "DimensionMismatch",
    "SparseMatrix",
    "Subspace",
    "rank",
    "rank_of_rows",
    "kernel_basis",
    "rref",
    "intersect",
    "span_sum",
    "annihilator",
    "codim",
]


class DimensionMismatch(ValueError):
    pass


def _norm(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, int):
        return x
    return _norm(Fraction(x))


def _clean(row: Mapping[int, object]) -> dict[int, object]:
    out = {}
    for k, v in row.items():
        v = _norm(v)
        if v:
            out[k] = v
    return out


class SparseMatrix:
    """Immutable sparse matrix with exact entries and optional labels."""

    __slots__ = ("nrows", "ncols", "_rows", "row_labels", "col_labels")

    def __init__(self, nrows: int, ncols: int, entries: Mapping[tuple[int, int], object] | None = None,
                 row_labels: Sequence | None = None, col_labels: Sequence | None = None):
        rows: list[dict[int, object]] = [{} for _ in range(nrows)]
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError(f"entry ({i}, {j}) outside {nrows}x{ncols}")
            v = _norm(v)
            if v:
                rows[i][j] = v
        self._init(nrows, ncols, rows, row_labels, col_labels)

    def _init(self, nrows, ncols, rows, row_labels, col_labels):
        self.nrows = nrows
        self.ncols = ncols
        self._rows = rows
        for labels, n in ((row_labels, nrows), (col_labels, ncols)):
            if labels is not None and (len(labels) != n or len(set(labels)) != n):
                raise ValueError("labels must be distinct and match the dimension")
        self.row_labels = tuple(row_labels) if row_labels is not None else None
        self.col_labels = tuple(col_labels) if col_labels is not None else None

    @classmethod
    def from_row_dicts(cls, ncols: int, rows: Iterable[Mapping[int, object]], **labels) -> "SparseMatrix":
        m = cls.__new__(cls)
        rows = [_clean(r) for r in rows]
        for r in rows:
            if r and (min(r) < 0 or max(r) >= ncols):
                raise IndexError("row entry outside column range")
        m._init(len(rows), ncols, rows, labels.get("row_labels"), labels.get("col_labels"))
        return m

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[object]]) -> "SparseMatrix":
        ncols = len(rows[0]) if rows else 0
        return cls.from_row_dicts(ncols, ({j: v for j, v in enumerate(r) if v} for r in rows))

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls.from_row_dicts(n, ({i: 1} for i in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def entries(self) -> dict[tuple[int, int], object]:
        return {(i, j): v for i, r in enumerate(self._rows) for j, v in r.items()}

    def row(self, i: int) -> dict[int, object]:
        return dict(self._rows[i])

    def rows(self) -> list[dict[int, object]]:
        return [dict(r) for r in self._rows]

    def nnz(self) -> int:
        return sum(len(r) for r in self._rows)

    def is_integral(self) -> bool:
        return all(isinstance(v, int) for r in self._rows for v in r.values())

    def transpose(self) -> "SparseMatrix":
        cols: list[dict[int, object]] = [{} for _ in range(self.ncols)]
        for i, r in enumerate(self._rows):
            for j, v in r.items():
                cols[j][i] = v
        return SparseMatrix.from_row_dicts(self.nrows, cols, row_labels=self.col_labels,
                                           col_labels=self.row_labels)

    T = property(transpose)

    def to_dense(self) -> list[list[object]]:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for i, r in enumerate(self._rows):
            for j, v in r.items():
                out[i][j] = v
        return out

    def apply(self, vec: Mapping[int, object]) -> dict[int, object]:
        """Matrix times a sparse column vector."""
        out = {}
        for i, r in enumerate(self._rows):
            s = sum(v * vec[j] for j, v in r.items() if j in vec)
            if s:
                out[i] = _norm(s)
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"{self.shape} @ {other.shape}")
        rows = []
        for r in self._rows:
            acc: dict[int, object] = {}
            for k, v in r.items():
                for j, w in other._rows[k].items():
                    acc[j] = acc.get(j, 0) + v * w
            rows.append(acc)
        return SparseMatrix.from_row_dicts(other.ncols, rows)

    def __eq__(self, other):
        return (isinstance(other, SparseMatrix) and self.shape == other.shape
                and self._rows == other._rows)

    def __hash__(self):
        return hash((self.shape, tuple(tuple(sorted(r.items())) for r in self._rows)))

    def __repr__(self):
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"


# -- elimination -------------------------------------------------------------

def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    return {k: v // g for k, v in row.items()}


def _pick_pivot(active: list[dict]) -> tuple[int, int]:
    """Smallest leading column, then sparsest row, then first row."""
    col = min(min(r) for r in active)
    best = -1
    for idx, r in enumerate(active):
        if col in r and (best < 0 or len(r) < len(active[best])):
            best = idx
    return col, best


def _rank_fraction_free(rows: list[dict[int, int]]) -> int:
    active = [_primitive(r) for r in rows if r]
    rk = 0
    while active:
        col, idx = _pick_pivot(active)
        piv = active.pop(idx)
        pc = piv[col]
        nxt = []
        for r in active:
            f = r.get(col)
            if f is None:
                nxt.append(r)
                continue
            g = gcd(pc, f)
            mp, mf = pc // g, f // g
            new = {k: v * mp for k, v in r.items()}
            for k, v in piv.items():
                val = new.get(k, 0) - mf * v
                if val:
                    new[k] = val
                else:
                    new.pop(k, None)
            if new:
                nxt.append(_primitive(new))
        active = nxt
        rk += 1
    return rk


def _rank_rational(rows: list[dict]) -> int:
    active = [{k: Fraction(v) for k, v in r.items()} for r in rows if r]
    rk = 0
    while active:
        col, idx = _pick_pivot(active)
        piv = active.pop(idx)
        pc = piv[col]
        nxt = []
        for r in active:
            f = r.get(col)
            if f is None:
                nxt.append(r)
                continue
            m = f / pc
            new = dict(r)
            for k, v in piv.items():
                val = new.get(k, 0) - m * v
                if val:
                    new[k] = val
                else:
                    new.pop(k, None)
            if new:
                nxt.append(new)
        active = nxt
        rk += 1
    return rk


def _integralize(row: Mapping[int, object]) -> dict[int, int]:
    den = 1
    for v in row.values():
        if isinstance(v, Fraction):
            den = den * v.denominator // gcd(den, v.denominator)
    return {k: int(v * den) for k, v in row.items()}


def rank_of_rows(rows: Iterable[Mapping[int, object]], method: str = "auto") -> int:
    """Rank of a list of sparse row vectors.

    ``method`` is ``"fraction_free"``, ``"rational"`` or ``"auto"``. Auto uses
    fraction-free elimination when every entry is integral, and otherwise
    clears denominators row by row first (which does not change the rank).
    """
    rows = [r for r in (_clean(r) for r in rows) if r]
    if method == "rational":
        return _rank_rational(rows)
    if method == "fraction_free":
        if not all(isinstance(v, int) for r in rows for v in r.values()):
            raise ValueError("fraction-free elimination needs integral rows")
        return _rank_fraction_free(rows)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    return _rank_fraction_free([_integralize(r) for r in rows])


def rank(m: SparseMatrix, method: str = "auto") -> int:
    return rank_of_rows(m._rows, method)


def _rref_rows(rows: Iterable[Mapping[int, object]]) -> list[dict[int, object]]:
    pivots: dict[int, dict[int, Fraction]] = {}
    for r in rows:
        r = {k: Fraction(v) for k, v in r.items() if v}
        for c in [c for c in r if c in pivots]:
            f = r.get(c)
            if not f:
                continue
            for k, v in pivots[c].items():
                val = r.get(k, 0) - f * v
                if val:
                    r[k] = val
                else:
                    r.pop(k, None)
        if not r:
            continue
        lead = min(r)
        inv = 1 / r[lead]
        r = {k: v * inv for k, v in r.items()}
        for p, prow in pivots.items():
            f = prow.get(lead)
            if f:
                for k, v in r.items():
                    val = prow.get(k, 0) - f * v
                    if val:
                        prow[k] = val
                    else:
                        prow.pop(k, None)
        pivots[lead] = r
    return [_clean(pivots[c]) for c in sorted(pivots)]


def rref(m: SparseMatrix) -> tuple[SparseMatrix, tuple[int, ...]]:
    rows = _rref_rows(m._rows)
    return SparseMatrix.from_row_dicts(m.ncols, rows), tuple(min(r) for r in rows)


class Subspace:
    """A subspace of Q^n held as its reduced row echelon basis.

    Equality is equality of the echelon bases, so it is basis independent.
    """

    __slots__ = ("ambient", "_rows", "labels")

    def __init__(self, ambient: int, vectors: Iterable[Mapping[int, object]] = (), labels=None,
                 _echelon: bool = False):
        self.ambient = ambient
        rows = [_clean(v) for v in vectors] if _echelon else _rref_rows(vectors)
        for r in rows:
            if r and (min(r) < 0 or max(r) >= ambient):
                raise IndexError("vector outside ambient space")
        self._rows = tuple(rows)
        self.labels = labels

    @classmethod
    def zero(cls, ambient: int, labels=None) -> "Subspace":
        return cls(ambient, (), labels, _echelon=True)

    @classmethod
    def full(cls, ambient: int, labels=None) -> "Subspace":
        return cls(ambient, ({i: 1} for i in range(ambient)), labels, _echelon=True)

    @property
    def dim(self) -> int:
        return len(self._rows)

    @property
    def codim(self) -> int:
        return self.ambient - len(self._rows)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(min(r) for r in self._rows)

    @property
    def basis(self) -> list[dict[int, object]]:
        return [dict(r) for r in self._rows]

    def basis_rows(self) -> SparseMatrix:
        return SparseMatrix.from_row_dicts(self.ambient, self._rows)

    def _check(self, other: "Subspace"):
        if self.ambient != other.ambient:
            raise DimensionMismatch(f"ambient {self.ambient} vs {other.ambient}")

    def contains(self, vec: Mapping[int, object]) -> bool:
        r = {k: Fraction(v) for k, v in vec.items() if v}
        for row in self._rows:
            p = min(row)
            f = r.get(p)
            if f:
                for k, v in row.items():
                    val = r.get(k, 0) - f * v
                    if val:
                        r[k] = val
                    else:
                        r.pop(k, None)
        return not r

    def __contains__(self, vec) -> bool:
        return self.contains(vec)

    def issubspace(self, other: "Subspace") -> bool:
        self._check(other)
        return all(other.contains(r) for r in self._rows)

    def __le__(self, other: "Subspace") -> bool:
        return self.issubspace(other)

    def sum(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace(self.ambient, list(self._rows) + list(other._rows), self.labels)

    __add__ = sum

    def annihilator(self) -> "Subspace":
        """The annihilator in the dual space, identified with Q^n via the dual basis."""
        return kernel_basis(self.basis_rows(), labels=self.labels)

    def intersect(self, other: "Subspace") -> "Subspace":
        self._check(other)
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient, self.labels)
        # Zassenhaus: echelonize [v | v] and [w | 0]; rows with empty left half
        # span the intersection in their right half.
        n = self.ambient
        stacked = [{**r, **{k + n: v for k, v in r.items()}} for r in self._rows]
        stacked += [dict(r) for r in other._rows]
        out = [{k - n: v for k, v in r.items()} for r in _rref_rows(stacked) if min(r) >= n]
        return Subspace(n, out, self.labels, _echelon=True)

    __and__ = intersect

    def __eq__(self, other):
        return isinstance(other, Subspace) and self.ambient == other.ambient and self._rows == other._rows

    def __hash__(self):
        return hash((self.ambient, tuple(tuple(sorted(r.items())) for r in self._rows)))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"


def kernel_basis(m: SparseMatrix, labels=None) -> Subspace:
    """Right kernel {v : m v = 0}, echelonized."""
    rows = _rref_rows(m._rows)
    piv = {min(r): r for r in rows}
    vecs = []
    for f in range(m.ncols):
        if f in piv:
            continue
        v: dict[int, object] = {f: 1}
        for p, r in piv.items():
            c = r.get(f)
            if c:
                v[p] = -c
        vecs.append(v)
    return Subspace(m.ncols, vecs, labels)


def intersect(s1: Subspace, s2: Subspace) -> Subspace:
    return s1.intersect(s2)


def span_sum(s1: Subspace, s2: Subspace) -> Subspace:
    return s1.sum(s2)


def annihilator(s: Subspace) -> Subspace:
    return s.annihilator()


def codim(s: Subspace) -> int:
    return s.codim
