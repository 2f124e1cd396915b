"""Weight-graded tensor spaces, raising operators, target tensors and the
linear maps used by the border apolarity tests.

Conventions
-----------
Torus coordinates are GL weights of named groups (``U``, ``V``, ``W`` ...).
The primal basis vector ``e_i`` of a group has weight ``+eps_i`` and the dual
basis vector ``e^i`` has weight ``-eps_i``. In a primal factor the first basis
vector is highest; in a dual factor the last one is. The raising operator
``(g, a)`` is ``E_{a,a+1}`` of ``gl(g)`` (0-based): it sends ``e_{a+1}`` to
``e_a`` and ``e^a`` to ``-e^{a+1}``, and acts on tensors as a derivation.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .exact_linalg import SparseMatrix, Subspace, rank_of_rows
from .poly import Poly, is_zero
from .poly_rank import Branch

Vec = dict  # sparse vector: index -> coefficient (number or Poly)


# ---------------------------------------------------------------------------
# torus, factors and tensor spaces


@dataclass(frozen=True)
class RaisingOp:
    group: str
    a: int

    def __str__(self):
        return f"{self.group}{self.a + 1}{self.a + 2}"


class Torus:
    """Ordered product of GL groups; a weight is an integer tuple."""

    def __init__(self, groups: Sequence[tuple[str, int]]):
        self.groups = tuple((g, int(n)) for g, n in groups)
        self.offsets = {}
        off = 0
        for g, n in self.groups:
            if n < 1:
                raise ValueError("group dimension must be positive")
            self.offsets[g] = off
            off += n
        self.rank = off

    def dim(self, g: str) -> int:
        return dict(self.groups)[g]

    def factor(self, g: str, dual: bool = False) -> "FactorSpace":
        return FactorSpace(self, g, self.dim(g), dual)

    @cached_property
    def raising_ops(self) -> tuple[RaisingOp, ...]:
        return tuple(RaisingOp(g, a) for g, n in self.groups for a in range(n - 1))

    def root(self, op: RaisingOp) -> tuple[int, ...]:
        w = [0] * self.rank
        o = self.offsets[op.group]
        w[o + op.a] = 1
        w[o + op.a + 1] = -1
        return tuple(w)

    def height(self, wt: Sequence[int]) -> int:
        """Increases by one under every simple raising operator."""
        h = 0
        for g, n in self.groups:
            o = self.offsets[g]
            h -= sum(i * wt[o + i] for i in range(n))
        return h

    def __eq__(self, other):
        return isinstance(other, Torus) and self.groups == other.groups

    def __hash__(self):
        return hash(self.groups)


def _add(w1, w2):
    return tuple(a + b for a, b in zip(w1, w2))


class TensorSpace:
    """A node of a tensor expression with an enumerated monomial basis."""

    torus: Torus

    @cached_property
    def index(self) -> dict:
        return {b: i for i, b in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def weight_blocks(self) -> dict[tuple, list[int]]:
        out = defaultdict(list)
        for i, w in enumerate(self.weights):
            out[w].append(i)
        return dict(out)

    def raise_basis(self, op: RaisingOp, i: int) -> dict[int, int]:
        cache = self.__dict__.setdefault("_raise_cache", {})
        key = (op, i)
        if key not in cache:
            cache[key] = self._raise(op, i)
        return cache[key]

    def raise_vec(self, op: RaisingOp, vec: Mapping[int, object]) -> Vec:
        out: dict = {}
        for i, c in vec.items():
            for j, d in self.raise_basis(op, i).items():
                out[j] = out.get(j, 0) + d * c
        return {j: v for j, v in out.items() if not is_zero(v)}

    def raising_action(self, op: RaisingOp) -> SparseMatrix:
        """Matrix acting on column vectors: entry (image, source)."""
        ent = {}
        for i in range(self.dim):
            for j, c in self.raise_basis(op, i).items():
                ent[(j, i)] = c
        return SparseMatrix(self.dim, self.dim, ent)

    def label(self, i: int) -> str:
        return self._label(self.basis[i])


class FactorSpace(TensorSpace):
    def __init__(self, torus: Torus, name: str, dim: int, dual: bool = False):
        self.torus, self.name, self.dual = torus, name, dual
        self.basis = list(range(dim))
        o = torus.offsets[name]
        ws = []
        for i in range(dim):
            w = [0] * torus.rank
            w[o + i] = -1 if dual else 1
            ws.append(tuple(w))
        self.weights = ws

    def _raise(self, op, i):
        if op.group != self.name:
            return {}
        if not self.dual:
            return {op.a: 1} if i == op.a + 1 else {}
        return {op.a + 1: -1} if i == op.a else {}

    def _label(self, b):
        return f"{self.name.lower()}{'^' if self.dual else '_'}{b + 1}"

    def __repr__(self):
        return f"{self.name}{'*' if self.dual else ''}({len(self.basis)})"


class Tensor(TensorSpace):
    def __init__(self, *children: TensorSpace):
        self.children = children
        self.torus = children[0].torus
        dims = [range(c.dim) for c in children]
        self.basis = list(itertools.product(*dims))
        self.weights = []
        zero = (0,) * self.torus.rank
        for b in self.basis:
            w = zero
            for c, i in zip(children, b):
                w = _add(w, c.weights[i])
            self.weights.append(w)

    def _raise(self, op, i):
        b = self.basis[i]
        out: dict = {}
        for pos, (c, bi) in enumerate(zip(self.children, b)):
            for j, d in c.raise_basis(op, bi).items():
                nb = b[:pos] + (j,) + b[pos + 1:]
                k = self.index[nb]
                out[k] = out.get(k, 0) + d
        return {k: v for k, v in out.items() if v}

    def _label(self, b):
        return "⊗".join(c._label(c.basis[i]) for c, i in zip(self.children, b))

    def __repr__(self):
        return "(" + "⊗".join(map(repr, self.children)) + ")"


class Sym(TensorSpace):
    def __init__(self, child: TensorSpace, k: int):
        self.child, self.k, self.torus = child, k, child.torus
        self.basis = list(itertools.combinations_with_replacement(range(child.dim), k))
        zero = (0,) * self.torus.rank
        self.weights = []
        for b in self.basis:
            w = zero
            for i in b:
                w = _add(w, child.weights[i])
            self.weights.append(w)

    def _raise(self, op, i):
        b = self.basis[i]
        out: dict = {}
        for pos, bi in enumerate(b):
            for j, d in self.child.raise_basis(op, bi).items():
                nb = tuple(sorted(b[:pos] + (j,) + b[pos + 1:]))
                k = self.index[nb]
                out[k] = out.get(k, 0) + d
        return {k: v for k, v in out.items() if v}

    def _label(self, b):
        return "·".join(self.child.label(i) for i in b) or "1"

    def __repr__(self):
        return f"S{self.k}{self.child!r}"


class Ext(TensorSpace):
    def __init__(self, child: TensorSpace, k: int):
        self.child, self.k, self.torus = child, k, child.torus
        self.basis = list(itertools.combinations(range(child.dim), k))
        zero = (0,) * self.torus.rank
        self.weights = []
        for b in self.basis:
            w = zero
            for i in b:
                w = _add(w, child.weights[i])
            self.weights.append(w)

    def _raise(self, op, i):
        b = self.basis[i]
        out: dict = {}
        for pos, bi in enumerate(b):
            for j, d in self.child.raise_basis(op, bi).items():
                nb = list(b[:pos] + (j,) + b[pos + 1:])
                if len(set(nb)) < len(nb):
                    continue
                sign = _perm_sign(nb)
                k = self.index[tuple(sorted(nb))]
                out[k] = out.get(k, 0) + sign * d
        return {k: v for k, v in out.items() if v}

    def _label(self, b):
        return "∧".join(self.child.label(i) for i in b)

    def __repr__(self):
        return f"L{self.k}{self.child!r}"


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def ext2_index(i: int, j: int, n: int) -> tuple[int, int]:
    """(index, sign) of e_i ∧ e_j in the lexicographic basis of Λ²(C^n)."""
    if i == j:
        return -1, 0
    a, b = (i, j) if i < j else (j, i)
    idx = a * n - a * (a + 1) // 2 + (b - a - 1)
    return idx, (1 if i < j else -1)


def weight_of(space: TensorSpace, vec: Mapping[int, object]):
    ws = {space.weights[i] for i, c in vec.items() if not is_zero(c)}
    if len(ws) != 1:
        raise ValueError("not a weight vector")
    return ws.pop()


def weight_basis(space: TensorSpace, sub: Subspace) -> list[tuple[tuple, Vec]]:
    """RREF basis of a torus-stable subspace, each row tagged by its weight."""
    return [(weight_of(space, dict(row)), dict(row)) for row in sub.basis]


# ---------------------------------------------------------------------------
# tensors


@dataclass
class TensorElement:
    factors: tuple[TensorSpace, TensorSpace, TensorSpace]
    coeffs: dict  # (ia, ib, ic) -> coefficient

    def __post_init__(self):
        self.coeffs = {k: v for k, v in self.coeffs.items() if v}

    @property
    def torus(self):
        return self.factors[0].torus

    def flattening(self, factor: int) -> Subspace:
        """Image of the contraction with the dual of ``factor``.

        The result lives in the tensor product of the other two factors, in
        their natural order; for ``factor=2`` this is T(C*) inside A⊗B.
        """
        keep = [k for k in range(3) if k != factor]
        d1 = self.factors[keep[1]].dim
        rows: dict[int, dict] = defaultdict(dict)
        for idx, c in self.coeffs.items():
            rows[idx[factor]][idx[keep[0]] * d1 + idx[keep[1]]] = c
        amb = self.factors[keep[0]].dim * d1
        return Subspace(amb, list(rows.values()))

    def annihilator(self) -> Subspace:
        a, b, c = (f.dim for f in self.factors)
        vec = {(i * b + j) * c + k: v for (i, j, k), v in self.coeffs.items()}
        return Subspace(a * b * c, [vec]).annihilator()

    def is_concise(self) -> bool:
        return all(self.flattening(k).dim == self.factors[k].dim for k in range(3))

    def weight_of(self):
        ws = set()
        for (i, j, k) in self.coeffs:
            f = self.factors
            ws.add(_add(_add(f[0].weights[i], f[1].weights[j]), f[2].weights[k]))
        return ws


def flattening(t: TensorElement, factor: int = 2) -> Subspace:
    return t.flattening(factor)


def annihilator_of(t: TensorElement) -> Subspace:
    return t.annihilator()


def is_concise(t: TensorElement) -> bool:
    return t.is_concise()


# ---------------------------------------------------------------------------
# tensor problems: a tensor with its torus, Borel and symmetries


@dataclass(frozen=True)
class Symmetry:
    """Relabeling sending factor k to factor perm[k] via signed permutations.

    ``maps[k][i] = (j, sign)`` sends basis vector i of factor k to ``sign``
    times basis vector j of factor perm[k].
    """
    name: str
    perm: tuple[int, int, int]
    maps: tuple

    def apply_coeffs(self, coeffs: Mapping[tuple, object]) -> dict:
        out = {}
        for idx, c in coeffs.items():
            new = [0, 0, 0]
            s = 1
            for k in range(3):
                j, sg = self.maps[k][idx[k]]
                new[self.perm[k]] = j
                s *= sg
            out[tuple(new)] = s * c
        return out


PAIRS = ((0, 1), (0, 2), (1, 2))
PAIR_NAMES = {(0, 1): "110", (0, 2): "101", (1, 2): "011"}


class TensorProblem:
    def __init__(self, name: str, tensor: TensorElement, symmetries: Sequence[Symmetry] = ()):
        self.name = name
        self.tensor = tensor
        self.factors = tensor.factors
        self.torus = tensor.torus
        self.symmetries = tuple(symmetries)
        for g in self.symmetries:
            if g.apply_coeffs(tensor.coeffs) != tensor.coeffs:
                raise ValueError(f"symmetry {g.name} does not preserve the tensor")

    @cached_property
    def ops(self):
        return self.torus.raising_ops

    def pair_space(self, pair) -> Tensor:
        return Tensor(self.factors[pair[0]], self.factors[pair[1]])

    def pair_flattening(self, pair) -> Subspace:
        (other,) = {0, 1, 2} - set(pair)
        return self.tensor.flattening(other)

    def complement(self, pair) -> Subspace:
        """Invariant complement of the flattening: its orthogonal complement
        for the standard form, which the compact group preserves."""
        return self.pair_flattening(pair).annihilator()

    def map_pair_subspace(self, g: Symmetry, pair, vecs: Iterable[Vec]):
        """Transport vectors of the pair space ``pair`` by g."""
        i, j = pair
        ti, tj = g.perm[i], g.perm[j]
        newpair = tuple(sorted((ti, tj)))
        d_j = self.factors[j].dim
        d_new1 = self.factors[newpair[1]].dim
        out = []
        for v in vecs:
            w = {}
            for idx, c in v.items():
                a, b = divmod(idx, d_j)
                a2, sa = g.maps[i][a]
                b2, sb = g.maps[j][b]
                if ti > tj:
                    a2, b2 = b2, a2
                w[a2 * d_new1 + b2] = sa * sb * c
            out.append(w)
        return newpair, out


def _identity_map(n):
    return tuple((i, 1) for i in range(n))


def mamu_tensor(l: int, m: int, n: int) -> TensorElement:
    """Matrix multiplication tensor in (U*⊗V)⊗(V*⊗W)⊗(W*⊗U), dims (l, m, n)."""
    if min(l, m, n) < 1:
        raise ValueError("dimensions must be positive")
    torus = Torus([("U", l), ("V", m), ("W", n)])
    A = Tensor(torus.factor("U", True), torus.factor("V"))
    B = Tensor(torus.factor("V", True), torus.factor("W"))
    C = Tensor(torus.factor("W", True), torus.factor("U"))
    co = {}
    for i in range(l):
        for j in range(m):
            for k in range(n):
                co[(i * m + j, j * n + k, k * l + i)] = 1
    return TensorElement((A, B, C), co)


def det3_tensor() -> TensorElement:
    torus = Torus([("U", 3), ("V", 3)])
    X = Tensor(torus.factor("U"), torus.factor("V"))
    co = {}
    for s in itertools.permutations(range(3)):
        for t in itertools.permutations(range(3)):
            sg = _perm_sign(s) * _perm_sign(t)
            co[tuple(s[m] * 3 + t[m] for m in range(3))] = sg
    return TensorElement((X, X, X), co)


def mamu_problem(l: int, m: int, n: int) -> TensorProblem:
    t = mamu_tensor(l, m, n)
    syms = []
    if l == m == n:
        ident = _identity_map(n * n)
        syms.append(Symmetry("cyclic", (1, 2, 0), (ident, ident, ident)))
        syms.append(Symmetry("cyclic2", (2, 0, 1), (ident, ident, ident)))
    return TensorProblem(f"mamu:{l},{m},{n}", t, syms)


def det3_problem() -> TensorProblem:
    t = det3_tensor()
    ident = _identity_map(9)
    transp = tuple(((i % 3) * 3 + i // 3, 1) for i in range(9))
    syms = []
    for perm in itertools.permutations(range(3)):
        for mp, tag in ((ident, ""), (transp, "T")):
            if perm == (0, 1, 2) and not tag:
                continue
            syms.append(Symmetry(f"perm{''.join(map(str, perm))}{tag}", perm, (mp, mp, mp)))
    return TensorProblem("det3", t, syms)


# ---------------------------------------------------------------------------
# modules with weight bases and Borel-fixed enumeration


class WeightModule:
    """A torus- and Borel-stable subspace with its RREF weight basis.

    Module coordinates of a vector are its values at the RREF pivots.
    """

    def __init__(self, space: TensorSpace, sub: Subspace, ops: Sequence[RaisingOp]):
        self.space, self.sub, self.ops = space, sub, tuple(ops)
        self.vectors = [dict(r) for r in sub.basis]
        self.pivots = list(sub.pivots)
        self.weights = [weight_of(space, v) for v in self.vectors]
        self.by_weight: dict[tuple, list[int]] = defaultdict(list)
        for i, w in enumerate(self.weights):
            self.by_weight[w].append(i)
        self.pivot_pos = {p: i for i, p in enumerate(self.pivots)}
        self.action: dict[RaisingOp, list[dict[int, object]]] = {}
        for op in self.ops:
            cols = []
            for v in self.vectors:
                img = space.raise_vec(op, v)
                coords = {self.pivot_pos[p]: c for p, c in img.items() if p in self.pivot_pos}
                recon: dict = {}
                for k, c in coords.items():
                    for q, d in self.vectors[k].items():
                        recon[q] = recon.get(q, 0) + c * d
                if {q: c for q, c in recon.items() if c} != img:
                    raise ValueError("subspace is not stable under raising operators")
                cols.append(coords)
            self.action[op] = cols

    @property
    def dim(self):
        return len(self.vectors)

    def to_ambient(self, coords: Mapping[int, object]) -> Vec:
        out: dict = {}
        for k, c in coords.items():
            for q, d in self.vectors[k].items():
                out[q] = out.get(q, 0) + c * d
        return {q: c for q, c in out.items() if not is_zero(c)}


@dataclass
class BorelFixedFamily:
    module: WeightModule
    rows: dict  # weight -> list of rows (dict module-index -> entry)
    branch: Branch
    params: tuple[str, ...]

    @property
    def dim(self) -> int:
        return sum(len(r) for r in self.rows.values())

    @property
    def dims_by_weight(self) -> dict:
        return {w: len(r) for w, r in self.rows.items() if r}

    @property
    def closure_equations(self) -> tuple[Poly, ...]:
        return self.branch.record().generators

    @property
    def free_params(self) -> tuple[str, ...]:
        used = set()
        for rows in self.rows.values():
            for r in rows:
                for v in r.values():
                    v = self.branch.reduce(v)
                    if isinstance(v, Poly):
                        used.update(v.variables)
        return tuple(sorted(used))

    @property
    def discrete(self) -> bool:
        return not self.free_params and not self.branch.gens

    def weight_vectors(self) -> list[tuple[tuple, Vec]]:
        out = []
        for w, rows in sorted(self.rows.items()):
            for r in rows:
                coords = {k: self.branch.reduce(v) for k, v in r.items()}
                out.append((w, self.module.to_ambient(coords)))
        return out

    def specialize(self, point: Mapping[str, object]) -> Subspace:
        vecs = []
        for _, v in self.weight_vectors():
            vecs.append({k: (c.evaluate(point) if isinstance(c, Poly) else c) for k, c in v.items()})
        return Subspace(self.module.space.dim, vecs)

    def subspace(self) -> Subspace:
        if not self.discrete:
            raise ValueError("family has free parameters")
        return self.specialize({})

    def __repr__(self):
        return f"BorelFixedFamily(dim={self.dim}, params={self.free_params})"


def _rref_rows(rows: list[dict]) -> tuple[list[dict], list[int]]:
    sub = Subspace(1 + max((max(r) for r in rows if r), default=0), rows)
    return [dict(r) for r in sub.basis], list(sub.pivots)


def _schubert_cells(n: int, k: int):
    """RREF cells of Gr(k, n): (pivots, free positions per row)."""
    for piv in itertools.combinations(range(n), k):
        ps = set(piv)
        free = [[c for c in range(p + 1, n) if c not in ps] for p in piv]
        yield piv, free


def enumerate_borel_fixed(space: TensorSpace, d: int, inside: Subspace,
                          ops: Sequence[RaisingOp] | None = None,
                          param_prefix: str = "p") -> list[BorelFixedFamily]:
    """All Borel-fixed d-dimensional subspaces of ``inside`` as echelon families."""
    ops = tuple(space.torus.raising_ops if ops is None else ops)
    mod = WeightModule(space, inside, ops)
    if d > mod.dim:
        raise ValueError("d exceeds dimension")
    torus = space.torus
    order = sorted(mod.by_weight, key=lambda w: (-torus.height(w), w))
    suffix = [0] * (len(order) + 1)
    for i in range(len(order) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + len(mod.by_weight[order[i]])
    roots = {op: torus.root(op) for op in ops}
    out: list[BorelFixedFamily] = []

    def constraint(w, chosen, br):
        """Rows (over M_w coordinates) of the linear conditions e·x ∈ E."""
        idx = mod.by_weight[w]
        cons = []
        for op in ops:
            tw = _add(w, roots[op])
            if tw not in mod.by_weight:
                continue
            rows, pivs = chosen.get(tw, ([], []))
            tidx = mod.by_weight[tw]
            # image coordinates in M_tw for each basis vector of M_w
            imgs = [mod.action[op][k] for k in idx]
            if not any(imgs):
                continue
            for q in tidx:
                if q in pivs:
                    continue
                row = {}
                for n, img in enumerate(imgs):
                    val = img.get(q, 0)
                    for r, p in zip(rows, pivs):
                        c = img.get(p, 0)
                        if c:
                            val = val - c * r.get(q, 0)
                    val = br.reduce(val) if isinstance(val, Poly) else val
                    if not is_zero(val):
                        row[n] = val
                if row:
                    cons.append(row)
        return cons

    def go(step, budget, chosen, br, nparams):
        if budget == 0:
            out.append(BorelFixedFamily(mod, {w: [r for r in rows] for w, (rows, _) in chosen.items()},
                                        br, tuple(f"{param_prefix}{i}" for i in range(nparams))))
            return
        if step == len(order) or suffix[step] < budget:
            return
        w = order[step]
        idx = mod.by_weight[w]
        m = len(idx)
        cons = constraint(w, chosen, br)
        const = all(not isinstance(v, Poly) for r in cons for v in r.values())
        # option: nothing at this weight
        go(step + 1, budget, chosen, br, nparams)
        if const:
            kb = _kernel_rows(cons, m)
            if not kb:
                return
            kb, _ = _rref_rows(kb)
            for k in range(1, min(budget, len(kb)) + 1):
                for piv, free in _schubert_cells(len(kb), k):
                    rows_local, npar = [], nparams
                    for p, fr in zip(piv, free):
                        vec = dict(kb[p])
                        for f in fr:
                            t = Poly.var(f"{param_prefix}{npar}")
                            npar += 1
                            for c, v in kb[f].items():
                                vec[c] = vec.get(c, 0) + t * v
                        rows_local.append({c: v for c, v in vec.items() if not is_zero(v)})
                    _emit(step, w, idx, rows_local, budget - k, chosen, br, npar)
        else:
            for k in range(1, min(budget, m) + 1):
                for piv, free in _schubert_cells(m, k):
                    rows_local, npar = [], nparams
                    for p, fr in zip(piv, free):
                        vec = {p: 1}
                        for f in fr:
                            vec[f] = Poly.var(f"{param_prefix}{npar}")
                            npar += 1
                        rows_local.append(vec)
                    b2 = br
                    for row in rows_local:
                        for c in cons:
                            val = 0
                            for n, v in c.items():
                                if n in row:
                                    val = val + v * row[n]
                            if not is_zero(val):
                                b2 = b2.with_zero(val)
                                if b2 is None:
                                    break
                        if b2 is None:
                            break
                    if b2 is not None:
                        _emit(step, w, idx, rows_local, budget - k, chosen, b2, npar)

    def _emit(step, w, idx, rows_local, budget, chosen, br, npar):
        rows_mod = [{idx[c]: v for c, v in r.items()} for r in rows_local]
        piv_mod = []
        for r in rows_local:
            # cell rows are reduced echelon with leading entry 1
            piv_mod.append(idx[min(r)])
        new = dict(chosen)
        new[w] = (rows_mod, piv_mod)
        go(step + 1, budget, new, br, npar)

    go(0, d, {}, Branch(), 0)
    return out


def _kernel_rows(cons: list[dict], m: int) -> list[dict]:
    """Basis of {x in Q^m : c·x = 0 for c in cons}."""
    full = Subspace(m, [{i: 1} for i in range(m)])
    if not cons:
        return full.basis
    return Subspace(m, cons).annihilator().basis


# ---------------------------------------------------------------------------
# maps


def _ext2_dim(n):
    return n * (n - 1) // 2


def skew_blocks(wvecs: Sequence[tuple[tuple, Vec]], X: TensorSpace, Y: TensorSpace,
                side: int) -> list[list[dict]]:
    """Weight blocks of E⊗X → Λ²X⊗Y (side 0) or E⊗Y → X⊗Λ²Y (side 1).

    ``wvecs`` are weight vectors of E ⊆ X⊗Y. Each block is a list of row
    dicts, one row per domain basis element.
    """
    dy = Y.dim
    blocks = defaultdict(list)
    skew_space, other = (X, Y) if side == 0 else (Y, X)
    n = skew_space.dim
    for w, vec in wvecs:
        for z in range(n):
            row: dict = {}
            for idx, c in vec.items():
                x, y = divmod(idx, dy)
                if side == 0:
                    k, s = ext2_index(z, x, n)
                    if s == 0:
                        continue
                    col = k * dy + y
                else:
                    k, s = ext2_index(y, z, n)
                    if s == 0:
                        continue
                    col = x * _ext2_dim(n) + k
                row[col] = row.get(col, 0) + s * c
            row = {k: v for k, v in row.items() if not is_zero(v)}
            blocks[_add(w, skew_space.weights[z])].append(row)
    return [blocks[k] for k in sorted(blocks)]


def _block_rank(rows: list[dict]) -> int:
    return rank_of_rows([r for r in rows if r])


def blocks_rank(blocks) -> int:
    return sum(_block_rank(b) for b in blocks)


def _assemble(blocks, ncols) -> SparseMatrix:
    rows = [r for b in blocks for r in b]
    return SparseMatrix.from_row_dicts(ncols, rows)


def skew_map(E: Subspace, X: TensorSpace, Y: TensorSpace, side: str = "210") -> SparseMatrix:
    """Matrix (rows = domain basis) of the skew map on E ⊆ X⊗Y.

    ``side`` is "210" for skew-symmetrization in X and "120" for Y.
    """
    s = {"210": 0, "120": 1}[side]
    wv = weight_basis(Tensor(X, Y), E)
    ncols = _ext2_dim(X.dim) * Y.dim if s == 0 else X.dim * _ext2_dim(Y.dim)
    return _assemble(skew_blocks(wv, X, Y, s), ncols)


def skew_kernel_dim(wvecs, X, Y, side: int) -> int:
    blocks = skew_blocks(wvecs, X, Y, side)
    return sum(len(b) for b in blocks) - blocks_rank(blocks)


def triple_intersection(problem: "TensorProblem", E110, E101, E011) -> int:
    """dim (E110⊗C) ∩ (E101⊗B) ∩ (E011⊗A) inside A⊗B⊗C.

    Each E is a list of (weight, vector) pairs in its pair space.
    """
    A, B, C = problem.factors
    da, db, dc = A.dim, B.dim, C.dim

    def gen(wvecs, pair):
        (third,) = {0, 1, 2} - set(pair)
        F = problem.factors
        d1 = F[pair[1]].dim
        out = defaultdict(list)
        for w, v in wvecs:
            for z in range(F[third].dim):
                vec = {}
                for idx, c in v.items():
                    p, q = divmod(idx, d1)
                    ijk = [0, 0, 0]
                    ijk[pair[0]], ijk[pair[1]], ijk[third] = p, q, z
                    vec[(ijk[0] * db + ijk[1]) * dc + ijk[2]] = c
                out[_add(w, F[third].weights[z])].append(vec)
        return out

    g1, g2, g3 = gen(E110, (0, 1)), gen(E101, (0, 2)), gen(E011, (1, 2))
    total = 0
    amb = da * db * dc
    for w in set(g1) & set(g2) & set(g3):
        s1 = Subspace(amb, g1[w])
        s2 = Subspace(amb, g2[w])
        i12 = s1 & s2
        if i12.dim == 0:
            continue
        total += (i12 & Subspace(amb, g3[w])).dim
    return total


# polynomial spaces S^iA*⊗S^jB*⊗S^kC* --------------------------------------


class PolySpace(TensorSpace):
    """Monomials of multidegree (i, j, k) in the duals of three factors."""

    def __init__(self, factors: Sequence[TensorSpace], degree: tuple[int, int, int]):
        self.factors = tuple(factors)
        self.degree = tuple(degree)
        self.torus = factors[0].torus
        parts = [list(itertools.combinations_with_replacement(range(f.dim), d))
                 for f, d in zip(factors, degree)]
        self.basis = list(itertools.product(*parts))
        zero = (0,) * self.torus.rank
        self.weights = []
        for b in self.basis:
            w = zero
            for f, mono in zip(factors, b):
                for i in mono:
                    w = tuple(a - c for a, c in zip(w, f.weights[i]))
            self.weights.append(w)

    def _raise(self, op, i):
        raise NotImplementedError("raising on polynomial spaces is not needed")

    def times(self, idx: int, slot: int, var: int, target: "PolySpace") -> int:
        b = list(self.basis[idx])
        b[slot] = tuple(sorted(b[slot] + (var,)))
        return target.index[tuple(b)]

    def _label(self, b):
        return "|".join(",".join(map(str, m)) for m in b)


def multiplication_map(factors, degree, F: Mapping[tuple, Subspace]):
    """Matrix of ⊕ F_{deg-e_s}⊗(factor s)* → S^iA*⊗S^jB*⊗S^kC*.

    ``F`` maps multidegrees to subspaces of the corresponding PolySpace, in
    its monomial coordinates; missing pieces are treated as zero.
    Returns ``(matrix, target_space)``; rows are domain elements.
    """
    degree = tuple(degree)
    if len(degree) != 3 or min(degree) < 0:
        raise ValueError("degree must be a nonnegative triple")
    target = PolySpace(factors, degree)
    rows = []
    for slot in range(3):
        if degree[slot] == 0:
            continue
        src_deg = list(degree)
        src_deg[slot] -= 1
        src_deg = tuple(src_deg)
        if src_deg not in F:
            continue
        src = PolySpace(factors, src_deg)
        sub = F[src_deg]
        if sub.ambient != src.dim:
            raise ValueError(f"grading mismatch for piece {src_deg}")
        for row in sub.basis:
            for var in range(factors[slot].dim):
                out = {}
                for idx, c in row.items():
                    k = src.times(idx, slot, var, target)
                    out[k] = out.get(k, 0) + c
                rows.append(out)
    return SparseMatrix.from_row_dicts(target.dim, rows), target


def multiplication_blocks(factors, degree, F):
    """Weight blocks of the multiplication map (rows are domain elements)."""
    m, target = multiplication_map(factors, degree, F)
    blocks = defaultdict(list)
    for r in m.rows():
        if not r:
            continue
        (w,) = {target.weights[k] for k in r}
        blocks[w].append(r)
    return [blocks[k] for k in sorted(blocks)], target


def image_codim(factors, degree, F) -> int:
    blocks, target = multiplication_blocks(factors, degree, F)
    return target.dim - blocks_rank(blocks)


def image_subspace(factors, degree, F) -> Subspace:
    m, target = multiplication_map(factors, degree, F)
    return Subspace(target.dim, m.rows())


# isotypic projection for the reduced (210) map -------------------------------


def v_isotypic_projector(v: int):
    """Projector removing the V-isotypic part of V⊗V⊗V*.

    Returns a function on sparse vectors over index triples (p, q, s) meaning
    v_p⊗v_q⊗v^s. The V-isotypic part is the image of j1(x) = x⊗Σ v_j⊗v^j and
    j2(x) = Σ v_j⊗x⊗v^j; contractions c1, c2 pair the dual slot with the
    first and second slot.
    """
    det = Fraction(1, 1 - v * v)

    def proj(vec: Mapping[tuple, object]) -> dict:
        c1, c2 = defaultdict(lambda: 0), defaultdict(lambda: 0)
        for (p, q, s), c in vec.items():
            if p == s:
                c1[q] = c1[q] + c
            if q == s:
                c2[p] = c2[p] + c
        out = dict(vec)
        for m in set(c1) | set(c2):
            a, b = c1.get(m, 0), c2.get(m, 0)
            a2 = det * (a - v * b)
            b2 = det * (b - v * a)
            for j in range(v):
                if not is_zero(a2):
                    out[(m, j, j)] = out.get((m, j, j), 0) - a2
                if not is_zero(b2):
                    out[(j, m, j)] = out.get((j, m, j), 0) - b2
        return {k: c for k, c in out.items() if not is_zero(c)}

    return proj


def isotypic_dims(v: int) -> tuple[int, int]:
    """Ranks of the projector on S²V⊗V* and Λ²V⊗V*."""
    proj = v_isotypic_projector(v)
    res = []
    for sgn in (1, -1):
        rows = []
        for p in range(v):
            for q in range(p if sgn == -1 else p, v):
                if sgn == -1 and p == q:
                    continue
                for s in range(v):
                    vec = {(p, q, s): 1}
                    vec[(q, p, s)] = vec.get((q, p, s), 0) + sgn
                    vec = {k: c for k, c in vec.items() if c}
                    img = proj(vec)
                    rows.append({(a * v + b) * v + c: x for (a, b, c), x in img.items()})
        res.append(rank_of_rows(rows))
    return tuple(res)


def reduced_210_kernel(E_prime: Sequence[tuple[tuple, Vec]] | Subspace, u: int, v: int, w: int,
                       blocks_only: bool = False):
    """Kernel dimension of E'⊗A → (Λ²A⊗B with the V-isotypic part removed).

    E' is given in A⊗B coordinates of ``mamu_tensor(u, v, w)`` (A = U*⊗V,
    B = V*⊗W). The map antisymmetrizes in A⊗A and then removes the two
    copies of V inside V⊗V⊗V*.
    """
    t = mamu_tensor(u, v, w)
    A, B, _ = t.factors
    if isinstance(E_prime, Subspace):
        E_prime = weight_basis(Tensor(A, B), E_prime)
    proj = v_isotypic_projector(v)
    dB = B.dim
    blocks = defaultdict(list)
    for wt, vec in E_prime:
        for a in range(A.dim):
            i1, j1 = divmod(a, v)
            # a ⊗ e - e_A ⊗ a ⊗ e_B, grouped by spectator indices (i1, i2, k)
            groups: dict = defaultdict(dict)
            for idx, c in vec.items():
                a2, b = divmod(idx, dB)
                i2, j2 = divmod(a2, v)
                j3, k = divmod(b, w)
                g1 = groups[(i1, i2, k)]
                g1[(j1, j2, j3)] = g1.get((j1, j2, j3), 0) + c
                g2 = groups[(i2, i1, k)]
                g2[(j2, j1, j3)] = g2.get((j2, j1, j3), 0) - c
            row = {}
            for (x1, x2, k), vv in groups.items():
                for (p, q, s), c in proj({kk: cc for kk, cc in vv.items() if not is_zero(cc)}).items():
                    col = ((((x1 * u + x2) * v + p) * v + q) * v + s) * w + k
                    row[col] = row.get(col, 0) + c
            row = {k: c for k, c in row.items() if not is_zero(c)}
            blocks[_add(wt, A.weights[a])].append(row)
    bl = [blocks[k] for k in sorted(blocks)]
    if blocks_only:
        return bl
    return sum(len(b) for b in bl) - blocks_rank(bl)
