"""Border apolarity search over Borel-fixed candidate ideals.

Candidates are handled on the E side (the perp of the ideal). For a pair
space X⊗Y the two pairwise tests ask that the kernels of the skew maps
E⊗X → Λ²X⊗Y and E⊗Y → X⊗Λ²Y have dimension at least r. Triples of
pairwise survivors are tested through the triple intersection, and the
surviving ideals can be pushed to higher multidegrees with the generic
multiplication-map test.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

from .exact_linalg import Subspace
from .poly import Poly
from .poly_rank import Branch, LocusRecord, export_ideal, locus_status, rank_strata
from .rep_tensor import (PAIR_NAMES, PAIRS, BorelFixedFamily, Sym, Symmetry, Tensor, TensorProblem,
                         blocks_rank, enumerate_borel_fixed, multiplication_blocks, skew_blocks,
                         triple_intersection, weight_basis)

log = logging.getLogger(__name__)

PASS, FAIL, UNDECIDED = "pass", "fail", "undecided"


def _test_names(pair):
    """Names of the two pairwise tests on the pair space ``pair``."""
    out = []
    for side in (0, 1):
        deg = [0, 0, 0]
        deg[pair[0]] = 1
        deg[pair[1]] = 1
        deg[pair[side]] = 2
        out.append("".join(map(str, deg)))
    return out


@dataclass
class TestResult:
    test: str
    shape: tuple[int, int]
    observed: int | None
    required: int
    status: str
    loci: tuple[LocusRecord, ...] = ()

    @property
    def passed(self) -> bool | None:
        return {PASS: True, FAIL: False}.get(self.status)

    def as_dict(self):
        d = {"test": self.test, "shape": list(self.shape), "observed": self.observed,
             "required": self.required, "status": self.status}
        if self.loci:
            d["loci"] = [export_ideal(r) for r in self.loci]
        return d


@dataclass
class Candidate:
    grading: tuple[int, int, int]
    pair: tuple[int, int]
    r: int
    vectors: list  # (weight, vector) pairs spanning E, entries may be Poly
    branch: Branch
    label: str
    family: BorelFixedFamily | None = None
    transcript: list = field(default_factory=list)

    @property
    def discrete(self) -> bool:
        return not any(isinstance(c, Poly) for _, v in self.vectors for c in v.values())

    def reduced_vectors(self, branch: Branch | None = None):
        br = branch or self.branch
        out = []
        for w, v in self.vectors:
            vv = {k: br.reduce(c) for k, c in v.items()}
            out.append((w, {k: c for k, c in vv.items() if not (c == 0)}))
        return out

    def subspace(self, ambient: int) -> Subspace:
        if not self.discrete:
            raise ValueError("candidate has free parameters")
        return Subspace(ambient, [v for _, v in self.vectors])


# ---------------------------------------------------------------------------
# candidates and pairwise tests


def conciseness_bound(problem: TensorProblem) -> int:
    return max(f.dim for f in problem.factors)


def generate_candidates(problem: TensorProblem, r: int, pair=(0, 1)) -> list[Candidate]:
    """All Borel-fixed E ⊇ T(X*) of dimension r in the pair space."""
    space = problem.pair_space(pair)
    flat = problem.pair_flattening(pair)
    if r < flat.dim:
        return []
    base = weight_basis(space, flat)
    comp = problem.complement(pair)
    d = r - flat.dim
    if d > comp.dim:
        return []
    grading = tuple(1 if k in pair else 0 for k in range(3))
    out = []
    for n, fam in enumerate(enumerate_borel_fixed(space, d, comp, problem.ops)):
        out.append(Candidate(grading, pair, r, base + fam.weight_vectors(), fam.branch,
                             f"{PAIR_NAMES[pair]}#{n}", fam))
    return out


def generate_110_candidates(problem: TensorProblem, r: int) -> list[Candidate]:
    return generate_candidates(problem, r, (0, 1))


def _pair_test(problem: TensorProblem, cand: Candidate, side: int,
               branches: Sequence[Branch]) -> tuple[TestResult, list[Branch]]:
    X, Y = (problem.factors[k] for k in cand.pair)
    name = _test_names(cand.pair)[side]
    blocks = skew_blocks(cand.vectors, X, Y, side)
    D = sum(len(b) for b in blocks)
    skew = (X if side == 0 else Y).dim
    ncols = (skew * (skew - 1) // 2) * (Y.dim if side == 0 else X.dim)
    if cand.discrete and all(not b.subs and not b.gens and not b.inv for b in branches):
        ker = D - blocks_rank(blocks)
        ok = ker >= cand.r
        return TestResult(name, (D, ncols), ker, cand.r, PASS if ok else FAIL), \
            (list(branches) if ok else [])
    # kernel >= r  <=>  rank < D - r + 1
    need = D - cand.r + 1
    keep = []
    if need <= 0:
        keep = list(branches)
    else:
        for br in branches:
            keep += [b for b, _ in rank_strata(blocks, br, need=need)]
    loci = tuple(b.record() for b in keep)
    return TestResult(name, (D, ncols), None, cand.r, PASS if keep else FAIL, loci), keep


def run_pair_tests(problem: TensorProblem, cand: Candidate):
    """Both pairwise tests; returns surviving branches (possibly empty)."""
    branches = [cand.branch]
    for side in (0, 1):
        res, branches = _pair_test(problem, cand, side, branches)
        cand.transcript.append(res)
        if not branches:
            break
    return branches


def test_210(problem: TensorProblem, cand: Candidate) -> TestResult:
    return _pair_test(problem, cand, 0, [cand.branch])[0]


def test_120(problem: TensorProblem, cand: Candidate) -> TestResult:
    return _pair_test(problem, cand, 1, [cand.branch])[0]


@dataclass
class Survivor:
    candidate: Candidate
    branch: Branch
    status: str  # "point" | "family" | "undecided"
    subspace: Subspace | None = None
    witness: dict | None = None


def resolve_survivors(problem: TensorProblem, cand: Candidate, branches) -> list[Survivor]:
    out = []
    amb = problem.pair_space(cand.pair).dim
    for br in branches:
        st = locus_status(br.record())
        if st.kind == "empty":
            continue
        vecs = cand.reduced_vectors(br)
        free = sorted({x for _, v in vecs for c in v.values() if isinstance(c, Poly)
                       for x in c.variables})
        if st.kind == "undecided":
            out.append(Survivor(cand, br, "undecided"))
        elif not free and not br.gens:
            out.append(Survivor(cand, br, "point", Subspace(amb, [v for _, v in vecs])))
        else:
            out.append(Survivor(cand, br, "family", witness=st.witness))
    return out


# ---------------------------------------------------------------------------
# symmetry and triples


def _compose(g: Symmetry, h: Symmetry) -> Symmetry:
    """g after h."""
    perm = tuple(g.perm[h.perm[k]] for k in range(3))
    maps = []
    for k in range(3):
        mk = []
        for i, (j, s) in enumerate(h.maps[k]):
            j2, s2 = g.maps[h.perm[k]][j]
            mk.append((j2, s * s2))
        maps.append(tuple(mk))
    return Symmetry(f"{g.name}*{h.name}", perm, tuple(maps))


def symmetry_group(problem: TensorProblem) -> list[Symmetry]:
    ident = Symmetry("id", (0, 1, 2), tuple(tuple((i, 1) for i in range(f.dim))
                                              for f in problem.factors))
    group = {(ident.perm, ident.maps): ident}
    frontier = [ident]
    while frontier:
        new = []
        for g in frontier:
            for h in problem.symmetries:
                c = _compose(h, g)
                key = (c.perm, c.maps)
                if key not in group:
                    group[key] = c
                    new.append(c)
        frontier = new
    return sorted(group.values(), key=lambda g: (g.perm, g.maps))


def transport(problem: TensorProblem, g: Symmetry, pair, sub: Subspace):
    newpair, vecs = problem.map_pair_subspace(g, pair, sub.basis)
    return newpair, Subspace(problem.pair_space(newpair).dim, vecs)


def assemble_triples(cands: dict, problem: TensorProblem | None = None,
                     group: Sequence[Symmetry] | None = None):
    """Orbit representatives of the product of the three candidate lists.

    ``cands`` maps each pair to a list of Subspaces. Returns
    ``(total, representatives)`` where each representative is an index triple.
    """
    lists = [cands[p] for p in PAIRS]
    total = 1
    for l in lists:
        total *= len(l)
    if not group or problem is None or len(group) == 1:
        return total, list(itertools.product(*(range(len(l)) for l in lists)))
    index = {p: {s: i for i, s in enumerate(cands[p])} for p in PAIRS}
    # action of each group element on candidate indices
    actions = []
    for g in group:
        act = {}
        for p in PAIRS:
            for i, s in enumerate(cands[p]):
                q, img = transport(problem, g, p, s)
                if img not in index[q]:
                    raise ValueError(f"candidate set not invariant under {g.name}")
                act[(p, i)] = (q, index[q][img])
        actions.append(act)
    seen = set()
    reps = []
    for trip in itertools.product(*(range(len(l)) for l in lists)):
        if trip in seen:
            continue
        orbit = set()
        for act in actions:
            img = {}
            for p, i in zip(PAIRS, trip):
                q, j = act[(p, i)]
                img[q] = j
            orbit.add(tuple(img[p] for p in PAIRS))
        seen |= orbit
        reps.append(min(orbit))
    return total, sorted(reps)


def test_111(problem: TensorProblem, triple: Sequence[Subspace], r: int) -> TestResult:
    """Dual (111) test: dim (E110⊗C)∩(E101⊗B)∩(E011⊗A) ≥ r and T inside it."""
    wv = [weight_basis(problem.pair_space(p), s) for p, s in zip(PAIRS, triple)]
    dim = triple_intersection(problem, *wv)
    a, b, c = (f.dim for f in problem.factors)
    ok = dim >= r and _contains_tensor(problem, triple)
    shape = (sum(s.dim * problem.factors[3 - sum(p)].dim for p, s in zip(PAIRS, triple)), a * b * c)
    return TestResult("111", shape, dim, r, PASS if ok else FAIL)


def _contains_tensor(problem: TensorProblem, triple) -> bool:
    t = problem.tensor.coeffs
    for (p, q), sub in zip(PAIRS, triple):
        (z,) = {0, 1, 2} - {p, q}
        dq = problem.factors[q].dim
        slices = {}
        for idx, c in t.items():
            slices.setdefault(idx[z], {})[idx[p] * dq + idx[q]] = c
        if not all(sub.contains(v) for v in slices.values()):
            return False
    return True


# ---------------------------------------------------------------------------
# higher multidegrees


def dual_factor(space):
    from .rep_tensor import FactorSpace

    if isinstance(space, FactorSpace):
        return FactorSpace(space.torus, space.name, space.dim, not space.dual)
    return Tensor(*(dual_factor(c) for c in space.children))


def test_degree(problem: TensorProblem, degree, pieces: dict, r: int,
                top: Subspace | None = None) -> TestResult:
    """Codimension test of the multiplication map into multidegree ``degree``.

    ``pieces`` holds F-side subspaces (monomial coordinates of the matching
    PolySpace) for the lower multidegrees; missing pieces count as zero.
    When ``top`` (a candidate F at ``degree``) is given, the image must also
    lie inside it and ``top`` must have codimension at least r.
    """
    blocks, target = multiplication_blocks(problem.factors, degree, pieces)
    D = sum(len(b) for b in blocks)
    codim = target.dim - blocks_rank(blocks)
    ok = codim >= r
    if top is not None:
        rows = [row for b in blocks for row in b]
        ok = ok and top.codim >= r and all(top.contains(v) for v in rows)
    name = "".join(map(str, degree))
    return TestResult(name, (D, target.dim), codim, r, PASS if ok else FAIL)


def _sym2_module(problem: TensorProblem, slot: int):
    """S² of the dual of a factor, with indices matching PolySpace monomials."""
    return Sym(dual_factor(problem.factors[slot]), 2)


def _degree_two_pieces(problem: TensorProblem, slot: int, r: int):
    """Borel-fixed F of codim r in S²(factor)*, as discrete subspaces or families."""
    space = _sym2_module(problem, slot)
    d = space.dim - r
    if d < 0:
        return []
    full = Subspace.full(space.dim)
    return enumerate_borel_fixed(space, d, full, problem.ops, param_prefix=f"q{slot}_")


def _unit(slot):
    return tuple(1 if k == slot else 0 for k in range(3))


def degree_three_for_slot(problem: TensorProblem, F_pairs: dict, fam: BorelFixedFamily,
                          slot: int, r: int, point=None) -> list[TestResult]:
    """All total-degree-3 tests that involve the square piece of ``slot``."""
    sq = tuple(2 * x for x in _unit(slot))
    sub = fam.specialize(point or {})
    results = []
    for other in range(3):
        deg = tuple(a + b for a, b in zip(sq, _unit(other)))
        pieces = {sq: sub}
        for p, F in F_pairs.items():
            g = tuple(1 if k in p else 0 for k in range(3))
            if all(x <= y for x, y in zip(g, deg)):
                pieces[g] = F
        results.append(test_degree(problem, deg, pieces, r))
    return results


# ---------------------------------------------------------------------------
# certification


@dataclass
class Certificate:
    tensor: str
    r: int
    degree_cap: int
    stages: list
    triples: dict
    conclusion: str
    undecided: list = field(default_factory=list)

    def payload(self) -> dict:
        return {"tensor": self.tensor, "r": self.r, "degree_cap": self.degree_cap,
                "stages": self.stages, "triples": self.triples, "conclusion": self.conclusion,
                "undecided": self.undecided}

    @property
    def hash(self) -> str:
        blob = json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_json(self) -> dict:
        d = self.payload()
        d["hash"] = self.hash
        return d

    @property
    def refuted(self) -> bool:
        return self.conclusion == "border_rank_exceeds_r"


def _cand_detail(c: Candidate, survivors):
    return {"label": c.label, "tests": [t.as_dict() for t in c.transcript],
            "survivors": [s.status for s in survivors]}


def pairwise_stage(problem: TensorProblem, r: int, pair) -> tuple[dict, list[Survivor]]:
    cands = generate_candidates(problem, r, pair)
    survivors, details = [], []
    for c in cands:
        brs = run_pair_tests(problem, c)
        sv = resolve_survivors(problem, c, brs) if brs else []
        survivors += sv
        details.append(_cand_detail(c, sv))
    stage = {"grading": PAIR_NAMES[pair], "candidates": len(cands),
             "passed": sum(1 for s in survivors if s.status != "undecided"),
             "undecided": sum(1 for s in survivors if s.status == "undecided"),
             "details": details}
    log.info("%s %s: %d candidates, %d survivors", problem.name, PAIR_NAMES[pair], len(cands),
             len(survivors))
    return stage, survivors


def _transport_map(problem: TensorProblem, group, pair):
    for g in group:
        if tuple(sorted((g.perm[0], g.perm[1]))) == pair:
            return g
    return None


def certify(problem: TensorProblem, r: int, degree_cap: int = 3) -> Certificate:
    """Run the search for border rank ≤ r up to total degree ``degree_cap``."""
    stages: list = []
    undecided: list = []
    triples_info = {"total": 0, "mod_symmetry": 0, "passed": 0}

    def finish(conclusion):
        return Certificate(problem.name, r, degree_cap, stages, triples_info, conclusion, undecided)

    if problem.tensor.is_concise() and r < conciseness_bound(problem):
        stages.append({"grading": "concise", "candidates": 0, "passed": 0,
                       "details": [f"r < {conciseness_bound(problem)}"]})
        return finish("border_rank_exceeds_r")
    group = symmetry_group(problem)
    points: dict = {}
    survivors_110: list = []
    for pair in PAIRS:
        g = _transport_map(problem, group, pair) if pair != (0, 1) else None
        if g is not None and all(s.status == "point" for s in survivors_110):
            pts = [transport(problem, g, (0, 1), s.subspace)[1] for s in survivors_110]
            stages.append({"grading": PAIR_NAMES[pair], "transported_by": g.name,
                           "candidates": len(pts), "passed": len(pts)})
            points[pair] = _dedupe(pts)
            continue
        stage, survivors = pairwise_stage(problem, r, pair)
        stages.append(stage)
        if pair == (0, 1):
            survivors_110 = survivors
        for s in survivors:
            if s.status == "undecided":
                undecided.append({"grading": PAIR_NAMES[pair], "label": s.candidate.label,
                                  "ideal": export_ideal(s.branch.record())})
        pts = [s.subspace for s in survivors if s.status == "point"]
        fams = [s for s in survivors if s.status == "family"]
        if fams:
            # a positive-dimensional survivor: existence is witnessed, keep its witness point
            for s in fams:
                vecs = [{k: (c.evaluate(s.witness) if isinstance(c, Poly) else c)
                         for k, c in v.items()} for _, v in s.candidate.reduced_vectors(s.branch)]
                pts.append(Subspace(problem.pair_space(pair).dim, vecs))
            stage["families_specialized"] = len(fams)
        points[pair] = _dedupe(pts)
        if not points[pair]:
            return finish("undecided_branches" if undecided else "border_rank_exceeds_r")
    if degree_cap < 3 and degree_cap >= 2:
        return finish("undecided_branches" if undecided else "survivors_remain")
    total, reps = assemble_triples(points, problem, group)
    triples_info.update(total=total, mod_symmetry=len(reps))
    passing = []
    for trip in reps:
        subs = [points[p][i] for p, i in zip(PAIRS, trip)]
        res = test_111(problem, subs, r)
        if res.passed:
            passing.append((trip, subs))
    triples_info["passed"] = len(passing)
    log.info("%s triples: %d total, %d mod symmetry, %d pass", problem.name, total, len(reps),
             len(passing))
    if not passing:
        return finish("undecided_branches" if undecided else "border_rank_exceeds_r")
    if degree_cap >= 3:
        survivors = []
        detail = []
        for trip, subs in passing:
            F = {p: s.annihilator() for p, s in zip(PAIRS, subs)}
            ok, info = _degree_two_three(problem, F, r)
            detail.append({"triple": list(trip), **info})
            if ok is True:
                survivors.append(trip)
            elif ok is None:
                undecided.append({"triple": list(trip), "stage": "degree 3"})
        stages.append({"grading": "deg3", "candidates": len(passing), "passed": len(survivors),
                       "details": detail})
        if not survivors:
            return finish("undecided_branches" if undecided else "border_rank_exceeds_r")
    return finish("survivors_remain")


def _dedupe(subs):
    out, seen = [], set()
    for s in subs:
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


def _degree_two_three(problem: TensorProblem, F_pairs: dict, r: int):
    """Existence of squares F200, F020, F002 passing every degree-3 test.

    Returns (True/False/None, info). Families are handled by trying their
    cell at the origin and a few grid points; failure on a family is only
    reported as a refutation when the family is a point.
    """
    info = {}
    verdict = True
    for slot in range(3):
        fams = _degree_two_pieces(problem, slot, r)
        found = False
        unsure = False
        for fam in fams:
            pts = [{}] if fam.discrete else _grid_points(fam)
            hit = False
            for pt in pts:
                if fam.branch.gens or fam.branch.subs:
                    full = {v: 0 for v in fam.params}
                    full.update(pt)
                    if not fam.branch.record().contains(full):
                        continue
                res = degree_three_for_slot(problem, F_pairs, fam, slot, r, pt)
                if all(t.passed for t in res):
                    hit = True
                    break
            if hit:
                found = True
                break
            if not fam.discrete:
                unsure = True
        info["".join(map(str, tuple(2 * x for x in _unit(slot))))] = {
            "candidates": len(fams), "found": found}
        if not found:
            verdict = None if unsure and verdict is not False else False
            if verdict is False:
                break
    return verdict, info


def _grid_points(fam: BorelFixedFamily):
    free = sorted(set(fam.params))
    vals = (0, 1, -1)
    if len(free) > 4:
        return [dict.fromkeys(free, 0)]
    return [dict(zip(free, v)) for v in itertools.product(vals, repeat=len(free))]
