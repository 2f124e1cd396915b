"""Batch command line: certify, bounds, enumerate, selfcheck.

Exit codes for ``certify``: 0 border rank exceeds r, 1 survivors remain,
2 undecided branches (their ideals are exported), 64 usage error.
Results go to stdout or --out; logs go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from pathlib import Path

from . import mamu_bounds as mb
from .apolarity_engine import certify
from .rep_tensor import PAIRS, PAIR_NAMES, det3_problem, enumerate_borel_fixed, mamu_problem

log = logging.getLogger("borelcert")

EXIT_OK, EXIT_SURVIVORS, EXIT_UNDECIDED, EXIT_USAGE = 0, 1, 2, 64
WORKERS_ENV = "BORELCERT_WORKERS"
SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def parse_tensor(text: str):
    m = re.fullmatch(r"mamu:(\d+),(\d+),(\d+)", text)
    if m:
        l, mm, n = map(int, m.groups())
        if min(l, mm, n) < 1:
            raise UsageError("matrix sizes must be positive")
        return mamu_problem(l, mm, n)
    if text == "det3":
        return det3_problem()
    raise UsageError(f"unknown tensor {text!r}; use mamu:l,m,n or det3")


def parse_range(text: str) -> list[int]:
    m = re.fullmatch(r"(\d+)(?:\.\.|-)(\d+)", text) or re.fullmatch(r"(\d+)", text)
    if not m:
        raise UsageError(f"bad range {text!r}; use A..B")
    lo = int(m.group(1))
    hi = int(m.group(m.lastindex))
    if lo > hi or lo < 1:
        raise UsageError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            w = int(env)
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer") from None
        if w < 1:
            raise UsageError(f"{WORKERS_ENV} must be positive")
        return w
    return os.cpu_count() or 1


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# certify


def validate_certificate(doc: dict) -> list[str]:
    """Problems with a certificate document; empty when it conforms."""
    errs = []
    fields = {"schema": int, "tensor": str, "r": int, "degree_cap": int, "stages": list,
            "triples": dict, "conclusion": str, "undecided": list, "hash": str}
    for k, t in fields.items():
        if k not in doc:
            errs.append(f"missing {k}")
        elif not isinstance(doc[k], t):
            errs.append(f"{k} should be {t.__name__}")
    if doc.get("conclusion") not in ("border_rank_exceeds_r", "survivors_remain",
                                     "undecided_branches"):
        errs.append("bad conclusion")
    for st in doc.get("stages", []):
        if not isinstance(st, dict) or "grading" not in st or "candidates" not in st:
            errs.append("stage without grading/candidates")
    for k in ("total", "mod_symmetry", "passed"):
        if not isinstance(doc.get("triples", {}).get(k), int):
            errs.append(f"triples.{k} should be int")
    return errs


def render_text(doc: dict) -> str:
    lines = [f"tensor {doc['tensor']}  r={doc['r']}  degree_cap={doc['degree_cap']}"]
    for st in doc["stages"]:
        extra = f" (transported by {st['transported_by']})" if "transported_by" in st else ""
        lines.append(f"  stage {st['grading']}: {st['candidates']} candidates, "
                     f"{st.get('passed', 0)} passed{extra}")
    tr = doc["triples"]
    lines.append(f"  triples: {tr['total']} total, {tr['mod_symmetry']} modulo symmetry, "
                 f"{tr['passed']} passed")
    lines.append(f"  conclusion: {doc['conclusion']}")
    if doc["undecided"]:
        lines.append(f"  undecided branches: {len(doc['undecided'])}")
    lines.append(f"  hash: {doc['hash']}")
    return "\n".join(lines) + "\n"


def cmd_certify(args) -> int:
    problem = parse_tensor(args.tensor)
    if args.rank < 1:
        raise UsageError("--rank must be positive")
    if args.degree_cap not in (2, 3):
        raise UsageError("--degree-cap must be 2 or 3")
    cert = certify(problem, args.rank, args.degree_cap)
    doc = {"schema": SCHEMA_VERSION, **cert.to_json()}
    problems = validate_certificate(doc)
    if problems:
        raise RuntimeError(f"certificate does not conform: {problems}")
    if args.format == "json":
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        text = render_text(doc)
    _emit(text, args.out)
    if cert.undecided:
        base = Path(args.ideals or (args.out + ".ideals" if args.out else "undecided"))
        base.mkdir(parents=True, exist_ok=True)
        for i, u in enumerate(cert.undecided):
            if "ideal" in u:
                (base / f"branch_{i:03d}.txt").write_text(u["ideal"] + "\n")
        log.info("exported %d undecided ideals to %s", len(cert.undecided), base)
    if cert.conclusion == "border_rank_exceeds_r":
        return EXIT_OK
    if cert.conclusion == "undecided_branches":
        return EXIT_UNDECIDED
    return EXIT_SURVIVORS


# ---------------------------------------------------------------------------
# bounds


def _table(family: str, which: str) -> mb.ContributionTable:
    v = 2 if family == "2nn" else 3
    if which == "published":
        return mb.contribution_table(v)
    return mb.engine_table(v)


def cmd_bounds(args) -> int:
    if args.family not in mb.FAMILIES:
        raise UsageError(f"--family must be one of {', '.join(mb.FAMILIES)}")
    ns = parse_range(args.n_range)
    base_m = 2 if args.family == "2nn" else 3
    m = args.m if args.m is not None else base_m
    if m < base_m:
        raise UsageError(f"--m must be at least {base_m}")
    if min(ns) < 2:
        raise UsageError("n must be at least 2")
    workers = args.workers if args.workers is not None else default_workers()
    rows = mb.bound_table(ns, _table(args.family, args.table), workers)
    if m != base_m:
        rows = [mb.TableauBound(b.n, mb.lickteig_shift(b.bound, m, base_m), b.refuted, b.witness)
                for b in rows]
    label = args.family if m == base_m else f"{m}nn"
    _emit(mb.bounds_tsv(rows, label), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# enumerate


def cmd_enumerate(args) -> int:
    problem = parse_tensor(args.tensor)
    if args.rank < 1:
        raise UsageError("--rank must be positive")
    pairs = PAIRS if args.grading == "all" else [p for p in PAIRS if PAIR_NAMES[p] == args.grading]
    if not pairs:
        raise UsageError(f"unknown grading {args.grading!r}")
    out = []
    for pair in pairs:
        space = problem.pair_space(pair)
        flat = problem.pair_flattening(pair)
        d = args.rank - flat.dim
        fams = []
        if 0 <= d <= problem.complement(pair).dim:
            fams = enumerate_borel_fixed(space, d, problem.complement(pair), problem.ops)
        for i, fam in enumerate(fams):
            vecs = []
            for w, v in fam.weight_vectors():
                vecs.append({"weight": list(w),
                             "coords": {str(k): str(c) for k, c in sorted(v.items())}})
            out.append({"grading": PAIR_NAMES[pair], "index": i, "dim": fam.dim,
                        "params": list(fam.free_params),
                        "closure": [str(g) for g in fam.closure_equations],
                        "vectors": vecs})
    doc = {"tensor": args.tensor, "r": args.rank, "families": out}
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# selfcheck


def cmd_selfcheck(args) -> int:
    from . import acceptance

    only = set(parse_range(args.only)) if args.only else None
    results = []
    for k, name, out in acceptance.run_all(only):
        status = "PASS" if out.ok else "FAIL"
        print(f"criterion {k:2d} {status} {out.seconds:8.2f}s  {name}", flush=True)
        results.append({"criterion": k, "name": name, "ok": out.ok,
                        "seconds": round(out.seconds, 3), "detail": out.detail})
    if args.out:
        Path(args.out).write_text(json.dumps(results, indent=2, default=str) + "\n")
    return 0 if all(r["ok"] for r in results) else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="borelcert", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("certify", help="decide border rank > r by the apolarity tests")
    c.add_argument("--tensor", required=True, help="mamu:l,m,n or det3")
    c.add_argument("--rank", "-r", type=int, required=True)
    c.add_argument("--degree-cap", type=int, default=3)
    c.add_argument("--format", choices=("json", "text"), default="json")
    c.add_argument("--out")
    c.add_argument("--ideals", help="directory for exported undecided ideals")
    c.set_defaults(func=cmd_certify)

    b = sub.add_parser("bounds", help="lower-bound table for M<2,n,n> or M<3,n,n>")
    b.add_argument("--family", required=True, help="2nn or 3nn")
    b.add_argument("--n-range", required=True, help="A..B")
    b.add_argument("--m", type=int, help="shift to M<m,n,n> one step at a time")
    b.add_argument("--table", choices=("published", "engine"), default="published",
                   help="contribution table: the published rows or engine-measured maxima")
    b.add_argument("--workers", type=int)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)

    e = sub.add_parser("enumerate", help="dump Borel-fixed candidates as JSON")
    e.add_argument("--tensor", required=True)
    e.add_argument("--rank", "-r", type=int, required=True)
    e.add_argument("--grading", default="110", help="110, 101, 011 or all")
    e.add_argument("--out")
    e.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("selfcheck", help="run the reproduction suite with timings")
    s.add_argument("--only", help="criterion range, e.g. 1..4")
    s.add_argument("--out", help="write the machine-readable report here")
    s.set_defaults(func=cmd_selfcheck)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"borelcert: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
