"""Batch command line: twisted cohomology, minimal models and randomized lemma suites.

Exit codes: 0 success, 1 a mathematical check failed, 2 bad input.
Randomized suites use Python's ``random.Random`` (Mersenne Twister MT19937);
each instance gets its own 32-bit seed drawn from the master seed, and both
are printed so a single instance can be replayed.
"""

from __future__ import annotations

import argparse
import functools
import json
import random
import sys
from typing import Callable, Optional

from . import io, spaces
from .ainfty import (
    AInfError,
    check_ainf_relations,
    filtration_check,
    group_algebra_cyclic,
    minimal_model,
    quasi_isomorphism_check,
    truncated_polynomial,
)
from .chain import cohomology
from .covers import (
    AbelianGroup,
    FinPropMatrix,
    adjunction_check,
    build_cover,
    finprop_from_group_algebra,
    laurent,
)
from .hochschild import cc_complex
from .morse import compare_with_simplicial, greedy_matching, morse_inequalities, tree_cotree_matching, validate_matching
from .random_instances import (
    coconnective_algebras,
    misgrade_module,
    random_complex,
    random_connective_algebra,
    random_connective_module,
    random_local_system,
    random_matrix,
    random_nilpotent_algebra,
    random_perm_rep,
    random_twisted_complex,
)
from .simplicial import edge_path_group, twisted_cochains
from .twisted import TwistedError, coconnective_witness

PRNG = "random.Random (Mersenne Twister MT19937)"
SUITES = ("filtration", "coconnective", "adjunction", "morse", "hochschild-stab", "finprop")
SUITE_SPACES = ("circle", "triangle", "sphere", "rp2", "torus")


class InputError(Exception):
    pass


def _load(path: Optional[str], what: str) -> dict:
    if path is None:
        raise InputError(f"--{what} is required")
    try:
        return io.load_file(path)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno} (offset {exc.pos}): {exc.msg}")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}")
    except io.SchemaError as exc:
        raise InputError(f"{path}: {exc}")


# ---------------------------------------------------------------------------
# cohomology


def cmd_cohomology(args) -> tuple[int, dict, str]:
    doc = _load(args.input, "input")
    try:
        k = io.complex_from_json(doc)
        sysdoc = _load(args.system, "system") if args.system else io.trivial_system_json()
        e = io.system_from_json(sysdoc, k)
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(str(exc))
    tc = twisted_cochains(k, e)
    h = cohomology(tc.complex)
    degrees = tc.complex.degrees()
    dims = {n: h.dims.get(n, 0) for n in degrees}
    reps = {}
    for n in degrees:
        labels = tc.complex.space.labels(n)
        reps[str(n)] = [[labels[i] for i in r.support()] for r in h.reps(n)]
    report = {"command": "cohomology", "dims": {str(n): d for n, d in dims.items()}, "representatives": reps}
    lines = [", ".join(f"H^{n}: {d}" for n, d in dims.items())]
    for n in degrees:
        for r in reps[str(n)]:
            lines.append(f"  H^{n} representative supported on {' + '.join(r)}")
    return 0, report, "\n".join(lines)


# ---------------------------------------------------------------------------
# minimal model


def cmd_minimal_model(args) -> tuple[int, dict, str]:
    doc = _load(args.input, "input")
    cap = args.cap if args.cap is not None else 6
    if cap < 2:
        raise InputError("--cap must be at least 2")
    try:
        dga = io.dga_from_json(doc)
    except ValueError as exc:
        raise InputError(str(exc))
    mm = minimal_model(dga, cap)
    rel = check_ainf_relations(mm.algebra, cap)
    qi = quasi_isomorphism_check(mm)
    a = mm.algebra
    report = {
        "command": "minimal-model",
        "algebra": io.algebra_to_json(a),
        "arity_cap": cap,
        "relations": {"ok": rel.ok, "summary": rel.summary(),
                      "violations": [[d, list(i), list(o)] for d, i, o in rel.violations[:20]]},
        "quasi_isomorphism": qi,
        "higher_arities": sorted(d for d in a.ops if d >= 3),
    }
    lines = [f"source dimension {dga.dim}, cohomology dimension {a.dim}",
             "degrees: " + ", ".join(f"{l}:{g}" for l, g in zip(a.labels, a.degrees))]
    for d, inp, out in a.entries():
        lines.append(f"  μ^{d}({', '.join(inp)}) = {' + '.join(out)}")
    if not a.ops:
        lines.append("  all operations vanish")
    lines.append(rel.summary())
    lines.append("H(f^1) is an isomorphism" if qi else "H(f^1) is NOT an isomorphism")
    return (0 if rel.ok and qi else 1), report, "\n".join(lines)


# ---------------------------------------------------------------------------
# lemma suites; each instance returns (ok, detail)


def _suite_filtration(rng: random.Random, cap: int):
    a = random_connective_algebra(rng)
    p = random_connective_module(rng, a)
    r = filtration_check(p)
    detail = {"algebra_dim": a.dim, "module_dim": p.dim, "closed": r.ok}
    ok = r.ok
    q = misgrade_module(rng, p)
    if q is not None:
        flagged = not filtration_check(q).ok
        detail["mutant_flagged"] = flagged
        ok = ok and flagged
    return ok, detail


@functools.lru_cache(maxsize=1)
def _coconnective_catalogue():
    return coconnective_algebras()


def _suite_coconnective(rng: random.Random, cap: int):
    algs = _coconnective_catalogue()
    name = rng.choice(sorted(algs))
    D = rng.choice([1, 2, 3])
    t = random_twisted_complex(rng, algs[name], D)
    w = coconnective_witness(t)
    detail = {"algebra": name, "length": D, "dims": list(t.dims), "delta_terms": len(t.delta_terms()),
              "witness_degree": w.degree, "nonzero": w.nonzero_in_cohomology}
    return w.degree == -D and w.nonzero_in_cohomology, detail


def _suite_adjunction(rng: random.Random, cap: int):
    name = rng.choice(SUITE_SPACES)
    k = spaces.standard_spaces()[name]
    pres = edge_path_group(k)
    deg = rng.randint(1, 4)
    c = build_cover(k, random_perm_rep(rng, pres, deg), pres)
    fibre = random_complex(rng, 0, 1, 2) if rng.random() < 0.3 else None
    e = random_local_system(rng, c.total, rng.randint(1, 3), fibre)
    r = adjunction_check(c, e)
    return r.ok, {"space": name, "degree": deg, "base_dims": _sdict(r.base_dims),
                  "total_dims": _sdict(r.total_dims), "message": r.message}


def _suite_morse(rng: random.Random, cap: int):
    name = rng.choice(SUITE_SPACES)
    k = spaces.standard_spaces()[name]
    greedy = rng.random() < 0.5
    m = greedy_matching(k, rng) if greedy else tree_cotree_matching(k)
    fibre = random_complex(rng, 0, 1, 2) if rng.random() < 0.3 else None
    e = random_local_system(rng, k, rng.randint(1, 3), fibre)
    valid = validate_matching(m).ok
    r = compare_with_simplicial(m, e)
    ineq = morse_inequalities(m, e)
    detail = {"space": name, "matching": "greedy" if greedy else "tree-cotree",
              "critical": _sdict(m.critical_counts()), "dims": _sdict(r.simplicial_dims),
              "morse_dims": _sdict(r.morse_dims), "inequality_failures": ineq}
    return valid and r.ok and not ineq, detail


def _suite_hochschild(rng: random.Random, cap: int):
    kind = rng.choice(["poly", "group", "nilpotent"])
    if kind == "poly":
        a = truncated_polynomial(rng.randint(2, 3), rng.choice([-1, -2]))
    elif kind == "group":
        a = group_algebra_cyclic(rng.choice([2, 3]))
    else:
        a = random_nilpotent_algebra(rng)
    lo, hi = cc_complex(a, cap=cap), cc_complex(a, cap=cap + 1)
    dl, dh = lo.cohomology_dims(), hi.cohomology_dims()
    checked, bad = [], []
    for g in sorted(set(dl) | set(dh)):
        if lo.is_exact_degree(g):
            checked.append(-g)
            if dl.get(g, 0) != dh.get(g, 0):
                bad.append(-g)
    detail = {"algebra": kind, "dim": a.dim, "cap": cap,
              "dims": {str(-g): dl[g] for g in sorted(dl, reverse=True) if -g in checked},
              "checked_degrees": checked, "unstable": bad}
    return bool(checked) and not bad, detail


def _suite_finprop(rng: random.Random, cap: int):
    groups = [AbelianGroup(1), AbelianGroup(2), AbelianGroup(1, (2,)), AbelianGroup(0, (3,))]
    g = rng.choice(groups)
    r, s, t, u = (rng.randint(1, 3) for _ in range(4))

    def rand(rows, cols):
        bands = {}
        for _ in range(rng.randint(0, 3)):
            off = tuple(rng.randint(-2, 2) for _ in range(g.rank)) + tuple(rng.randrange(m) for m in g.torsion)
            bands[off] = random_matrix(rng, rows, cols)
        return FinPropMatrix(g, rows, cols, bands)

    a, b, c = rand(r, s), rand(s, t), rand(t, u)
    assoc = (a @ b) @ c == a @ (b @ c)
    unital = FinPropMatrix.identity(g, r) @ a == a == a @ FinPropMatrix.identity(g, s)
    ab = a @ b
    sums = {g.add(x, y) for x in a.bands for y in b.bands}
    support_ok = set(ab.bands) <= sums and ab.propagation() <= a.propagation() + b.propagation()
    p = [rng.randint(-4, 4) for _ in range(rng.randint(0, 4))]
    q = [rng.randint(-4, 4) for _ in range(rng.randint(0, 4))]
    conv: dict[int, int] = {}
    for x in p:
        for y in q:
            conv[x + y] = conv.get(x + y, 0) ^ 1
    lp = finprop_from_group_algebra(laurent(p)) @ finprop_from_group_algebra(laurent(q))
    laurent_ok = sorted(x[0] for x in lp.bands) == sorted(e for e, v in conv.items() if v)
    detail = {"group": {"rank": g.rank, "torsion": list(g.torsion)}, "shapes": [r, s, t, u],
              "associative": assoc, "unital": unital, "support": support_ok, "laurent": laurent_ok}
    return assoc and unital and support_ok and laurent_ok, detail


SUITE_FUNCS: dict[str, Callable] = {
    "filtration": _suite_filtration,
    "coconnective": _suite_coconnective,
    "adjunction": _suite_adjunction,
    "morse": _suite_morse,
    "hochschild-stab": _suite_hochschild,
    "finprop": _suite_finprop,
}


def _sdict(d) -> dict:
    return {str(k): v for k, v in sorted(d.items())}


def run_suite(name: str, seed: int, count: int, cap: int = 5) -> dict:
    master = random.Random(seed)
    fn = SUITE_FUNCS[name]
    instances = []
    for i in range(count):
        s = master.getrandbits(32)
        try:
            ok, detail = fn(random.Random(s), cap)
        except (ValueError, AInfError, TwistedError) as exc:
            ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
        instances.append({"index": i, "seed": s, "ok": bool(ok), "detail": detail})
    passed = sum(x["ok"] for x in instances)
    return {"command": "lemma-suite", "suite": name, "seed": seed, "prng": PRNG, "count": count,
            "passed": passed, "ok": passed == count, "instances": instances}


def cmd_lemma_suite(args) -> tuple[int, dict, str]:
    if args.count < 0:
        raise InputError("--count must be non-negative")
    cap = args.cap if args.cap is not None else 5
    if cap < 2:
        raise InputError("--cap must be at least 2")
    report = run_suite(args.suite, args.seed, args.count, cap)
    lines = [f"suite {args.suite}, seed {args.seed}, PRNG {PRNG}"]
    for x in report["instances"]:
        lines.append(f"  [{'pass' if x['ok'] else 'FAIL'}] instance {x['index']} (seed {x['seed']}): "
                     + json.dumps(x["detail"], sort_keys=True, ensure_ascii=False))
    lines.append(f"{report['passed']}/{report['count']} passed")
    return (0 if report["ok"] else 1), report, "\n".join(lines)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="f2hom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="print a single JSON document")
        p.add_argument("--out", help="also write the JSON document to this file")

    p = sub.add_parser("cohomology", help="cohomology of a simplicial complex with local coefficients")
    p.add_argument("--input", help="complex JSON")
    p.add_argument("--system", help="local system JSON (default: trivial F2)")
    common(p)
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("minimal-model", help="minimal A∞ model of a DG algebra")
    p.add_argument("--input", help="DG algebra JSON (operations of arity 1 and 2)")
    p.add_argument("--cap", type=int, help="arity cap (default 6)")
    common(p)
    p.set_defaults(func=cmd_minimal_model)

    p = sub.add_parser("lemma-suite", help="run a randomized property suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--cap", type=int, help="length cap for hochschild-stab (default 5)")
    common(p)
    p.set_defaults(func=cmd_lemma_suite)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, report, text = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc = io.dumps(report)
    if args.out:
        payload = io.dumps(report["algebra"]) if args.command == "minimal-model" else doc
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    sys.stdout.write(doc if args.json else text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
