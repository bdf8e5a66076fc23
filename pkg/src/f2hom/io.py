"""JSON readers and writers for every object the command line handles.

Every document carries ``"v": 1`` at the top level.  Readers raise
``SchemaError`` for structurally wrong documents; the mathematical
constructors raise their own ``ValueError`` subclasses for invalid data.
Writers produce plain dicts; ``dumps`` gives the canonical text form.
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Optional

from .ainfty import AInfAlgebra, DGAlgebra
from .chain import Complex
from .covers import AbelianGroup, Cover, FinPropMatrix, build_cover
from .f2linalg import F2Matrix, bits_of
from .hochschild import AInfBimodule
from .morse import MorseMatching
from .simplicial import LocalSystem, SimplicialComplex
from .twisted import TwistedComplex

VERSION = 1


class SchemaError(ValueError):
    pass


def dumps(doc: Any) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def load_file(path: str) -> dict:
    """Parse a file and check the version field.  ``json.JSONDecodeError`` propagates."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return check_version(doc)


def check_version(doc: Any) -> dict:
    if not isinstance(doc, dict):
        raise SchemaError("top level must be a JSON object")
    if doc.get("v") != VERSION:
        raise SchemaError(f'missing or unsupported schema version (need "v": {VERSION})')
    return doc


def _field(doc: Mapping, name: str, kind=None):
    if name not in doc:
        raise SchemaError(f"missing field {name!r}")
    val = doc[name]
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(f"field {name!r} has the wrong type")
    return val


def _int(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise SchemaError(f"{what} must be an integer")
    return x


def _matrix(rows, what: str) -> F2Matrix:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise SchemaError(f"{what} must be a list of rows")
    width = {len(r) for r in rows}
    if len(width) > 1:
        raise SchemaError(f"{what} has rows of different lengths")
    for r in rows:
        for x in r:
            if x not in (0, 1) or isinstance(x, bool):
                raise SchemaError(f"{what} entries must be 0 or 1")
    return F2Matrix.from_rows(rows, width.pop() if width else 0)


# ---------------------------------------------------------------------------
# simplicial complexes and local systems


def complex_from_json(doc: Mapping) -> SimplicialComplex:
    n = _int(_field(doc, "vertices"), "vertices")
    simp = _field(doc, "simplices", list)
    facets = []
    for s in simp:
        if not isinstance(s, list) or not s:
            raise SchemaError("each simplex must be a non-empty list of vertices")
        facets.append([_int(v, "vertex") for v in s])
    return SimplicialComplex.from_facets(n, facets)


def complex_to_json(k: SimplicialComplex) -> dict:
    maximal = [s for s in k.simplices if not k.cofaces(s)]
    return {"v": VERSION, "vertices": k.n, "simplices": [list(s) for s in sorted(maximal, key=lambda s: (len(s), s))]}


def system_from_json(doc: Mapping, k: SimplicialComplex) -> LocalSystem:
    """``fibre_dims`` maps fibre degree to dimension; ``edges`` carry total-fibre matrices.

    An optional ``differential`` maps fibre degree q to the matrix q → q+1.
    Missing edges are the identity; an edge listed from the larger vertex is inverted.
    """
    dims = _field(doc, "fibre_dims", dict)
    try:
        dims = {int(q): _int(n, "fibre dimension") for q, n in dims.items()}
    except ValueError as exc:
        raise SchemaError("fibre_dims keys must be integer degrees") from exc
    diff = {int(q): _matrix(m, f"fibre differential in degree {q}") for q, m in doc.get("differential", {}).items()}
    fibre = Complex.from_dims(dims, diff, "f")
    mats = {}
    for e in _field(doc, "edges", list):
        if not isinstance(e, dict):
            raise SchemaError("each edge must be an object")
        v, w = _int(_field(e, "from"), "from"), _int(_field(e, "to"), "to")
        m = _matrix(_field(e, "matrix"), f"transport {v}->{w}")
        if v > w:
            v, w = w, v
            if not m.is_invertible():
                raise SchemaError(f"transport {w}->{v} is not invertible")
            m = m.inverse()
        if (v, w) in mats:
            raise SchemaError(f"edge {v}-{w} listed twice")
        mats[(v, w)] = m
    extra = set(mats) - set(k.edges)
    if extra:
        raise SchemaError(f"transports given on non-edges {sorted(extra)}")
    return LocalSystem.from_matrices(k, fibre, mats)


def system_to_json(e: LocalSystem) -> dict:
    """Writes the fibre at vertex 0; every fibre must have the same shape and differential."""
    f = e.fibres[0]
    for g in e.fibres:
        if g.dims() != f.dims() or dict(g.differential) != dict(f.differential):
            raise SchemaError("the JSON form needs the same fibre complex at every vertex")
    doc = {"v": VERSION, "fibre_dims": {str(q): f.dim(q) for q in f.degrees()},
           "edges": [{"from": v, "to": w, "matrix": e.total_transport(v, w).to_lists()} for v, w in e.base.edges]}
    diff = {str(q): m.to_lists() for q, m in sorted(f.differential.items()) if not m.is_zero()}
    if diff:
        doc["differential"] = diff
    return doc


def trivial_system_json(rank: int = 1) -> dict:
    return {"v": VERSION, "fibre_dims": {"0": rank}, "edges": []}


# ---------------------------------------------------------------------------
# covers, finite propagation matrices and matchings


def cover_from_json(doc: Mapping, k: SimplicialComplex) -> Cover:
    rep = _field(doc, "rep", dict)
    return build_cover(k, {str(g): [_int(x, "sheet") for x in p] for g, p in rep.items()})


def group_from_json(desc: Mapping) -> AbelianGroup:
    return AbelianGroup(_int(desc.get("rank", 0), "rank"), tuple(_int(t, "torsion") for t in desc.get("torsion", [])))


def finprop_from_json(doc: Mapping) -> FinPropMatrix:
    g = group_from_json(_field(doc, "group", dict))
    rows, cols = _int(_field(doc, "rows"), "rows"), _int(_field(doc, "cols"), "cols")
    bands = {}
    for b in _field(doc, "bands", list):
        off = tuple(_int(x, "offset") for x in _field(b, "offset", list))
        m = _matrix(_field(b, "matrix"), f"band {off}")
        bands[off] = bands[off] + m if off in bands else m
    return FinPropMatrix(g, rows, cols, bands)


def finprop_to_json(a: FinPropMatrix) -> dict:
    return {"v": VERSION, "group": {"rank": a.group.rank, "torsion": list(a.group.torsion)},
            "rows": a.rows, "cols": a.cols,
            "bands": [{"offset": list(g), "matrix": a.bands[g].to_lists()} for g in sorted(a.bands)]}


def simplex_ids(k: SimplicialComplex) -> list[tuple[int, ...]]:
    """Simplices ordered by dimension, then lexicographically; the position is the simplex id."""
    return [s for p in range(k.dim + 1) for s in k.simplices_of_dim(p)]


def matching_from_json(doc: Mapping, k: SimplicialComplex) -> MorseMatching:
    """``pairs`` lists ``[cell, face]``; a cell is a simplex id or a vertex list."""
    ids = simplex_ids(k)

    def cell(x):
        if isinstance(x, list):
            s = tuple(sorted(_int(v, "vertex") for v in x))
            if s not in k.simplices:
                raise SchemaError(f"{list(s)} is not a simplex")
            return s
        i = _int(x, "simplex id")
        if not 0 <= i < len(ids):
            raise SchemaError(f"simplex id {i} out of range")
        return ids[i]

    pairs = []
    for p in _field(doc, "pairs", list):
        if not isinstance(p, list) or len(p) != 2:
            raise SchemaError("each pair must be [cell, face]")
        pairs.append((cell(p[0]), cell(p[1])))
    return MorseMatching(k, tuple(pairs))


def matching_to_json(m: MorseMatching) -> dict:
    pos = {s: i for i, s in enumerate(simplex_ids(m.base))}
    return {"v": VERSION, "pairs": sorted([pos[c], pos[f]] for c, f in m.pairs)}


# ---------------------------------------------------------------------------
# algebras


def _degrees(doc: Mapping, name: str = "degrees") -> dict[str, int]:
    degs = _field(doc, name, dict)
    return {str(l): _int(g, f"degree of {l}") for l, g in degs.items()}


def _op_entries(ops, labels: Mapping[str, int], outs: Mapping[str, int], what: str):
    """Yield (arity block, input index tuple, output bit) from an ops list."""
    if not isinstance(ops, list):
        raise SchemaError(f"{what} must be a list")
    for block in ops:
        if not isinstance(block, dict):
            raise SchemaError(f"each {what} block must be an object")
        for e in _field(block, "entries", list):
            inp = _field(e, "in", list)
            out = _field(e, "out")
            out = [out] if isinstance(out, str) else out
            try:
                key = tuple(labels[x] for x in inp)
                val = 0
                for o in out:
                    val ^= 1 << outs[o]
            except (KeyError, TypeError) as exc:
                raise SchemaError(f"unknown label {exc} in {what}") from exc
            yield block, key, val


def _unit(doc: Mapping, idx: Mapping[str, int]) -> Optional[int]:
    u = doc.get("unit")
    if u is None:
        return None
    if u not in idx:
        raise SchemaError(f"unit {u!r} is not a basis label")
    return idx[u]


def algebra_from_json(doc: Mapping, arity_cap: int = 6) -> AInfAlgebra:
    """Entries with the same input are summed, so ``out`` may be a label or a list of labels."""
    degs = _degrees(doc)
    labels = list(degs)
    idx = {l: i for i, l in enumerate(labels)}
    table: dict[int, dict] = {}
    for block, key, val in _op_entries(_field(doc, "ops", list), idx, idx, "ops"):
        d = _int(_field(block, "arity"), "arity")
        if d < 1 or len(key) != d:
            raise SchemaError(f"entry {key} does not have arity {d}")
        t = table.setdefault(d, {})
        t[key] = t.get(key, 0) ^ val
    return AInfAlgebra(tuple(labels), tuple(degs[l] for l in labels), table, _unit(doc, idx), arity_cap)


def algebra_to_json(a: AInfAlgebra) -> dict:
    ops = []
    for d in sorted(a.ops):
        entries = []
        for key in sorted(a.ops[d]):
            for o in bits_of(a.ops[d][key]):
                entries.append({"in": [a.labels[k] for k in key], "out": a.labels[o]})
        ops.append({"arity": d, "entries": entries})
    doc = {"v": VERSION, "degrees": dict(zip(a.labels, a.degrees)), "ops": ops}
    if a.unit is not None:
        doc["unit"] = a.labels[a.unit]
    return doc


def dga_from_json(doc: Mapping) -> DGAlgebra:
    """The algebra schema restricted to arity 1 (differential) and arity 2 (product)."""
    degs = _degrees(doc)
    labels = list(degs)
    idx = {l: i for i, l in enumerate(labels)}
    d, prod = {}, {}
    for block in _field(doc, "ops", list):
        ar = _int(_field(block, "arity"), "arity") if isinstance(block, dict) else 0
        if ar not in (1, 2):
            raise SchemaError(f"a DG algebra has operations of arity 1 and 2 only, got {ar}")
    for block, key, val in _op_entries(_field(doc, "ops", list), idx, idx, "ops"):
        ar = block["arity"]
        if len(key) != ar:
            raise SchemaError(f"entry {key} does not have arity {ar}")
        target = d if ar == 1 else prod
        k = key[0] if ar == 1 else key
        target[k] = target.get(k, 0) ^ val
    return DGAlgebra(tuple(labels), tuple(degs[l] for l in labels), d, prod, _unit(doc, idx))


def dga_to_json(a: DGAlgebra) -> dict:
    return algebra_to_json(AInfAlgebra(a.labels, a.degrees, {1: {(i,): v for i, v in a.d.items()},
                                                             2: dict(a.product)}, a.unit, 2, False))


def bimodule_from_json(doc: Mapping, a: Optional[AInfAlgebra] = None) -> AInfBimodule:
    """Algebra fields plus ``bimodule_degrees`` and ``bimodule_ops`` blocks with ``left``/``right`` arities.

    Each entry's ``in`` lists x_r..x_1, the bimodule element, then y_1..y_s.
    """
    a = a or algebra_from_json(doc)
    degs = _degrees(doc, "bimodule_degrees")
    labels = list(degs)
    bidx = {l: i for i, l in enumerate(labels)}
    aidx = {l: i for i, l in enumerate(a.labels)}
    table: dict[tuple[int, int], dict] = {}
    for block in _field(doc, "bimodule_ops", list):
        r, s = _int(_field(block, "left"), "left"), _int(_field(block, "right"), "right")
        for e in _field(block, "entries", list):
            inp = _field(e, "in", list)
            if len(inp) != r + s + 1:
                raise SchemaError(f"entry {inp} does not have {r} left and {s} right inputs")
            out = _field(e, "out")
            out = [out] if isinstance(out, str) else out
            try:
                key = tuple(bidx[x] if i == r else aidx[x] for i, x in enumerate(inp))
                val = 0
                for o in out:
                    val ^= 1 << bidx[o]
            except (KeyError, TypeError) as exc:
                raise SchemaError(f"unknown label {exc} in bimodule_ops") from exc
            t = table.setdefault((r, s), {})
            t[key] = t.get(key, 0) ^ val
    return AInfBimodule(a, tuple(labels), tuple(degs[l] for l in labels), table)


def bimodule_to_json(b: AInfBimodule) -> dict:
    doc = algebra_to_json(b.algebra)
    doc["bimodule_degrees"] = dict(zip(b.labels, b.degrees))
    blocks = []
    for (r, s) in sorted(b.ops):
        entries = []
        for key in sorted(b.ops[(r, s)]):
            names = [b.labels[x] if i == r else b.algebra.labels[x] for i, x in enumerate(key)]
            for o in bits_of(b.ops[(r, s)][key]):
                entries.append({"in": names, "out": b.labels[o]})
        blocks.append({"left": r, "right": s, "entries": entries})
    doc["bimodule_ops"] = blocks
    return doc


# ---------------------------------------------------------------------------
# twisted complexes


def twisted_from_json(doc: Mapping, s: Optional[AInfAlgebra] = None) -> TwistedComplex:
    """``summands`` lists V_0..V_D with ``shift`` equal to the position; entries are
    ``{"row": p, "col": q, "coeff": [S labels]}`` for the map V_from[q] → V_to[p]."""
    if s is None:
        s = algebra_from_json(_field(doc, "algebra", dict))
    dims = []
    for i, sm in enumerate(_field(doc, "summands", list)):
        if _int(_field(sm, "shift"), "shift") != i:
            raise SchemaError(f"summand {i} must have shift {i}")
        dims.append(_int(_field(sm, "dim"), "dim"))
    deltas: dict[tuple[int, int], dict] = {}
    for blk in _field(doc, "deltas", list):
        i, j = _int(_field(blk, "from"), "from"), _int(_field(blk, "to"), "to")
        b = deltas.setdefault((i, j), {})
        for e in _field(blk, "entries", list):
            p, q = _int(_field(e, "row"), "row"), _int(_field(e, "col"), "col")
            coeff = _field(e, "coeff")
            coeff = [coeff] if isinstance(coeff, str) else coeff
            v = 0
            for c in coeff:
                if c not in s.labels:
                    raise SchemaError(f"unknown S label {c!r}")
                v ^= 1 << s.index(c)
            b[(p, q)] = b.get((p, q), 0) ^ v
    return TwistedComplex(s, tuple(dims), deltas)


def twisted_to_json(t: TwistedComplex) -> dict:
    s = t.algebra
    blocks = []
    for (i, j) in sorted(t.deltas):
        entries = [{"row": p, "col": q, "coeff": [s.labels[c] for c in bits_of(v)]}
                   for (p, q), v in sorted(t.deltas[(i, j)].items())]
        blocks.append({"from": i, "to": j, "entries": entries})
    return {"v": VERSION, "algebra": algebra_to_json(s),
            "summands": [{"dim": n, "shift": i} for i, n in enumerate(t.dims)], "deltas": blocks}
