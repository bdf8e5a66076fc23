"""Discrete Morse theory with local coefficients.

A matching pairs a simplex with one of its codimension-one faces.  In the
twisted cochain complex the component of the differential from a face's
block to its partner's block is a transport, hence invertible, so the
matching is a Morse matching in the algebraic sense and the complex
reduces to one generated by the critical cells.  The reduced differential
sums, over alternating gradient paths, the composites of transports (and
inverse transports along matched pairs).
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .chain import Complex, cohomology_dims
from .f2linalg import F2Matrix
from .simplicial import LocalSystem, Simplex, SimplicialComplex, simplex_label, twisted_cochain_complex


class MatchingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MorseMatching:
    """``pairs`` holds ``(cell, face)`` with face a codimension-one face of cell."""

    base: SimplicialComplex
    pairs: tuple[tuple[Simplex, Simplex], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((tuple(c), tuple(f)) for c, f in self.pairs))
        partner = {}
        for c, f in self.pairs:
            partner.setdefault(c, []).append(f)
            partner.setdefault(f, []).append(c)
        object.__setattr__(self, "_partner", partner)

    def partner(self, s: Simplex) -> Optional[Simplex]:
        p = self._partner.get(s)
        return p[0] if p else None

    def is_upper(self, s: Simplex) -> bool:
        p = self.partner(s)
        return p is not None and len(p) < len(s)

    def is_lower(self, s: Simplex) -> bool:
        p = self.partner(s)
        return p is not None and len(p) > len(s)

    def critical(self) -> list[Simplex]:
        return sorted((s for s in self.base.simplices if s not in self._partner), key=lambda s: (len(s), s))

    def critical_counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for s in self.critical():
            out[len(s) - 1] = out.get(len(s) - 1, 0) + 1
        return out


@dataclass(frozen=True)
class MatchingReport:
    ok: bool
    errors: tuple[str, ...]
    critical_counts: dict
    cycle: tuple = ()


def gradient_digraph(m: MorseMatching) -> nx.DiGraph:
    """Cells as nodes; face→coface edges, reversed for matched pairs."""
    g = nx.DiGraph()
    g.add_nodes_from(m.base.simplices)
    matched = set(m.pairs)
    for s in m.base.simplices:
        for f in SimplicialComplex.faces(s):
            if (s, f) in matched:
                g.add_edge(s, f)
            else:
                g.add_edge(f, s)
    return g


def validate_matching(m: MorseMatching) -> MatchingReport:
    errors = []
    simp = m.base.simplices
    for c, f in m.pairs:
        if c not in simp or f not in simp:
            errors.append(f"pair {c}/{f} uses a cell not in the complex")
        elif len(f) != len(c) - 1 or not set(f) <= set(c):
            errors.append(f"{f} is not a codimension-one face of {c}")
    for s, ps in m._partner.items():
        if len(ps) > 1:
            errors.append(f"cell {s} is matched more than once")
    if errors:
        return MatchingReport(False, tuple(errors), m.critical_counts())
    try:
        cyc = nx.find_cycle(gradient_digraph(m))
    except nx.NetworkXNoCycle:
        return MatchingReport(True, (), m.critical_counts())
    witness = tuple(u for u, _ in cyc) + (cyc[0][0],)
    return MatchingReport(False, (f"gradient cycle {' -> '.join(map(str, witness))}",), m.critical_counts(), witness)


def _checked(m: MorseMatching) -> None:
    rep = validate_matching(m)
    if not rep.ok:
        raise MatchingError("; ".join(rep.errors))


def tree_cotree_matching(k: SimplicialComplex) -> MorseMatching:
    """Spanning-tree matching on vertices/edges plus a dual spanning forest on edges/triangles.

    For a closed connected surface this leaves one critical vertex and one
    critical triangle.  Only cells of dimension ≤ 2 are matched.
    """
    pairs = []
    seen = set()
    tree = set()
    nb = k.neighbours()
    for comp in k.components():
        root = comp[0]
        seen.add(root)
        # BFS keeps the result deterministic
        queue = [root]
        while queue:
            x = queue.pop(0)
            for y in nb[x]:
                if y not in seen:
                    seen.add(y)
                    e = (min(x, y), max(x, y))
                    tree.add(e)
                    pairs.append((e, (y,)))
                    queue.append(y)
    tri_of_edge: dict[Simplex, list[Simplex]] = {e: [] for e in k.edges}
    for t in k.triangles:
        for e in SimplicialComplex.faces(t):
            tri_of_edge[e].append(t)
    used_edges = set(tree)
    matched_tris = set()
    queue = []
    # triangles on a free non-tree edge can be collapsed from the outside
    for e in k.edges:
        if e not in used_edges and len(tri_of_edge[e]) == 1:
            t = tri_of_edge[e][0]
            if t not in matched_tris:
                matched_tris.add(t)
                used_edges.add(e)
                pairs.append((t, e))
                queue.append(t)
    remaining = sorted(k.triangles)
    while True:
        while queue:
            t = queue.pop(0)
            for e in SimplicialComplex.faces(t):
                if e in used_edges:
                    continue
                for t2 in tri_of_edge[e]:
                    if t2 not in matched_tris:
                        matched_tris.add(t2)
                        used_edges.add(e)
                        pairs.append((t2, e))
                        queue.append(t2)
                        break
        rest = [t for t in remaining if t not in matched_tris]
        if not rest:
            break
        # a new dual component: its root stays critical
        root = rest[0]
        matched_tris.add(root)
        queue.append(root)
    m = MorseMatching(k, tuple(pairs))
    _checked(m)
    return m


def greedy_matching(k: SimplicialComplex, rng: Optional[random.Random] = None) -> MorseMatching:
    """Random maximal acyclic matching built by adding pairs that keep the gradient acyclic."""
    rng = rng or random.Random(0)
    cand = [(s, f) for s in k.simplices for f in SimplicialComplex.faces(s)]
    cand.sort()
    rng.shuffle(cand)
    g = nx.DiGraph()
    g.add_nodes_from(k.simplices)
    for s, f in cand:
        g.add_edge(f, s)
    used = set()
    pairs = []
    for s, f in cand:
        if s in used or f in used:
            continue
        # the reversed edge s→f closes a cycle iff f still reaches s without it
        g.remove_edge(f, s)
        if nx.has_path(g, f, s):
            g.add_edge(f, s)
            continue
        g.add_edge(s, f)
        used.update((s, f))
        pairs.append((s, f))
    m = MorseMatching(k, tuple(pairs))
    _checked(m)
    return m


# ---------------------------------------------------------------------------
# Morse complex


@dataclass(frozen=True, eq=False)
class MorseTwistedComplex:
    matching: MorseMatching
    complex: Complex
    blocks: dict = field(default_factory=dict)


def morse_complex(m: MorseMatching, e: LocalSystem) -> MorseTwistedComplex:
    """Complex on critical cells with fibre at the anchor; gradient-path transport differential."""
    _checked(m)
    k = m.base
    if e.base != k:
        raise MatchingError("local system is on a different complex")
    order = {s: i for i, s in enumerate(nx.lexicographical_topological_sort(gradient_digraph(m), key=lambda s: (len(s), s)))}
    crit = m.critical()
    fdegs = e.fibre_degrees()
    basis: dict[int, list[str]] = {}
    where: dict[tuple[Simplex, int], int] = {}
    blocks: dict[int, list[tuple[Simplex, int, int]]] = {}
    for s in crit:
        fib = e.fibres[s[0]]
        for q in fdegs:
            if not fib.dim(q):
                continue
            n = len(s) - 1 + q
            labels = basis.setdefault(n, [])
            where[(s, q)] = len(labels)
            blocks.setdefault(n, []).append((s, q, len(labels)))
            labels.extend(f"{simplex_label(s)}:{l}" for l in fib.space.labels(q))

    def tmat(v, w, q):
        return e.transport_matrix(v, w, q)

    cache: dict[tuple[int, int, int], list[int]] = {}

    def tcols(v, w, q):
        key = (v, w, q)
        if key not in cache:
            cache[key] = tmat(v, w, q).columns()
        return cache[key]

    def apply(cols, x):
        out = 0
        while x:
            low = x & -x
            out ^= cols[low.bit_length() - 1]
            x ^= low
        return out

    diff = {}
    for n, blist in blocks.items():
        if n + 1 not in basis:
            continue
        images = []
        for s, q, off in blist:
            v = s[0]
            fib = e.fibres[v]
            size = fib.dim(q)
            internal = fib.d(q).columns() if fib.dim(q + 1) else [0] * size
            for j in range(size):
                img = 0
                if internal[j]:
                    img ^= internal[j] << where[(s, q + 1)]
                pending: dict[Simplex, int] = {}
                heap: list[tuple[int, Simplex]] = []

                def push(t, val):
                    if not val:
                        return
                    if t in pending:
                        pending[t] ^= val
                    else:
                        pending[t] = val
                        heapq.heappush(heap, (order[t], t))

                x = 1 << j
                for t in k.cofaces(s):
                    push(t, apply(tcols(v, t[0], q), x))
                while heap:
                    _, t = heapq.heappop(heap)
                    val = pending.pop(t)
                    if not val:
                        continue
                    if m.is_upper(t):
                        low = m.partner(t)
                        y = apply(tcols(t[0], low[0], q), val)
                        for t2 in k.cofaces(low):
                            if t2 != t:
                                push(t2, apply(tcols(low[0], t2[0], q), y))
                    elif not m.is_lower(t):
                        img ^= val << where[(t, q)]
                    # lower-matched cells are dead ends
                images.append(img)
        diff[n] = F2Matrix.from_columns(len(basis[n + 1]), images)
    return MorseTwistedComplex(m, Complex.build(basis, diff), blocks)


@dataclass(frozen=True)
class ComparisonReport:
    ok: bool
    morse_dims: dict
    simplicial_dims: dict
    message: str
    dump: str = ""


def compare_with_simplicial(m: MorseMatching, e: LocalSystem) -> ComparisonReport:
    mc = morse_complex(m, e).complex
    sc = twisted_cochain_complex(m.base, e)
    hm, hs = cohomology_dims(mc), cohomology_dims(sc)
    if hm == hs:
        return ComparisonReport(True, hm, hs, "ok")
    bad = min(d for d in set(hm) | set(hs) if hm.get(d, 0) != hs.get(d, 0))
    dump = f"morse: {mc.dims()} {dict(mc.differential)}\nsimplicial: {sc.dims()}"
    return ComparisonReport(False, hm, hs, f"cohomology differs in degree {bad}", dump)


def morse_inequalities(m: MorseMatching, e: LocalSystem) -> list[str]:
    """Check dim of the Morse complex in degree n ≥ dim H^n(twisted) for every n."""
    mc = morse_complex(m, e).complex
    hs = cohomology_dims(twisted_cochain_complex(m.base, e))
    return [f"degree {n}: {mc.dim(n)} < {h}" for n, h in hs.items() if mc.dim(n) < h]
