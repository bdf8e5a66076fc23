"""Finite covers, pullback and pushforward of local systems, and the
finite-propagation algebra used for infinite abelian covers.

Total-space vertex ``v * deg + i`` is sheet ``i`` over base vertex ``v``.
This numbering preserves the base vertex order, so a lifted simplex is
already increasing and its anchor lies over the anchor of its image.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Mapping, Optional, Sequence

from .chain import ChainMap, cohomology_dims, direct_sum
from .f2linalg import F2Matrix, bits_of
from .simplicial import (
    LocalSystem,
    Pairing,
    Presentation,
    Simplex,
    SimplicialComplex,
    TwistedCochains,
    edge_path_group,
    simplex_label,
    system_from_representation,
    twisted_cochains,
)


class CoverError(ValueError):
    pass


def compose_perm(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """p∘q: first q, then p."""
    return tuple(p[i] for i in q)


def invert_perm(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


@dataclass(frozen=True, eq=False)
class Cover:
    base: SimplicialComplex
    total: SimplicialComplex
    degree: int
    edge_perms: Mapping[tuple[int, int], tuple[int, ...]]
    presentation: Optional[Presentation] = None
    rep: Optional[Mapping[str, tuple[int, ...]]] = None

    def lift_vertex(self, v: int, sheet: int) -> int:
        return v * self.degree + sheet

    def project(self, x: int) -> int:
        return x // self.degree

    def sheet(self, x: int) -> int:
        return x % self.degree

    def edge_perm(self, v: int, w: int) -> tuple[int, ...]:
        """Sheet permutation along the oriented edge v→w."""
        if v == w:
            return tuple(range(self.degree))
        if v < w:
            return self.edge_perms[(v, w)]
        return invert_perm(self.edge_perms[(w, v)])

    def lift(self, s: Simplex, sheet: int) -> Simplex:
        """The lift of ``s`` whose anchor sits on ``sheet``."""
        v0 = s[0]
        return tuple(self.lift_vertex(v, self.edge_perm(v0, v)[sheet]) for v in s)

    def is_connected(self) -> bool:
        return self.total.is_connected()

    def deck_transformations(self) -> list[tuple[int, ...]]:
        """Deck transformations as permutations of total-space vertices."""
        if not self.base.is_connected():
            raise CoverError("deck group computed only for connected bases")
        n, b = self.degree, 0
        # sheet-identification paths from the basepoint
        path: dict[int, tuple[int, ...]] = {b: tuple(range(n))}
        queue = deque([b])
        nb = self.base.neighbours()
        while queue:
            x = queue.popleft()
            for y in nb[x]:
                if y not in path:
                    path[y] = compose_perm(self.edge_perm(x, y), path[x])
                    queue.append(y)
        out = []
        for sigma in permutations(range(n)):
            # σ_v = P_v σ P_v⁻¹ must commute with every edge permutation
            local = {v: compose_perm(compose_perm(path[v], sigma), invert_perm(path[v])) for v in path}
            ok = all(compose_perm(self.edge_perms[(v, w)], local[v]) == compose_perm(local[w], self.edge_perms[(v, w)])
                     for v, w in self.base.edges)
            if ok:
                out.append(tuple(self.lift_vertex(x // n, local[x // n][x % n]) for x in range(self.total.n)))
        return out


def build_cover(k: SimplicialComplex, rep: Mapping[str, Sequence[int]], presentation: Optional[Presentation] = None,
                basepoint: int = 0) -> Cover:
    """Cover associated to a permutation action of the edge-path group.

    ``rep[g][i]`` is the image of sheet ``i`` under generator ``g``.
    """
    p = presentation or edge_path_group(k, basepoint)
    if set(rep) != set(p.generators):
        raise CoverError(f"need a permutation for exactly the generators {list(p.generators)}")
    sizes = {len(v) for v in rep.values()}
    if len(sizes) > 1:
        raise CoverError("permutations act on sets of different sizes")
    n = sizes.pop() if sizes else 1
    perms = {}
    for g, v in rep.items():
        v = tuple(int(x) for x in v)
        if sorted(v) != list(range(n)):
            raise CoverError(f"image of {g} is not a permutation of 0..{n - 1}")
        perms[g] = v
    for r in p.relators:
        if p.evaluate_permutation(r, perms, n) != tuple(range(n)):
            raise CoverError(f"permutation action violates relator {r}")
    edge_perms = {e: p.evaluate_permutation(w, perms, n) for e, w in p.edge_words.items()}
    return cover_from_edge_permutations(k, edge_perms, n, presentation=p, rep=perms)


def cover_from_edge_permutations(k: SimplicialComplex, edge_perms: Mapping[tuple[int, int], Sequence[int]], n: int,
                                 presentation: Optional[Presentation] = None,
                                 rep: Optional[Mapping[str, tuple[int, ...]]] = None) -> Cover:
    ep = {e: tuple(edge_perms.get(e, range(n))) for e in k.edges}
    for a, b, c in k.triangles:
        if compose_perm(ep[(b, c)], ep[(a, b)]) != ep[(a, c)]:
            raise CoverError(f"edge permutations not flat over {(a, b, c)}")
    simp = set()
    stub = Cover(k, SimplicialComplex.from_facets(0, []), n, ep)
    for s in k.simplices:
        for i in range(n):
            simp.add(stub.lift(s, i))
    total = SimplicialComplex(k.n * n, frozenset(simp))
    return Cover(k, total, n, ep, presentation, rep)


def identity_cover(k: SimplicialComplex) -> Cover:
    return cover_from_edge_permutations(k, {}, 1)


# ---------------------------------------------------------------------------
# pullback / pushforward


def pullback(c: Cover, e: LocalSystem) -> LocalSystem:
    if e.base != c.base:
        raise CoverError("system is not on the base of the cover")
    fibres = tuple(e.fibres[c.project(x)] for x in range(c.total.n))
    tr = {}
    for x, y in c.total.edges:
        t = e.transport(c.project(x), c.project(y))
        tr[(x, y)] = ChainMap(fibres[x], fibres[y], t.maps)
    return LocalSystem(c.total, fibres, tr)


def pushforward(c: Cover, e: LocalSystem) -> LocalSystem:
    """Fibre over v is the sum over sheets of the fibres at the lifts of v."""
    if e.base != c.total:
        raise CoverError("system is not on the total space of the cover")
    n = c.degree
    fibres = []
    for v in range(c.base.n):
        parts = [e.fibres[c.lift_vertex(v, i)] for i in range(n)]
        fibres.append(direct_sum(parts, [f"{i}:" for i in range(n)]))
    tr = {}
    for v, w in c.base.edges:
        pi = c.edge_perm(v, w)
        src, tgt = fibres[v], fibres[w]
        maps = {}
        for q in src.degrees():
            src_off, off = [], 0
            for i in range(n):
                src_off.append(off)
                off += e.fibres[c.lift_vertex(v, i)].dim(q)
            tgt_off, off = [], 0
            for i in range(n):
                tgt_off.append(off)
                off += e.fibres[c.lift_vertex(w, i)].dim(q)
            cols = [0] * src.dim(q)
            for i in range(n):
                x, y = c.lift_vertex(v, i), c.lift_vertex(w, pi[i])
                block = e.transport_matrix(x, y, q).columns()
                for j, col in enumerate(block):
                    cols[src_off[i] + j] = col << tgt_off[pi[i]]
            maps[q] = F2Matrix.from_columns(tgt.dim(q), cols)
        tr[(v, w)] = ChainMap(src, tgt, maps)
    return LocalSystem(c.base, tuple(fibres), tr)


def _pushforward_total_index(c: Cover, e: LocalSystem, pf: LocalSystem, v: int) -> dict[tuple[int, int], int]:
    """Map (sheet, total index in fibre at the lift) → total index in the pushforward fibre at v."""
    out = {}
    pf_off = pf.total_offsets(v)
    for q in pf.fibre_degrees():
        base_off = pf_off[q]
        for i in range(c.degree):
            x = c.lift_vertex(v, i)
            fx = e.fibres[x]
            xo = e.total_offsets(x).get(q)
            for j in range(fx.dim(q)):
                out[(i, xo + j)] = base_off + j
            base_off += fx.dim(q)
    return out


def pushforward_pairing(c: Cover, pairing: Pairing) -> Pairing:
    """Sheetwise pairing on pushforwards: sections over each lift multiply pointwise."""
    p12, p01, p02 = (pushforward(c, s) for s in (pairing.e12, pairing.e01, pairing.e02))
    tables = []
    for v in range(c.base.n):
        i12 = _pushforward_total_index(c, pairing.e12, p12, v)
        i01 = _pushforward_total_index(c, pairing.e01, p01, v)
        i02 = _pushforward_total_index(c, pairing.e02, p02, v)
        table = {}
        for i in range(c.degree):
            x = c.lift_vertex(v, i)
            for (a, b), val in pairing.tables[x].items():
                out = 0
                for t in bits_of(val):
                    out |= 1 << i02[(i, t)]
                table[(i12[(i, a)], i01[(i, b)])] = out
        tables.append(table)
    return Pairing(p12, p01, p02, tuple(tables))


@dataclass(frozen=True)
class AdjunctionReport:
    base_dims: dict[int, int]
    total_dims: dict[int, int]
    ok: bool
    mismatch_degree: Optional[int]
    message: str
    # degree → permutation: base basis index → total basis index
    isomorphism: Mapping[int, tuple[int, ...]] = field(default_factory=dict)


def adjunction_isomorphism(c: Cover, e: LocalSystem, tc_base: TwistedCochains,
                           tc_total: TwistedCochains) -> dict[int, tuple[int, ...]]:
    """Label bijection between cochains of the pushforward and cochains upstairs.

    The base cochain on σ with value in sheet i's summand corresponds to the
    cochain on the lift of σ anchored on sheet i.
    """
    iso = {}
    bc, tcx = tc_base.complex, tc_total.complex
    for n in bc.degrees():
        labels = bc.space.labels(n)
        perm = []
        for lab in labels:
            simp, rest = lab.split(":", 1)
            sheet, fl = rest.split(":", 1)
            s = tuple(int(x) for x in simp[1:].split("-"))
            lifted = c.lift(s, int(sheet))
            perm.append(tcx.space.index(n, simplex_label(lifted) + ":" + fl))
        iso[n] = tuple(perm)
    return iso


def transport_vector(perm: Sequence[int], v: int) -> int:
    out = 0
    for i in bits_of(v):
        out |= 1 << perm[i]
    return out


def adjunction_check(c: Cover, e: LocalSystem) -> AdjunctionReport:
    pf = pushforward(c, e)
    tb = twisted_cochains(c.base, pf)
    tt = twisted_cochains(c.total, e)
    hb, ht = cohomology_dims(tb.complex), cohomology_dims(tt.complex)
    if tb.complex.dims() != tt.complex.dims():
        for k in sorted(set(tb.complex.dims()) | set(tt.complex.dims())):
            if tb.complex.dim(k) != tt.complex.dim(k):
                return AdjunctionReport(hb, ht, False, k, f"cochain groups differ in degree {k}")
    try:
        iso = adjunction_isomorphism(c, e, tb, tt)
    except KeyError as exc:
        return AdjunctionReport(hb, ht, False, None, f"no matching lift for label {exc}")
    for n in tb.complex.degrees():
        perm = iso[n]
        if len(set(perm)) != len(perm):
            return AdjunctionReport(hb, ht, False, n, f"label map not injective in degree {n}")
        nxt = iso.get(n + 1)
        d_b, d_t = tb.complex.d(n), tt.complex.d(n)
        for j in range(tb.complex.dim(n)):
            img_b = d_b.apply(1 << j)
            lhs = transport_vector(nxt, img_b) if nxt else 0
            rhs = d_t.apply(1 << perm[j])
            if lhs != rhs:
                return AdjunctionReport(hb, ht, False, n, f"label map does not commute with d in degree {n}")
    if hb != ht:
        bad = min(k for k in set(hb) | set(ht) if hb.get(k, 0) != ht.get(k, 0))
        return AdjunctionReport(hb, ht, False, bad, f"cohomology differs in degree {bad}")
    return AdjunctionReport(hb, ht, True, None, "ok", iso)


def same_transports(a: LocalSystem, b: LocalSystem) -> bool:
    """Equality of systems up to fibre labels: equal fibre dimensions, differentials and transports."""
    if a.base != b.base:
        return False
    for v in range(a.base.n):
        fa, fb = a.fibres[v], b.fibres[v]
        if fa.dims() != fb.dims():
            return False
        if any(fa.d(q) != fb.d(q) for q in fa.degrees()):
            return False
    return all(a.total_transport(v, w) == b.total_transport(v, w) for v, w in a.base.edges)


def regular_representation_system(k: SimplicialComplex, perms: Mapping[str, Sequence[int]],
                                  presentation: Optional[Presentation] = None) -> LocalSystem:
    """Permutation-module system: generator g acts by the permutation matrix of ``perms[g]``.

    For the regular action of a finite quotient this is the group-ring system.
    """
    images = {g: F2Matrix.permutation(p) for g, p in perms.items()}
    return system_from_representation(k, images, presentation)


# ---------------------------------------------------------------------------
# group algebras and finite-propagation matrices


@dataclass(frozen=True)
class AbelianGroup:
    """ℤ^rank × ℤ/torsion[0] × ... ; elements are integer tuples."""

    rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(int(t) for t in self.torsion))
        if self.rank < 0 or any(t < 1 for t in self.torsion):
            raise CoverError("invalid abelian group descriptor")

    @property
    def length(self) -> int:
        return self.rank + len(self.torsion)

    def normalize(self, g: Sequence[int]) -> tuple[int, ...]:
        g = tuple(int(x) for x in g)
        if len(g) != self.length:
            raise CoverError(f"group element {g} has wrong length for {self}")
        return g[: self.rank] + tuple(x % t for x, t in zip(g[self.rank:], self.torsion))

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.length

    def add(self, a, b) -> tuple[int, ...]:
        return self.normalize(tuple(x + y for x, y in zip(a, b)))

    def neg(self, a) -> tuple[int, ...]:
        return self.normalize(tuple(-x for x in a))

    def is_finite(self) -> bool:
        return self.rank == 0

    def elements(self) -> list[tuple[int, ...]]:
        if not self.is_finite():
            raise CoverError("cannot enumerate an infinite group")
        return [tuple(x) for x in product(*(range(t) for t in self.torsion))]


@dataclass(frozen=True)
class GroupAlgebraElement:
    group: AbelianGroup
    support: frozenset

    def __post_init__(self):
        object.__setattr__(self, "support", frozenset(self.group.normalize(g) for g in self.support))

    @classmethod
    def from_terms(cls, group: AbelianGroup, terms) -> "GroupAlgebraElement":
        """Build from a list of group elements; repeated terms cancel in pairs."""
        sup: set = set()
        for g in terms:
            sup ^= {group.normalize(g)}
        return cls(group, frozenset(sup))

    @classmethod
    def one(cls, group: AbelianGroup) -> "GroupAlgebraElement":
        return cls(group, frozenset([group.zero()]))

    def __add__(self, other):
        self._check(other)
        return GroupAlgebraElement(self.group, self.support ^ other.support)

    def __mul__(self, other):
        self._check(other)
        out: set = set()
        for a in self.support:
            for b in other.support:
                out ^= {self.group.add(a, b)}
        return GroupAlgebraElement(self.group, frozenset(out))

    def _check(self, other):
        if self.group != other.group:
            raise CoverError("group algebra elements over different groups")

    def is_zero(self) -> bool:
        return not self.support


def laurent(exponents: Sequence[int]) -> GroupAlgebraElement:
    """Element of F2[t, t⁻¹] = F2[ℤ] with the given exponents (repeats cancel)."""
    return GroupAlgebraElement.from_terms(AbelianGroup(1), [(e,) for e in exponents])


@dataclass(frozen=True)
class FinPropMatrix:
    """A G-equivariant matrix over the lifts, stored by bands.

    ``bands[g]`` is the block coupling sheet h to sheet h+g.  Products
    convolve bands; since G is abelian and the matrix is equivariant the
    translate in the convolution acts trivially on blocks.
    """

    group: AbelianGroup
    rows: int
    cols: int
    bands: Mapping[tuple[int, ...], F2Matrix]

    def __post_init__(self):
        clean = {}
        for g, m in self.bands.items():
            if m.shape != (self.rows, self.cols):
                raise CoverError(f"band {g} has shape {m.shape}, expected {(self.rows, self.cols)}")
            g = self.group.normalize(g)
            if g in clean:
                m = clean[g] + m
            clean[g] = m
        object.__setattr__(self, "bands", {g: m for g, m in clean.items() if not m.is_zero()})

    @classmethod
    def identity(cls, group: AbelianGroup, n: int) -> "FinPropMatrix":
        return cls(group, n, n, {group.zero(): F2Matrix.identity(n)})

    def support(self) -> set:
        return set(self.bands)

    def __eq__(self, other):
        return (isinstance(other, FinPropMatrix) and self.group == other.group and self.shape == other.shape
                and self.bands == other.bands)

    def __hash__(self):
        return hash((self.group, self.rows, self.cols, tuple(sorted(self.bands))))

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __add__(self, other):
        if self.group != other.group or self.shape != other.shape:
            raise CoverError("incompatible finite-propagation matrices")
        bands = dict(self.bands)
        for g, m in other.bands.items():
            bands[g] = bands[g] + m if g in bands else m
        return FinPropMatrix(self.group, self.rows, self.cols, bands)

    def __matmul__(self, other):
        return finprop_multiply(self, other)

    def propagation(self) -> int:
        """Largest ℓ∞ norm of a free-part offset in the support."""
        r = self.group.rank
        return max((max((abs(x) for x in g[:r]), default=0) for g in self.bands), default=0)


def finprop_multiply(a: FinPropMatrix, b: FinPropMatrix) -> FinPropMatrix:
    if a.group != b.group:
        raise CoverError("finite-propagation matrices over different groups")
    if a.cols != b.rows:
        raise CoverError(f"dimension mismatch {a.shape} @ {b.shape}")
    out: dict[tuple[int, ...], F2Matrix] = {}
    for g1, m1 in a.bands.items():
        for g2, m2 in b.bands.items():
            g = a.group.add(g1, g2)
            p = m1 @ m2
            out[g] = out[g] + p if g in out else p
    return FinPropMatrix(a.group, a.rows, b.cols, out)


def finprop_from_group_algebra(x: GroupAlgebraElement) -> FinPropMatrix:
    return FinPropMatrix(x.group, 1, 1, {g: F2Matrix.identity(1) for g in x.support})


def finprop_to_dense(a: FinPropMatrix) -> F2Matrix:
    """Dense matrix on ⊕_{h∈G} blocks for a finite group G (regular representation)."""
    els = a.group.elements()
    pos = {g: i for i, g in enumerate(els)}
    blocks_r, blocks_c = a.rows, a.cols
    rows = [0] * (len(els) * blocks_r)
    for h in els:
        for g, m in a.bands.items():
            tgt = pos[a.group.add(h, g)]
            src = pos[h]
            for i, r in enumerate(m.data):
                rows[tgt * blocks_r + i] |= r << (src * blocks_c)
    return F2Matrix(len(els) * blocks_r, len(els) * blocks_c, tuple(rows))


def group_ring_system(k: SimplicialComplex, group: AbelianGroup, generator_images: Mapping[str, Sequence[int]],
                      presentation: Optional[Presentation] = None) -> LocalSystem:
    """Regular-representation system of a finite abelian quotient of the edge-path group.

    ``generator_images[g]`` is the group element that generator g maps to.
    """
    els = group.elements()
    pos = {g: i for i, g in enumerate(els)}
    perms = {}
    for gen, img in generator_images.items():
        img = group.normalize(img)
        perms[gen] = tuple(pos[group.add(h, img)] for h in els)
    return regular_representation_system(k, perms, presentation)
