"""Simplicial complexes, local systems of complexes and twisted cochains.

A cochain on a simplex takes values in the fibre over the simplex's
smallest vertex (its anchor).  Transports along edges inside a simplex
move values between anchors; flatness makes the choice of in-simplex path
irrelevant.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

from .chain import ChainMap, Complex, ComplexError, hom_complex, hom_index
from .f2linalg import F2Matrix, apply_columns, bits_of, block_diag, rank_of_rows

Simplex = tuple[int, ...]


class SimplicialError(ValueError):
    pass


class FlatnessError(SimplicialError):
    pass


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    n: int
    simplices: frozenset

    def __post_init__(self):
        simp = frozenset(tuple(s) for s in self.simplices)
        for s in simp:
            if not s or any(a >= b for a, b in zip(s, s[1:])):
                raise SimplicialError(f"simplex {s} is not strictly increasing")
            if s[0] < 0 or s[-1] >= self.n:
                raise SimplicialError(f"simplex {s} uses a vertex outside 0..{self.n - 1}")
            if len(s) > 1:
                for face in combinations(s, len(s) - 1):
                    if face not in simp:
                        raise SimplicialError(f"face {face} of {s} missing")
        for v in range(self.n):
            if (v,) not in simp:
                raise SimplicialError(f"vertex {v} missing")
        object.__setattr__(self, "simplices", simp)
        by_dim: dict[int, list[Simplex]] = {}
        for s in simp:
            by_dim.setdefault(len(s) - 1, []).append(s)
        by_dim = {p: sorted(v) for p, v in by_dim.items()}
        object.__setattr__(self, "_by_dim", by_dim)
        object.__setattr__(self, "_index", {s: i for p in by_dim for i, s in enumerate(by_dim[p])})
        cofaces: dict[Simplex, list[Simplex]] = {s: [] for s in simp}
        for s in simp:
            if len(s) > 1:
                for face in combinations(s, len(s) - 1):
                    cofaces[face].append(s)
        object.__setattr__(self, "_cofaces", {s: sorted(c) for s, c in cofaces.items()})

    @classmethod
    def from_facets(cls, n: int, facets: Iterable[Sequence[int]]) -> "SimplicialComplex":
        simp = {(v,) for v in range(n)}
        for f in facets:
            f = tuple(sorted(f))
            if len(set(f)) != len(f):
                raise SimplicialError(f"repeated vertex in {f}")
            for k in range(1, len(f) + 1):
                simp.update(combinations(f, k))
        return cls(n, frozenset(simp))

    @property
    def dim(self) -> int:
        return max(self._by_dim) if self._by_dim else -1

    def simplices_of_dim(self, p: int) -> list[Simplex]:
        return self._by_dim.get(p, [])

    def index(self, s: Simplex) -> int:
        return self._index[s]

    def cofaces(self, s: Simplex) -> list[Simplex]:
        return self._cofaces[s]

    @staticmethod
    def faces(s: Simplex) -> list[Simplex]:
        return [s[:i] + s[i + 1:] for i in range(len(s))] if len(s) > 1 else []

    @property
    def edges(self) -> list[Simplex]:
        return self.simplices_of_dim(1)

    @property
    def triangles(self) -> list[Simplex]:
        return self.simplices_of_dim(2)

    def f_vector(self) -> list[int]:
        return [len(self.simplices_of_dim(p)) for p in range(self.dim + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** p * c for p, c in enumerate(self.f_vector()))

    def neighbours(self) -> dict[int, list[int]]:
        nb: dict[int, list[int]] = {v: [] for v in range(self.n)}
        for a, b in self.edges:
            nb[a].append(b)
            nb[b].append(a)
        return {v: sorted(w) for v, w in nb.items()}

    def components(self) -> list[list[int]]:
        nb = self.neighbours()
        seen, comps = set(), []
        for v in range(self.n):
            if v in seen:
                continue
            comp, queue = [], deque([v])
            seen.add(v)
            while queue:
                x = queue.popleft()
                comp.append(x)
                for y in nb[x]:
                    if y not in seen:
                        seen.add(y)
                        queue.append(y)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def __eq__(self, other):
        return isinstance(other, SimplicialComplex) and self.n == other.n and self.simplices == other.simplices


def anchor(s: Simplex) -> int:
    return s[0]


def simplex_label(s: Simplex) -> str:
    return "s" + "-".join(map(str, s))


# ---------------------------------------------------------------------------
# local systems


def _inverse_map(t: ChainMap) -> ChainMap:
    inv = {}
    for k in t.source.degrees():
        m = t.f(k)
        try:
            inv[k] = m.inverse()
        except ValueError:
            raise SimplicialError(f"transport is not invertible in fibre degree {k}") from None
    return ChainMap(t.target, t.source, inv)


def _compose(g: ChainMap, f: ChainMap) -> ChainMap:
    return ChainMap(f.source, g.target, {k: g.f(k) @ f.f(k) for k in f.source.degrees()})


@dataclass(frozen=True, eq=False)
class LocalSystem:
    """Fibre complex per vertex and invertible chain-map transports along edges.

    ``transports`` is keyed by increasing edges ``(v, w)`` with ``v < w`` and
    holds the chain map fibre(v) → fibre(w).  Flatness over every 2-simplex
    is checked on construction.
    """

    base: SimplicialComplex
    fibres: tuple[Complex, ...]
    transports: Mapping[tuple[int, int], ChainMap]

    def __post_init__(self):
        fib = tuple(self.fibres)
        object.__setattr__(self, "fibres", fib)
        if len(fib) != self.base.n:
            raise SimplicialError("need one fibre per vertex")
        edges = set(self.base.edges)
        tr = dict(self.transports)
        if set(tr) != edges:
            missing = edges - set(tr)
            extra = set(tr) - edges
            raise SimplicialError(f"transports must cover exactly the edges; missing {sorted(missing)}, extra {sorted(extra)}")
        for (v, w), t in tr.items():
            if t.source is not fib[v] and t.source != fib[v]:
                raise SimplicialError(f"transport {v}->{w} has the wrong source")
            if t.target is not fib[w] and t.target != fib[w]:
                raise SimplicialError(f"transport {v}->{w} has the wrong target")
            if t.shift != 0:
                raise SimplicialError("transports must preserve degree")
        inv = {e: _inverse_map(t) for e, t in tr.items()}
        object.__setattr__(self, "transports", tr)
        object.__setattr__(self, "_inverse", inv)
        bad = self.flatness_violations()
        if bad:
            raise FlatnessError(f"transport not flat over triangles {bad[:5]}")

    def flatness_violations(self) -> list[Simplex]:
        bad = []
        for a, b, c in self.base.triangles:
            tab, tbc, tac = self.transports[(a, b)], self.transports[(b, c)], self.transports[(a, c)]
            for k in self.fibres[a].degrees():
                if tbc.f(k) @ tab.f(k) != tac.f(k):
                    bad.append((a, b, c))
                    break
        return bad

    def transport(self, v: int, w: int) -> ChainMap:
        if v == w:
            return ChainMap.identity(self.fibres[v])
        if v < w:
            return self.transports[(v, w)]
        return self._inverse[(w, v)]

    def transport_matrix(self, v: int, w: int, q: int) -> F2Matrix:
        """Transport fibre(v) → fibre(w) restricted to fibre degree ``q``."""
        if v == w:
            return F2Matrix.identity(self.fibres[v].dim(q))
        return self.transport(v, w).f(q)

    def total_transport(self, v: int, w: int) -> F2Matrix:
        degs = self.fibre_degrees()
        return block_diag([self.transport_matrix(v, w, q) for q in degs])

    def fibre_degrees(self) -> list[int]:
        return sorted({q for f in self.fibres for q in f.degrees()})

    def total_offsets(self, v: int) -> dict[int, int]:
        """Offset of each fibre degree inside the total (all-degree) fibre vector at ``v``."""
        off, out = 0, {}
        for q in self.fibre_degrees():
            out[q] = off
            off += self.fibres[v].dim(q)
        return out

    def total_dim(self, v: int) -> int:
        return self.fibres[v].space.total_dim()

    def rank(self) -> int:
        return self.total_dim(0) if self.base.n else 0

    @classmethod
    def trivial(cls, base: SimplicialComplex, fibre: Optional[Complex] = None) -> "LocalSystem":
        fibre = fibre or Complex.ground()
        ident = ChainMap.identity(fibre)
        return cls(base, (fibre,) * base.n, {e: ident for e in base.edges})

    @classmethod
    def from_matrices(cls, base: SimplicialComplex, fibre: Complex,
                      matrices: Mapping[tuple[int, int], F2Matrix]) -> "LocalSystem":
        """Same fibre everywhere; each edge gets a total-fibre matrix (degree blocks extracted)."""
        degs = fibre.degrees()
        offs, off = {}, 0
        for q in degs:
            offs[q] = off
            off += fibre.dim(q)
        tr = {}
        for e in base.edges:
            m = matrices.get(e)
            if m is None:
                m = F2Matrix.identity(off)
            if m.shape != (off, off):
                raise SimplicialError(f"transport on {e} has shape {m.shape}, expected {(off, off)}")
            maps = {}
            for q in degs:
                idx = list(range(offs[q], offs[q] + fibre.dim(q)))
                maps[q] = m.submatrix(idx, idx)
            block = block_diag([maps[q] for q in degs]) if degs else F2Matrix.zeros(0, 0)
            if block != m:
                raise SimplicialError(f"transport on {e} mixes fibre degrees")
            try:
                tr[e] = ChainMap(fibre, fibre, maps)
            except ComplexError as exc:
                raise SimplicialError(f"transport on {e} does not commute with the fibre differential") from exc
        return cls(base, (fibre,) * base.n, tr)

    def gauge(self, changes: Sequence[ChainMap]) -> "LocalSystem":
        """Conjugate by per-vertex isomorphisms g_v : fibre(v) → new fibre(v)."""
        fib = tuple(g.target for g in changes)
        tr = {}
        for (v, w), t in self.transports.items():
            tr[(v, w)] = _compose(changes[w], _compose(t, _inverse_map(changes[v])))
        return LocalSystem(self.base, fib, tr)


# ---------------------------------------------------------------------------
# twisted cochains


@dataclass(frozen=True, eq=False)
class TwistedCochains:
    """The twisted cochain complex together with its simplex/fibre layout.

    ``blocks[n]`` lists ``(simplex, fibre degree, offset)`` for total degree n.
    """

    system: LocalSystem
    complex: Complex
    blocks: Mapping[int, list[tuple[Simplex, int, int]]]
    _where: Mapping[tuple[Simplex, int], tuple[int, int]] = field(repr=False, default_factory=dict)

    def position(self, s: Simplex, q: int) -> tuple[int, int]:
        """(total degree, offset) of the block for simplex ``s`` and fibre degree ``q``."""
        return self._where[(s, q)]

    def sections(self, n: int, vec: int) -> dict[Simplex, dict[int, int]]:
        """Split a degree-n vector into per-simplex, per-fibre-degree pieces."""
        out: dict[Simplex, dict[int, int]] = {}
        for s, q, off in self.blocks.get(n, []):
            size = self.system.fibres[anchor(s)].dim(q)
            piece = (vec >> off) & ((1 << size) - 1)
            if piece:
                out.setdefault(s, {})[q] = piece
        return out

    def vector(self, n: int, pieces: Mapping[Simplex, Mapping[int, int]]) -> int:
        v = 0
        for s, byq in pieces.items():
            for q, piece in byq.items():
                if not piece:
                    continue
                deg, off = self._where[(s, q)]
                if deg != n:
                    raise SimplicialError(f"piece on {s} with fibre degree {q} lies in degree {deg}, not {n}")
                v ^= piece << off
        return v


def twisted_cochains(k: SimplicialComplex, e: LocalSystem) -> TwistedCochains:
    if e.base is not k and e.base != k:
        raise SimplicialError("local system lives on a different complex")
    fdegs = e.fibre_degrees()
    basis: dict[int, list[str]] = {}
    blocks: dict[int, list[tuple[Simplex, int, int]]] = {}
    where: dict[tuple[Simplex, int], tuple[int, int]] = {}
    for p in range(k.dim + 1):
        for s in k.simplices_of_dim(p):
            fib = e.fibres[anchor(s)]
            for q in fdegs:
                size = fib.dim(q)
                if not size:
                    continue
                n = p + q
                labels = basis.setdefault(n, [])
                blocks.setdefault(n, []).append((s, q, len(labels)))
                where[(s, q)] = (n, len(labels))
                pre = simplex_label(s) + ":"
                labels.extend(pre + l for l in fib.space.labels(q))
    diff = {}
    for n, blist in blocks.items():
        if n + 1 not in basis:
            continue
        images = []
        for s, q, off in blist:
            v = anchor(s)
            fib = e.fibres[v]
            size = fib.dim(q)
            dq = fib.d(q)
            cofs = k.cofaces(s)
            # columns of the internal differential and of each coface transport
            internal = dq.columns() if fib.dim(q + 1) else [0] * size
            moves = []
            for t in cofs:
                m = e.transport_matrix(v, anchor(t), q)
                moves.append((where[(t, q)][1], m.columns()))
            tgt_internal = where.get((s, q + 1), (None, 0))[1]
            for j in range(size):
                img = internal[j] << tgt_internal if internal[j] else 0
                for toff, cols in moves:
                    img ^= cols[j] << toff
                images.append(img)
        diff[n] = F2Matrix.from_columns(len(basis[n + 1]), images)
    c = Complex.build(basis, diff)
    return TwistedCochains(e, c, blocks, where)


def twisted_cochain_complex(k: SimplicialComplex, e: LocalSystem) -> Complex:
    return twisted_cochains(k, e).complex


# ---------------------------------------------------------------------------
# pairings and cup products


@dataclass(frozen=True, eq=False)
class Pairing:
    """Fibrewise bilinear maps E12 ⊗ E01 → E02, one table per vertex.

    ``tables[v]`` maps a pair of total-fibre basis indices ``(i, j)`` to a
    bit-packed total-fibre vector of E02 at v.  Absent pairs multiply to 0.
    """

    e12: LocalSystem
    e01: LocalSystem
    e02: LocalSystem
    tables: tuple[Mapping[tuple[int, int], int], ...]

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(self.tables))
        if not (self.e12.base == self.e01.base == self.e02.base):
            raise SimplicialError("pairing systems must share a base")
        if len(self.tables) != self.e12.base.n:
            raise SimplicialError("need one table per vertex")
        problems = self.violations()
        if problems:
            raise SimplicialError(f"pairing is not a map of local systems: {problems[0]}")

    def multiply(self, v: int, x: int, y: int) -> int:
        table = self.tables[v]
        out = 0
        for i in bits_of(x):
            for j in bits_of(y):
                out ^= table.get((i, j), 0)
        return out

    def violations(self) -> list[str]:
        out = []
        base = self.e12.base
        degs = {}
        for name, sysm in (("e12", self.e12), ("e01", self.e01), ("e02", self.e02)):
            per_vertex = []
            for v in range(base.n):
                dv = []
                for q in sysm.fibre_degrees():
                    dv.extend([q] * sysm.fibres[v].dim(q))
                per_vertex.append(dv)
            degs[name] = per_vertex
        for v in range(base.n):
            for (i, j), val in self.tables[v].items():
                want = degs["e12"][v][i] + degs["e01"][v][j]
                for b in bits_of(val):
                    if degs["e02"][v][b] != want:
                        out.append(f"degree mismatch at vertex {v} for ({i},{j})")
                        break
        # Leibniz: d m(x,y) = m(dx,y) + m(x,dy)
        for v in range(base.n):
            d12, d01, d02 = (_total_differential(s, v).columns() for s in (self.e12, self.e01, self.e02))
            n12, n01 = self.e12.total_dim(v), self.e01.total_dim(v)
            for i in range(n12):
                for j in range(n01):
                    lhs = apply_columns(d02, self.multiply(v, 1 << i, 1 << j))
                    rhs = self.multiply(v, d12[i], 1 << j) ^ self.multiply(v, 1 << i, d01[j])
                    if lhs != rhs:
                        out.append(f"Leibniz fails at vertex {v} for ({i},{j})")
        # equivariance along every edge
        for v, w in base.edges:
            c12, c01, c02 = (s.total_transport(v, w).columns() for s in (self.e12, self.e01, self.e02))
            for i in range(self.e12.total_dim(v)):
                for j in range(self.e01.total_dim(v)):
                    lhs = apply_columns(c02, self.multiply(v, 1 << i, 1 << j))
                    rhs = self.multiply(w, c12[i], c01[j])
                    if lhs != rhs:
                        out.append(f"not equivariant along edge {(v, w)} for ({i},{j})")
        return out


def _total_differential(e: LocalSystem, v: int) -> F2Matrix:
    fib = e.fibres[v]
    degs = e.fibre_degrees()
    offs = e.total_offsets(v)
    n = e.total_dim(v)
    cols = [0] * n
    for q in degs:
        if not fib.dim(q) or not fib.dim(q + 1):
            continue
        for j, c in enumerate(fib.d(q).columns()):
            cols[offs[q] + j] = c << offs[q + 1]
    return F2Matrix.from_columns(n, cols)


def trivial_pairing(base: SimplicialComplex) -> Pairing:
    """F2 ⊗ F2 → F2, the ordinary cup product."""
    t = LocalSystem.trivial(base)
    return Pairing(t, t, t, tuple({(0, 0): 1} for _ in range(base.n)))


def unit_pairing(e: LocalSystem, side: str = "left") -> Pairing:
    """F2 ⊗ E → E (``side='left'``) or E ⊗ F2 → E (``side='right'``) by scalar multiplication."""
    t = LocalSystem.trivial(e.base)
    tables = []
    for v in range(e.base.n):
        n = e.total_dim(v)
        if side == "left":
            tables.append({(0, j): 1 << j for j in range(n)})
        else:
            tables.append({(j, 0): 1 << j for j in range(n)})
    if side == "left":
        return Pairing(t, e, e, tuple(tables))
    return Pairing(e, t, e, tuple(tables))


def hom_system(e1: LocalSystem, e2: LocalSystem) -> LocalSystem:
    """Fibrewise Hom complexes with transport φ ↦ t2∘φ∘t1⁻¹."""
    if e1.base != e2.base:
        raise SimplicialError("systems live on different complexes")
    base = e1.base
    fibres = tuple(hom_complex(e1.fibres[v], e2.fibres[v]) for v in range(base.n))
    tr = {}
    for v, w in base.edges:
        src, tgt = fibres[v], fibres[w]
        maps = {}
        f1v, f2v = e1.fibres[v], e2.fibres[v]
        f1w, f2w = e1.fibres[w], e2.fibres[w]
        for k in src.degrees():
            idx_v = hom_index(f1v, f2v, k)
            idx_w = hom_index(f1w, f2w, k)
            cols = [0] * len(idx_v)
            t1inv_cache, t2_cache = {}, {}
            for (d0, a, b), pos in idx_v.items():
                if d0 not in t1inv_cache:
                    t1inv_cache[d0] = e1.transport_matrix(w, v, d0)   # fibre1(w) → fibre1(v)
                    t2_cache[d0] = e2.transport_matrix(v, w, d0 + k).columns()
                # (t2 E_{b,a} t1^{-1})_{y,x} = t2[y,b] * t1inv[a,x]
                row_a = t1inv_cache[d0].data[a]
                col_b = t2_cache[d0][b]
                img = 0
                for x in bits_of(row_a):
                    for y in bits_of(col_b):
                        img ^= 1 << idx_w[(d0, x, y)]
                cols[pos] = img
            maps[k] = F2Matrix.from_columns(tgt.dim(k), cols)
        tr[(v, w)] = ChainMap(src, tgt, maps)
    return LocalSystem(base, fibres, tr)


def _total_hom_positions(e1: LocalSystem, e2: LocalSystem, h: LocalSystem, v: int) -> dict[tuple[int, int], int]:
    """Total-fibre index in Hom(E1,E2) at v of hom(a, b), keyed by total indices (a in E1, b in E2)."""
    f1, f2 = e1.fibres[v], e2.fibres[v]
    o1, o2, oh = e1.total_offsets(v), e2.total_offsets(v), h.total_offsets(v)
    out = {}
    for k in h.fibres[v].degrees():
        for (d0, a, b), pos in hom_index(f1, f2, k).items():
            out[(o1[d0] + a, o2[d0 + k] + b)] = oh[k] + pos
    return out


def composition_pairing(e0: LocalSystem, e1: LocalSystem, e2: LocalSystem) -> Pairing:
    """Hom(E1,E2) ⊗ Hom(E0,E1) → Hom(E0,E2), (φ, ψ) ↦ φ∘ψ."""
    h12, h01, h02 = hom_system(e1, e2), hom_system(e0, e1), hom_system(e0, e2)
    tables = []
    for v in range(e0.base.n):
        p12 = _total_hom_positions(e1, e2, h12, v)
        p01 = _total_hom_positions(e0, e1, h01, v)
        p02 = _total_hom_positions(e0, e2, h02, v)
        by_mid: dict[int, list[tuple[int, int]]] = {}
        for (a, b), pos in p01.items():
            by_mid.setdefault(b, []).append((a, pos))
        table = {}
        for (b, c), pos12 in p12.items():
            for a, pos01 in by_mid.get(b, []):
                table[(pos12, pos01)] = 1 << p02[(a, c)]
        tables.append(table)
    return Pairing(h12, h01, h02, tuple(tables))


def _as_total(e: LocalSystem, v: int, byq: Mapping[int, int]) -> int:
    offs = e.total_offsets(v)
    out = 0
    for q, piece in byq.items():
        out ^= piece << offs[q]
    return out


def _from_total(e: LocalSystem, v: int, x: int) -> dict[int, int]:
    out = {}
    fib = e.fibres[v]
    for q, off in e.total_offsets(v).items():
        size = fib.dim(q)
        piece = (x >> off) & ((1 << size) - 1)
        if piece:
            out[q] = piece
    return out


def cup_cochains(pairing: Pairing, tc12: TwistedCochains, tc01: TwistedCochains, tc02: TwistedCochains,
                 n1: int, a: int, n2: int, b: int) -> int:
    """Alexander–Whitney product of cochains a (degree n1) and b (degree n2)."""
    e12, e01, e02 = pairing.e12, pairing.e01, pairing.e02
    base = e12.base
    sa = {s: _as_total(e12, anchor(s), byq) for s, byq in tc12.sections(n1, a).items()}
    sb = {s: _as_total(e01, anchor(s), byq) for s, byq in tc01.sections(n2, b).items()}
    out: dict[Simplex, dict[int, int]] = {}
    if not sa or not sb:
        return 0
    dims_a = {len(s) - 1 for s in sa}
    dims_b = {len(s) - 1 for s in sb}
    tr_cache: dict[tuple[int, int], F2Matrix] = {}
    for p in dims_a:
        for q in dims_b:
            for rho in base.simplices_of_dim(p + q):
                front, back = rho[: p + 1], rho[p:]
                x = sa.get(front)
                if not x:
                    continue
                y = sb.get(back)
                if not y:
                    continue
                v0, vp = rho[0], rho[p]
                if vp != v0:
                    key = (vp, v0)
                    if key not in tr_cache:
                        tr_cache[key] = e01.total_transport(vp, v0)
                    y = tr_cache[key].apply(y)
                val = pairing.multiply(v0, x, y)
                if val:
                    cur = _as_total(e02, v0, out.get(rho, {})) ^ val
                    out[rho] = _from_total(e02, v0, cur)
    return tc02.vector(n1 + n2, out)


def cup_product(k: SimplicialComplex, pairing: Pairing, n1: int, a: int, n2: int, b: int,
                tcs: Optional[tuple[TwistedCochains, TwistedCochains, TwistedCochains]] = None) -> int:
    """Cup product of cocycles; returns a cocycle of degree n1+n2 in the E02 twisted complex."""
    if tcs is None:
        tcs = (twisted_cochains(k, pairing.e12), twisted_cochains(k, pairing.e01), twisted_cochains(k, pairing.e02))
    tc12, tc01, tc02 = tcs
    if tc12.complex.d(n1).apply(a):
        raise SimplicialError("first argument is not a cocycle")
    if tc01.complex.d(n2).apply(b):
        raise SimplicialError("second argument is not a cocycle")
    return cup_cochains(pairing, tc12, tc01, tc02, n1, a, n2, b)


def identity_section(e: LocalSystem) -> tuple[TwistedCochains, int]:
    """The degree-0 cocycle of Hom(E,E) given by the identity endomorphism at every vertex."""
    h = hom_system(e, e)
    tc = twisted_cochains(e.base, h)
    pieces = {}
    for v in range(e.base.n):
        pos = _total_hom_positions(e, e, h, v)
        x = 0
        for i in range(e.total_dim(v)):
            x |= 1 << pos[(i, i)]
        pieces[(v,)] = _from_total(h, v, x)
    return tc, tc.vector(0, pieces)


def unit_cocycle(tc: TwistedCochains) -> int:
    """The constant section 1 of the trivial rank-one system (degree 0)."""
    return tc.vector(0, {(v,): {0: 1} for v in range(tc.system.base.n)})


def fundamental_class_pairing(tc: TwistedCochains, n: int, vec: int) -> int:
    """Evaluate a top-degree F2-cochain on the sum of all top simplices."""
    k = tc.system.base
    total = 0
    for s, byq in tc.sections(n, vec).items():
        if len(s) - 1 == k.dim:
            total ^= byq.get(0, 0) & 1
    return total


# ---------------------------------------------------------------------------
# edge-path group

Word = tuple[tuple[str, int], ...]


def _reduce(word: Iterable[tuple[str, int]]) -> Word:
    out: list[tuple[str, int]] = []
    for g, e in word:
        if out and out[-1][0] == g and out[-1][1] == -e:
            out.pop()
        else:
            out.append((g, e))
    return tuple(out)


def _invert(word: Word) -> Word:
    return tuple((g, -e) for g, e in reversed(word))


def _substitute(word: Word, g: str, repl: Word) -> Word:
    out: list[tuple[str, int]] = []
    inv = _invert(repl)
    for h, e in word:
        if h == g:
            out.extend(repl if e == 1 else inv)
        else:
            out.append((h, e))
    return _reduce(out)


def _cyclic_reduce(word: Word) -> Word:
    w = list(_reduce(word))
    while len(w) >= 2 and w[0][0] == w[-1][0] and w[0][1] == -w[-1][1]:
        w = w[1:-1]
    return tuple(w)


@dataclass(frozen=True)
class Presentation:
    """Edge-path group presentation.

    Words are read in path order: ``((g1, e1), (g2, e2))`` traverses g1^e1 then
    g2^e2.  ``edge_words[(v, w)]`` is the word of the increasing edge v→w
    after conjugating into the basepoint via the spanning tree.
    """

    basepoint: int
    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    edge_words: Mapping[tuple[int, int], Word]
    tree: tuple[tuple[int, int], ...]

    def abelianization_f2_rank(self) -> int:
        gi = {g: i for i, g in enumerate(self.generators)}
        rows = []
        for r in self.relators:
            v = 0
            for g, _ in r:
                v ^= 1 << gi[g]
            rows.append(v)
        return len(self.generators) - rank_of_rows(rows)

    def evaluate(self, word: Word, images: Mapping[str, F2Matrix], inverses: Optional[Mapping[str, F2Matrix]] = None) -> F2Matrix:
        """Monodromy of a word: the transport of the path, i.e. M_last ··· M_first."""
        if inverses is None:
            inverses = {g: m.inverse() for g, m in images.items()}
        n = next(iter(images.values())).rows if images else 0
        out = F2Matrix.identity(n)
        for g, e in word:
            out = (images[g] if e == 1 else inverses[g]) @ out
        return out

    def evaluate_permutation(self, word: Word, perms: Mapping[str, Sequence[int]], n: int) -> tuple[int, ...]:
        """Action on sheets of a path word; permutations map sheet i to perms[g][i]."""
        cur = list(range(n))
        invs = {g: _perm_inverse(p) for g, p in perms.items()}
        for g, e in word:
            p = perms[g] if e == 1 else invs[g]
            cur = [p[i] for i in cur]
        return tuple(cur)


def _perm_inverse(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def edge_path_group(k: SimplicialComplex, basepoint: int = 0, simplify: bool = True) -> Presentation:
    if not k.is_connected():
        raise SimplicialError("edge-path group needs a connected complex")
    if not 0 <= basepoint < k.n:
        raise SimplicialError("basepoint is not a vertex")
    nb = k.neighbours()
    parent = {basepoint: None}
    queue = deque([basepoint])
    tree = set()
    while queue:
        x = queue.popleft()
        for y in nb[x]:
            if y not in parent:
                parent[y] = x
                tree.add((min(x, y), max(x, y)))
                queue.append(y)
    gens = [f"e{v}_{w}" for v, w in k.edges if (v, w) not in tree]
    edge_words: dict[tuple[int, int], Word] = {}
    for v, w in k.edges:
        edge_words[(v, w)] = () if (v, w) in tree else ((f"e{v}_{w}", 1),)
    relators = []
    for a, b, c in k.triangles:
        word = edge_words[(a, b)] + edge_words[(b, c)] + _invert(edge_words[(a, c)])
        word = _cyclic_reduce(word)
        if word:
            relators.append(word)
    pres = Presentation(basepoint, tuple(gens), tuple(relators), edge_words, tuple(sorted(tree)))
    return tietze_simplify(pres) if simplify else pres


def tietze_simplify(p: Presentation) -> Presentation:
    """Eliminate generators that occur exactly once in some relator."""
    gens = list(p.generators)
    rels = [r for r in p.relators if r]
    words = dict(p.edge_words)
    changed = True
    while changed:
        changed = False
        for ri, r in enumerate(rels):
            counts: dict[str, int] = {}
            for g, _ in r:
                counts[g] = counts.get(g, 0) + 1
            once = [g for g in gens if counts.get(g) == 1]
            if not once:
                continue
            g = once[0]
            pos = next(i for i, (h, _) in enumerate(r) if h == g)
            e = r[pos][1]
            before, after = r[:pos], r[pos + 1:]
            # before · g^e · after = 1  ⇒  g^e = before⁻¹ · after⁻¹
            sol = _reduce(_invert(before) + _invert(after))
            repl = sol if e == 1 else _invert(sol)
            rels = [_cyclic_reduce(_substitute(x, g, repl)) for j, x in enumerate(rels) if j != ri]
            rels = [x for x in rels if x]
            words = {ed: _substitute(w, g, repl) for ed, w in words.items()}
            gens.remove(g)
            changed = True
            break
    # drop duplicate relators
    seen, uniq = set(), []
    for r in rels:
        if r not in seen:
            seen.add(r)
            uniq.append(r)
    return Presentation(p.basepoint, tuple(gens), tuple(uniq), words, p.tree)


def check_relators(p: Presentation, images: Mapping[str, F2Matrix]) -> list[Word]:
    inverses = {g: m.inverse() for g, m in images.items()}
    bad = []
    for r in p.relators:
        m = p.evaluate(r, images, inverses)
        if m != F2Matrix.identity(m.rows):
            bad.append(r)
    return bad


def system_from_representation(k: SimplicialComplex, images: Mapping[str, F2Matrix],
                               presentation: Optional[Presentation] = None, basepoint: int = 0) -> LocalSystem:
    """Local system with rank-r fibre F2^r (degree 0) and the given monodromy.

    Edges of the spanning tree carry the identity; every other edge carries
    its edge word evaluated on ``images``.
    """
    p = presentation or edge_path_group(k, basepoint)
    if set(images) != set(p.generators):
        raise SimplicialError(f"images must be given for exactly the generators {list(p.generators)}")
    ranks = {m.rows for m in images.values()}
    if len(ranks) > 1:
        raise SimplicialError("all images must have the same size")
    r = ranks.pop() if ranks else 1
    for g, m in images.items():
        if not m.is_invertible():
            raise SimplicialError(f"image of {g} is not invertible")
    bad = check_relators(p, images)
    if bad:
        raise SimplicialError(f"images violate relator {bad[0]}")
    inverses = {g: m.inverse() for g, m in images.items()}
    fibre = Complex.build({0: [f"x{i}" for i in range(r)]})
    mats = {}
    for e, w in p.edge_words.items():
        mats[e] = p.evaluate(w, images, inverses) if w else F2Matrix.identity(r)
    return LocalSystem.from_matrices(k, fibre, mats)


def monodromy(e: LocalSystem, loop: Sequence[int]) -> F2Matrix:
    """Total transport around a closed vertex path (consecutive vertices must span edges)."""
    if loop[0] != loop[-1]:
        raise SimplicialError("loop must start and end at the same vertex")
    n = e.total_dim(loop[0])
    out = F2Matrix.identity(n)
    for v, w in zip(loop, loop[1:]):
        if (min(v, w), max(v, w)) not in e.transports:
            raise SimplicialError(f"{v}-{w} is not an edge")
        out = e.total_transport(v, w) @ out
    return out
