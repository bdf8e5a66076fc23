"""Minimal A∞ algebras and modules over F2.

Operations are sparse tables.  For an algebra, ``ops[d]`` maps an input
tuple of basis indices, in written order ``(x_d, ..., x_1)``, to a
bit-packed output vector.  μ^d has degree 2 − d.  Right modules store
``μ^{1|d}`` keyed by ``(m, a_d, ..., a_1)`` with degree 1 − d.

Relations are checked by sparse accumulation: every (outer op, slot,
inner op) triple whose inner output hits the outer input in that slot
contributes to the relation at the spliced input tuple.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Mapping, Optional, Sequence

from .chain import Complex, GradedSpace, cohomology
from .f2linalg import F2Matrix, Reducer, bits_of, kernel_basis, rank

Key = tuple[int, ...]
OpTable = Mapping[int, Mapping[Key, int]]


class AInfError(ValueError):
    pass


def _clean_ops(ops: OpTable, n: int, min_arity: int = 1, key_len=lambda d: d) -> dict[int, dict[Key, int]]:
    out: dict[int, dict[Key, int]] = {}
    for d, table in ops.items():
        d = int(d)
        if d < min_arity:
            raise AInfError(f"arity {d} below {min_arity}")
        clean = {}
        for key, val in table.items():
            key = tuple(int(k) for k in key)
            if len(key) != key_len(d):
                raise AInfError(f"arity-{d} entry has {len(key)} inputs")
            if val < 0 or val >> n:
                raise AInfError(f"output of {key} outside the basis")
            if val:
                clean[key] = clean.get(key, 0) ^ val
        clean = {k: v for k, v in clean.items() if v}
        if clean:
            out[d] = clean
    return out


@dataclass(frozen=True, eq=False)
class AInfAlgebra:
    labels: tuple[str, ...]
    degrees: tuple[int, ...]
    ops: OpTable
    unit: Optional[int] = None
    arity_cap: int = 6
    check_degrees: bool = True

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        n = len(self.labels)
        if len(set(self.labels)) != n or len(self.degrees) != n:
            raise AInfError("labels must be unique and match degrees")
        ops = _clean_ops(self.ops, n)
        for d, table in ops.items():
            for key in table:
                if any(not 0 <= k < n for k in key):
                    raise AInfError(f"input {key} outside the basis")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "_index", {l: i for i, l in enumerate(self.labels)})
        if self.unit is not None and not 0 <= self.unit < n:
            raise AInfError("unit outside the basis")
        if self.check_degrees:
            bad = degree_violations(self)
            if bad:
                raise AInfError(f"degree bookkeeping fails: {bad[0]}")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self._index[label]

    def op(self, d: int, key: Key) -> int:
        return self.ops.get(d, {}).get(tuple(key), 0)

    @property
    def space(self) -> GradedSpace:
        basis: dict[int, list[str]] = {}
        for l, g in zip(self.labels, self.degrees):
            basis.setdefault(g, []).append(l)
        return GradedSpace(basis)

    def is_minimal(self) -> bool:
        return 1 not in self.ops

    def max_arity(self) -> int:
        return max(self.ops, default=0)

    def is_connective(self) -> bool:
        return all(g <= 0 for g in self.degrees)

    def vector_degree(self, v: int) -> Optional[int]:
        degs = {self.degrees[i] for i in bits_of(v)}
        return degs.pop() if len(degs) == 1 else None

    @classmethod
    def from_labels(cls, degrees: Mapping[str, int], ops: Mapping[int, Mapping[Sequence[str], Sequence[str]]],
                    unit: Optional[str] = None, arity_cap: int = 6, check_degrees: bool = True) -> "AInfAlgebra":
        labels = list(degrees)
        idx = {l: i for i, l in enumerate(labels)}
        table: dict[int, dict[Key, int]] = {}
        for d, entries in ops.items():
            t = table.setdefault(int(d), {})
            for inp, out in entries.items():
                if isinstance(out, str):
                    out = [out]
                v = 0
                for o in out:
                    v ^= 1 << idx[o]
                key = tuple(idx[x] for x in inp)
                t[key] = t.get(key, 0) ^ v
        return cls(tuple(labels), tuple(degrees[l] for l in labels), table,
                   idx[unit] if unit is not None else None, arity_cap, check_degrees)

    def with_ops(self, ops: OpTable, check_degrees: bool = True) -> "AInfAlgebra":
        return AInfAlgebra(self.labels, self.degrees, ops, self.unit, self.arity_cap, check_degrees)

    def same_structure(self, other: "AInfAlgebra") -> bool:
        return self is other or (self.labels == other.labels and self.degrees == other.degrees
                                 and self.ops == other.ops and self.unit == other.unit)

    def entries(self):
        """Yield (arity, input labels, output labels) in a deterministic order."""
        for d in sorted(self.ops):
            for key in sorted(self.ops[d]):
                yield d, [self.labels[k] for k in key], [self.labels[o] for o in bits_of(self.ops[d][key])]


def degree_violations(a: AInfAlgebra) -> list[str]:
    out = []
    for d, table in a.ops.items():
        for key, val in table.items():
            want = sum(a.degrees[k] for k in key) + 2 - d
            for o in bits_of(val):
                if a.degrees[o] != want:
                    out.append(f"μ^{d}{tuple(a.labels[k] for k in key)} hits {a.labels[o]} "
                               f"of degree {a.degrees[o]}, expected {want}")
    return out


# ---------------------------------------------------------------------------
# relation checking


def _output_index(ops: OpTable) -> dict[int, list[tuple[int, Key]]]:
    """basis element → [(arity, key)] of every op entry whose output contains it."""
    idx: dict[int, list[tuple[int, Key]]] = {}
    for d, table in ops.items():
        for key, val in table.items():
            for o in bits_of(val):
                idx.setdefault(o, []).append((d, key))
    return idx


def relation_residues(ops: OpTable, cap: int) -> dict[Key, int]:
    """Σ μ(…, μ(…), …) for every input tuple of total arity ≤ cap, nonzero ones only."""
    inner = _output_index(ops)
    acc: dict[Key, int] = {}
    for m, table in ops.items():
        for key, val in table.items():
            for j, b in enumerate(key):
                for k, ikey in inner.get(b, ()):
                    if m + k - 1 > cap:
                        continue
                    t = key[:j] + ikey + key[j + 1:]
                    acc[t] = acc.get(t, 0) ^ val
    return {t: v for t, v in acc.items() if v}


@dataclass(frozen=True)
class RelationReport:
    ok: bool
    cap: int
    violations: tuple = ()
    smallest_arity: Optional[int] = None

    def summary(self) -> str:
        if self.ok:
            return f"A∞ relations hold up to arity {self.cap}"
        return f"{len(self.violations)} violations, smallest arity {self.smallest_arity}"


def check_ainf_relations(a: AInfAlgebra, cap: Optional[int] = None) -> RelationReport:
    cap = cap or a.arity_cap
    res = relation_residues(a.ops, cap)
    if not res:
        return RelationReport(True, cap)
    viol = sorted(((len(t), tuple(a.labels[i] for i in t), tuple(a.labels[o] for o in bits_of(v)))
                   for t, v in res.items()), key=lambda x: (x[0], x[1]))
    return RelationReport(False, cap, tuple(viol), viol[0][0])


# ---------------------------------------------------------------------------
# DG algebras


@dataclass(frozen=True, eq=False)
class DGAlgebra:
    """Differential graded algebra on a labelled basis.

    ``d[i]`` is the differential of basis element i (bit-packed), and
    ``product[(i, j)]`` the product e_i·e_j.  Missing entries are zero.
    """

    labels: tuple[str, ...]
    degrees: tuple[int, ...]
    d: Mapping[int, int]
    product: Mapping[tuple[int, int], int]
    unit: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "degrees", tuple(int(x) for x in self.degrees))
        object.__setattr__(self, "d", {int(i): v for i, v in self.d.items() if v})
        object.__setattr__(self, "product", {(int(i), int(j)): v for (i, j), v in self.product.items() if v})
        problems = self.violations()
        if problems:
            raise AInfError("invalid DG algebra: " + problems[0])

    @property
    def dim(self) -> int:
        return len(self.labels)

    def diff(self, v: int) -> int:
        out = 0
        for i in bits_of(v):
            out ^= self.d.get(i, 0)
        return out

    def mul(self, u: int, v: int) -> int:
        out = 0
        if not u or not v:
            return 0
        for i in bits_of(u):
            for j in bits_of(v):
                out ^= self.product.get((i, j), 0)
        return out

    def violations(self) -> list[str]:
        n = self.dim
        out = []
        if len(set(self.labels)) != n or len(self.degrees) != n:
            return ["labels must be unique and match degrees"]
        for i, v in self.d.items():
            if v >> n or not 0 <= i < n:
                return [f"differential of {i} outside the basis"]
            for o in bits_of(v):
                if self.degrees[o] != self.degrees[i] + 1:
                    out.append(f"d({self.labels[i]}) has a term of the wrong degree")
        for (i, j), v in self.product.items():
            if v >> n or not (0 <= i < n and 0 <= j < n):
                return [f"product ({i},{j}) outside the basis"]
            for o in bits_of(v):
                if self.degrees[o] != self.degrees[i] + self.degrees[j]:
                    out.append(f"{self.labels[i]}·{self.labels[j]} has a term of the wrong degree")
        if out:
            return out
        for i in range(n):
            if self.diff(self.diff(1 << i)):
                out.append(f"d∘d != 0 on {self.labels[i]}")
        for i in range(n):
            for j in range(n):
                lhs = self.diff(self.mul(1 << i, 1 << j))
                rhs = self.mul(self.diff(1 << i), 1 << j) ^ self.mul(1 << i, self.diff(1 << j))
                if lhs != rhs:
                    out.append(f"Leibniz fails on ({self.labels[i]}, {self.labels[j]})")
        for i in range(n):
            for j in range(n):
                ij = self.product.get((i, j), 0)
                for k in range(n):
                    jk = self.product.get((j, k), 0)
                    if self.mul(ij, 1 << k) != self.mul(1 << i, jk):
                        out.append(f"associativity fails on ({self.labels[i]}, {self.labels[j]}, {self.labels[k]})")
        if self.unit is not None:
            u = self.unit
            for i in range(n):
                if self.mul(1 << u, 1 << i) != 1 << i or self.mul(1 << i, 1 << u) != 1 << i:
                    out.append(f"{self.labels[u]} is not a two-sided unit")
                    break
        return out

    @classmethod
    def from_labels(cls, degrees: Mapping[str, int], d: Mapping[str, Sequence[str]],
                    product: Mapping[tuple[str, str], Sequence[str]], unit: Optional[str] = None) -> "DGAlgebra":
        labels = list(degrees)
        idx = {l: i for i, l in enumerate(labels)}

        def vec(outs):
            if isinstance(outs, str):
                outs = [outs]
            v = 0
            for o in outs:
                v ^= 1 << idx[o]
            return v

        return cls(tuple(labels), tuple(degrees[l] for l in labels), {idx[k]: vec(v) for k, v in d.items()},
                   {(idx[a], idx[b]): vec(v) for (a, b), v in product.items()},
                   idx[unit] if unit is not None else None)

    def as_ainf(self, arity_cap: int = 6) -> AInfAlgebra:
        ops = {1: {(i,): v for i, v in self.d.items()}, 2: {k: v for k, v in self.product.items()}}
        return AInfAlgebra(self.labels, self.degrees, ops, self.unit, arity_cap)

    def complex(self) -> Complex:
        basis: dict[int, list[str]] = {}
        pos = {}
        for i, (l, g) in enumerate(zip(self.labels, self.degrees)):
            pos[i] = (g, len(basis.setdefault(g, [])))
            basis[g].append(l)
        diff = {}
        for g in basis:
            if g + 1 not in basis:
                continue
            cols = []
            for i, (gi, _) in sorted(pos.items(), key=lambda t: t[1]):
                if gi != g:
                    continue
                img = 0
                for o in bits_of(self.d.get(i, 0)):
                    img |= 1 << pos[o][1]
                cols.append(img)
            diff[g] = F2Matrix.from_columns(len(basis[g + 1]), cols)
        return Complex.build(basis, diff)

    def degree_blocks(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i, g in enumerate(self.degrees):
            out.setdefault(g, []).append(i)
        return out


# ---------------------------------------------------------------------------
# homological perturbation


@dataclass(frozen=True, eq=False)
class MinimalModel:
    """Minimal A∞ structure on H(A) and the A∞ quasi-isomorphism f: H → A.

    ``iota[k]``, ``proj[i]`` and ``homotopy[i]`` are bit-packed vectors:
    ι of H basis element k, and p, h of A basis element i.
    """

    source: DGAlgebra
    algebra: AInfAlgebra
    iota: tuple[int, ...]
    proj: tuple[int, ...]
    homotopy: tuple[int, ...]
    morphism: Mapping[int, Mapping[Key, int]]
    arity_cap: int


def _apply(cols: Sequence[int], v: int) -> int:
    out = 0
    while v:
        low = v & -v
        out ^= cols[low.bit_length() - 1]
        v ^= low
    return out


def homotopy_retraction(a: DGAlgebra) -> tuple[list[int], list[int], list[int]]:
    """Split each degree as boundaries ⊕ harmonic ⊕ complement.

    Returns (iota, proj, homotopy) as vector lists with the side conditions
    h² = 0, h∘ι = 0, p∘h = 0 and id + ι∘p = d∘h + h∘d.
    """
    n = a.dim
    blocks = a.degree_blocks()
    # cocycles per degree, in global coordinates
    cycles: dict[int, list[int]] = {}
    for g, idx in blocks.items():
        local = F2Matrix.from_columns(n, [a.d.get(i, 0) for i in idx])
        cycles[g] = []
        for v in kernel_basis(local):
            gv = 0
            for t in bits_of(v.bits):
                gv |= 1 << idx[t]
            cycles[g].append(gv)
    complement: dict[int, list[int]] = {}
    for g, idx in blocks.items():
        red = Reducer(cycles[g])
        complement[g] = [1 << i for i in idx if red.add(1 << i, 0)]
    harmonic: dict[int, list[int]] = {}
    boundaries: dict[int, list[int]] = {}
    for g, idx in blocks.items():
        bnd = [a.diff(c) for c in complement.get(g - 1, [])]
        boundaries[g] = bnd
        red = Reducer(bnd)
        chosen = []
        cand = list(cycles[g])
        # prefer the unit itself as the representative of its class
        if a.unit is not None and a.degrees[a.unit] == g and a.diff(1 << a.unit) == 0:
            cand.insert(0, 1 << a.unit)
        for z in cand:
            if red.add(z, 0):
                chosen.append(z)
        harmonic[g] = chosen
    iota = []
    hpos = {}
    for g in sorted(blocks):
        for z in harmonic[g]:
            hpos[len(iota)] = g
            iota.append(z)
    proj = [0] * n
    homotopy = [0] * n
    hstart, off = {}, 0
    for g in sorted(blocks):
        hstart[g] = off
        off += len(harmonic[g])
    for g, idx in blocks.items():
        b, hm, c = boundaries[g], harmonic[g], complement[g]
        basis = b + hm + c
        red = Reducer(basis)
        pre = complement.get(g - 1, [])
        for i in idx:
            rem, comb = red.reduce(1 << i)
            if rem:
                raise AInfError("degree decomposition is not spanning")
            pv, hv = 0, 0
            for t in bits_of(comb):
                if t < len(b):
                    hv ^= pre[t]
                elif t < len(b) + len(hm):
                    pv |= 1 << (hstart[g] + t - len(b))
            proj[i] = pv
            homotopy[i] = hv
    return iota, proj, homotopy


def _label_for(a: DGAlgebra, v: int) -> str:
    return "[" + "+".join(a.labels[i] for i in bits_of(v)) + "]"


def minimal_model(a: DGAlgebra, arity_cap: int = 6) -> MinimalModel:
    """Transfer the DG structure to cohomology by the tree formula.

    λ_n = Σ_{i+j=n} μ²(G_i, G_j) with G_1 = ι and G_k = h∘λ_k; then
    μ^n_H = p∘λ_n and the morphism components are f^1 = ι, f^n = G_n.
    """
    iota, proj, hom = homotopy_retraction(a)
    nh = len(iota)
    degs = []
    for v in iota:
        degs.append(a.degrees[next(iter(bits_of(v)))])
    labels = [_label_for(a, v) for v in iota]
    if len(set(labels)) != len(labels):
        labels = [f"h{i}" for i in range(nh)]
    G: dict[int, dict[Key, int]] = {1: {(k,): iota[k] for k in range(nh)}}
    ops: dict[int, dict[Key, int]] = {}
    for n in range(2, arity_cap + 1):
        lam: dict[Key, int] = {}
        for i in range(1, n):
            j = n - i
            gi, gj = G.get(i), G.get(j)
            if not gi or not gj:
                continue
            for k1, v1 in gi.items():
                for k2, v2 in gj.items():
                    val = a.mul(v1, v2)
                    if val:
                        t = k1 + k2
                        lam[t] = lam.get(t, 0) ^ val
        mu, g = {}, {}
        for t, val in lam.items():
            pv = _apply(proj, val)
            if pv:
                mu[t] = pv
            hv = _apply(hom, val)
            if hv:
                g[t] = hv
        if mu:
            ops[n] = mu
        if g:
            G[n] = g
    unit = None
    if a.unit is not None:
        for k, v in enumerate(iota):
            if v == 1 << a.unit:
                unit = k
    h = AInfAlgebra(tuple(labels), tuple(degs), ops, unit, arity_cap)
    return MinimalModel(a, h, tuple(iota), tuple(proj), tuple(hom), G, arity_cap)


def morphism_residues(mm: MinimalModel, cap: Optional[int] = None) -> dict[Key, int]:
    """Σ f(…μ_H…) + d∘f + Σ μ²(f, f) on every input tuple up to the cap; nonzero entries only."""
    cap = cap or mm.arity_cap
    a, h, f = mm.source, mm.algebra, mm.morphism
    acc: dict[Key, int] = {}

    def add(t, v):
        if v:
            acc[t] = acc.get(t, 0) ^ v

    inner = _output_index(h.ops)
    for m, table in f.items():
        for key, val in table.items():
            for j, b in enumerate(key):
                for k, ikey in inner.get(b, ()):
                    if m + k - 1 <= cap:
                        add(key[:j] + ikey + key[j + 1:], val)
            add(key, a.diff(val))
    for i, t1 in f.items():
        for j, t2 in f.items():
            if i + j > cap:
                continue
            for k1, v1 in t1.items():
                for k2, v2 in t2.items():
                    add(k1 + k2, a.mul(v1, v2))
    return {t: v for t, v in acc.items() if v}


def quasi_isomorphism_check(mm: MinimalModel) -> bool:
    """H(f¹) is an isomorphism: dims agree and ι sends the H basis to independent classes."""
    a = mm.source
    c = a.complex()
    hc = cohomology(c)
    total_h = sum(hc.dims.values())
    if total_h != mm.algebra.dim:
        return False
    # positions inside each degree block of the complex
    local = {}
    counters: dict[int, int] = {}
    for i, g in enumerate(a.degrees):
        local[i] = (g, counters.get(g, 0))
        counters[g] = counters.get(g, 0) + 1
    by_degree: dict[int, list[int]] = {}
    for k, v in enumerate(mm.iota):
        g = mm.algebra.degrees[k]
        lv = 0
        for i in bits_of(v):
            lv |= 1 << local[i][1]
        by_degree.setdefault(g, []).append(hc.coordinates(g, lv))
    for g, coords in by_degree.items():
        if len(coords) != hc.dims.get(g, 0):
            return False
        m = F2Matrix.from_columns(hc.dims[g], coords)
        if rank(m) != len(coords):
            return False
    return True


def massey_example(deg_a: int = 1, deg_b: int = 1) -> DGAlgebra:
    """Eight-dimensional DGA with a nonvanishing triple Massey product ⟨a, b, a⟩.

    ab = p, ba = q, ua = w; du = p, dv = q.  H = span{1, a, b, w}.  With
    deg_a = deg_b = 0 every degree is ≤ 0.
    """
    g = deg_a + deg_b
    degrees = {"1": 0, "a": deg_a, "b": deg_b, "u": g - 1, "v": g - 1, "p": g, "q": g, "w": g - 1 + deg_a}
    prod = {("a", "b"): "p", ("b", "a"): "q", ("u", "a"): "w"}
    for l in degrees:
        prod[("1", l)] = l
        if l != "1":
            prod[(l, "1")] = l
    return DGAlgebra.from_labels(degrees, {"u": "p", "v": "q"}, prod, unit="1")


def massey_products(a: DGAlgebra, x: int, y: int, z: int) -> set[int]:
    """All values of ⟨x, y, z⟩ = s·z + x·t over homogeneous s, t with ds = x·y, dt = y·z.

    Brute force over every cochain of the right degree; each value is a cocycle.
    """
    def degree_of(v):
        (g,) = {a.degrees[i] for i in bits_of(v)}
        return g

    def space(g):
        idx = [i for i, d in enumerate(a.degrees) if d == g]
        for mask in range(1 << len(idx)):
            yield sum(1 << idx[k] for k in bits_of(mask))

    gx, gy, gz = degree_of(x), degree_of(y), degree_of(z)
    xy, yz = a.mul(x, y), a.mul(y, z)
    ss = [s for s in space(gx + gy - 1) if a.diff(s) == xy]
    ts = [t for t in space(gy + gz - 1) if a.diff(t) == yz]
    return {a.mul(s, z) ^ a.mul(x, t) for s in ss for t in ts}


# ---------------------------------------------------------------------------
# modules


@dataclass(frozen=True, eq=False)
class AInfModule:
    """Right A∞ module: ``ops[d]`` maps ``(m, a_d, ..., a_1)`` to a vector in P."""

    algebra: AInfAlgebra
    labels: tuple[str, ...]
    degrees: tuple[int, ...]
    ops: OpTable
    check_degrees: bool = True

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "degrees", tuple(int(x) for x in self.degrees))
        n = len(self.labels)
        if len(set(self.labels)) != n or len(self.degrees) != n:
            raise AInfError("module labels must be unique and match degrees")
        ops = _clean_ops(self.ops, n, 0, lambda d: d + 1)
        na = self.algebra.dim
        for d, table in ops.items():
            for key in table:
                if not 0 <= key[0] < n or any(not 0 <= k < na for k in key[1:]):
                    raise AInfError(f"module input {key} outside the basis")
        object.__setattr__(self, "ops", ops)
        if self.check_degrees:
            bad = module_degree_violations(self)
            if bad:
                raise AInfError(f"module degree bookkeeping fails: {bad[0]}")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def is_minimal(self) -> bool:
        return 0 not in self.ops

    def combined_ops(self) -> dict[int, dict[Key, int]]:
        """Ops of A ⊕ P on one index space (P shifted past A), arity = number of inputs."""
        na = self.algebra.dim
        out: dict[int, dict[Key, int]] = {d: dict(t) for d, t in self.algebra.ops.items()}
        for d, table in self.ops.items():
            t = out.setdefault(d + 1, {})
            for key, val in table.items():
                t[(key[0] + na,) + key[1:]] = val << na
        return out


def module_degree_violations(p: AInfModule) -> list[str]:
    a = p.algebra
    out = []
    for d, table in p.ops.items():
        for key, val in table.items():
            want = p.degrees[key[0]] + sum(a.degrees[k] for k in key[1:]) + 1 - d
            for o in bits_of(val):
                if p.degrees[o] != want:
                    out.append(f"μ^(1|{d}) on {p.labels[key[0]]} hits {p.labels[o]} of degree "
                               f"{p.degrees[o]}, expected {want}")
    return out


def check_module_relations(p: AInfModule, cap: Optional[int] = None) -> RelationReport:
    cap = cap or p.algebra.arity_cap
    na = p.algebra.dim
    res = relation_residues(p.combined_ops(), cap + 1)
    bad = [(t, v) for t, v in res.items() if t[0] >= na]
    if not bad:
        return RelationReport(True, cap)
    viol = sorted(((len(t) - 1, (p.labels[t[0] - na],) + tuple(p.algebra.labels[i] for i in t[1:]),
                    tuple(p.labels[o - na] for o in bits_of(v))) for t, v in bad), key=lambda x: (x[0], x[1]))
    return RelationReport(False, cap, tuple(viol), viol[0][0])


def free_module(a: AInfAlgebra, shift: int = 0, prefix: str = "") -> AInfModule:
    """A as a right module over itself, with degrees lowered by ``shift`` (P = A[shift])."""
    labels = tuple(f"{prefix}{l}" for l in a.labels)
    degs = tuple(g - shift for g in a.degrees)
    ops: dict[int, dict[Key, int]] = {}
    for d, table in a.ops.items():
        ops[d - 1] = dict(table)
    if 0 in ops and not ops[0]:
        del ops[0]
    return AInfModule(a, labels, degs, ops)


def truncated_module(p: AInfModule, top: int) -> AInfModule:
    """The submodule spanned by basis elements of degree ≤ top (closed for connective A)."""
    keep = [i for i, g in enumerate(p.degrees) if g <= top]
    pos = {i: k for k, i in enumerate(keep)}
    ops: dict[int, dict[Key, int]] = {}
    for d, table in p.ops.items():
        for key, val in table.items():
            if key[0] not in pos:
                continue
            nv = 0
            for o in bits_of(val):
                if o not in pos:
                    raise AInfError("degree truncation is not a submodule")
                nv |= 1 << pos[o]
            ops.setdefault(d, {})[(pos[key[0]],) + key[1:]] = nv
    return AInfModule(p.algebra, tuple(p.labels[i] for i in keep), tuple(p.degrees[i] for i in keep), ops)


def direct_sum_modules(parts: Sequence[AInfModule]) -> AInfModule:
    a = parts[0].algebra
    labels, degs, ops, off = [], [], {}, 0
    for i, p in enumerate(parts):
        if not p.algebra.same_structure(a):
            raise AInfError("summands over different algebras")
        labels.extend(f"{i}:{l}" for l in p.labels)
        degs.extend(p.degrees)
        for d, table in p.ops.items():
            t = ops.setdefault(d, {})
            for key, val in table.items():
                t[(key[0] + off,) + key[1:]] = val << off
        off += p.dim
    return AInfModule(a, tuple(labels), tuple(degs), ops)


def change_module_basis(p: AInfModule, blocks: Mapping[int, F2Matrix]) -> AInfModule:
    """Conjugate the module ops by a degree-preserving change of basis.

    ``blocks[g]`` is an invertible matrix on the degree-g part (in basis order).
    """
    idx: dict[int, list[int]] = {}
    for i, g in enumerate(p.degrees):
        idx.setdefault(g, []).append(i)
    fwd = [0] * p.dim  # new basis element i expressed in old basis
    inv = [0] * p.dim  # old basis element expressed in new basis
    for g, members in idx.items():
        m = blocks.get(g, F2Matrix.identity(len(members)))
        mi = m.inverse()
        cols, icols = m.columns(), mi.columns()
        for k, i in enumerate(members):
            fwd[i] = sum(1 << members[t] for t in bits_of(cols[k]))
            inv[i] = sum(1 << members[t] for t in bits_of(icols[k]))
    ops: dict[int, dict[Key, int]] = {}
    for d, table in p.ops.items():
        t = ops.setdefault(d, {})
        for i in range(p.dim):
            for old in bits_of(fwd[i]):
                for key, val in table.items():
                    if key[0] != old:
                        continue
                    nk = (i,) + key[1:]
                    t[nk] = t.get(nk, 0) ^ _apply(inv, val)
    return AInfModule(p.algebra, p.labels, p.degrees, ops, p.check_degrees)


@dataclass(frozen=True)
class FiltrationReport:
    ok: bool
    violations: tuple = ()
    # degree i → {degree-0 algebra label → action matrix on P^i}
    subquotients: dict = field(default_factory=dict)
    message: str = ""


def filtration_check(p: AInfModule) -> FiltrationReport:
    """Closure of the ascending degree filtration P^{≤i} under every stored op.

    Also returns each subquotient P^i = P^{≤i}/P^{≤i-1} with the action of the
    degree-0 part of the algebra through μ^{1|1}.
    """
    a = p.algebra
    if not a.is_connective():
        return FiltrationReport(False, (), {}, "algebra is not supported in non-positive degrees")
    if not a.is_minimal():
        return FiltrationReport(False, (), {}, "algebra is not minimal")
    viol = []
    for d, table in sorted(p.ops.items()):
        for key in sorted(table):
            val = table[key]
            gin = p.degrees[key[0]]
            for o in bits_of(val):
                if p.degrees[o] > gin:
                    viol.append((d, p.labels[key[0]], tuple(a.labels[k] for k in key[1:]), gin, p.degrees[o]))
    for msg in module_degree_violations(p):
        viol.append(("degree", msg))
    sub = {}
    if not viol:
        by_deg: dict[int, list[int]] = {}
        for i, g in enumerate(p.degrees):
            by_deg.setdefault(g, []).append(i)
        zero = [i for i, g in enumerate(a.degrees) if g == 0]
        for g, members in sorted(by_deg.items()):
            pos = {m: k for k, m in enumerate(members)}
            acts = {}
            for z in zero:
                cols = []
                for m in members:
                    v = p.ops.get(1, {}).get((m, z), 0)
                    cols.append(sum(1 << pos[o] for o in bits_of(v) if o in pos))
                acts[a.labels[z]] = F2Matrix.from_columns(len(members), cols)
            sub[g] = acts
    return FiltrationReport(not viol, tuple(viol), sub, "ok" if not viol else f"{len(viol)} violations")


# ---------------------------------------------------------------------------
# module morphism complex


@dataclass(frozen=True, eq=False)
class ModuleHomComplex:
    """Hom(M, N) truncated at bar length ``cap``.

    A basis element is a pair ``(key, n)``: the map sends the input
    ``key = (m, a_s, ..., a_1)`` to the basis element ``n`` of N and every
    other input to zero.  Its degree is deg n − deg m − Σ deg a_i + s.
    """

    source: AInfModule
    target: AInfModule
    cap: int
    complex: Complex
    index: Mapping[tuple[Key, int], tuple[int, int]]
    elements: Mapping[int, list[tuple[Key, int]]]

    def vector(self, degree: int, entries) -> int:
        v = 0
        for key, n in entries:
            g, pos = self.index[(tuple(key), n)]
            if g != degree:
                raise AInfError(f"entry {key}→{n} lies in degree {g}, not {degree}")
            v ^= 1 << pos
        return v

    def entries(self, degree: int, v: int) -> list[tuple[Key, int]]:
        els = self.elements.get(degree, [])
        return [els[i] for i in bits_of(v)]

    def identity(self) -> int:
        m = self.source
        if m is not self.target and (m.labels != self.target.labels or m.degrees != self.target.degrees):
            raise AInfError("identity needs Hom(M, M)")
        return self.vector(0, [((i,), i) for i in range(m.dim)])


def _words(alphabet: Sequence[int], s: int):
    return iproduct(alphabet, repeat=s)


def module_hom_complex(m: AInfModule, n: AInfModule, length_cap: int,
                       normalize: Optional[bool] = None) -> ModuleHomComplex:
    a = m.algebra
    if not n.algebra.same_structure(a):
        raise AInfError("modules over different algebras")
    if normalize is None:
        normalize = a.unit is not None
    alphabet = [i for i in range(a.dim) if not (normalize and i == a.unit)]
    basis: dict[int, list[str]] = {}
    index: dict[tuple[Key, int], tuple[int, int]] = {}
    elements: dict[int, list[tuple[Key, int]]] = {}
    for s in range(length_cap + 1):
        for word in _words(alphabet, s):
            wdeg = sum(a.degrees[x] for x in word)
            for mi in range(m.dim):
                key = (mi,) + tuple(word)
                for ni in range(n.dim):
                    k = n.degrees[ni] - m.degrees[mi] - wdeg + s
                    lab = basis.setdefault(k, [])
                    index[(key, ni)] = (k, len(lab))
                    elements.setdefault(k, []).append((key, ni))
                    lab.append(f"{m.labels[mi]}|{','.join(a.labels[x] for x in word)}->{n.labels[ni]}")
    m_inner = _output_index({d + 1: {k: v for k, v in t.items()} for d, t in m.ops.items()})
    a_inner = _output_index(a.ops)
    n_by_first: dict[int, list[tuple[Key, int]]] = {}
    for d, table in n.ops.items():
        for key, val in table.items():
            n_by_first.setdefault(key[0], []).append((key[1:], val))
    unit = a.unit if normalize else None

    def allowed(t: Key) -> bool:
        return len(t) - 1 <= length_cap and (unit is None or unit not in t[1:])

    diff = {}
    for k, els in elements.items():
        if k + 1 not in basis:
            continue
        cols = []
        for key, ni in els:
            img = 0

            def hit(t, nv):
                nonlocal img
                if not allowed(t):
                    return
                for o in bits_of(nv):
                    g, pos = index[(t, o)]
                    img ^= 1 << pos

            # t∘(μ_M ⊗ 1): inner module op whose output contains key[0]
            for _, jkey in m_inner.get(key[0], ()):
                hit(jkey + key[1:], 1 << ni)
            # μ_N(t(...), tail)
            for tail, val in n_by_first.get(ni, ()):
                hit(key + tail, val)
            # internal algebra insertions
            for p in range(1, len(key)):
                for _, ikey in a_inner.get(key[p], ()):
                    hit(key[:p] + ikey + key[p + 1:], 1 << ni)
            cols.append(img)
        diff[k] = F2Matrix.from_columns(len(basis[k + 1]), cols)
    c = Complex.build(basis, diff)
    return ModuleHomComplex(m, n, length_cap, c, index, elements)


def compose_morphisms(hl: ModuleHomComplex, hr: ModuleHomComplex, hout: ModuleHomComplex,
                      dl: int, t: int, dr: int, u: int) -> int:
    """(t∘u)(m, a_s..a_1) = Σ t(u(m, a_s..a_{s-ℓ+1}), a_{s-ℓ}..a_1), truncated at the output cap.

    ``u`` ∈ Hom(L, M) of degree dr, ``t`` ∈ Hom(M, N) of degree dl.
    """
    t_by_first: dict[int, list[tuple[Key, int]]] = {}
    for key, n in hl.entries(dl, t):
        t_by_first.setdefault(key[0], []).append((key[1:], n))
    out = 0
    for key, mval in hr.entries(dr, u):
        for tail, n in t_by_first.get(mval, ()):
            full = key + tail
            if len(full) - 1 > hout.cap:
                continue
            loc = hout.index.get((full, n))
            if loc is None:
                continue
            out ^= 1 << loc[1]
    return out


# ---------------------------------------------------------------------------
# matrix coefficients


def tensor_with_endomorphisms(v_dim: int, a: AInfAlgebra) -> AInfAlgebra:
    """End(V) ⊗ A with μ^d((φ_d⊗x_d), …, (φ_1⊗x_1)) = (φ_d∘…∘φ_1) ⊗ μ^d(x_d, …, x_1).

    Basis element ``E{i}{j}⊗x`` is the matrix unit sending e_j to e_i.
    """
    if v_dim < 1:
        raise AInfError("V must be nonzero")
    na = a.dim

    def pos(i, j, x):
        return (i * v_dim + j) * na + x

    labels, degs = [], []
    for i in range(v_dim):
        for j in range(v_dim):
            for x in range(na):
                labels.append(f"E{i}{j}⊗{a.labels[x]}")
                degs.append(a.degrees[x])
    ops: dict[int, dict[Key, int]] = {}
    for d, table in a.ops.items():
        t = ops.setdefault(d, {})
        for chain in iproduct(range(v_dim), repeat=d + 1):
            # chain = (i_d, ..., i_1, i_0): input k (from the left) is E_{chain[k], chain[k+1]}
            for key, val in table.items():
                inp = tuple(pos(chain[k], chain[k + 1], key[k]) for k in range(d))
                out = 0
                for o in bits_of(val):
                    out |= 1 << pos(chain[0], chain[-1], o)
                t[inp] = out
    unit = None
    if v_dim == 1 and a.unit is not None:
        unit = a.unit
    return AInfAlgebra(tuple(labels), tuple(degs), ops, unit, a.arity_cap)


def truncated_polynomial(n: int, degree: int = 0, var: str = "x") -> AInfAlgebra:
    """F2[x]/x^n with x in the given degree (only μ²)."""
    labels = ["1"] + [var if k == 1 else f"{var}^{k}" for k in range(1, n)]
    degs = [0] + [k * degree for k in range(1, n)]
    prod = {}
    for i in range(n):
        for j in range(n):
            if i + j < n:
                prod[(i, j)] = 1 << (i + j)
    return AInfAlgebra(tuple(labels), tuple(degs), {2: prod}, 0)


def group_algebra_cyclic(order: int) -> AInfAlgebra:
    """F2[ℤ/order] in degree 0 with basis g^0..g^{order-1}."""
    labels = ["1"] + [("g" if k == 1 else f"g^{k}") for k in range(1, order)]
    prod = {(i, j): 1 << ((i + j) % order) for i in range(order) for j in range(order)}
    return AInfAlgebra(tuple(labels), (0,) * order, {2: prod}, 0)


def ground_algebra() -> AInfAlgebra:
    return AInfAlgebra(("1",), (0,), {2: {(0, 0): 1}}, 0)


def dga_from_ainf(a: AInfAlgebra) -> DGAlgebra:
    if any(d not in (1, 2) for d in a.ops):
        raise AInfError("only arities 1 and 2 describe a DG algebra")
    d = {k[0]: v for k, v in a.ops.get(1, {}).items()}
    return DGAlgebra(a.labels, a.degrees, d, dict(a.ops.get(2, {})), a.unit)
