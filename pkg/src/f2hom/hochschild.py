"""A∞ bimodules and truncated Hochschild homology over F2.

A bimodule stores ``μ^{r|1|s}`` under ``ops[(r, s)]``, keyed by the input
tuple in written order ``(x_r, ..., x_1, b, y_1, ..., y_s)``.

The cyclic bar complex has basis words ``ψ ⊗ x^d ⊗ … ⊗ x^1`` (stored as
``(ψ, x^d, ..., x^1)``) of total degree deg ψ + Σ (deg x^i − 1).  Its
differential applies a bimodule operation that wraps around ψ, taking the
last r and first s algebra letters, or an algebra operation on a block of
consecutive letters.  Neither family lengthens a word, so truncating at
bar length ``cap`` gives a subcomplex and d² = 0 holds exactly.
HH_n is reported as cohomology in degree −n.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct
from typing import Mapping, Optional, Sequence

from .ainfty import AInfAlgebra, AInfError, RelationReport, _clean_ops, relation_residues
from .chain import Complex
from .f2linalg import F2Matrix, Reducer, bits_of

Key = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class AInfBimodule:
    algebra: AInfAlgebra
    labels: tuple[str, ...]
    degrees: tuple[int, ...]
    ops: Mapping[tuple[int, int], Mapping[Key, int]]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "degrees", tuple(int(g) for g in self.degrees))
        n, na = len(self.labels), self.algebra.dim
        if len(set(self.labels)) != n or len(self.degrees) != n:
            raise AInfError("bimodule labels must be unique and match degrees")
        clean: dict[tuple[int, int], dict[Key, int]] = {}
        for (r, s), table in self.ops.items():
            r, s = int(r), int(s)
            if r < 0 or s < 0:
                raise AInfError("negative arity")
            t = _clean_ops({1: table}, n, 1, lambda _d: r + s + 1).get(1, {})
            for key in t:
                if not 0 <= key[r] < n or any(not 0 <= x < na for i, x in enumerate(key) if i != r):
                    raise AInfError(f"bimodule input {key} outside the basis")
            if t:
                clean[(r, s)] = t
        object.__setattr__(self, "ops", clean)
        bad = bimodule_degree_violations(self)
        if bad:
            raise AInfError(f"bimodule degree bookkeeping fails: {bad[0]}")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def combined_ops(self) -> dict[int, dict[Key, int]]:
        """Ops of A ⊕ B on one index space (B shifted past A), keyed by total arity."""
        na = self.algebra.dim
        out: dict[int, dict[Key, int]] = {d: dict(t) for d, t in self.algebra.ops.items()}
        for (r, s), table in self.ops.items():
            t = out.setdefault(r + s + 1, {})
            for key, val in table.items():
                t[key[:r] + (key[r] + na,) + key[r + 1:]] = val << na
        return out

    def one_sided(self) -> bool:
        return all(r == 0 or s == 0 for r, s in self.ops)


def bimodule_degree_violations(b: AInfBimodule) -> list[str]:
    a = b.algebra
    out = []
    for (r, s), table in b.ops.items():
        for key, val in table.items():
            want = b.degrees[key[r]] + sum(a.degrees[x] for i, x in enumerate(key) if i != r) + 1 - r - s
            for o in bits_of(val):
                if b.degrees[o] != want:
                    out.append(f"μ^({r}|1|{s}) hits {b.labels[o]} of degree {b.degrees[o]}, expected {want}")
    return out


def check_bimodule_relations(b: AInfBimodule, cap: Optional[int] = None) -> RelationReport:
    cap = cap or b.algebra.arity_cap
    na = b.algebra.dim
    res = relation_residues(b.combined_ops(), cap)
    bad = [(t, v) for t, v in res.items() if any(x >= na for x in t)]
    if not bad:
        return RelationReport(True, cap)

    def lab(x):
        return b.labels[x - na] if x >= na else b.algebra.labels[x]

    viol = sorted(((len(t), tuple(lab(x) for x in t), tuple(b.labels[o - na] for o in bits_of(v)))
                   for t, v in bad), key=lambda x: (x[0], x[1]))
    return RelationReport(False, cap, tuple(viol), viol[0][0])


def diagonal_bimodule(a: AInfAlgebra) -> AInfBimodule:
    ops: dict[tuple[int, int], dict[Key, int]] = {}
    for d, table in a.ops.items():
        for r in range(d):
            ops[(r, d - 1 - r)] = dict(table)
    return AInfBimodule(a, a.labels, a.degrees, ops)


def sub_bimodule(b: AInfBimodule, vectors: Sequence[int], prefix: str = "i") -> tuple[AInfBimodule, "BimoduleMorphism"]:
    """The sub-bimodule spanned by ``vectors`` and its strict inclusion."""
    red = Reducer()
    for k, v in enumerate(vectors):
        if not red.add(v, 1 << k):
            raise AInfError("vectors are dependent")
    degs = []
    for v in vectors:
        gs = {b.degrees[i] for i in bits_of(v)}
        if len(gs) != 1:
            raise AInfError("sub-bimodule vectors must be homogeneous")
        degs.append(gs.pop())
    ops: dict[tuple[int, int], dict[Key, int]] = {}
    for (r, s), table in b.ops.items():
        t = ops.setdefault((r, s), {})
        # expand the B slot multilinearly over each spanning vector
        by_rest: dict[tuple[Key, Key], dict[int, int]] = {}
        for key, val in table.items():
            by_rest.setdefault((key[:r], key[r + 1:]), {})[key[r]] = val
        for (left, right), col in by_rest.items():
            for k, v in enumerate(vectors):
                out = 0
                for i in bits_of(v):
                    out ^= col.get(i, 0)
                if not out:
                    continue
                rem, comb = red.reduce(out)
                if rem:
                    raise AInfError("span is not closed under the bimodule operations")
                t[left + (k,) + right] = comb
    labels = tuple(f"{prefix}{k}" for k in range(len(vectors)))
    sub = AInfBimodule(b.algebra, labels, tuple(degs), ops)
    return sub, BimoduleMorphism(sub, b, {(0, 0): {(k,): v for k, v in enumerate(vectors)}})


def generated_ideal(a: AInfAlgebra, vectors: Sequence[int], cap: Optional[int] = None) -> list[int]:
    """Homogeneous basis of the smallest subspace containing the homogeneous
    parts of ``vectors`` and closed under every op with one input in it."""
    cap = cap or a.arity_cap
    red = Reducer()
    basis: list[int] = []

    def push(v):
        if v and red.add(v, 0):
            basis.append(v)

    for v in vectors:
        by_deg: dict[int, int] = {}
        for i in bits_of(v):
            by_deg[a.degrees[i]] = by_deg.get(a.degrees[i], 0) | 1 << i
        for piece in by_deg.values():
            push(piece)
    done = 0
    while done < len(basis):
        v = basis[done]
        done += 1
        for d, table in a.ops.items():
            if d > cap:
                continue
            seen = set()
            for key in table:
                for slot, x in enumerate(key):
                    if not (v >> x) & 1:
                        continue
                    rest = key[:slot] + (None,) + key[slot + 1:]
                    if rest in seen:
                        continue
                    seen.add(rest)
                    # μ with v in this slot, expanded over the components of v
                    out = 0
                    for i in bits_of(v):
                        out ^= table.get(key[:slot] + (i,) + key[slot + 1:], 0)
                    push(out)
    return basis


# ---------------------------------------------------------------------------
# morphisms


@dataclass(frozen=True, eq=False)
class BimoduleMorphism:
    """Components f^{r|1|s} keyed like bimodule ops; degree −r−s."""

    source: AInfBimodule
    target: AInfBimodule
    components: Mapping[tuple[int, int], Mapping[Key, int]]

    def __post_init__(self):
        comp = {}
        for rs, table in self.components.items():
            t = {tuple(k): v for k, v in table.items() if v}
            if t:
                comp[tuple(rs)] = t
        object.__setattr__(self, "components", comp)

    def is_strict(self) -> bool:
        return set(self.components) <= {(0, 0)}

    @classmethod
    def identity(cls, b: AInfBimodule) -> "BimoduleMorphism":
        return cls(b, b, {(0, 0): {(i,): 1 << i for i in range(b.dim)}})

    @classmethod
    def zero(cls, b: AInfBimodule, c: AInfBimodule) -> "BimoduleMorphism":
        return cls(b, c, {})

    @classmethod
    def strict(cls, b: AInfBimodule, c: AInfBimodule, images: Sequence[int]) -> "BimoduleMorphism":
        return cls(b, c, {(0, 0): {(i,): v for i, v in enumerate(images)}})

    def compose_strict(self, other: "BimoduleMorphism") -> "BimoduleMorphism":
        """self ∘ other for strict morphisms."""
        if not (self.is_strict() and other.is_strict()):
            raise AInfError("only strict morphisms compose here")
        f = self.components.get((0, 0), {})
        g = other.components.get((0, 0), {})
        images = []
        for i in range(other.source.dim):
            out = 0
            for j in bits_of(g.get((i,), 0)):
                out ^= f.get((j,), 0)
            images.append(out)
        return BimoduleMorphism.strict(other.source, self.target, images)

    def violations(self, cap: Optional[int] = None) -> list[str]:
        """Degree errors and failures of Σ f(…μ…) = Σ μ(…f…) on input tuples up to arity cap."""
        src, tgt, a = self.source, self.target, self.source.algebra
        if not tgt.algebra.same_structure(a):
            return ["source and target are over different algebras"]
        cap = cap or a.arity_cap
        out = []
        for (r, s), table in self.components.items():
            for key, val in table.items():
                want = src.degrees[key[r]] + sum(a.degrees[x] for i, x in enumerate(key) if i != r) - r - s
                if any(tgt.degrees[o] != want for o in bits_of(val)):
                    out.append(f"f^({r}|1|{s}) on {key} has the wrong degree")
        if out:
            return out
        na = a.dim
        acc: dict[Key, int] = {}

        def add(t, v):
            if v:
                acc[t] = acc.get(t, 0) ^ v

        src_inner: dict[int, list[tuple[int, Key]]] = {}
        for (r, s), table in src.ops.items():
            for key, val in table.items():
                for o in bits_of(val):
                    src_inner.setdefault(o, []).append((r, key))
        alg_inner: dict[int, list[Key]] = {}
        for d, table in a.ops.items():
            for key, val in table.items():
                for o in bits_of(val):
                    alg_inner.setdefault(o, []).append(key)

        def mark(key, r):
            return key[:r] + (key[r] + na,) + key[r + 1:]

        # f after an operation
        for (r, s), table in self.components.items():
            for key, val in table.items():
                for r2, ikey in src_inner.get(key[r], ()):
                    t = key[:r] + mark(ikey, r2) + key[r + 1:]
                    if len(t) <= cap:
                        add(t, val)
                for j, x in enumerate(key):
                    if j == r:
                        continue
                    for ikey in alg_inner.get(x, ()):
                        t = mark(key, r)
                        t = t[:j] + ikey + t[j + 1:]
                        if len(t) <= cap:
                            add(t, val)
        # an operation after f
        f_inner: dict[int, list[tuple[int, Key]]] = {}
        for (r, s), table in self.components.items():
            for key, val in table.items():
                for o in bits_of(val):
                    f_inner.setdefault(o, []).append((r, key))
        for (r, s), table in tgt.ops.items():
            for key, val in table.items():
                for r2, fkey in f_inner.get(key[r], ()):
                    t = key[:r] + mark(fkey, r2) + key[r + 1:]
                    if len(t) <= cap:
                        add(t, val)
        for t, v in sorted(acc.items()):
            if v:
                out.append(f"morphism equation fails on input {t}")
        return out


# ---------------------------------------------------------------------------
# cyclic bar complex


@dataclass(frozen=True, eq=False)
class CyclicBarComplex:
    algebra: AInfAlgebra
    bimodule: AInfBimodule
    cap: int
    normalized: bool
    words: Mapping[int, list[Key]]
    index: Mapping[Key, tuple[int, int]]
    columns: Mapping[int, list[int]]
    horizon: Optional[int]

    def complex(self) -> Complex:
        basis = {g: [self.word_label(w) for w in ws] for g, ws in self.words.items()}
        diff = {g: F2Matrix.from_columns(len(self.words[g + 1]), cols)
                for g, cols in self.columns.items() if g + 1 in self.words}
        return Complex.build(basis, diff)

    def word_label(self, w: Key) -> str:
        a, b = self.algebra, self.bimodule
        return "⊗".join([b.labels[w[0]]] + [a.labels[x] for x in w[1:]])

    def rank(self, g: int) -> int:
        red = Reducer()
        return sum(1 for c in self.columns.get(g, ()) if red.add(c, 0))

    def cohomology_dims(self) -> dict[int, int]:
        ranks = {g: self.rank(g) for g in self.words}
        out = {}
        for g, ws in self.words.items():
            h = len(ws) - ranks.get(g, 0) - ranks.get(g - 1, 0)
            if h:
                out[g] = h
        return out

    def is_exact_degree(self, g: int) -> bool:
        """True when truncation cannot change cohomology in degree g."""
        return self.horizon is not None and g >= self.horizon

    def vector(self, g: int, words: Sequence[Key]) -> int:
        v = 0
        for w in words:
            dg, pos = self.index[tuple(w)]
            if dg != g:
                raise AInfError(f"word {w} has degree {dg}, not {g}")
            v ^= 1 << pos
        return v

    def differential_of(self, g: int, v: int) -> int:
        cols = self.columns.get(g)
        if not cols:
            return 0
        out = 0
        for i in bits_of(v):
            out ^= cols[i]
        return out


def _alphabet(a: AInfAlgebra, normalize: bool) -> list[int]:
    return [i for i in range(a.dim) if not (normalize and i == a.unit)]


def cc_complex(a: AInfAlgebra, b: Optional[AInfBimodule] = None, cap: int = 6,
               normalize: Optional[bool] = None) -> CyclicBarComplex:
    b = b or diagonal_bimodule(a)
    if not b.algebra.same_structure(a):
        raise AInfError("bimodule is over a different algebra")
    if normalize is None:
        normalize = a.unit is not None
    if normalize and a.unit is None:
        raise AInfError("normalization needs a strict unit")
    alphabet = _alphabet(a, normalize)
    words: dict[int, list[Key]] = {}
    index: dict[Key, tuple[int, int]] = {}
    for d in range(cap + 1):
        for letters in iproduct(alphabet, repeat=d):
            shift = sum(a.degrees[x] - 1 for x in letters)
            for psi in range(b.dim):
                w = (psi,) + letters
                g = b.degrees[psi] + shift
                lst = words.setdefault(g, [])
                index[w] = (g, len(lst))
                lst.append(w)
    unit = a.unit if normalize else None
    bops = sorted(b.ops.items())
    aops = sorted(a.ops.items())
    columns: dict[int, list[int]] = {}
    for g, ws in words.items():
        if g + 1 not in words:
            continue
        cols = []
        for w in ws:
            psi, xs = w[0], w[1:]
            d = len(xs)
            img = 0
            for (r, s), table in bops:
                if r + s > d:
                    continue
                key = xs[d - r:] + (psi,) + xs[:s]
                val = table.get(key)
                if not val:
                    continue
                rest = xs[s:d - r]
                for o in bits_of(val):
                    img ^= 1 << index[(o,) + rest][1]
            for k, table in aops:
                for i in range(d - k + 1):
                    val = table.get(xs[i:i + k])
                    if not val:
                        continue
                    for o in bits_of(val):
                        if o == unit:
                            continue
                        img ^= 1 << index[(psi,) + xs[:i] + (o,) + xs[i + k:]][1]
            cols.append(img)
        columns[g] = cols
    # each letter lowers the degree by at least m, so degree-g words have
    # length ≤ (max deg ψ − g)/m; degrees g−1 and g complete ⇒ H^g exact
    horizon = None
    if b.dim and not alphabet:
        horizon = min(b.degrees)
    elif b.dim and all(a.degrees[x] <= 0 for x in alphabet):
        m = min(1 - a.degrees[x] for x in alphabet)
        horizon = max(b.degrees) + 1 - m * cap
    return CyclicBarComplex(a, b, cap, normalize, words, index, columns, horizon)


@dataclass(frozen=True)
class HHReport:
    cap: int
    dims: dict  # homological degree n → dim at the given cap
    previous: dict  # same at cap − 1
    stable: dict  # n → the two caps agree
    exact: dict  # n → certified by the validity horizon

    def stabilized(self, n: int) -> bool:
        return self.stable.get(n, True)


def hh_homology(a: AInfAlgebra, b: Optional[AInfBimodule] = None, cap: int = 6,
                normalize: Optional[bool] = None) -> HHReport:
    b = b or diagonal_bimodule(a)
    hi = cc_complex(a, b, cap, normalize)
    lo = cc_complex(a, b, cap - 1, normalize) if cap >= 1 else None
    dh = {-g: v for g, v in hi.cohomology_dims().items()}
    dl = {-g: v for g, v in lo.cohomology_dims().items()} if lo else {}
    degrees = set(dh) | set(dl)
    stable = {n: dh.get(n, 0) == dl.get(n, 0) for n in sorted(degrees)}
    exact = {n: hi.is_exact_degree(-n) for n in sorted(degrees)}
    return HHReport(cap, dh, dl, stable, exact)


def cc_map(f: BimoduleMorphism, source: CyclicBarComplex, target: CyclicBarComplex) -> dict[int, F2Matrix]:
    """Chain map ψ⊗x^d⊗…⊗x^1 ↦ Σ f^{r|1|s}(x^r..x^1, ψ, x^d..x^{d-s+1}) ⊗ x^{d-s}⊗…⊗x^{r+1}."""
    if f.source is not source.bimodule or f.target is not target.bimodule:
        if not (f.source.labels == source.bimodule.labels and f.target.labels == target.bimodule.labels):
            raise AInfError("morphism does not match the complexes")
    bad = f.violations(source.cap + 1)
    if bad:
        raise AInfError("not a bimodule morphism: " + bad[0])
    if source.normalized != target.normalized:
        raise AInfError("complexes use different normalizations")
    unit = source.algebra.unit if source.normalized else None
    comps = sorted(f.components.items())
    out = {}
    for g, ws in source.words.items():
        cols = []
        for w in ws:
            psi, xs = w[0], w[1:]
            d = len(xs)
            img = 0
            for (r, s), table in comps:
                if r + s > d:
                    continue
                val = table.get(xs[d - r:] + (psi,) + xs[:s])
                if not val:
                    continue
                rest = xs[s:d - r]
                if unit is not None and unit in rest:
                    continue
                for o in bits_of(val):
                    loc = target.index.get((o,) + rest)
                    if loc is not None:
                        img ^= 1 << loc[1]
            cols.append(img)
        rows = len(target.words.get(g, ()))
        out[g] = F2Matrix.from_columns(rows, cols)
    return out
