"""Seeded generators of random small instances.

Every generator takes a ``random.Random`` so that CLI suites and property
tests are reproducible from a single seed.
"""

from __future__ import annotations

import random
from typing import Optional, Sequence

from .ainfty import (
    AInfAlgebra,
    AInfError,
    AInfModule,
    DGAlgebra,
    change_module_basis,
    check_ainf_relations,
    dga_from_ainf,
    direct_sum_modules,
    free_module,
    group_algebra_cyclic,
    massey_example,
    minimal_model,
    truncated_module,
    truncated_polynomial,
)
from .chain import ChainMap, Complex
from .f2linalg import F2Matrix, F2Vector, Reducer, bits_of, kernel_basis, quotient_basis
from .simplicial import (
    LocalSystem,
    Presentation,
    SimplicialComplex,
    check_relators,
    edge_path_group,
    simplex_label,
)


def random_matrix(rng: random.Random, rows: int, cols: int, density: float = 0.5) -> F2Matrix:
    data = []
    for _ in range(rows):
        r = 0
        for j in range(cols):
            if rng.random() < density:
                r |= 1 << j
        data.append(r)
    return F2Matrix(rows, cols, tuple(data))


def random_invertible(rng: random.Random, n: int) -> F2Matrix:
    while True:
        m = random_matrix(rng, n, n)
        if m.is_invertible():
            return m


def random_complex(rng: random.Random, lo: int = 0, hi: int = 2, max_dim: int = 2, prefix: str = "e") -> Complex:
    """Random finite complex supported in degrees lo..hi."""
    dims = {k: rng.randint(0, max_dim) for k in range(lo, hi + 1)}
    diff = {}
    prev = None
    for k in range(lo, hi):
        n0, n1 = dims[k], dims[k + 1]
        cand = random_matrix(rng, n1, n0)
        if prev is not None and n0:
            im = [F2Vector(n0, c) for c in prev.columns()]
            proj, sec = quotient_basis(im, n0)
            cand = cand @ sec @ proj
        diff[k] = cand
        prev = cand
    return Complex.from_dims(dims, diff, prefix)


def random_chain_automorphism(rng: random.Random, c: Complex, tries: int = 50) -> ChainMap:
    """A chain automorphism of the form g + h∘d + d∘h with g a degreewise automorphism
    commuting with d when possible; falls back to the identity plus a null-homotopic term."""
    for _ in range(tries):
        h = {k: random_matrix(rng, c.dim(k - 1), c.dim(k), 0.3) for k in c.degrees()}
        maps = {}
        ok = True
        for k in c.degrees():
            m = F2Matrix.identity(c.dim(k))
            if c.dim(k - 1):
                m = m + c.d(k - 1) @ h[k]
            if c.dim(k + 1) and (k + 1) in h:
                m = m + h[k + 1] @ c.d(k)
            if not m.is_invertible():
                ok = False
                break
            maps[k] = m
        if ok:
            return ChainMap(c, c, maps)
    return ChainMap.identity(c)


def random_permutation(rng: random.Random, n: int) -> tuple[int, ...]:
    p = list(range(n))
    rng.shuffle(p)
    return tuple(p)


def random_matrix_rep(rng: random.Random, pres: Presentation, n: int, tries: int = 400) -> dict[str, F2Matrix]:
    """Generator images in GL(n, F2) satisfying every relator (rejection sampling).

    Falls back to switching generators to the identity one at a time, so a
    valid (possibly less interesting) representation is always returned.
    """
    gens = list(pres.generators)
    for _ in range(tries):
        images = {g: random_invertible(rng, n) for g in gens}
        if not check_relators(pres, images):
            return images
    # deterministic fallback: keep a random subset trivial
    for _ in range(tries):
        images = {g: (random_invertible(rng, n) if rng.random() < 0.5 else F2Matrix.identity(n)) for g in gens}
        if not check_relators(pres, images):
            return images
    return {g: F2Matrix.identity(n) for g in gens}


def random_perm_rep(rng: random.Random, pres: Presentation, n: int, tries: int = 400) -> dict[str, tuple[int, ...]]:
    gens = list(pres.generators)
    ident = tuple(range(n))
    for attempt in range(2 * tries):
        keep = attempt >= tries
        perms = {g: (ident if keep and rng.random() < 0.5 else random_permutation(rng, n)) for g in gens}
        if all(pres.evaluate_permutation(r, perms, n) == ident for r in pres.relators):
            return perms
    return {g: ident for g in gens}


def random_gauge(rng: random.Random, e: LocalSystem) -> LocalSystem:
    return e.gauge([random_chain_automorphism(rng, f) for f in e.fibres])


def random_local_system(rng: random.Random, k: SimplicialComplex, rank: int = 2,
                        fibre: Optional[Complex] = None, gauge: bool = True) -> LocalSystem:
    """Flat system: monodromy from a random representation, tensored with a fibre complex.

    Works on disconnected complexes by choosing a representation per
    component.  The degree-0 rank-``rank`` coefficient space is tensored
    with ``fibre`` (default: F2 in degree 0).
    """
    fibre = fibre or Complex.ground()
    mats: dict[tuple[int, int], F2Matrix] = {}
    for comp in k.components():
        sub, relabel = _induced(k, comp)
        pres = edge_path_group(sub, 0)
        images = random_matrix_rep(rng, pres, rank)
        inv = {g: m.inverse() for g, m in images.items()}
        for (a, b), w in pres.edge_words.items():
            m = pres.evaluate(w, images, inv) if w else F2Matrix.identity(rank)
            mats[(relabel[a], relabel[b])] = m
    return _tensor_system(k, rank, mats, fibre, rng if gauge else None)


def _induced(k: SimplicialComplex, comp: Sequence[int]) -> tuple[SimplicialComplex, dict[int, int]]:
    local = {v: i for i, v in enumerate(comp)}
    simp = [tuple(local[v] for v in s) for s in k.simplices if s[0] in local]
    return SimplicialComplex(len(comp), frozenset(simp)), {i: v for v, i in local.items()}


def _tensor_system(k: SimplicialComplex, rank: int, mats, fibre: Complex, rng: Optional[random.Random]) -> LocalSystem:
    """Coefficients F2^rank ⊗ fibre with transport M ⊗ id."""
    labels = {q: [f"x{i}.{l}" for i in range(rank) for l in fibre.space.labels(q)] for q in fibre.degrees()}
    diff = {}
    for q in fibre.degrees():
        d = fibre.d(q)
        if fibre.dim(q + 1):
            diff[q] = kron(F2Matrix.identity(rank), d)
    big = Complex.build(labels, diff)
    tr = {}
    for e in k.edges:
        m = mats.get(e, F2Matrix.identity(rank))
        tr[e] = ChainMap(big, big, {q: kron(m, F2Matrix.identity(fibre.dim(q))) for q in fibre.degrees()})
    sys_ = LocalSystem(k, (big,) * k.n, tr)
    return random_gauge(rng, sys_) if rng is not None else sys_


def kron(a: F2Matrix, b: F2Matrix) -> F2Matrix:
    """Kronecker product; row index i*b.rows + k, column index j*b.cols + l."""
    rows = []
    for ra in a.data:
        for rb in b.data:
            r = 0
            x = ra
            while x:
                low = x & -x
                j = low.bit_length() - 1
                r |= rb << (j * b.cols)
                x ^= low
            rows.append(r)
    return F2Matrix(a.rows * b.rows, a.cols * b.cols, tuple(rows))


# ---------------------------------------------------------------------------
# DG algebras and A∞ modules


def sub_dga(a: DGAlgebra, vectors: Sequence[int], labels: Sequence[str], unit: Optional[int] = None) -> DGAlgebra:
    """The DG algebra on the span of homogeneous ``vectors`` (closed under d and product)."""
    red = Reducer()
    for k, v in enumerate(vectors):
        if not red.add(v, 1 << k):
            raise AInfError("vectors are dependent")

    def coords(v):
        rem, comb = red.reduce(v)
        if rem:
            raise AInfError("subspace is not closed")
        return comb

    degs = []
    for v in vectors:
        (g,) = {a.degrees[i] for i in bits_of(v)}
        degs.append(g)
    d = {k: coords(a.diff(v)) for k, v in enumerate(vectors)}
    prod = {}
    for i, u in enumerate(vectors):
        for j, v in enumerate(vectors):
            prod[(i, j)] = coords(a.mul(u, v))
    return DGAlgebra(tuple(labels), tuple(degs), d, prod, unit)


def random_basis_change(rng: random.Random, a: DGAlgebra) -> DGAlgebra:
    """Same DGA in a random homogeneous basis; the unit stays a basis element."""
    vectors, labels, unit = [], [], None
    for g, idx in sorted(a.degree_blocks().items()):
        m = random_invertible(rng, len(idx))
        cols = [sum(1 << idx[t] for t in bits_of(c)) for c in m.columns()]
        red = Reducer()
        if a.unit is not None and a.unit in idx:
            cols.insert(0, 1 << a.unit)
        for c in cols:
            if red.add(c, 0):
                if a.unit is not None and c == 1 << a.unit:
                    unit = len(vectors)
                    labels.append("1")
                else:
                    labels.append(f"e{len(vectors)}")
                vectors.append(c)
    return sub_dga(a, vectors, labels, unit)


def cochain_dga(k: SimplicialComplex) -> DGAlgebra:
    """Simplicial cochains with the Alexander–Whitney cup product, unit = sum of vertex duals."""
    simp = sorted(k.simplices, key=lambda s: (len(s), s))
    pos = {s: i for i, s in enumerate(simp)}
    d = {}
    for s in simp:
        v = 0
        for t in k.cofaces(s):
            v ^= 1 << pos[t]
        d[pos[s]] = v
    prod = {}
    for s in simp:
        for t in simp:
            if s[-1] == t[0]:
                u = s + t[1:]
                if u in pos:
                    prod[(pos[s], pos[t])] = 1 << pos[u]
    big = DGAlgebra(tuple(simplex_label(s) for s in simp), tuple(len(s) - 1 for s in simp), d, prod)
    unit = sum(1 << pos[(v,)] for v in range(k.n))
    vectors = [unit] + [1 << i for i in range(len(simp)) if i != pos[(0,)]]
    labels = ["1"] + [simplex_label(s) for s in simp if s != (0,)]
    return sub_dga(big, vectors, labels, 0)


def endomorphism_dga(v: Complex, flag: bool = False) -> DGAlgebra:
    """End(v) with composition product and δφ = d∘φ + φ∘d; unit the identity.

    With ``flag=True`` only the maps preserving the flag of the basis
    ordered by ascending degree are kept (matrix units E_ij with i ≥ j);
    this sub-DGA lives in non-negative degrees.
    """
    basis = [(g, j) for g in v.degrees() for j in range(v.dim(g))]
    n = len(basis)
    where = {b: i for i, b in enumerate(basis)}
    dmat = [[0] * n for _ in range(n)]  # dmat[i][j] = coefficient of e_i in d e_j
    for j, (g, jj) in enumerate(basis):
        col = v.d(g).column(jj) if v.dim(g + 1) else 0
        for t in bits_of(col):
            dmat[where[(g + 1, t)]][j] = 1
    units = [(i, j) for i in range(n) for j in range(n) if i >= j or not flag]
    pos = {u: k for k, u in enumerate(units)}
    degs = [basis[i][0] - basis[j][0] for i, j in units]
    d, prod = {}, {}
    for (i, j), k in pos.items():
        out = 0
        for r in range(n):
            if dmat[r][i]:
                out ^= 1 << pos[(r, j)]
            if dmat[j][r]:
                out ^= 1 << pos[(i, r)]
        d[k] = out
        for (i2, j2), k2 in pos.items():
            if j == i2:
                prod[(k, k2)] = 1 << pos[(i, j2)]
    labels = [f"E{i}{j}" for i, j in units]
    big = DGAlgebra(tuple(labels), tuple(degs), d, prod)
    ident = sum(1 << pos[(i, i)] for i in range(n))
    vectors = [ident] + [1 << k for (i, j), k in pos.items() if (i, j) != (0, 0)]
    return sub_dga(big, vectors, ["1"] + [l for l in labels if l != "E00"], 0)


def connective_truncation(a: DGAlgebra) -> DGAlgebra:
    """The sub-DGA A^{<0} ⊕ Z^0 (cocycles in degree zero)."""
    neg = [1 << i for i, g in enumerate(a.degrees) if g < 0]
    zero = [i for i, g in enumerate(a.degrees) if g == 0]
    local = F2Matrix.from_columns(a.dim, [a.d.get(i, 0) for i in zero])
    cycles = [sum(1 << zero[t] for t in bits_of(z.bits)) for z in kernel_basis(local)]
    red = Reducer()
    chosen = []
    if a.unit is not None and a.degrees[a.unit] == 0 and not a.d.get(a.unit, 0):
        cycles.insert(0, 1 << a.unit)
    for z in cycles:
        if red.add(z, 0):
            chosen.append(z)
    vectors = chosen + neg
    unit = 0 if a.unit is not None and chosen and chosen[0] == 1 << a.unit else None
    labels = ["1" if unit == 0 and k == 0 else f"z{k}" for k in range(len(chosen))]
    labels += [a.labels[i] for i, g in enumerate(a.degrees) if g < 0]
    if len(set(labels)) != len(labels):
        labels = [f"c{k}" for k in range(len(vectors))]
    return sub_dga(a, vectors, labels, unit)


def exterior_pair_dga(deg_x: int) -> DGAlgebra:
    """F2[x, y]/(x², y²) with deg y = deg x + 1 and dx = y (acyclic augmentation ideal)."""
    degrees = {"1": 0, "x": deg_x, "y": deg_x + 1, "xy": 2 * deg_x + 1}
    prod = {("x", "y"): "xy", ("y", "x"): "xy"}
    for l in degrees:
        prod[("1", l)] = l
        if l != "1":
            prod[(l, "1")] = l
    return DGAlgebra.from_labels(degrees, {"x": "y"}, prod, unit="1")


def random_dga(rng: random.Random, max_dim: int = 8) -> DGAlgebra:
    """A random small DGA (at most ``max_dim`` basis elements) from several families."""
    from . import spaces

    while True:
        kind = rng.choice(["massey", "cochains", "flag", "connective", "exterior", "group"])
        if kind == "massey":
            a = massey_example()
        elif kind == "cochains":
            k = rng.choice([spaces.interval(), spaces.circle(), spaces.filled_triangle(),
                            SimplicialComplex.from_facets(3, [(0, 1), (1, 2)]),
                            SimplicialComplex.from_facets(4, [(0, 1), (2, 3)])])
            a = cochain_dga(k)
        elif kind in ("flag", "connective"):
            v = random_complex(rng, 0, rng.randint(1, 2), 2)
            if not 1 <= sum(v.dims().values()) <= 3:
                continue
            if kind == "flag":
                a = endomorphism_dga(v, flag=sum(v.dims().values()) == 3 or rng.random() < 0.5)
            else:
                a = connective_truncation(endomorphism_dga(v))
        elif kind == "exterior":
            a = exterior_pair_dga(rng.choice([-3, -2, -1, 0, 1, 2]))
        else:
            a = dga_from_ainf(group_algebra_cyclic(rng.choice([2, 3, 4])))
        if a.dim <= max_dim:
            return random_basis_change(rng, a) if rng.random() < 0.7 else a


def random_connective_algebra(rng: random.Random) -> AInfAlgebra:
    """A random minimal connective A∞ algebra, often with higher operations."""
    while True:
        kind = rng.choice(["poly", "group", "model", "model", "massey"])
        if kind == "massey":
            return minimal_model(random_basis_change(rng, massey_example(0, 0)), 5).algebra
        if kind == "poly":
            return truncated_polynomial(rng.randint(2, 4), rng.choice([0, -1, -2]))
        if kind == "group":
            return group_algebra_cyclic(rng.choice([2, 3]))
        v = random_complex(rng, 0, 2, 2)
        if not 1 <= sum(v.dims().values()) <= 3:
            continue
        h = minimal_model(connective_truncation(endomorphism_dga(v)), 5).algebra
        if h.dim:
            return h


def random_connective_module(rng: random.Random, a: AInfAlgebra) -> AInfModule:
    """Direct sum of shifted free modules and their degree truncations, in a random basis."""
    parts = []
    for _ in range(rng.randint(1, 2)):
        p = free_module(a, rng.randint(-1, 2))
        if rng.random() < 0.4:
            top = rng.choice(sorted(set(p.degrees)))
            p = truncated_module(p, top)
        if p.dim:
            parts.append(p)
    if not parts:
        parts = [free_module(a)]
    p = direct_sum_modules(parts)
    blocks = {}
    for g in set(p.degrees):
        blocks[g] = random_invertible(rng, p.degrees.count(g))
    return change_module_basis(p, blocks)


def misgrade_module(rng: random.Random, p: AInfModule) -> Optional[AInfModule]:
    """Add a term of too-high degree to one stored op; None if no op can be mutated."""
    cand = []
    for d, table in p.ops.items():
        for key in table:
            for o, g in enumerate(p.degrees):
                if g > p.degrees[key[0]]:
                    cand.append((d, key, o))
    if not cand:
        return None
    d, key, o = rng.choice(sorted(cand))
    ops = {e: dict(t) for e, t in p.ops.items()}
    ops[d][key] ^= 1 << o
    return AInfModule(p.algebra, p.labels, p.degrees, ops, check_degrees=False)


def random_nilpotent_algebra(rng: random.Random, dim: int = 3, degrees: Sequence[int] = (0, -1),
                             tries: int = 200) -> AInfAlgebra:
    """Unitalization of a random associative algebra N with N^{dim+1} = 0.

    N has basis n0..n{dim-1}; n_i·n_j lies in the span of n_l with l > max(i, j)
    and degree deg n_i + deg n_j.  The result has dimension dim + 1.
    """
    for _ in range(tries):
        degs = [rng.choice(degrees) for _ in range(dim)]
        prod = {}
        for i in range(dim):
            for j in range(dim):
                out = 0
                for l in range(max(i, j) + 1, dim):
                    if degs[l] == degs[i] + degs[j] and rng.random() < 0.5:
                        out |= 1 << (l + 1)
                if out:
                    prod[(i + 1, j + 1)] = out
        for x in range(dim + 1):
            prod[(0, x)] = 1 << x
            prod[(x, 0)] = 1 << x
        a = AInfAlgebra(("1",) + tuple(f"n{i}" for i in range(dim)), (0,) + tuple(degs), {2: prod}, 0)
        if prod and check_ainf_relations(a).ok:
            return a
    return AInfAlgebra(("1",) + tuple(f"n{i}" for i in range(dim)), (0,) * (dim + 1),
                       {2: {**{(0, x): 1 << x for x in range(dim + 1)}, **{(x, 0): 1 << x for x in range(1, dim + 1)}}}, 0)


# ---------------------------------------------------------------------------
# twisted complexes


def coconnective_algebras() -> dict[str, AInfAlgebra]:
    """Minimal algebras supported in non-negative degrees with room in degrees ≥ 2."""
    from . import spaces

    out = {
        "u2": truncated_polynomial(2, 2, "u"),
        "u3": truncated_polynomial(3, 2, "u"),
        "u4": truncated_polynomial(4, 2, "u"),
        "massey": minimal_model(massey_example()).algebra,
        "torus": minimal_model(cochain_dga(spaces.torus())).algebra,
        "rp2": minimal_model(cochain_dga(spaces.rp2())).algebra,
    }
    degrees = {"1": 0, "u": 2, "w": 3, "uw": 5}
    prod = {("u", "w"): "uw", ("w", "u"): "uw"}
    for l in degrees:
        prod[("1", l)] = l
        if l != "1":
            prod[(l, "1")] = l
    out["uw"] = AInfAlgebra.from_labels(degrees, {2: prod}, unit="1")
    # square-zero u with a nonzero triple product μ³(u, u, u) = v
    degrees = {"1": 0, "u": 2, "v": 5}
    prod = {("1", l): l for l in degrees}
    prod.update({(l, "1"): l for l in degrees if l != "1"})
    out["triple"] = AInfAlgebra.from_labels(degrees, {2: prod, 3: {("u", "u", "u"): "v"}}, unit="1")
    return out


def random_twisted_complex(rng: random.Random, s: AInfAlgebra, length: int, max_dim: int = 2,
                           density: float = 0.5, tries: int = 200):
    """Random Maurer–Cartan twisted complex V_0 → … → V_length over S (rejection sampling).

    Falls back to the zero differential, which always satisfies the equation.
    """
    from .twisted import TwistedComplex, mc_check

    dims = tuple(rng.randint(1, max_dim) for _ in range(length + 1))
    by_deg: dict[int, list[int]] = {}
    for i, g in enumerate(s.degrees):
        by_deg.setdefault(g, []).append(i)
    for _ in range(tries):
        deltas = {}
        for i in range(length + 1):
            for j in range(i + 1, length + 1):
                cands = by_deg.get(1 + j - i, [])
                if not cands:
                    continue
                block = {}
                for p in range(dims[j]):
                    for q in range(dims[i]):
                        v = 0
                        for c in cands:
                            if rng.random() < density:
                                v |= 1 << c
                        if v:
                            block[(p, q)] = v
                deltas[(i, j)] = block
        t = TwistedComplex(s, dims, deltas)
        if t.deltas and mc_check(t).ok:
            return t
    return TwistedComplex(s, dims, {})
