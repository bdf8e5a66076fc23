"""Twisted complexes of free modules over a minimal A∞ algebra S.

A twisted complex has summands V_0, ..., V_D with V_i placed in degree −i
and a strictly upper-triangular differential δ with blocks
δ_{i,j} ∈ Hom(V_i, V_j ⊗ S^{1+j−i}) for i < j.

Morphisms are stored as sets of triples ``(out, in, s)``: the global basis
vector ``in`` of ⊕V_i goes to ``out ⊗ s`` with ``s`` an S basis index.
Higher compositions follow the matrix rule: compose the V parts along a
chain and apply μ^d of S to the coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .ainfty import AInfAlgebra
from .chain import Complex, cohomology
from .f2linalg import F2Matrix, bits_of

Term = tuple[int, int, int]


class TwistedError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TwistedComplex:
    """``deltas[(i, j)]`` maps ``(p, q)`` (p ∈ V_j, q ∈ V_i, local indices) to a bit-packed S vector."""

    algebra: AInfAlgebra
    dims: tuple[int, ...]
    deltas: Mapping[tuple[int, int], Mapping[tuple[int, int], int]]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        if not self.dims or any(n < 0 for n in self.dims):
            raise TwistedError("summand dimensions must be non-negative and there must be at least one")
        s = self.algebra
        clean = {}
        for (i, j), block in self.deltas.items():
            i, j = int(i), int(j)
            if not 0 <= i < j < len(self.dims):
                if any(block.values()):
                    raise TwistedError(f"δ_{i},{j} is not strictly upper triangular")
                continue
            b = {}
            for (p, q), v in block.items():
                if not v:
                    continue
                if not (0 <= p < self.dims[j] and 0 <= q < self.dims[i]):
                    raise TwistedError(f"δ_{i},{j} entry ({p},{q}) outside the summands")
                if v >> s.dim:
                    raise TwistedError(f"δ_{i},{j} coefficient outside S")
                want = 1 + j - i
                for t in bits_of(v):
                    if s.degrees[t] != want:
                        raise TwistedError(f"δ_{i},{j} uses {s.labels[t]} of degree {s.degrees[t]}, expected {want}")
                b[(p, q)] = v
            if b:
                clean[(i, j)] = b
        object.__setattr__(self, "deltas", clean)
        offs, o = [], 0
        for n in self.dims:
            offs.append(o)
            o += n
        object.__setattr__(self, "offsets", tuple(offs))

    @property
    def length(self) -> int:
        """D: the index of the last summand."""
        return len(self.dims) - 1

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def summand_of(self, g: int) -> int:
        for i in range(len(self.dims) - 1, -1, -1):
            if g >= self.offsets[i]:
                return i
        raise IndexError(g)

    def delta_terms(self) -> frozenset[Term]:
        out = set()
        for (i, j), block in self.deltas.items():
            for (p, q), v in block.items():
                for t in bits_of(v):
                    out.add((self.offsets[j] + p, self.offsets[i] + q, t))
        return frozenset(out)

    def term_degree(self, term: Term) -> int:
        out, inp, s = term
        return self.algebra.degrees[s] + self.summand_of(inp) - self.summand_of(out)


def _mu(s: AInfAlgebra, inputs: Sequence[frozenset[Term]] | Sequence[set[Term]]) -> set[Term]:
    """μ^d on End(V)⊗S elements given as term sets (written order, last applied first)."""
    d = len(inputs)
    table = s.ops.get(d)
    if not table:
        return set()
    acc: dict[tuple[int, int], int] = {}
    # group the rightmost input by its source and extend chains leftwards
    by_in = [dict() for _ in range(d)]
    for k, x in enumerate(inputs):
        for out, inp, c in x:
            by_in[k].setdefault(inp, []).append((out, c))

    def extend(k, cur_out, start, coeffs):
        # k indexes inputs from the right: position d-1-k in written order
        if k < 0:
            val = table.get(tuple(coeffs))
            if val:
                acc[(cur_out, start)] = acc.get((cur_out, start), 0) ^ val
            return
        for out, c in by_in[k].get(cur_out, ()):
            extend(k - 1, out, start, [c] + coeffs)

    last = d - 1
    for inp, lst in by_in[last].items():
        for out, c in lst:
            extend(last - 1, out, inp, [c])
    res = set()
    for (out, inp), val in acc.items():
        for t in bits_of(val):
            res ^= {(out, inp, t)}
    return res


@dataclass(frozen=True)
class MCReport:
    ok: bool
    violations: tuple = ()  # (i, j, [(p, q, S labels)])


def mc_residue(t: TwistedComplex) -> set[Term]:
    s = t.algebra
    delta = t.delta_terms()
    total: set[Term] = set()
    for d in range(1, t.length + 1):
        if d in s.ops:
            total ^= _mu(s, [delta] * d)
    return total


def mc_check(t: TwistedComplex) -> MCReport:
    res = mc_residue(t)
    if not res:
        return MCReport(True)
    blocks: dict[tuple[int, int], list] = {}
    for out, inp, c in sorted(res):
        i, j = t.summand_of(inp), t.summand_of(out)
        blocks.setdefault((i, j), []).append((out - t.offsets[j], inp - t.offsets[i], t.algebra.labels[c]))
    return MCReport(False, tuple((i, j, tuple(v)) for (i, j), v in sorted(blocks.items())))


@dataclass(frozen=True, eq=False)
class EndComplex:
    twisted: TwistedComplex
    complex: Complex
    terms: Mapping[int, list[Term]]
    index: Mapping[Term, tuple[int, int]]

    def vector(self, degree: int, terms) -> int:
        v = 0
        for term in terms:
            g, pos = self.index[tuple(term)]
            if g != degree:
                raise TwistedError(f"term {term} lies in degree {g}, not {degree}")
            v ^= 1 << pos
        return v

    def identity(self) -> int:
        t = self.twisted
        unit = t.algebra.unit
        if unit is None:
            raise TwistedError("S has no strict unit")
        return self.vector(0, [(g, g, unit) for g in range(t.total_dim)])


def differential_terms(t: TwistedComplex, x: Sequence[Term] | set[Term]) -> set[Term]:
    """Σ_d Σ μ^d(δ, …, δ, x, δ, …, δ) over every insertion position."""
    s = t.algebra
    delta = t.delta_terms()
    x = frozenset(x)
    out: set[Term] = set()
    for d in range(1, 2 * t.length + 2):
        if d not in s.ops:
            continue
        for pos in range(d):
            ins = [delta] * d
            ins[pos] = x
            out ^= _mu(s, ins)
    return out


def end_complex(t: TwistedComplex, check_mc: bool = True) -> EndComplex:
    if check_mc and not mc_check(t).ok:
        raise TwistedError("δ does not satisfy the Maurer–Cartan equation")
    s = t.algebra
    n = t.total_dim
    terms: dict[int, list[Term]] = {}
    index: dict[Term, tuple[int, int]] = {}
    basis: dict[int, list[str]] = {}
    for out in range(n):
        for inp in range(n):
            for c in range(s.dim):
                term = (out, inp, c)
                g = t.term_degree(term)
                lst = terms.setdefault(g, [])
                index[term] = (g, len(lst))
                lst.append(term)
                i, j = t.summand_of(inp), t.summand_of(out)
                basis.setdefault(g, []).append(
                    f"V{j}.{out - t.offsets[j]}<-V{i}.{inp - t.offsets[i]}⊗{s.labels[c]}")
    diff = {}
    for g, lst in terms.items():
        if g + 1 not in terms:
            continue
        cols = []
        for term in lst:
            img = 0
            for r in differential_terms(t, [term]):
                rg, pos = index[r]
                if rg != g + 1:
                    raise TwistedError("differential does not raise degree by one")
                img ^= 1 << pos
            cols.append(img)
        diff[g] = F2Matrix.from_columns(len(terms[g + 1]), cols)
    return EndComplex(t, Complex.build(basis, diff), terms, index)


@dataclass(frozen=True)
class Witness:
    degree: int
    terms: tuple[Term, ...]
    nonzero_in_cohomology: bool


def coconnective_preconditions(t: TwistedComplex) -> list[str]:
    s = t.algebra
    out = []
    if any(g < 0 for g in s.degrees):
        out.append("S is not supported in non-negative degrees")
    if not s.is_minimal():
        out.append("S is not minimal")
    for term in t.delta_terms():
        if s.degrees[term[2]] < 2:
            out.append("δ has a coefficient of degree below 2")
            break
    if t.dims[0] == 0 or t.dims[-1] == 0:
        out.append("V_0 and V_D must be nonzero")
    if not any(g == 0 for g in s.degrees):
        out.append("S has nothing in degree 0")
    if not mc_check(t).ok:
        out.append("δ does not satisfy the Maurer–Cartan equation")
    return out


def coconnective_witness(t: TwistedComplex, verify: bool = True) -> Optional[Witness]:
    """A cocycle x ∈ Hom(V_0, V_D ⊗ S^0) in degree −D, or None when D = 0.

    δ has no block into V_0 and none out of V_D, so x is closed; Hom^{−D−1}
    vanishes because S has nothing in negative degree, so x is not exact.
    With ``verify`` the class is also checked against the cohomology of the
    endomorphism complex.
    """
    bad = coconnective_preconditions(t)
    if bad:
        raise TwistedError("; ".join(bad))
    D = t.length
    if D == 0:
        return None
    s = t.algebra
    c0 = s.unit if s.unit is not None and s.degrees[s.unit] == 0 else next(i for i, g in enumerate(s.degrees) if g == 0)
    term = (t.offsets[D], 0, c0)
    nonzero = True
    if verify:
        e = end_complex(t, check_mc=False)
        v = e.vector(-D, [term])
        h = cohomology(e.complex)
        if e.complex.d(-D).apply(v):
            raise TwistedError("witness is not closed")
        nonzero = h.coordinates(-D, v) != 0
    return Witness(-D, (term,), nonzero)


def terms_of_block(t: TwistedComplex, terms) -> dict[tuple[int, int], list[tuple[int, int, str]]]:
    out: dict[tuple[int, int], list] = {}
    for o, i, c in sorted(terms):
        a, b = t.summand_of(i), t.summand_of(o)
        out.setdefault((a, b), []).append((o - t.offsets[b], i - t.offsets[a], t.algebra.labels[c]))
    return out
