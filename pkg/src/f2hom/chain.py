"""Graded F2 vector spaces and cochain complexes.

Degrees are cohomological: the differential raises degree by one.
Each degree carries an ordered list of string labels; vectors in degree
``k`` are bit-packed over that list.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .f2linalg import F2Matrix, F2Vector, Reducer, bits_of, kernel_basis, rank


class ComplexError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GradedSpace:
    basis: Mapping[int, tuple[str, ...]]

    def __post_init__(self):
        clean = {}
        for k, labels in self.basis.items():
            labels = tuple(labels)
            if len(set(labels)) != len(labels):
                raise ComplexError(f"duplicate labels in degree {k}")
            if labels:
                clean[int(k)] = labels
        object.__setattr__(self, "basis", clean)
        object.__setattr__(self, "_index", {k: {l: i for i, l in enumerate(v)} for k, v in clean.items()})

    def dim(self, k: int) -> int:
        return len(self.basis.get(k, ()))

    def labels(self, k: int) -> tuple[str, ...]:
        return self.basis.get(k, ())

    def index(self, k: int, label: str) -> int:
        return self._index[k][label]

    def degrees(self) -> list[int]:
        return sorted(self.basis)

    def total_dim(self) -> int:
        return sum(len(v) for v in self.basis.values())

    def __eq__(self, other):
        return isinstance(other, GradedSpace) and self.basis == other.basis


@dataclass(frozen=True, eq=False)
class Complex:
    """A finite cochain complex; ``differential[k]`` maps degree k to k+1.

    Missing differentials are zero.  ``d∘d = 0`` is checked on construction
    unless ``check=False`` (used internally when it holds by construction
    and has been proven by tests).
    """

    space: GradedSpace
    differential: Mapping[int, F2Matrix] = field(default_factory=dict)
    check: bool = True

    def __post_init__(self):
        sp = self.space
        if not isinstance(sp, GradedSpace):
            sp = GradedSpace(sp)
            object.__setattr__(self, "space", sp)
        diff = {}
        for k, m in self.differential.items():
            want = (sp.dim(k + 1), sp.dim(k))
            if m.shape != want:
                raise ComplexError(f"differential in degree {k} has shape {m.shape}, expected {want}")
            if not m.is_zero():
                diff[int(k)] = m
        object.__setattr__(self, "differential", diff)
        if self.check:
            for k in diff:
                if k + 1 in diff and not (diff[k + 1] @ diff[k]).is_zero():
                    raise ComplexError(f"d∘d != 0 starting in degree {k}")

    @classmethod
    def build(cls, basis: Mapping[int, Sequence[str]], differential: Optional[Mapping[int, F2Matrix]] = None,
              check: bool = True) -> "Complex":
        return cls(GradedSpace(basis), differential or {}, check)

    @classmethod
    def from_dims(cls, dims: Mapping[int, int], differential: Optional[Mapping[int, F2Matrix]] = None,
                  prefix: str = "e") -> "Complex":
        basis = {k: [f"{prefix}{k}_{i}" for i in range(n)] for k, n in dims.items()}
        return cls.build(basis, differential)

    @classmethod
    def ground(cls, degree: int = 0, label: str = "1") -> "Complex":
        """The one-dimensional complex F2 concentrated in ``degree``."""
        return cls.build({degree: [label]})

    def d(self, k: int) -> F2Matrix:
        m = self.differential.get(k)
        if m is None:
            return F2Matrix.zeros(self.space.dim(k + 1), self.space.dim(k))
        return m

    def dim(self, k: int) -> int:
        return self.space.dim(k)

    def degrees(self) -> list[int]:
        return self.space.degrees()

    def dims(self) -> dict[int, int]:
        return {k: self.dim(k) for k in self.degrees()}

    def euler_characteristic(self) -> int:
        return sum((-1) ** (k % 2) * n for k, n in self.dims().items())

    def __eq__(self, other):
        if not isinstance(other, Complex) or self.space != other.space:
            return False
        return self.differential == other.differential


@dataclass(frozen=True, eq=False)
class ChainMap:
    source: Complex
    target: Complex
    maps: Mapping[int, F2Matrix]
    shift: int = 0

    def __post_init__(self):
        s = self.shift
        clean = {}
        for k, m in self.maps.items():
            want = (self.target.dim(k + s), self.source.dim(k))
            if m.shape != want:
                raise ComplexError(f"map in degree {k} has shape {m.shape}, expected {want}")
            if not m.is_zero():
                clean[int(k)] = m
        object.__setattr__(self, "maps", clean)
        degs = set(self.source.degrees()) | {k - 1 for k in self.source.degrees()}
        for k in degs:
            lhs = self.f(k + 1) @ self.source.d(k)
            rhs = self.target.d(k + s) @ self.f(k)
            if lhs != rhs:
                raise ComplexError(f"not a chain map in degree {k}")

    def f(self, k: int) -> F2Matrix:
        m = self.maps.get(k)
        if m is None:
            return F2Matrix.zeros(self.target.dim(k + self.shift), self.source.dim(k))
        return m

    @classmethod
    def identity(cls, c: Complex) -> "ChainMap":
        return cls(c, c, {k: F2Matrix.identity(c.dim(k)) for k in c.degrees()})

    @classmethod
    def zero(cls, source: Complex, target: Complex, shift: int = 0) -> "ChainMap":
        return cls(source, target, {}, shift)

    def on_cohomology(self, k: int, h_src: Optional["Cohomology"] = None,
                      h_tgt: Optional["Cohomology"] = None) -> F2Matrix:
        """Matrix of the induced map H^k(source) → H^{k+shift}(target) in representative bases."""
        h_src = h_src or cohomology(self.source)
        h_tgt = h_tgt or cohomology(self.target)
        cols = [h_tgt.coordinates(k + self.shift, self.f(k).apply(r.bits)) for r in h_src.reps(k)]
        return F2Matrix.from_columns(h_tgt.dims.get(k + self.shift, 0), cols)


# ---------------------------------------------------------------------------
# cohomology


@dataclass(frozen=True, eq=False)
class Cohomology:
    complex: Complex
    dims: dict[int, int]
    representatives: dict[int, list[F2Vector]]
    _reducers: dict = field(default_factory=dict, repr=False)

    def reps(self, k: int) -> list[F2Vector]:
        return self.representatives.get(k, [])

    def _reducer(self, k: int) -> tuple[Reducer, int]:
        if k not in self._reducers:
            c = self.complex
            boundaries = c.d(k - 1).columns()
            red = Reducer(boundaries)
            nb = len(boundaries)
            for i, r in enumerate(self.reps(k)):
                red.add(r.bits, 1 << (nb + i))
            self._reducers[k] = (red, nb)
        return self._reducers[k]

    def is_cocycle(self, k: int, v: int) -> bool:
        return self.complex.d(k).apply(v) == 0

    def is_coboundary(self, k: int, v: int) -> bool:
        if not self.is_cocycle(k, v):
            return False
        return self.coordinates(k, v) == 0

    def coordinates(self, k: int, v: int) -> int:
        """Class of the cocycle ``v`` as a bit-packed combination of representatives."""
        if isinstance(v, F2Vector):
            v = v.bits
        if not self.is_cocycle(k, v):
            raise ComplexError(f"vector in degree {k} is not a cocycle")
        red, nb = self._reducer(k)
        rem, comb = red.reduce(v)
        if rem:
            raise ComplexError("cocycle outside the span of boundaries and representatives")
        return comb >> nb


def cohomology(c: Complex, representatives: bool = True) -> Cohomology:
    """Cohomology dimensions and (optionally) representative cocycles.

    Only degrees with nonzero cohomology appear in ``dims``.
    """
    dims: dict[int, int] = {}
    reps: dict[int, list[F2Vector]] = {}
    for k in c.degrees():
        n = c.dim(k)
        if not representatives:
            h = n - rank(c.d(k)) - rank(c.d(k - 1))
            if h:
                dims[k] = h
            continue
        cycles = kernel_basis(c.d(k))
        red = Reducer(c.d(k - 1).columns())
        chosen = []
        for z in cycles:
            if red.add(z.bits, 0):
                chosen.append(z)
        if chosen:
            dims[k] = len(chosen)
            reps[k] = chosen
    return Cohomology(c, dims, reps)


def cohomology_dims(c: Complex) -> dict[int, int]:
    return cohomology(c, representatives=False).dims


# ---------------------------------------------------------------------------
# constructions


def _matrix_from_images(rows: int, images: Sequence[int]) -> F2Matrix:
    return F2Matrix.from_columns(rows, images)


def hom_complex(c0: Complex, c1: Complex) -> Complex:
    """Hom(c0, c1) with differential φ ↦ φ∘d0 + d1∘φ.

    The basis element ``hom(a,b)`` sends ``a`` to ``b`` and every other
    basis vector of c0 to zero; its degree is deg b − deg a.
    """
    basis: dict[int, list[str]] = {}
    index: dict[int, dict[tuple[int, int, int], int]] = {}
    degs0, degs1 = c0.degrees(), c1.degrees()
    ks = sorted({d1 - d0 for d0 in degs0 for d1 in degs1})
    for k in ks:
        labels, idx = [], {}
        for d0 in degs0:
            d1 = d0 + k
            if c1.dim(d1) == 0:
                continue
            for a, la in enumerate(c0.space.labels(d0)):
                for b, lb in enumerate(c1.space.labels(d1)):
                    idx[(d0, a, b)] = len(labels)
                    labels.append(f"hom({la},{lb})")
        basis[k] = labels
        index[k] = idx
    diff = {}
    for k in ks:
        tgt = index.get(k + 1)
        if not tgt:
            continue
        images = []
        for (d0, a, b) in index[k]:
            img = 0
            # φ∘d0: precompose, hits hom(x, b) for x in degree d0-1 with d0(x) ∋ a
            row = c0.d(d0 - 1).data[a] if c0.dim(d0 - 1) else 0
            for x in bits_of(row):
                img ^= 1 << tgt[(d0 - 1, x, b)]
            # d1∘φ: postcompose, hits hom(a, y) for y with d1(b) ∋ y
            col = c1.d(d0 + k).column(b) if c1.dim(d0 + k + 1) else 0
            for y in bits_of(col):
                img ^= 1 << tgt[(d0, a, y)]
            images.append(img)
        diff[k] = _matrix_from_images(len(basis[k + 1]), images)
    return Complex.build(basis, diff)


def hom_index(c0: Complex, c1: Complex, k: int) -> dict[tuple[int, int, int], int]:
    """Position of ``hom(a,b)`` inside degree ``k`` of :func:`hom_complex`, keyed by (deg a, a, b)."""
    idx, n = {}, 0
    for d0 in c0.degrees():
        if c1.dim(d0 + k) == 0:
            continue
        for a in range(c0.dim(d0)):
            for b in range(c1.dim(d0 + k)):
                idx[(d0, a, b)] = n
                n += 1
    return idx


def cone(f: ChainMap) -> Complex:
    """Mapping cone: degree k is source^{k+1} ⊕ target^k, d(c,x) = (d c, f c + d x)."""
    if f.shift != 0:
        raise ComplexError("cone requires a degree-preserving chain map")
    src, tgt = f.source, f.target
    ks = sorted({k - 1 for k in src.degrees()} | set(tgt.degrees()))
    basis = {k: [f"src:{l}" for l in src.space.labels(k + 1)] + [f"tgt:{l}" for l in tgt.space.labels(k)] for k in ks}
    diff = {}
    for k in ks:
        a0, b0 = src.dim(k + 1), tgt.dim(k)
        a1, b1 = src.dim(k + 2), tgt.dim(k + 1)
        if a1 + b1 == 0 or a0 + b0 == 0:
            continue
        top = src.d(k + 1).hstack(F2Matrix.zeros(a1, b0))
        bottom = f.f(k + 1).hstack(tgt.d(k))
        diff[k] = top.vstack(bottom)
    return Complex.build(basis, diff)


def tensor(c0: Complex, c1: Complex) -> Complex:
    """Tensor product with differential d0⊗1 + 1⊗d1 (no signs over F2)."""
    index: dict[int, dict[tuple[int, int, int], int]] = {}
    basis: dict[int, list[str]] = {}
    for i in c0.degrees():
        for j in c1.degrees():
            k = i + j
            idx = index.setdefault(k, {})
            labels = basis.setdefault(k, [])
            for a, la in enumerate(c0.space.labels(i)):
                for b, lb in enumerate(c1.space.labels(j)):
                    idx[(i, a, b)] = len(labels)
                    labels.append(f"{la}⊗{lb}")
    diff = {}
    for k, idx in index.items():
        tgt = index.get(k + 1)
        if not tgt:
            continue
        images = []
        for (i, a, b) in idx:
            img = 0
            for x in bits_of(c0.d(i).column(a) if c0.dim(i + 1) else 0):
                img ^= 1 << tgt[(i + 1, x, b)]
            for y in bits_of(c1.d(k - i).column(b) if c1.dim(k - i + 1) else 0):
                img ^= 1 << tgt[(i, a, y)]
            images.append(img)
        diff[k] = _matrix_from_images(len(basis[k + 1]), images)
    return Complex.build(basis, diff)


def shift(c: Complex, k: int) -> Complex:
    """Degree ``d`` of the result is degree ``d + k`` of ``c``."""
    basis = {d - k: c.space.labels(d) for d in c.degrees()}
    diff = {d - k: m for d, m in c.differential.items()}
    return Complex.build(basis, diff)


def direct_sum(parts: Sequence[Complex], prefixes: Optional[Sequence[str]] = None) -> Complex:
    from .f2linalg import block_diag

    if prefixes is None:
        prefixes = [f"{i}:" for i in range(len(parts))]
    ks = sorted({k for c in parts for k in c.degrees()})
    basis = {k: [p + l for c, p in zip(parts, prefixes) for l in c.space.labels(k)] for k in ks}
    diff = {k: block_diag([c.d(k) for c in parts]) for k in ks}
    return Complex.build(basis, diff)
