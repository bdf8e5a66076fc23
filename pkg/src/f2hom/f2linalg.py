"""Exact linear algebra over the two-element field.

Vectors and matrix rows are bit-packed into Python integers: bit ``j`` of a
row is the entry in column ``j``.  Python's arbitrary precision integers are
word arrays under the hood, so XOR of two rows is a word-parallel operation.

Matrices act on column vectors: ``(m @ v)_i = parity(row_i & v)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

MAX_DIM = 2**31 - 1


def _check_dim(n: int) -> int:
    if n < 0 or n > MAX_DIM:
        raise OverflowError(f"dimension {n} outside [0, 2^31-1]")
    return n


def bits_of(x: int) -> Iterable[int]:
    """Yield the positions of the set bits of ``x`` in increasing order."""
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def parity(x: int) -> int:
    return x.bit_count() & 1


@dataclass(frozen=True)
class F2Vector:
    len: int
    bits: int = 0

    def __post_init__(self):
        _check_dim(self.len)
        if self.bits < 0 or self.bits >> self.len:
            raise ValueError("bits set beyond vector length")

    @classmethod
    def from_list(cls, entries: Sequence[int]) -> "F2Vector":
        bits = 0
        for j, e in enumerate(entries):
            if e & 1:
                bits |= 1 << j
        return cls(len(entries), bits)

    @classmethod
    def zero(cls, n: int) -> "F2Vector":
        return cls(n, 0)

    @classmethod
    def unit(cls, n: int, j: int) -> "F2Vector":
        return cls(n, 1 << j)

    def to_list(self) -> list[int]:
        return [(self.bits >> j) & 1 for j in range(self.len)]

    def __getitem__(self, j: int) -> int:
        if not 0 <= j < self.len:
            raise IndexError(j)
        return (self.bits >> j) & 1

    def __add__(self, other: "F2Vector") -> "F2Vector":
        if self.len != other.len:
            raise ValueError("length mismatch")
        return F2Vector(self.len, self.bits ^ other.bits)

    __sub__ = __add__

    def dot(self, other: "F2Vector") -> int:
        if self.len != other.len:
            raise ValueError("length mismatch")
        return parity(self.bits & other.bits)

    def is_zero(self) -> bool:
        return self.bits == 0

    def support(self) -> list[int]:
        return list(bits_of(self.bits))

    def __repr__(self):
        return "F2Vector(" + "".join(map(str, self.to_list())) + ")"


@dataclass(frozen=True)
class F2Matrix:
    rows: int
    cols: int
    data: tuple[int, ...]

    def __post_init__(self):
        _check_dim(self.rows)
        _check_dim(self.cols)
        if len(self.data) != self.rows:
            raise ValueError("row count does not match data")
        for r in self.data:
            if r < 0 or r >> self.cols:
                raise ValueError("row has bits beyond column count")

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int) -> "F2Matrix":
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "F2Matrix":
        if cols is None:
            cols = len(rows[0]) if rows else 0
        data = []
        for r in rows:
            if len(r) != cols:
                raise ValueError("ragged matrix")
            data.append(F2Vector.from_list(r).bits)
        return cls(len(rows), cols, tuple(data))

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[int]) -> "F2Matrix":
        """Build from bit-packed columns (bit ``i`` of a column = row ``i``)."""
        data = [0] * rows
        for j, col in enumerate(columns):
            if col >> rows:
                raise ValueError("column has bits beyond row count")
            for i in bits_of(col):
                data[i] |= 1 << j
        return cls(rows, len(columns), tuple(data))

    @classmethod
    def from_vectors(cls, vectors: Sequence[F2Vector], length: Optional[int] = None) -> "F2Matrix":
        """Stack vectors as rows."""
        n = vectors[0].len if vectors else (length or 0)
        return cls(len(vectors), n, tuple(v.bits for v in vectors))

    @classmethod
    def permutation(cls, perm: Sequence[int]) -> "F2Matrix":
        """Matrix sending basis vector ``i`` to basis vector ``perm[i]``."""
        n = len(perm)
        data = [0] * n
        for i, p in enumerate(perm):
            data[p] |= 1 << i
        return cls(n, n, tuple(data))

    # access ---------------------------------------------------------------
    def to_lists(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.cols)] for r in self.data]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return (self.data[i] >> j) & 1

    def column(self, j: int) -> int:
        out = 0
        for i, r in enumerate(self.data):
            if (r >> j) & 1:
                out |= 1 << i
        return out

    def columns(self) -> list[int]:
        cols = [0] * self.cols
        for i, r in enumerate(self.data):
            bit = 1 << i
            for j in bits_of(r):
                cols[j] |= bit
        return cols

    def is_zero(self) -> bool:
        return not any(self.data)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    # arithmetic -------------------------------------------------------------
    def apply(self, v: int) -> int:
        """Multiply by a bit-packed column vector, returning a bit-packed vector."""
        out = 0
        for i, r in enumerate(self.data):
            if (r & v).bit_count() & 1:
                out |= 1 << i
        return out

    def __matmul__(self, other):
        if isinstance(other, F2Vector):
            if other.len != self.cols:
                raise ValueError(f"shape mismatch {self.shape} @ ({other.len},)")
            return F2Vector(self.rows, self.apply(other.bits))
        if not isinstance(other, F2Matrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        odata = other.data
        out = []
        for r in self.data:
            acc = 0
            while r:
                low = r & -r
                acc ^= odata[low.bit_length() - 1]
                r ^= low
            out.append(acc)
        return F2Matrix(self.rows, other.cols, tuple(out))

    def __add__(self, other: "F2Matrix") -> "F2Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return F2Matrix(self.rows, self.cols, tuple(a ^ b for a, b in zip(self.data, other.data)))

    __sub__ = __add__

    def transpose(self) -> "F2Matrix":
        return F2Matrix(self.cols, self.rows, tuple(self.columns()))

    @property
    def T(self) -> "F2Matrix":
        return self.transpose()

    def hstack(self, other: "F2Matrix") -> "F2Matrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        c = self.cols
        return F2Matrix(self.rows, c + other.cols, tuple(a | (b << c) for a, b in zip(self.data, other.data)))

    def vstack(self, other: "F2Matrix") -> "F2Matrix":
        if self.cols != other.cols:
            raise ValueError("column mismatch")
        return F2Matrix(self.rows + other.rows, self.cols, self.data + other.data)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "F2Matrix":
        out = []
        for i in row_idx:
            r = self.data[i]
            acc = 0
            for jj, j in enumerate(col_idx):
                if (r >> j) & 1:
                    acc |= 1 << jj
            out.append(acc)
        return F2Matrix(len(row_idx), len(col_idx), tuple(out))

    def rank(self) -> int:
        return rank(self)

    def inverse(self) -> "F2Matrix":
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        aug = F2Matrix(n, 2 * n, tuple(r | (1 << (n + i)) for i, r in enumerate(self.data)))
        rk, pivots, red = rref(aug)
        if pivots[:n] != list(range(n)) or rk < n:
            raise ValueError("matrix is singular")
        mask = (1 << n) - 1
        return F2Matrix(n, n, tuple((r >> n) & mask for r in red.data[:n]))

    def is_invertible(self) -> bool:
        return self.rows == self.cols and rank(self) == self.rows

    def __repr__(self):
        body = "; ".join("".join(str((r >> j) & 1) for j in range(self.cols)) for r in self.data)
        return f"F2Matrix({self.rows}x{self.cols}: {body})"


def apply_columns(columns: Sequence[int], v: int) -> int:
    """Image of ``v`` given the bit-packed columns of a matrix; fast for sparse ``v``."""
    out = 0
    while v:
        low = v & -v
        out ^= columns[low.bit_length() - 1]
        v ^= low
    return out


def block_diag(blocks: Sequence[F2Matrix]) -> F2Matrix:
    rows, cols, data = 0, 0, []
    for b in blocks:
        data.extend(r << cols for r in b.data)
        rows += b.rows
        cols += b.cols
    return F2Matrix(rows, cols, tuple(data))


# -------------------------------------------------------------------------
# elimination


def _echelon(rows: Iterable[int]) -> dict[int, int]:
    """Incremental elimination keyed by lowest set bit.

    Returns ``{pivot column: row}`` where each row's lowest bit is its pivot.
    Cheap on sparse input because a row is only XORed with rows sharing its
    current leading bit.
    """
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            p = (r & -r).bit_length() - 1
            b = basis.get(p)
            if b is None:
                basis[p] = r
                break
            r ^= b
    return basis


def rank_of_rows(rows: Iterable[int]) -> int:
    return len(_echelon(rows))


def rank(m: F2Matrix) -> int:
    # eliminate along the shorter side
    if m.cols < m.rows:
        return rank_of_rows(m.columns())
    return rank_of_rows(m.data)


def rref(m: F2Matrix) -> tuple[int, list[int], F2Matrix]:
    """Reduced row-echelon form.

    Returns ``(rank, pivots, reduced)``; ``reduced`` has the same shape as
    ``m``, pivot rows first in increasing pivot order, zero rows after.
    """
    basis = _echelon(m.data)
    pivots = sorted(basis)
    # back substitution, largest pivot first so each row used is already clean
    for p in reversed(pivots):
        r = basis[p]
        rest = r ^ (1 << p)
        for q in bits_of(rest):
            if q in basis:
                r ^= basis[q]
        basis[p] = r
    data = [basis[p] for p in pivots] + [0] * (m.rows - len(pivots))
    return len(pivots), pivots, F2Matrix(m.rows, m.cols, tuple(data))


def kernel_basis(m: F2Matrix) -> list[F2Vector]:
    """A basis of ``{v : m v = 0}``, one vector per free column."""
    _, pivots, red = rref(m)
    pivot_rows = dict(zip(pivots, red.data))
    free = [j for j in range(m.cols) if j not in pivot_rows]
    out = []
    for f in free:
        v = 1 << f
        for p, r in pivot_rows.items():
            if (r >> f) & 1:
                v |= 1 << p
        out.append(F2Vector(m.cols, v))
    return out


def solve(m: F2Matrix, b: F2Vector) -> Optional[F2Vector]:
    """Some ``x`` with ``m x = b``, or ``None`` when ``b`` is not in the column space."""
    if b.len != m.rows:
        raise ValueError(f"right-hand side has length {b.len}, expected {m.rows}")
    c = m.cols
    aug = F2Matrix(m.rows, c + 1, tuple(r | (((b.bits >> i) & 1) << c) for i, r in enumerate(m.data)))
    _, pivots, red = rref(aug)
    if pivots and pivots[-1] == c:
        return None
    x = 0
    for p, r in zip(pivots, red.data):
        if (r >> c) & 1:
            x |= 1 << p
    return F2Vector(c, x)


def column_space_basis(vectors: Sequence[int]) -> list[int]:
    """Greedy independent subset (by position) of bit-packed vectors."""
    basis: dict[int, int] = {}
    chosen = []
    for v in vectors:
        r = v
        while r:
            p = (r & -r).bit_length() - 1
            b = basis.get(p)
            if b is None:
                basis[p] = r
                chosen.append(v)
                break
            r ^= b
    return chosen


def quotient_basis(subspace: Sequence[F2Vector], ambient_dim: int) -> tuple[F2Matrix, F2Matrix]:
    """Projection onto ``F2^n / span(subspace)`` and a section of it.

    The quotient is identified with the coordinates at the non-pivot columns
    of the reduced subspace basis; the section sends quotient coordinate ``k``
    to the corresponding standard basis vector.
    """
    for v in subspace:
        if v.len != ambient_dim:
            raise ValueError("subspace vector has wrong length")
    sub = F2Matrix(len(subspace), ambient_dim, tuple(v.bits for v in subspace))
    _, pivots, red = rref(sub)
    pivot_rows = dict(zip(pivots, red.data))
    free = [j for j in range(ambient_dim) if j not in pivot_rows]
    q = len(free)
    # column j of the projection is the image of e_j
    proj_cols = []
    free_pos = {j: k for k, j in enumerate(free)}
    for j in range(ambient_dim):
        if j in free_pos:
            proj_cols.append(1 << free_pos[j])
        else:
            r = pivot_rows[j] ^ (1 << j)
            # e_j == r modulo the subspace
            img = 0
            for t in bits_of(r):
                img |= 1 << free_pos[t]
            proj_cols.append(img)
    projection = F2Matrix.from_columns(q, proj_cols)
    section = F2Matrix.from_columns(ambient_dim, [1 << j for j in free])
    return projection, section


class Reducer:
    """Reduce vectors modulo a fixed subspace and test membership.

    Also records, for every basis row, which input vectors were combined to
    produce it, so membership queries can return a preimage combination.
    """

    def __init__(self, vectors: Sequence[int] = ()):
        self.basis: dict[int, tuple[int, int]] = {}
        for k, v in enumerate(vectors):
            self.add(v, 1 << k)

    def add(self, v: int, tag: int) -> bool:
        """Insert ``v`` (recorded as combination ``tag``); False if already in the span."""
        r, t = v, tag
        while r:
            p = (r & -r).bit_length() - 1
            b = self.basis.get(p)
            if b is None:
                self.basis[p] = (r, t)
                return True
            r ^= b[0]
            t ^= b[1]
        return False

    @property
    def rank(self) -> int:
        return len(self.basis)

    def reduce(self, v: int) -> tuple[int, int]:
        """Return ``(remainder, combination)`` with ``v = remainder + sum(combination)``."""
        t = 0
        r = v
        rem = 0
        # basis rows only touch bits at or above their pivot, so sweeping
        # upward leaves a canonical remainder
        while r:
            low = r & -r
            b = self.basis.get(low.bit_length() - 1)
            if b is None:
                rem |= low
                r ^= low
            else:
                r ^= b[0]
                t ^= b[1]
        return rem, t

    def contains(self, v: int) -> bool:
        return self.reduce(v)[0] == 0
