"""Exact linear algebra over Q.

Matrices are stored as sparse rows (``dict`` column -> ``Fraction``).  Every
routine is exact; there is no pivoting heuristic beyond "first nonzero
column", which makes reduced row echelon forms canonical.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainMismatchError

SparseVector = dict  # column index -> nonzero Fraction


def _clean(row):
    return {c: v for c, v in row.items() if v != 0}


def _axpy(target, scale, source):
    """target += scale * source, in place, dropping zeros."""
    for c, v in source.items():
        nv = target.get(c, 0) + scale * v
        if nv:
            target[c] = nv
        else:
            target.pop(c, None)


class RationalMatrix:
    """A ``nrows x ncols`` matrix over Q with sparse row storage."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: Sequence[dict] | None = None):
        if nrows < 0 or ncols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            rows = [{} for _ in range(nrows)]
        if len(rows) != nrows:
            raise DomainMismatchError(f"expected {nrows} rows, got {len(rows)}")
        cleaned = []
        for row in rows:
            r = {}
            for c, v in row.items():
                if not 0 <= c < ncols:
                    raise DomainMismatchError(f"column {c} out of range for {ncols} columns")
                v = Fraction(v)
                if v:
                    r[c] = v
            cleaned.append(r)
        self.rows = cleaned

    @classmethod
    def from_dense(cls, entries: Sequence[Sequence]) -> "RationalMatrix":
        nrows = len(entries)
        ncols = len(entries[0]) if nrows else 0
        if any(len(r) != ncols for r in entries):
            raise DomainMismatchError("ragged dense matrix")
        return cls(nrows, ncols, [{j: v for j, v in enumerate(r) if v} for r in entries])

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[dict]) -> "RationalMatrix":
        rows = [{} for _ in range(nrows)]
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    rows[i][j] = Fraction(v)
        m = cls.__new__(cls)
        m.nrows, m.ncols, m.rows = nrows, len(columns), rows
        return m

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(n, n, [{i: Fraction(1)} for i in range(n)])

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "RationalMatrix":
        return cls(nrows, ncols)

    def to_dense(self) -> list[list[Fraction]]:
        return [[r.get(j, Fraction(0)) for j in range(self.ncols)] for r in self.rows]

    def transpose(self) -> "RationalMatrix":
        rows = [{} for _ in range(self.ncols)]
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                rows[j][i] = v
        m = RationalMatrix.__new__(RationalMatrix)
        m.nrows, m.ncols, m.rows = self.ncols, self.nrows, rows
        return m

    def column(self, j: int) -> dict:
        return {i: r[j] for i, r in enumerate(self.rows) if j in r}

    def columns(self) -> list[dict]:
        return self.transpose().rows

    def matvec(self, x: Sequence) -> list[Fraction]:
        if len(x) != self.ncols:
            raise DomainMismatchError(f"vector of length {len(x)} for {self.ncols} columns")
        return [sum((v * x[j] for j, v in r.items()), Fraction(0)) for r in self.rows]

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.ncols != other.nrows:
            raise DomainMismatchError("inner dimensions differ")
        rows = []
        for r in self.rows:
            acc = {}
            for k, v in r.items():
                _axpy(acc, v, other.rows[k])
            rows.append(acc)
        m = RationalMatrix.__new__(RationalMatrix)
        m.nrows, m.ncols, m.rows = self.nrows, other.ncols, rows
        return m

    def is_zero(self) -> bool:
        return not any(self.rows)

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return (self.nrows, self.ncols, self.rows) == (other.nrows, other.ncols, other.rows)

    def __repr__(self):
        return f"RationalMatrix({self.nrows}x{self.ncols}, nnz={sum(map(len, self.rows))})"


class _Echelon:
    """Incrementally maintained fully reduced row echelon form."""

    def __init__(self):
        self.pivot_rows: dict[int, dict] = {}

    def reduce(self, vec: dict) -> dict:
        row = dict(vec)
        for c in [c for c in row if c in self.pivot_rows]:
            v = row.get(c)
            if v:
                _axpy(row, -v, self.pivot_rows[c])
        return row

    def add(self, vec: dict) -> int | None:
        """Insert a vector; return its pivot column, or None if dependent."""
        row = self.reduce(vec)
        if not row:
            return None
        p = min(row)
        inv = 1 / row[p]
        row = {c: v * inv for c, v in row.items()}
        for other in self.pivot_rows.values():
            v = other.get(p)
            if v:
                _axpy(other, -v, row)
        self.pivot_rows[p] = row
        return p

    def sorted_rows(self) -> list[dict]:
        return [self.pivot_rows[p] for p in sorted(self.pivot_rows)]


def rref(m: RationalMatrix) -> tuple[RationalMatrix, list[int], int]:
    """Reduced row echelon form, pivot columns and rank."""
    ech = _Echelon()
    for r in m.rows:
        if r:
            ech.add(r)
    pivots = sorted(ech.pivot_rows)
    rows = ech.sorted_rows() + [{} for _ in range(m.nrows - len(pivots))]
    out = RationalMatrix.__new__(RationalMatrix)
    out.nrows, out.ncols, out.rows = m.nrows, m.ncols, rows
    return out, pivots, len(pivots)


def rank(m: RationalMatrix) -> int:
    return rref(m)[2]


@dataclass(frozen=True)
class SubspaceBasis:
    """A subspace of Q^ambient, stored as the nonzero rows of its RREF.

    Rows are kept sparse as sorted ``(index, value)`` pairs so that equality of
    subspaces is plain tuple equality.
    """

    ambient: int
    rows: tuple = ()

    @classmethod
    def span(cls, ambient: int, vectors: Iterable) -> "SubspaceBasis":
        ech = _Echelon()
        for v in vectors:
            if isinstance(v, dict):
                sv = _clean({int(k): Fraction(x) for k, x in v.items()})
            else:
                if len(v) != ambient:
                    raise DomainMismatchError(f"vector of length {len(v)} in Q^{ambient}")
                sv = {i: Fraction(x) for i, x in enumerate(v) if x}
            if any(not 0 <= c < ambient for c in sv):
                raise DomainMismatchError("sparse vector index out of range")
            ech.add(sv)
        return cls(ambient, tuple(tuple(sorted(r.items())) for r in ech.sorted_rows()))

    @classmethod
    def zero(cls, ambient: int) -> "SubspaceBasis":
        return cls(ambient, ())

    @classmethod
    def full(cls, ambient: int) -> "SubspaceBasis":
        return cls.coordinate(ambient, range(ambient))

    @classmethod
    def coordinate(cls, ambient: int, indices: Iterable[int]) -> "SubspaceBasis":
        idx = sorted(set(indices))
        if idx and not (0 <= idx[0] and idx[-1] < ambient):
            raise DomainMismatchError("coordinate index out of range")
        return cls(ambient, tuple(((i, Fraction(1)),) for i in idx))

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def vectors(self) -> list[list[Fraction]]:
        out = []
        for r in self.rows:
            v = [Fraction(0)] * self.ambient
            for i, x in r:
                v[i] = x
            out.append(v)
        return out

    def sparse_vectors(self) -> list[dict]:
        return [dict(r) for r in self.rows]

    def pivots(self) -> list[int]:
        return [r[0][0] for r in self.rows]

    def contains(self, vector) -> bool:
        return not self.residual(vector)

    def residual(self, vector) -> dict:
        """Reduce ``vector`` modulo this subspace (canonical representative)."""
        ech = _Echelon()
        for r in self.rows:
            ech.pivot_rows[r[0][0]] = dict(r)
        if isinstance(vector, dict):
            sv = _clean({k: Fraction(x) for k, x in vector.items()})
        else:
            sv = {i: Fraction(x) for i, x in enumerate(vector) if x}
        return ech.reduce(sv)

    def is_subspace_of(self, other: "SubspaceBasis") -> bool:
        self._check(other)
        return all(other.contains(v) for v in self.sparse_vectors())

    def __add__(self, other: "SubspaceBasis") -> "SubspaceBasis":
        self._check(other)
        return SubspaceBasis.span(self.ambient, self.sparse_vectors() + other.sparse_vectors())

    def intersect(self, other: "SubspaceBasis") -> "SubspaceBasis":
        """Intersection via the kernel of [self^T | -other^T]."""
        self._check(other)
        a, b = self.sparse_vectors(), other.sparse_vectors()
        cols = a + [{i: -x for i, x in v.items()} for v in b]
        ker = kernel_basis(RationalMatrix.from_columns(self.ambient, cols))
        out = []
        for k in ker.sparse_vectors():
            vec = {}
            for j, coeff in k.items():
                if j < len(a):
                    _axpy(vec, coeff, a[j])
            out.append(vec)
        return SubspaceBasis.span(self.ambient, out)

    def _check(self, other):
        if self.ambient != other.ambient:
            raise DomainMismatchError(f"subspaces of Q^{self.ambient} and Q^{other.ambient}")


def kernel_basis(m: RationalMatrix) -> SubspaceBasis:
    red, pivots, _ = rref(m)
    pivot_set = set(pivots)
    free = [c for c in range(m.ncols) if c not in pivot_set]
    vectors = []
    for f in free:
        v = {f: Fraction(1)}
        for p, row in zip(pivots, red.rows):
            x = row.get(f)
            if x:
                v[p] = -x
        vectors.append(v)
    return SubspaceBasis.span(m.ncols, vectors)


def image_basis(m: RationalMatrix) -> SubspaceBasis:
    """Column space of ``m`` as a subspace of Q^nrows."""
    return SubspaceBasis.span(m.nrows, m.transpose().rows)


def solve_affine_in_subspace(
    a: RationalMatrix, b: Sequence, s: SubspaceBasis | None = None
) -> list[Fraction] | None:
    """Some ``x`` in ``s`` with ``a @ x == b``, or None when no such x exists.

    ``s`` defaults to the whole domain.  The returned solution is the basic
    solution of the RREF of ``[a s^T | b]`` with all free variables zero.
    """
    if isinstance(b, dict):
        bvec = _clean({k: Fraction(v) for k, v in b.items()})
        if any(not 0 <= k < a.nrows for k in bvec):
            raise DomainMismatchError("right-hand side index out of range")
    else:
        if len(b) != a.nrows:
            raise DomainMismatchError(f"right-hand side of length {len(b)} for {a.nrows} rows")
        bvec = {i: Fraction(v) for i, v in enumerate(b) if v}
    if s is None:
        s = SubspaceBasis.full(a.ncols)
    if s.ambient != a.ncols:
        raise DomainMismatchError(f"subspace of Q^{s.ambient} for a map from Q^{a.ncols}")
    if not bvec:
        return [Fraction(0)] * a.ncols
    basis = s.sparse_vectors()
    a_cols = a.columns()
    cols = []
    for v in basis:
        col = {}
        for j, x in v.items():
            _axpy(col, x, a_cols[j])
        cols.append(col)
    k = len(cols)
    cols.append(bvec)
    aug = RationalMatrix.from_columns(a.nrows, cols)
    red, pivots, _ = rref(aug)
    if k in pivots:
        return None
    y = [Fraction(0)] * k
    for p, row in zip(pivots, red.rows):
        y[p] = row.get(k, Fraction(0))
    x = [Fraction(0)] * a.ncols
    for coeff, v in zip(y, basis):
        if coeff:
            for j, val in v.items():
                x[j] += coeff * val
    return x


def quotient_dimension(big: SubspaceBasis, small: SubspaceBasis) -> int:
    """dim(big + small) - dim(small)."""
    return (big + small).dim - small.dim


def combinations_in_span(m: RationalMatrix, selected: Sequence[int]) -> SubspaceBasis:
    """Coefficient vectors c with sum_j c_j * col(selected[j]) in the span of the other columns.

    Equivalently, the projection of ker(m) onto the ``selected`` coordinates.
    Works on sparse columns throughout; the result lives in Q^len(selected).
    """
    chosen = list(selected)
    chosen_set = set(chosen)
    if len(chosen_set) != len(chosen):
        raise ValueError("selected columns must be distinct")
    cols = m.columns()
    ech = _Echelon()
    for j, col in enumerate(cols):
        if j not in chosen_set and col:
            ech.add(col)
    residuals = [ech.reduce(cols[j]) for j in chosen]
    return kernel_basis(RationalMatrix.from_columns(m.nrows, residuals))
