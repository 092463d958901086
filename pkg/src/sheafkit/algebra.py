"""Exact integer linear algebra.

Matrices hold Python ints, so entries never overflow.  The main entry points
are :func:`smith_normal_form`, :func:`hermite_normal_form`,
:func:`kernel_basis`, :func:`solve` and :func:`quotient_group`; everything the
sheaf and cohomology code needs is built from these.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


class AlgebraError(ValueError):
    pass


class DimensionMismatch(AlgebraError):
    pass


class ImageNotContained(AlgebraError):
    def __init__(self, column: int):
        super().__init__(f"image column {column} is not in the span of the kernel basis")
        self.column = column


class IntMatrix:
    """Immutable dense integer matrix.

    Zero-row and zero-column matrices are allowed; they stand for maps to and
    from the zero module.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, entries: Iterable[int] = ()):
        entries = tuple(int(x) for x in entries)
        if rows < 0 or cols < 0:
            raise DimensionMismatch(f"negative shape {rows}x{cols}")
        if len(entries) != rows * cols:
            raise DimensionMismatch(
                f"{len(entries)} entries do not fill a {rows}x{cols} matrix")
        self.rows = rows
        self.cols = cols
        self._data = entries

    # construction

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            if not rows:
                raise DimensionMismatch("column count needed for a matrix with no rows")
            cols = len(rows[0])
        for r in rows:
            if len(r) != cols:
                raise DimensionMismatch(f"ragged row of length {len(r)}, expected {cols}")
        return cls(len(rows), cols, (x for r in rows for x in r))

    @classmethod
    def from_cols(cls, cols: Sequence[Sequence[int]], rows: int | None = None) -> "IntMatrix":
        if rows is None:
            if not cols:
                raise DimensionMismatch("row count needed for a matrix with no columns")
            rows = len(cols[0])
        return cls.from_rows(cols, rows).T

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, [0] * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, (1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def scalar(cls, n: int, c: int) -> "IntMatrix":
        return cls(n, n, (c if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def diag(cls, entries: Sequence[int], rows: int | None = None, cols: int | None = None) -> "IntMatrix":
        rows = len(entries) if rows is None else rows
        cols = len(entries) if cols is None else cols
        data = [0] * (rows * cols)
        for i, d in enumerate(entries):
            data[i * cols + i] = d
        return cls(rows, cols, data)

    @classmethod
    def hstack(cls, blocks: Sequence["IntMatrix"], rows: int | None = None) -> "IntMatrix":
        if not blocks:
            return cls.zeros(rows or 0, 0)
        rows = blocks[0].rows
        if any(b.rows != rows for b in blocks):
            raise DimensionMismatch("hstack blocks differ in row count")
        cols = sum(b.cols for b in blocks)
        data = []
        for i in range(rows):
            for b in blocks:
                data.extend(b.row(i))
        return cls(rows, cols, data)

    @classmethod
    def vstack(cls, blocks: Sequence["IntMatrix"], cols: int | None = None) -> "IntMatrix":
        if not blocks:
            return cls.zeros(0, cols or 0)
        cols = blocks[0].cols
        if any(b.cols != cols for b in blocks):
            raise DimensionMismatch("vstack blocks differ in column count")
        return cls(sum(b.rows for b in blocks), cols, (x for b in blocks for x in b._data))

    # access

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return self._data[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self._data[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple[int, ...]:
        return tuple(self._data[i * self.cols + j] for i in range(self.rows))

    def to_lists(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def columns(self) -> list[tuple[int, ...]]:
        return [self.col(j) for j in range(self.cols)]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "IntMatrix":
        return IntMatrix(len(rows), len(cols), (self[i, j] for i in rows for j in cols))

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, (self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def is_zero(self) -> bool:
        return not any(self._data)

    def is_identity(self) -> bool:
        return self == IntMatrix.identity(self.rows) if self.rows == self.cols else False

    # arithmetic

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if not isinstance(other, IntMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        ocols = [other.col(j) for j in range(other.cols)]
        data = []
        for i in range(self.rows):
            r = self.row(i)
            for c in ocols:
                data.append(sum(a * b for a, b in zip(r, c)))
        return IntMatrix(self.rows, other.cols, data)

    def apply(self, vector: Sequence[int]) -> tuple[int, ...]:
        if len(vector) != self.cols:
            raise DimensionMismatch(f"vector of length {len(vector)} for a {self.shape} matrix")
        return tuple(sum(a * b for a, b in zip(self.row(i), vector)) for i in range(self.rows))

    def _zip(self, other: "IntMatrix", op) -> "IntMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"shape {self.shape} vs {other.shape}")
        return IntMatrix(self.rows, self.cols, (op(a, b) for a, b in zip(self._data, other._data)))

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, (-a for a in self._data))

    def __mul__(self, c: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, (c * a for a in self._data))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._data))

    def __repr__(self) -> str:
        return f"IntMatrix({self.rows}, {self.cols}, {self.to_lists()})"


@dataclass(frozen=True)
class SNFResult:
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.D[i, i] for i in range(min(self.D.shape)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)


@dataclass(frozen=True)
class FGAbelianGroup:
    """Z^betti + Z/t1 + Z/t2 + ... with t1 | t2 | ..."""

    betti: int = 0
    torsion: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.betti < 0:
            raise ValueError("betti number must be nonnegative")
        torsion = tuple(self.torsion)
        if any(t < 2 for t in torsion):
            raise ValueError(f"torsion coefficients must be >= 2, got {torsion}")
        if any(b % a for a, b in zip(torsion, torsion[1:])):
            raise ValueError(f"torsion coefficients must form a divisibility chain, got {torsion}")
        object.__setattr__(self, "torsion", torsion)

    @classmethod
    def from_invariants(cls, betti: int, invariants: Iterable[int]) -> "FGAbelianGroup":
        """Canonical form from arbitrary cyclic orders (units are dropped)."""
        return cls(betti, invariant_factors([abs(d) for d in invariants if abs(d) != 1]))

    def is_trivial(self) -> bool:
        return self.betti == 0 and not self.torsion

    def __str__(self) -> str:
        parts = []
        if self.betti:
            parts.append("Z" if self.betti == 1 else f"Z^{self.betti}")
        parts.extend(f"Z/{t}" for t in self.torsion)
        return " + ".join(parts) if parts else "0"


def invariant_factors(orders: Sequence[int]) -> tuple[int, ...]:
    """Rewrite a direct sum of cyclic groups Z/n_i as a divisibility chain."""
    diag = [n for n in orders if n != 1]
    if any(n == 0 for n in diag):
        raise ValueError("use betti for free summands")
    m = IntMatrix.diag(diag)
    return tuple(d for d in smith_normal_form(m).diagonal if d != 1) if diag else ()


# normal forms


def _pick_pivot(a: list[list[int]], t: int) -> tuple[int, int] | None:
    # smallest nonzero |entry| in a[t:, t:]; ties -> lowest row, then column
    best = None
    for i in range(t, len(a)):
        row = a[i]
        for j in range(t, len(row)):
            x = row[j]
            if x and (best is None or abs(x) < best[0]):
                best = (abs(x), i, j)
    return None if best is None else (best[1], best[2])


def smith_normal_form(A: IntMatrix) -> SNFResult:
    """Return U, D, V with U*A*V = D diagonal, d1 | d2 | ..., all d_i >= 0."""
    m, n = A.shape
    a = A.to_lists()
    u = IntMatrix.identity(m).to_lists()
    v = IntMatrix.identity(n).to_lists()

    def swap_rows(i, k):
        a[i], a[k] = a[k], a[i]
        u[i], u[k] = u[k], u[i]

    def swap_cols(j, k):
        for r in a:
            r[j], r[k] = r[k], r[j]
        for r in v:
            r[j], r[k] = r[k], r[j]

    def add_row(dst, src, q):
        # row dst += q * row src
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, q):
        for r in a:
            r[dst] += q * r[src]
        for r in v:
            r[dst] += q * r[src]

    for t in range(min(m, n)):
        while True:
            pivot = _pick_pivot(a, t)
            if pivot is None:
                break
            pi, pj = pivot
            if pi != t:
                swap_rows(t, pi)
            if pj != t:
                swap_cols(t, pj)
            p = a[t][t]
            clean = True
            for i in range(t + 1, m):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
                    clean = clean and a[i][t] == 0
            for j in range(t + 1, n):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
                    clean = clean and a[t][j] == 0
            if not clean:
                continue
            bad = next((i for i in range(t + 1, m)
                        for j in range(t + 1, n) if a[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]

    return SNFResult(IntMatrix.from_rows(u, m), IntMatrix.from_rows(a, n), IntMatrix.from_rows(v, n))


def hermite_normal_form(A: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Row-style Hermite normal form.

    Returns (H, U) with U unimodular and U*A = H.  H is in row echelon form,
    every pivot is positive and entries above a pivot lie in [0, pivot).
    Zero rows sit at the bottom.
    """
    m, n = A.shape
    h = A.to_lists()
    u = IntMatrix.identity(m).to_lists()
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if h[i][c]]
            if not nz:
                break
            k = min(nz, key=lambda i: (abs(h[i][c]), i))
            if k != r:
                h[r], h[k] = h[k], h[r]
                u[r], u[k] = u[k], u[r]
            if len(nz) == 1:
                break
            p = h[r][c]
            for i in range(r + 1, m):
                if h[i][c]:
                    q = h[i][c] // p
                    h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[r])]
        if not h[r][c]:
            continue
        if h[r][c] < 0:
            h[r] = [-x for x in h[r]]
            u[r] = [-x for x in u[r]]
        p = h[r][c]
        for i in range(r):
            q = h[i][c] // p
            if q:
                h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                u[i] = [x - q * y for x, y in zip(u[i], u[r])]
        r += 1
    return IntMatrix.from_rows(h, n), IntMatrix.from_rows(u, m)


def lattice_basis(M: IntMatrix) -> IntMatrix:
    """Canonical basis (as columns) of the lattice spanned by the columns of M."""
    h, _ = hermite_normal_form(M.T)
    nonzero = [i for i in range(h.rows) if any(h.row(i))]
    return h.submatrix(nonzero, range(h.cols)).T if nonzero else IntMatrix.zeros(M.rows, 0)


# derived operations


def determinant(A: IntMatrix) -> int:
    """Bareiss fraction-free elimination."""
    n = A.rows
    if A.cols != n:
        raise DimensionMismatch(f"determinant of non-square {A.shape}")
    a = A.to_lists()
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def rank(A: IntMatrix) -> int:
    """Rank over Q, by fraction-free elimination (independent of the SNF path)."""
    a = A.to_lists()
    m, n = A.shape
    r = 0
    for c in range(n):
        k = next((i for i in range(r, m) if a[i][c]), None)
        if k is None:
            continue
        a[r], a[k] = a[k], a[r]
        for i in range(r + 1, m):
            if a[i][c]:
                a[i] = [a[r][c] * x - a[i][c] * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == m:
            break
    return r


def is_unimodular(A: IntMatrix) -> bool:
    return A.rows == A.cols and abs(determinant(A)) == 1


def kernel_basis(A: IntMatrix) -> IntMatrix:
    """Columns form a Z-basis of {x : A x = 0}, in canonical (Hermite) form."""
    snf = smith_normal_form(A)
    r = snf.rank
    n = A.cols
    if r == n:
        return IntMatrix.zeros(n, 0)
    raw = snf.V.submatrix(range(n), range(r, n))
    return lattice_basis(raw)


@dataclass(frozen=True)
class Solution:
    """One integer solution plus the kernel describing all others."""

    particular: tuple[int, ...]
    kernel: IntMatrix

    @property
    def unique(self) -> bool:
        return self.kernel.cols == 0


def solve(A: IntMatrix, b: Sequence[int]) -> Solution | None:
    """Integer solutions of A x = b, or None when there are none over Z."""
    if len(b) != A.rows:
        raise DimensionMismatch(f"right-hand side of length {len(b)} for a {A.shape} matrix")
    snf = smith_normal_form(A)
    c = snf.U.apply(b)
    d = snf.diagonal
    y = [0] * A.cols
    for i, ci in enumerate(c):
        di = d[i] if i < len(d) else 0
        if di == 0:
            if ci:
                return None
        elif ci % di:
            return None
        else:
            y[i] = ci // di
    x = snf.V.apply(y)
    r = snf.rank
    if r == A.cols:
        kernel = IntMatrix.zeros(A.cols, 0)
    else:
        kernel = lattice_basis(snf.V.submatrix(range(A.cols), range(r, A.cols)))
    return Solution(x, kernel)


def solve_matrix(A: IntMatrix, B: IntMatrix) -> IntMatrix | None:
    """Some integer X with A X = B, column by column; None if any column fails."""
    if A.rows != B.rows:
        raise DimensionMismatch(f"{A.shape} vs right-hand side {B.shape}")
    cols = []
    for j in range(B.cols):
        sol = solve(A, B.col(j))
        if sol is None:
            return None
        cols.append(sol.particular)
    return IntMatrix.from_cols(cols, A.cols)


def quotient_group(ker_basis: IntMatrix, im_basis: IntMatrix) -> FGAbelianGroup:
    """The group span(ker) / span(im).

    ``ker_basis`` may have dependent columns; it is reduced to a lattice basis
    first.  Every column of ``im_basis`` must lie in span(ker).
    """
    if ker_basis.rows != im_basis.rows:
        raise DimensionMismatch(f"kernel {ker_basis.shape} and image {im_basis.shape} live in different modules")
    K = lattice_basis(ker_basis)
    coords = []
    for j in range(im_basis.cols):
        sol = solve(K, im_basis.col(j))
        if sol is None:
            raise ImageNotContained(j)
        coords.append(sol.particular)
    C = IntMatrix.from_cols(coords, K.cols)
    diag = smith_normal_form(C).diagonal
    nonzero = [d for d in diag if d]
    return FGAbelianGroup(K.cols - len(nonzero), tuple(d for d in nonzero if d != 1))
