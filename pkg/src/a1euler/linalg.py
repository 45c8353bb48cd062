"""Exact dense linear algebra over the rationals.

Everything here works on :class:`Matrix`, an immutable row-major matrix of
``fractions.Fraction`` entries.  Zero-row and zero-column shapes are legal;
they show up constantly as empty cohomology groups.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterable, Sequence

__all__ = [
    "Matrix",
    "rank_kernel_image",
    "congruence_diagonalize",
    "solve",
    "square_class",
    "factorize",
    "format_rational",
    "parse_rational",
    "TRIAL_DIVISION_BOUND",
    "FACTOR_LIMIT",
    "is_prime",
]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted; pass int, Fraction or 'p/q'")
    return Fraction(x)


class Matrix:
    """Immutable dense matrix with exact rational entries."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Iterable = ()):
        data = tuple(_frac(x) for x in data)
        if rows < 0 or cols < 0 or len(data) != rows * cols:
            raise ValueError(f"bad matrix shape {rows}x{cols} for {len(data)} entries")
        self.rows = rows
        self.cols = cols
        self._data = data

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "Matrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), cols, (x for r in rows for x in r))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int | None = None) -> "Matrix":
        if rows is None:
            rows = len(columns[0]) if columns else 0
        if any(len(c) != rows for c in columns):
            raise ValueError("ragged columns")
        return cls(rows, len(columns), (c[i] for i in range(rows) for c in columns))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(n, n, (1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def diagonal(cls, entries: Sequence) -> "Matrix":
        n = len(entries)
        return cls(n, n, (entries[i] if i == j else 0 for i in range(n) for j in range(n)))

    def __getitem__(self, idx):
        i, j = idx
        return self._data[i * self.cols + j]

    def row(self, i: int) -> list[Fraction]:
        return list(self._data[i * self.cols:(i + 1) * self.cols])

    def column(self, j: int) -> list[Fraction]:
        return [self._data[i * self.cols + j] for i in range(self.rows)]

    def to_rows(self) -> list[list[Fraction]]:
        return [self.row(i) for i in range(self.rows)]

    def columns(self) -> list[list[Fraction]]:
        return [self.column(j) for j in range(self.cols)]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def T(self) -> "Matrix":
        return Matrix(self.cols, self.rows,
                      (self._data[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        ocols = other.columns()
        out = []
        for i in range(self.rows):
            r = self.row(i)
            for c in ocols:
                out.append(sum((a * b for a, b in zip(r, c) if a and b), Fraction(0)))
        return Matrix(self.rows, other.cols, out)

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix(self.rows, self.cols, (a + b for a, b in zip(self._data, other._data)))

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix(self.rows, self.cols, (a - b for a, b in zip(self._data, other._data)))

    def scale(self, c) -> "Matrix":
        c = _frac(c)
        return Matrix(self.rows, self.cols, (c * a for a in self._data))

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._data))

    def __repr__(self) -> str:
        return f"Matrix({self.to_string()})"

    def to_string(self) -> str:
        return "[" + ", ".join(
            "[" + ", ".join(format_rational(x) for x in r) + "]" for r in self.to_rows()) + "]"

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_symmetric(self) -> bool:
        return self.is_square() and all(
            self[i, j] == self[j, i] for i in range(self.rows) for j in range(i + 1, self.cols))

    def is_zero(self) -> bool:
        return not any(self._data)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix(len(rows), len(cols), (self[i, j] for i in rows for j in cols))

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        return Matrix.from_rows([self.row(i) + other.row(i) for i in range(self.rows)],
                                self.cols + other.cols)

    def det(self) -> Fraction:
        if not self.is_square():
            raise ValueError("determinant of a non-square matrix")
        a = self.to_rows()
        n = self.rows
        det = Fraction(1)
        for k in range(n):
            piv = next((i for i in range(k, n) if a[i][k] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != k:
                a[k], a[piv] = a[piv], a[k]
                det = -det
            det *= a[k][k]
            inv = 1 / a[k][k]
            for i in range(k + 1, n):
                f = a[i][k] * inv
                if f:
                    ri, rk = a[i], a[k]
                    for j in range(k, n):
                        ri[j] -= f * rk[j]
        return det

    def rank(self) -> int:
        return len(_rref(self.to_rows(), self.cols)[1])

    def inverse(self) -> "Matrix":
        n = self.rows
        if not self.is_square():
            raise ValueError("inverse of a non-square matrix")
        aug = [self.row(i) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        red, piv = _rref(aug, n)
        if len(piv) < n:
            raise ZeroDivisionError("matrix is singular")
        return Matrix.from_rows([r[n:] for r in red[:n]], n)


def _rref(a: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduce ``a`` in place to reduced row echelon form on its first ``ncols`` columns."""
    pivots: list[int] = []
    nrows = len(a)
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        pr = a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r:
                f = a[i][c]
                if f:
                    a[i] = [x - f * y for x, y in zip(a[i], pr)]
        pivots.append(c)
        r += 1
    return a, pivots


def rank_kernel_image(m: Matrix) -> tuple[int, Matrix, Matrix]:
    """Rank, a kernel basis (as columns) and an image basis (pivot columns of ``m``)."""
    red, pivots = _rref(m.to_rows(), m.cols)
    rank = len(pivots)
    free = [c for c in range(m.cols) if c not in set(pivots)]
    kernel_cols = []
    for f in free:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -red[r][f]
        kernel_cols.append(v)
    kernel = Matrix.from_columns(kernel_cols, m.cols) if kernel_cols else Matrix(m.cols, 0)
    image_cols = [m.column(p) for p in pivots]
    image = Matrix.from_columns(image_cols, m.rows) if image_cols else Matrix(m.rows, 0)
    return rank, kernel, image


def solve(a: Matrix, b: Sequence) -> list[Fraction] | None:
    """One solution of ``a x = b``, or None when the system is inconsistent."""
    b = [_frac(x) for x in b]
    if len(b) != a.rows:
        raise ValueError("right-hand side has the wrong length")
    aug = [a.row(i) + [b[i]] for i in range(a.rows)]
    red, pivots = _rref(aug, a.cols)
    for r in range(len(pivots), a.rows):
        if red[r][a.cols] != 0:
            return None
    x = [Fraction(0)] * a.cols
    for r, p in enumerate(pivots):
        x[p] = red[r][a.cols]
    return x


def congruence_diagonalize(s: Matrix) -> tuple[list[Fraction], Matrix]:
    """Diagonalize a symmetric matrix by congruence.

    Returns ``(d, P)`` with ``P.T @ s @ P == Matrix.diagonal(d)`` and ``P``
    invertible.  When no diagonal pivot is available but an off-diagonal
    entry ``s[i, j]`` is, the pair of basis vectors is replaced by
    ``e_i + e_j, e_i - e_j`` (this uses that 2 is invertible).
    """
    if not s.is_symmetric():
        raise ValueError("not symmetric")
    n = s.rows
    a = s.to_rows()
    p = Matrix.identity(n).to_rows()  # p[i] is row i; basis vectors are columns

    def col_op(target: int, source: int, f: Fraction) -> None:
        # e_target <- e_target + f * e_source, applied as a congruence
        for row in a:
            row[target] += f * row[source]
        a[target] = [x + f * y for x, y in zip(a[target], a[source])]
        for row in p:
            row[target] += f * row[source]

    def swap(i: int, j: int) -> None:
        if i == j:
            return
        a[i], a[j] = a[j], a[i]
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in p:
            row[i], row[j] = row[j], row[i]

    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in range(k, n) for j in range(i + 1, n) if a[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # (e_i, e_j) -> (e_i + e_j, e_i - e_j); both diagonal entries nonzero afterwards
            col_op(i, j, Fraction(1))
            col_op(j, i, Fraction(-1, 2))
            col_op(j, j, Fraction(-3))  # e_j <- -2 e_j, so e_j = e_i_old - e_j_old
            piv = i
        swap(k, piv)
        inv = 1 / a[k][k]
        for r in range(k + 1, n):
            f = a[r][k]
            if f:
                col_op(r, k, -f * inv)
    d = [a[i][i] for i in range(n)]
    return d, Matrix.from_rows(p, n)


# -- square classes ---------------------------------------------------------

#: Small factors are removed by trial division up to this bound.  What is
#: left is split with Pollard's rho (Brent's variant) and certified with a
#: Miller-Rabin test whose fixed witness set is deterministic below
#: ``FACTOR_LIMIT``.  Larger cofactors are refused rather than guessed.
TRIAL_DIVISION_BOUND = 10 ** 4
FACTOR_LIMIT = 3_317_044_064_679_887_385_961_981
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for ``n < FACTOR_LIMIT``."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    if n >= FACTOR_LIMIT:
        raise ValueError(f"{n} exceeds the certified primality range")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _rho(n: int) -> int:
    """A nontrivial factor of the odd composite ``n`` (Brent)."""
    for c in range(1, 200):
        y, r, q, g = 2, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(128, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += 128
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ValueError(f"could not split {n}")


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of ``|n|``.

    Trial division handles factors up to ``TRIAL_DIVISION_BOUND``; the
    cofactor is split by Pollard-Brent rho with a deterministic Miller-Rabin
    primality test, which is exact below ``FACTOR_LIMIT``.  A larger
    composite cofactor raises ValueError.
    """
    n = abs(int(n))
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n and d <= TRIAL_DIVISION_BOUND:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n == 1:
        return out
    if d * d > n:
        out[n] = out.get(n, 0) + 1
        return out
    if n >= FACTOR_LIMIT:
        raise ValueError(f"cofactor {n} too large to factor (limit {FACTOR_LIMIT})")
    stack = [n]
    while stack:
        m = stack.pop()
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        r = isqrt(m)
        f = r if r * r == m else _rho(m)
        stack += [f, m // f]
    return dict(sorted(out.items()))


def _squarefree_part(n: int) -> int:
    out = 1
    for p, e in factorize(n).items():
        if e % 2:
            out *= p
    return out


@lru_cache(maxsize=1 << 16)
def square_class(q) -> int:
    """Square-free integer representing ``q`` modulo nonzero rational squares."""
    q = _frac(q)
    if q == 0:
        raise ValueError("zero has no square class")
    sign = -1 if q < 0 else 1
    a, b = _squarefree_part(q.numerator), _squarefree_part(q.denominator)
    g = gcd(a, b)
    return sign * (a // g) * (b // g)


def format_rational(x) -> str:
    x = _frac(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())
