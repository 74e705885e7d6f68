"""Dense exact linear algebra over the rationals.

Matrices are lists of rows of Fractions.  All eliminations pivot on the
lowest-index nonzero entry, so every derived object (ranks, kernels,
splittings) is deterministic and reproducible byte-for-byte.
"""

from __future__ import annotations

from fractions import Fraction

Matrix = list  # list[list[Fraction]]

ZERO = Fraction(0)
ONE = Fraction(1)


def zeros(rows: int, cols: int) -> Matrix:
    return [[ZERO] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = ONE
    return m


def copy(a: Matrix) -> Matrix:
    return [row[:] for row in a]


def shape(a: Matrix) -> tuple[int, int]:
    return (len(a), len(a[0]) if a else 0)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    n, k = shape(a)
    k2, m = shape(b)
    if k != k2:
        raise ValueError(f"shape mismatch {shape(a)} x {shape(b)}")
    out = zeros(n, m)
    for i in range(n):
        arow = a[i]
        orow = out[i]
        for t in range(k):
            c = arow[t]
            if c:
                brow = b[t]
                for j in range(m):
                    if brow[j]:
                        orow[j] += c * brow[j]
    return out


def matvec(a: Matrix, v: list) -> list:
    n, k = shape(a)
    if k != len(v):
        raise ValueError("shape mismatch")
    return [sum((a[i][j] * v[j] for j in range(k) if v[j]), ZERO) for i in range(n)]


def add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(a: Matrix, c) -> Matrix:
    c = Fraction(c)
    return [[c * x for x in row] for row in a]


def transpose(a: Matrix) -> Matrix:
    n, m = shape(a)
    return [[a[i][j] for i in range(n)] for j in range(m)]


def is_zero(a: Matrix) -> bool:
    return all(not x for row in a for x in row)


def eq(a: Matrix, b: Matrix) -> bool:
    return shape(a) == shape(b) and all(
        x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb)
    )


def rref(a: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (R, pivot column indices)."""
    r = copy(a)
    n, m = shape(r)
    pivots: list[int] = []
    row = 0
    for col in range(m):
        if row >= n:
            break
        piv = next((i for i in range(row, n) if r[i][col]), None)
        if piv is None:
            continue
        r[row], r[piv] = r[piv], r[row]
        inv = ONE / r[row][col]
        r[row] = [x * inv for x in r[row]]
        for i in range(n):
            if i != row and r[i][col]:
                c = r[i][col]
                r[i] = [x - c * y for x, y in zip(r[i], r[row])]
        pivots.append(col)
        row += 1
    return r, pivots


def rank(a: Matrix) -> int:
    if not a or not a[0]:
        return 0
    return len(rref(a)[1])


def kernel_basis(a: Matrix) -> list[list]:
    """Basis of the right null space, one vector per free column, in
    increasing free-column order."""
    n, m = shape(a)
    if m == 0:
        return []
    if n == 0:
        return [[ONE if i == j else ZERO for i in range(m)] for j in range(m)]
    r, pivots = rref(a)
    pivset = set(pivots)
    basis = []
    for free in range(m):
        if free in pivset:
            continue
        v = [ZERO] * m
        v[free] = ONE
        for prow, pcol in enumerate(pivots):
            v[pcol] = -r[prow][free]
        basis.append(v)
    return basis


def column_space_pivots(a: Matrix) -> list[int]:
    """Indices of the pivot columns (a deterministic basis of the image)."""
    if not a or not a[0]:
        return []
    return rref(a)[1]


def solve(a: Matrix, b: list) -> list | None:
    """One solution of a x = b, or None.  Free variables are set to zero."""
    n, m = shape(a)
    aug = [a[i][:] + [b[i]] for i in range(n)]
    r, pivots = rref(aug)
    if m in pivots:
        return None
    x = [ZERO] * m
    for prow, pcol in enumerate(pivots):
        x[pcol] = r[prow][m]
    return x


def solve_matrix(a: Matrix, b: Matrix) -> Matrix | None:
    """Solve a X = b column by column; None if any column is inconsistent."""
    n, m = shape(a)
    nb, mb = shape(b)
    if n != nb:
        raise ValueError("shape mismatch")
    cols = []
    for j in range(mb):
        x = solve(a, [b[i][j] for i in range(n)])
        if x is None:
            return None
        cols.append(x)
    return transpose(cols) if cols else zeros(m, 0)


def inverse(a: Matrix) -> Matrix:
    n, m = shape(a)
    if n != m:
        raise ValueError("not square")
    aug = [a[i][:] + identity(n)[i] for i in range(n)]
    r, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("singular matrix")
    return [row[n:] for row in r]
