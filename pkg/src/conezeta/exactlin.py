"""Exact rational linear algebra.

Vectors are tuples of Fraction and matrices are tuples of row tuples.
Every routine uses the same pivot discipline (leftmost column, lowest
row index) so that downstream canonical forms are reproducible.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Iterable, Optional, Sequence

from .errors import DomainError, RankError, ShapeError

Rat = Fraction
RatVec = tuple
RatMatrix = tuple


def as_vec(v: Iterable) -> tuple:
    return tuple(Fraction(x) for x in v)


def as_matrix(rows: Iterable[Iterable]) -> tuple:
    M = tuple(as_vec(r) for r in rows)
    if M and len({len(r) for r in M}) != 1:
        raise ShapeError("rows of unequal length")
    return M


def shape(M: Sequence[Sequence]) -> tuple[int, int]:
    return (len(M), len(M[0]) if M else 0)


def transpose(M: Sequence[Sequence]) -> tuple:
    return tuple(zip(*M)) if M else ()


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> tuple:
    if A and B and len(A[0]) != len(B):
        raise ShapeError(f"cannot multiply {shape(A)} by {shape(B)}")
    Bt = transpose(B)
    return tuple(tuple(sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in Bt) for row in A)


def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise ShapeError("length mismatch in dot product")
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def identity(n: int) -> tuple:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def determinant(M: Sequence[Sequence]) -> Fraction:
    """Determinant by fraction-free (Bareiss) elimination."""
    n = len(M)
    if any(len(r) != n for r in M):
        raise ShapeError("determinant of a non-square matrix")
    if n == 0:
        return Fraction(1)
    # clear denominators so that Bareiss runs over the integers
    den = 1
    for r in M:
        for x in r:
            if not isinstance(x, int):
                x = Fraction(x)
                den = den * x.denominator // gcd(den, x.denominator)
    if den == 1:
        a = [[int(x) for x in r] for r in M]
    else:
        a = [[int(Fraction(x) * den) for x in r] for r in M]
    return Fraction(_int_det(a), den ** n)


def _int_det(a: list) -> int:
    """Bareiss on an integer matrix, modified in place."""
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rref(M: Sequence[Sequence]) -> tuple[tuple, tuple[int, ...]]:
    """Reduced row echelon form and pivot columns."""
    A = [list(map(Fraction, r)) for r in M]
    rows, cols = shape(A)
    pivots = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        pv = A[r][c]
        A[r] = [x / pv for x in A[r]]
        for i in range(rows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return tuple(tuple(x) for x in A), tuple(pivots)


def rank(M: Sequence[Sequence]) -> int:
    if not M:
        return 0
    return len(rref(M)[1])


def nullspace(M: Sequence[Sequence], ncols: Optional[int] = None) -> list[tuple]:
    """Basis of {x : M x = 0}, one vector per free column."""
    n = ncols if ncols is not None else shape(M)[1]
    if not M:
        return [tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)]
    R, piv = rref(M)
    basis = []
    for f in range(n):
        if f in piv:
            continue
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for i, p in enumerate(piv):
            x[p] = -R[i][f]
        basis.append(tuple(x))
    return basis


def solve(A: Sequence[Sequence], b: Sequence) -> Optional[tuple]:
    """A solution of A x = b, or None when inconsistent.

    Free variables are set to zero; pivots are taken leftmost first.
    """
    rows, cols = shape(A)
    if len(b) != rows:
        raise ShapeError(f"matrix has {rows} rows but right side has {len(b)} entries")
    if rows == 0:
        return ()
    aug = [list(r) + [bb] for r, bb in zip(A, b)]
    R, piv = rref(aug)
    if cols in piv:
        return None
    x = [Fraction(0)] * cols
    for i, p in enumerate(piv):
        x[p] = R[i][cols]
    return tuple(x)


def inverse(M: Sequence[Sequence]) -> tuple:
    n = len(M)
    if any(len(r) != n for r in M):
        raise ShapeError("inverse of a non-square matrix")
    aug = [list(r) + list(e) for r, e in zip(M, identity(n))]
    R, piv = rref(aug)
    if tuple(piv[:n]) != tuple(range(n)):
        raise RankError("matrix is singular")
    return tuple(tuple(r[n:]) for r in R)


def minor_weight(A: Sequence[Sequence]) -> Fraction:
    """Sum of |det| over all k x k row-subset minors of the n x k matrix A."""
    n, k = shape(A)
    if k == 0:
        return Fraction(1)
    total = Fraction(0)
    for rows in combinations(range(n), k):
        total += abs(determinant([A[i] for i in rows]))
    if total == 0:
        raise RankError("columns are linearly dependent")
    return total


def dual_rows(A: Sequence[Sequence]) -> tuple:
    """Rows L_j* with (L_i, L_j*) = delta_ij, taken as (A A^T)^{-1} A."""
    A = as_matrix(A)
    if not A:
        return ()
    G = matmul(A, transpose(A))
    if rank(G) < len(A):
        raise RankError("rows are linearly dependent")
    return matmul(inverse(G), A)


def _require_int(M):
    out = []
    for r in M:
        row = []
        for x in r:
            if type(x) is int:
                row.append(x)
                continue
            x = Fraction(x)
            if x.denominator != 1:
                raise DomainError(f"non-integer entry {x}")
            row.append(int(x))
        out.append(row)
    return out


def hermite_normal_form(M: Sequence[Sequence]) -> tuple[tuple, tuple]:
    """Row-style Hermite normal form: returns (H, U) with H = U M, U unimodular.

    Pivots are positive, entries above a pivot lie in [0, pivot), zero rows last.
    """
    A = _require_int(M)
    m = len(A)
    n = len(A[0]) if A else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    r = 0
    for c in range(n):
        if r == m:
            break
        # Euclid on column c among rows r..m-1
        while True:
            nz = [i for i in range(r, m) if A[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: (abs(A[i][c]), i))
            A[r], A[p] = A[p], A[r]
            U[r], U[p] = U[p], U[r]
            done = True
            for i in range(r + 1, m):
                if A[i][c]:
                    q = A[i][c] // A[r][c]
                    A[i] = [x - q * y for x, y in zip(A[i], A[r])]
                    U[i] = [x - q * y for x, y in zip(U[i], U[r])]
                    if A[i][c]:
                        done = False
            if done:
                break
        if all(A[i][c] == 0 for i in range(r, m)):
            continue
        if A[r][c] < 0:
            A[r] = [-x for x in A[r]]
            U[r] = [-x for x in U[r]]
        for i in range(r):
            q = A[i][c] // A[r][c]
            if q:
                A[i] = [x - q * y for x, y in zip(A[i], A[r])]
                U[i] = [x - q * y for x, y in zip(U[i], U[r])]
        r += 1
    return as_matrix(A), as_matrix(U)


def hnf_pivots(H: Sequence[Sequence]) -> list:
    piv = []
    for row in H:
        for x in row:
            if x != 0:
                piv.append(x)
                break
    return piv


def integer_kernel(A: Sequence[Sequence], ncols: Optional[int] = None) -> list[tuple]:
    """Z-basis of the lattice {x in Z^n : A x = 0} for an integer matrix A."""
    n = ncols if ncols is not None else shape(A)[1]
    if not A:
        return [tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)]
    H, U = hermite_normal_form(transpose(A))
    return [U[i] for i in range(n) if all(x == 0 for x in H[i])]


def lattice_index(rows: Sequence[Sequence]) -> int:
    """Index of the Z-span of independent integer rows in its saturation."""
    rows = _require_int(rows)
    d = len(rows)
    if d == 0:
        return 1
    n = len(rows[0])
    g = 0
    for cols in combinations(range(n), d):
        g = gcd(g, _int_det([[r[c] for c in cols] for r in rows]))
        if g == 1:
            break
    if g == 0:
        raise RankError("rows are linearly dependent")
    return g


def primitive(v: Sequence) -> tuple:
    """Primitive integer vector on the ray of v (positive rescaling)."""
    v = as_vec(v)
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        raise DomainError("zero vector has no primitive representative")
    return tuple(x // g for x in ints)


def is_integer_vec(v: Sequence) -> bool:
    return all(Fraction(x).denominator == 1 for x in v)
