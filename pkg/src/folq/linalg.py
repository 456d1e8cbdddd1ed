"""Exact linear algebra over Q: rref, rank, kernels, solving with
inconsistency certificates.  Matrices are lists of lists of Fraction."""

from __future__ import annotations

from fractions import Fraction


def _as_fractions(A):
    return [[Fraction(x) for x in row] for row in A]


def rref(A):
    """Reduced row echelon form.  Returns (R, pivots, T) with T*A = R."""
    R = _as_fractions(A)
    rows = len(R)
    cols = len(R[0]) if rows else 0
    T = [[Fraction(int(i == j)) for j in range(rows)] for i in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if R[i][c] != 0), None)
        if pr is None:
            continue
        R[r], R[pr] = R[pr], R[r]
        T[r], T[pr] = T[pr], T[r]
        inv = 1 / R[r][c]
        R[r] = [x * inv for x in R[r]]
        T[r] = [x * inv for x in T[r]]
        for i in range(rows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [x - f * y for x, y in zip(R[i], R[r])]
                T[i] = [x - f * y for x, y in zip(T[i], T[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return R, pivots, T


def rank(A):
    if not A or not A[0]:
        return 0
    _, pivots, _ = rref(A)
    return len(pivots)


def nullspace(A):
    """Basis of the right kernel, as column vectors, in reduced echelon shape."""
    if not A:
        return []
    cols = len(A[0])
    R, pivots, _ = rref(A)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -R[r][f]
        basis.append(v)
    return basis


def solve(A, b):
    """One solution of A x = b, or None."""
    x, _ = solve_or_certificate(A, b)
    return x


def solve_or_certificate(A, b):
    """Solve A x = b.  Returns (x, None) on success; on failure returns
    (None, y) with y a row vector satisfying y*A = 0 and y.b != 0."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    if rows == 0:
        return [Fraction(0)] * cols, None
    aug = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(A)]
    R, pivots, T = rref(aug)
    if cols in pivots:
        r = pivots.index(cols)
        return None, T[r]
    x = [Fraction(0)] * cols
    for r, p in enumerate(pivots):
        x[p] = R[r][cols]
    return x, None


def mat_mul_q(A, B):
    if not A or not B:
        return []
    rows, inner, cols = len(A), len(B), len(B[0])
    out = [[Fraction(0)] * cols for _ in range(rows)]
    for i in range(rows):
        for k in range(inner):
            a = A[i][k]
            if a == 0:
                continue
            for j in range(cols):
                out[i][j] += a * B[k][j]
    return out


def mat_is_zero_q(A):
    return all(x == 0 for row in A for x in row)
