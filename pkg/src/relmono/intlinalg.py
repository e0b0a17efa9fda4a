"""Exact integer linear algebra on lists of Python ints (arbitrary size)."""
from __future__ import annotations

from typing import List, Sequence, Tuple

Matrix = List[List[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> Matrix:
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def vecmat(v: Sequence[int], A: Sequence[Sequence[int]]) -> List[int]:
    return [sum(v[i] * A[i][j] for i in range(len(v))) for j in range(len(A[0]))]


def transpose(A: Sequence[Sequence[int]]) -> Matrix:
    return [list(r) for r in zip(*A)]


def freeze(A) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in A)


def hnf(rows: Sequence[Sequence[int]]) -> Matrix:
    """Row Hermite normal form: nonzero rows only, positive pivots, entries
    above each pivot reduced into ``[0, pivot)``."""
    A = [list(map(int, r)) for r in rows if any(r)]
    if not A:
        return []
    ncols = len(A[0])
    r = 0
    for c in range(ncols):
        if r >= len(A):
            break
        while True:
            nz = [i for i in range(r, len(A)) if A[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(A[i][c]))
            A[r], A[p] = A[p], A[r]
            done = True
            for i in range(r + 1, len(A)):
                if A[i][c]:
                    q = A[i][c] // A[r][c]
                    A[i] = [a - q * b for a, b in zip(A[i], A[r])]
                    if A[i][c]:
                        done = False
            if done:
                break
        if r < len(A) and A[r][c] != 0:
            if A[r][c] < 0:
                A[r] = [-a for a in A[r]]
            for i in range(r):
                q = A[i][c] // A[r][c]
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[r])]
            r += 1
    return [row for row in A[:r] if any(row)]


def smith(B: Sequence[Sequence[int]]):
    """Smith form with transforms: returns ``(U, D, V)`` with ``U B V = D``
    diagonal, ``U`` and ``V`` unimodular."""
    m, n = len(B), len(B[0]) if B else 0
    D = [list(map(int, r)) for r in B]
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (D, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row dst -= q row src
        D[dst] = [a - q * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a - q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):  # col dst -= q col src
        for M in (D, V):
            for row in M:
                row[dst] -= q * row[src]

    t = 0
    while t < min(m, n):
        entries = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
        if not entries:
            break
        _, i, j = min(entries)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            changed = False
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, D[i][t] // D[t][t])
                    if D[i][t]:
                        swap_rows(t, i)
                        changed = True
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, D[t][j] // D[t][t])
                    if D[t][j]:
                        swap_cols(t, j)
                        changed = True
            if changed:
                continue
            bad = [(i, j) for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % D[t][t]]
            if not bad:
                break
            i, _ = bad[0]
            D[t] = [a + b for a, b in zip(D[t], D[i])]
            U[t] = [a + b for a, b in zip(U[t], U[i])]
        if D[t][t] < 0:
            D[t] = [-a for a in D[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return U, D, V


def solve_left(B: Sequence[Sequence[int]], c: Sequence[int]):
    """Integer row vector ``x`` with ``x B = c``, or ``None`` if none exists."""
    m = len(B)
    if m == 0:
        return [] if not any(c) else None
    # x B = c  <=>  B^T x^T = c^T ; with U B^T V = D:  D (V^-1 x^T) = U c^T
    Bt = transpose(B)
    U, D, V = smith(Bt)
    rhs = [sum(U[i][k] * c[k] for k in range(len(c))) for i in range(len(U))]
    y = [0] * m
    for i in range(len(rhs)):
        d = D[i][i] if i < m else 0
        if d == 0:
            if rhs[i] != 0:
                return None
        else:
            if rhs[i] % d:
                return None
            y[i] = rhs[i] // d
    return [sum(V[i][k] * y[k] for k in range(m)) for i in range(m)]


def rank(rows: Sequence[Sequence[int]]) -> int:
    return len(hnf(rows))
