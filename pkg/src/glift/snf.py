"""Smith normal form over the integers with unimodular transforms.

Exact arithmetic on Python ints; the matrices met here (coboundaries of small
nerves) have at most a few hundred rows, so no attempt is made at the
modular or Kannan-Bachem style algorithms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Matrix = list[list[int]]


def _identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


@dataclass
class SmithForm:
    """``S = U @ A @ V`` with S diagonal, ``diagonal[k] | diagonal[k+1]``.

    ``U_inv`` and ``V_inv`` are tracked alongside so callers never invert.
    """

    S: Matrix
    U: Matrix
    U_inv: Matrix
    V: Matrix
    V_inv: Matrix
    rank: int

    @property
    def diagonal(self) -> list[int]:
        return [self.S[k][k] for k in range(self.rank)]

    def as_arrays(self) -> dict[str, np.ndarray]:
        return {k: np.array(getattr(self, k), dtype=object) for k in ("S", "U", "U_inv", "V", "V_inv")}


class _Reducer:
    def __init__(self, A: Matrix, m: int, n: int):
        self.A = A
        self.m, self.n = m, n
        self.U, self.Ui = _identity(m), _identity(m)
        self.V, self.Vi = _identity(n), _identity(n)

    # row operations: A <- E A, U <- E U, U_inv <- U_inv E^-1
    def add_row(self, dst: int, src: int, c: int) -> None:
        if not c:
            return
        for M in (self.A, self.U):
            rd, rs = M[dst], M[src]
            for k in range(len(rd)):
                if rs[k]:
                    rd[k] += c * rs[k]
        for row in self.Ui:
            row[src] -= c * row[dst]

    def swap_rows(self, a: int, b: int) -> None:
        if a == b:
            return
        for M in (self.A, self.U):
            M[a], M[b] = M[b], M[a]
        for row in self.Ui:
            row[a], row[b] = row[b], row[a]

    def negate_row(self, a: int) -> None:
        for M in (self.A, self.U):
            M[a] = [-x for x in M[a]]
        for row in self.Ui:
            row[a] = -row[a]

    # column operations: A <- A E, V <- V E, V_inv <- E^-1 V_inv
    def add_col(self, dst: int, src: int, c: int) -> None:
        if not c:
            return
        for M in (self.A, self.V):
            for row in M:
                if row[src]:
                    row[dst] += c * row[src]
        rd, rs = self.Vi[dst], self.Vi[src]
        for k in range(len(rd)):
            if rd[k]:
                rs[k] -= c * rd[k]

    def swap_cols(self, a: int, b: int) -> None:
        if a == b:
            return
        for M in (self.A, self.V):
            for row in M:
                row[a], row[b] = row[b], row[a]
        self.Vi[a], self.Vi[b] = self.Vi[b], self.Vi[a]


def smith_normal_form(A) -> SmithForm:
    arr = np.asarray(A, dtype=object)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {arr.shape}")
    m, n = arr.shape
    A = [[int(x) for x in row] for row in arr.tolist()]
    r = _Reducer(A, m, n)
    t = 0
    while t < min(m, n):
        # smallest nonzero entry of the remaining block becomes the pivot
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                if row[j] and (best is None or abs(row[j]) < best[0]):
                    best = (abs(row[j]), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        r.swap_rows(t, best[1])
        r.swap_cols(t, best[2])
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    r.add_row(i, t, -(A[i][t] // p))
                    if A[i][t]:
                        dirty = True
            if dirty:
                i = min((i for i in range(t + 1, m) if A[i][t]), key=lambda i: abs(A[i][t]))
                r.swap_rows(t, i)
                continue
            for j in range(t + 1, n):
                if A[t][j]:
                    r.add_col(j, t, -(A[t][j] // p))
                    if A[t][j]:
                        dirty = True
            if dirty:
                j = min((j for j in range(t + 1, n) if A[t][j]), key=lambda j: abs(A[t][j]))
                r.swap_cols(t, j)
                continue
            bad = next((i for i in range(t + 1, m) if any(A[i][j] % p for j in range(t + 1, n))), None)
            if bad is None:
                break
            r.add_row(t, bad, 1)
        if A[t][t] < 0:
            r.negate_row(t)
        t += 1
    return SmithForm(A, r.U, r.Ui, r.V, r.Vi, t)


def matmul(A: Matrix, B: Matrix) -> Matrix:
    """Exact integer product of list matrices."""
    if not A or not B:
        return [[0] * (len(B[0]) if B else 0) for _ in A]
    cols = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col) if a and b) for col in cols] for row in A]


def matvec(A: Matrix, x) -> list[int]:
    return [sum(a * int(b) for a, b in zip(row, x) if a) for row in A]
