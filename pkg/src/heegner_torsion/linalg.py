"""Exact linear algebra over Z, Q and the quadratic field (small dense matrices as lists of lists)."""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

Matrix = list  # list of rows


def identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(m: Sequence[Sequence]) -> list[list]:
    if not m:
        return []
    return [list(col) for col in zip(*m)]


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), start=0 * row[0] if row else 0) for col in bt] for row in a]


def mat_vec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum((x * y for x, y in zip(row, v)), start=0 * v[0] if v else 0) for row in a]


def common_denominator(entries) -> int:
    d = 1
    for x in entries:
        d = lcm(d, Fraction(x).denominator)
    return d


def to_integer_matrix(m: Sequence[Sequence]) -> tuple[list[list[int]], int]:
    """Scale a rational matrix to an integer one; returns (scaled, scale)."""
    d = common_denominator(x for row in m for x in row)
    return [[int(Fraction(x) * d) for x in row] for row in m], d


def inverse_q(m: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def det_q(m: Sequence[Sequence]) -> Fraction:
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det *= p
        for r in range(col + 1, n):
            if a[r][col] != 0:
                f = a[r][col] / p
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def inertia_q(m: Sequence[Sequence]) -> tuple[int, int, int]:
    """(positive, negative, zero) counts of a rational symmetric matrix, by congruence diagonalisation."""
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    pos = neg = 0
    active = list(range(n))
    while active:
        k = next((i for i in active if a[i][i] != 0), None)
        if k is None:
            pair = next(((i, j) for i in active for j in active if i != j and a[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # replace e_i by e_i + e_j, giving diagonal 2 a_ij (a_jj = 0)
            for r in range(n):
                a[r][i] += a[r][j]
            for c in range(n):
                a[i][c] += a[j][c]
            k = i
        p = a[k][k]
        if p > 0:
            pos += 1
        else:
            neg += 1
        rest = [i for i in active if i != k]
        for i in rest:
            f = a[i][k] / p
            if f:
                for c in range(n):
                    a[i][c] -= f * a[k][c]
                for r in range(n):
                    a[r][i] -= f * a[r][k]
        active = rest
    return pos, neg, n - pos - neg


def smith_normal_form(m: Sequence[Sequence[int]]):
    """Return (diag, U, V) with U*m*V = diag-matrix, U and V unimodular; diag entries nonnegative and dividing."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    a = [[int(x) for x in row] for row in m]
    u = identity(rows)
    v = identity(cols)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):
        a[dst] = [x + f * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + f * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, f):
        for row in a:
            row[dst] += f * row[src]
        for row in v:
            row[dst] += f * row[src]

    t = 0
    while t < min(rows, cols):
        nz = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j] != 0]
        if not nz:
            break
        _, pi, pj = min(nz)
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            done = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    add_row(i, t, -q)
                    if a[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    add_col(j, t, -q)
                    if a[t][j]:
                        swap_cols(t, j)
                        done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if a[i][j] % a[t][t]), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    diag = [a[i][i] for i in range(min(rows, cols))]
    return diag, u, v


def integer_kernel(m: Sequence[Sequence]) -> list[list[int]]:
    """Z-basis of {x in Z^n : m x = 0} for a rational matrix m."""
    if not m:
        return identity(0)
    mi, _ = to_integer_matrix(m)
    diag, _, v = smith_normal_form(mi)
    cols = len(mi[0])
    rank = sum(1 for d in diag if d != 0)
    return [[v[r][c] for r in range(cols)] for c in range(rank, cols)]


def integer_solve(m: Sequence[Sequence], rhs: Sequence) -> list[int] | None:
    """Some x in Z^n with m x = rhs, or None."""
    rows = len(m)
    cols = len(m[0])
    d = common_denominator([x for row in m for x in row] + list(rhs))
    mi = [[int(Fraction(x) * d) for x in row] for row in m]
    ci = [int(Fraction(x) * d) for x in rhs]
    diag, u, v = smith_normal_form(mi)
    uc = mat_vec(u, ci)
    y = [0] * cols
    for i in range(rows):
        s = diag[i] if i < len(diag) else 0
        if s == 0:
            if uc[i] != 0:
                return None
        else:
            if uc[i] % s:
                return None
            y[i] = uc[i] // s
    return mat_vec(v, y)


def hermite_basis(gens: Sequence[Sequence]) -> list[list[Fraction]]:
    """Row-echelon Z-basis (Hermite form) of the Z-module spanned by rational row vectors."""
    gens = [list(g) for g in gens if any(x != 0 for x in g)]
    if not gens:
        return []
    d = common_denominator(x for g in gens for x in g)
    a = [[int(Fraction(x) * d) for x in g] for g in gens]
    n = len(a[0])
    basis = []
    row = 0
    for col in range(n):
        live = [r for r in range(row, len(a)) if a[r][col] != 0]
        if not live:
            continue
        while True:
            live = [r for r in range(row, len(a)) if a[r][col] != 0]
            piv = min(live, key=lambda r: abs(a[r][col]))
            a[row], a[piv] = a[piv], a[row]
            others = [r for r in range(row + 1, len(a)) if a[r][col] != 0]
            if not others:
                break
            for r in others:
                q = a[r][col] // a[row][col]
                a[r] = [x - q * y for x, y in zip(a[r], a[row])]
        if a[row][col] < 0:
            a[row] = [-x for x in a[row]]
        for r in range(row):
            q = a[r][col] // a[row][col]
            a[r] = [x - q * y for x, y in zip(a[r], a[row])]
        row += 1
        if row == len(a):
            break
    basis = [[Fraction(x, d) for x in r] for r in a[:row]]
    return basis


def gcd_rational(values) -> Fraction:
    """Positive generator of the Z-module spanned by the given rationals (0 if all vanish)."""
    values = [Fraction(x) for x in values]
    d = common_denominator(values)
    g = 0
    for x in values:
        g = gcd(g, int(x * d))
    return Fraction(g, d)


def inverse_k(m: Sequence[Sequence]):
    """Inverse of a square matrix of FieldElem entries."""
    n = len(m)
    f = m[0][0].field
    a = [list(row) + [f(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix over the field")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col].inverse()
        a[col] = [x * p for x in a[col]]
        for r in range(n):
            if r != col and not a[r][col].is_zero():
                c = a[r][col]
                a[r] = [x - c * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]
