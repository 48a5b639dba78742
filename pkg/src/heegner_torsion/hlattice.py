"""Hermitian lattices over the ring of integers of an imaginary quadratic field.

A lattice is free with basis b_1..b_n and Gram matrix gram[i][j] = <b_i, b_j>; the form is
linear in the left argument. Integer ("Z-") coordinates of a vector sum_i (x_i + x_{n+i} zeta) b_i
are the 2n rationals x, which identifies the lattice with Z^{2n} and the dual with B^{-1} Z^{2n},
where B is the Gram matrix of the trace form Tr<x, y>.
"""

from __future__ import annotations

import hashlib
import math
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

from . import linalg
from .cache import EnumerationCache
from .qfield import FieldElem, FieldSpec


class LatticeVector:
    __slots__ = ("coords",)

    def __init__(self, coords: Iterable[FieldElem]):
        self.coords = tuple(coords)

    @property
    def field(self) -> FieldSpec:
        return self.coords[0].field

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        return LatticeVector(x + y for x, y in zip(self.coords, other.coords))

    def __sub__(self, other: "LatticeVector") -> "LatticeVector":
        return LatticeVector(x - y for x, y in zip(self.coords, other.coords))

    def __neg__(self) -> "LatticeVector":
        return LatticeVector(-x for x in self.coords)

    def scale(self, c) -> "LatticeVector":
        """Left scalar multiple c * v."""
        return LatticeVector(c * x for x in self.coords)

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.coords)

    def in_ring_of_integers(self) -> bool:
        return all(x.in_ring_of_integers() for x in self.coords)

    def sort_key(self) -> tuple:
        return tuple(x.sort_key() for x in self.coords)

    def __eq__(self, other) -> bool:
        return isinstance(other, LatticeVector) and self.coords == other.coords

    def __hash__(self) -> int:
        return hash(self.coords)

    def __repr__(self) -> str:
        return "LatticeVector(" + ", ".join(str(x) for x in self.coords) + ")"


class HermitianLattice:
    def __init__(self, field: FieldSpec, gram: Sequence[Sequence[FieldElem]]):
        n = len(gram)
        if any(len(row) != n for row in gram):
            raise ValueError("Gram matrix must be square")
        self.field = field
        self.rank = n
        self.gram = tuple(tuple(field(x.a, x.b) if isinstance(x, FieldElem) else field(x) for x in row)
                          for row in gram)
        for i in range(n):
            for j in range(n):
                if self.gram[i][j] != self.gram[j][i].conj():
                    raise ValueError(f"Gram matrix is not hermitian at entry ({i + 1},{j + 1})")
        if n and linalg.det_q(self.trace_gram) == 0:
            raise ValueError("Gram matrix is degenerate")

    # -- forms ------------------------------------------------------------
    def inner(self, x: Sequence[FieldElem], y: Sequence[FieldElem]) -> FieldElem:
        total = self.field.zero()
        ybar = [c.conj() for c in y]
        for i, xi in enumerate(x):
            if xi.is_zero():
                continue
            row = self.gram[i]
            acc = self.field.zero()
            for j, yj in enumerate(ybar):
                if not yj.is_zero():
                    acc = acc + row[j] * yj
            total = total + xi * acc
        return total

    def norm(self, x: Sequence[FieldElem]) -> Fraction:
        q = self.inner(x, x)
        assert q.b == 0
        return q.a

    @cached_property
    def trace_gram(self) -> list[list[Fraction]]:
        n = self.rank
        f = self.field
        basis = [f.one(), f.zeta()]
        out = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
        for s in range(2):
            for t in range(2):
                for i in range(n):
                    for j in range(n):
                        out[s * n + i][t * n + j] = (basis[s] * self.gram[i][j] * basis[t].conj()).trace()
        return out

    @cached_property
    def trace_gram_inverse(self) -> list[list[Fraction]]:
        return linalg.inverse_q(self.trace_gram)

    def to_z(self, coords: Sequence[FieldElem]) -> list[Fraction]:
        return [c.a for c in coords] + [c.b for c in coords]

    def from_z(self, x: Sequence) -> LatticeVector:
        n = self.rank
        return LatticeVector(self.field(x[i], x[n + i]) for i in range(n))

    def z_basis_vector(self, k: int) -> LatticeVector:
        """The k-th Z-basis vector: b_k for k < n, zeta*b_{k-n} otherwise."""
        n = self.rank
        f = self.field
        c = [f.zero()] * n
        c[k % n] = f.one() if k < n else f.zeta()
        return LatticeVector(c)

    def pairing_functional(self, y: Sequence[FieldElem]) -> list[tuple[Fraction, Fraction]]:
        """Coefficients (a_k, b_k) with <v, y> = sum_k x_k (a_k + b_k zeta) for v with Z-coordinates x."""
        out = []
        for k in range(2 * self.rank):
            val = self.inner(self.z_basis_vector(k), y)
            out.append((val.a, val.b))
        return out

    @cached_property
    def _trace_gram_scaled(self) -> tuple[int, list[list[int]]]:
        den = math.lcm(*(x.denominator for row in self.trace_gram for x in row))
        return den, [[int(x * den) for x in row] for row in self.trace_gram]

    def trace_form_z(self, x: Sequence, y: Sequence) -> Fraction:
        # integer arithmetic over common denominators
        den, b = self._trace_gram_scaled
        x = [Fraction(v) for v in x]
        y = [Fraction(v) for v in y]
        dx = math.lcm(*(v.denominator for v in x))
        dy = math.lcm(*(v.denominator for v in y))
        xi = [int(v * dx) for v in x]
        yi = [int(v * dy) for v in y]
        total = 0
        for i, a in enumerate(xi):
            if a:
                row = b[i]
                total += a * sum(row[j] * c for j, c in enumerate(yi) if c)
        return Fraction(total, den * dx * dy)

    # -- properties ---------------------------------------------------------
    def is_integral(self) -> bool:
        return all(x.in_inverse_different() for row in self.gram for x in row)

    def is_even(self) -> bool:
        return all(self.gram[i][i].a.denominator == 1 for i in range(self.rank))

    def signature(self) -> tuple[int, int]:
        """Hermitian signature (p, q); the underlying rational quadratic space has (2p, 2q)."""
        pos, neg, zero = linalg.inertia_q(self.trace_gram)
        assert zero == 0 and pos % 2 == 0 and neg % 2 == 0
        return pos // 2, neg // 2

    def is_negative_definite(self) -> bool:
        return self.signature() == (0, self.rank)

    def in_lattice(self, v: Sequence[FieldElem]) -> bool:
        return all(c.in_ring_of_integers() for c in v)

    def in_dual(self, v: Sequence[FieldElem]) -> bool:
        f = self.field
        for j in range(self.rank):
            e = [f.zero()] * self.rank
            e[j] = f.one()
            if not self.inner(v, e).in_inverse_different():
                return False
        return True

    @cached_property
    def hash_key(self) -> str:
        text = f"{self.field.disc}|{self.field.zeta_re}|" + ";".join(
            ",".join(f"{x.a}:{x.b}" for x in row) for row in self.gram)
        return hashlib.sha256(text.encode()).hexdigest()[:24]

    @cached_property
    def discriminant_group(self) -> "DiscriminantGroup":
        return discriminant_group(self)

    def direct_sum(self, other: "HermitianLattice") -> "HermitianLattice":
        f = self.field
        n, m = self.rank, other.rank
        gram = [[f.zero()] * (n + m) for _ in range(n + m)]
        for i in range(n):
            for j in range(n):
                gram[i][j] = self.gram[i][j]
        for i in range(m):
            for j in range(m):
                gram[n + i][n + j] = other.gram[i][j]
        return HermitianLattice(f, gram)

    def __repr__(self) -> str:
        return f"HermitianLattice(disc={self.field.disc}, rank={self.rank})"


def dual_basis(lat: HermitianLattice) -> list[LatticeVector]:
    """A Z-basis of the dual lattice, as coordinate vectors in the lattice basis."""
    inv = lat.trace_gram_inverse
    cols = linalg.transpose(inv)
    return [lat.from_z(c) for c in cols]


class DiscriminantGroup:
    """L'/L with canonical representatives (Z-coordinates reduced into [0, 1))."""

    def __init__(self, lat: HermitianLattice, invariant_factors: list[int], reps_z: list[tuple[Fraction, ...]]):
        self.lattice = lat
        self.invariant_factors = invariant_factors
        self.reps_z = reps_z
        self.index_of = {r: i for i, r in enumerate(reps_z)}
        self.coset_reps = [lat.from_z(r) for r in reps_z]
        self.neg = [self.index_of[reduce_mod_one(tuple(-x for x in r))] for r in reps_z]

    @property
    def order(self) -> int:
        return len(self.reps_z)

    def __len__(self) -> int:
        return len(self.reps_z)

    def index_of_z(self, x: Sequence) -> int:
        key = reduce_mod_one(tuple(Fraction(c) for c in x))
        try:
            return self.index_of[key]
        except KeyError:
            raise ValueError("vector is not in the dual lattice") from None

    def index_of_vector(self, v: Sequence[FieldElem]) -> int:
        return self.index_of_z(self.lattice.to_z(v))

    def add(self, i: int, j: int) -> int:
        return self.index_of_z([a + b for a, b in zip(self.reps_z[i], self.reps_z[j])])

    def norm_mod_one(self, i: int) -> Fraction:
        q = self.lattice.norm(self.coset_reps[i])
        return q - math.floor(q)

    def bilinear_mod_one(self, i: int, j: int) -> Fraction:
        b = self.lattice.trace_form_z(self.reps_z[i], self.reps_z[j])
        return b - math.floor(b)


def reduce_mod_one(x: tuple) -> tuple:
    return tuple(c - math.floor(c) for c in x)


def discriminant_group(lat: HermitianLattice) -> DiscriminantGroup:
    if not lat.is_integral():
        raise ValueError("lattice is not integral; L'/L is undefined")
    b = [[int(x) for x in row] for row in lat.trace_gram]
    diag, u, v = linalg.smith_normal_form(b)
    n = len(b)
    # L'/L = B^{-1}Z^n / Z^n; with U B V = S the classes are V S^{-1} k, 0 <= k_i < s_i.
    factors = [abs(d) for d in diag]
    ranges = [range(s) for s in factors]
    reps = []
    for k in product(*ranges):
        x = [sum(Fraction(v[r][c] * k[c], factors[c]) for c in range(n)) for r in range(n)]
        reps.append(reduce_mod_one(tuple(x)))
    return DiscriminantGroup(lat, [s for s in factors if s > 1], reps)


# -- enumeration -------------------------------------------------------------

def _fp_decomposition(a: list[list[float]]) -> list[list[float]]:
    n = len(a)
    q = [row[:] for row in a]
    for i in range(n):
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    return q


def _affine_fincke_pohst(a: list[list[Fraction]], shift: Sequence[Fraction], bound: Fraction):
    """Integer y with (shift+y)^T a (shift+y) <= bound (a positive definite); float pivots with slack."""
    n = len(a)
    q = _fp_decomposition([[float(x) for x in row] for row in a])
    g = [float(s) for s in shift]
    slack = 1e-9 * (1.0 + float(bound))
    out = []
    y = [0] * n

    def rec(i: int, remaining: float):
        centre = -sum(q[i][j] * (g[j] + y[j]) for j in range(i + 1, n))
        r = math.sqrt(max(remaining, 0.0) / q[i][i])
        lo = math.ceil(centre - r - g[i] - 1e-9)
        hi = math.floor(centre + r - g[i] + 1e-9)
        for yi in range(lo, hi + 1):
            y[i] = yi
            d = g[i] + yi - centre
            rest = remaining - q[i][i] * d * d
            if rest < -slack:
                continue
            if i == 0:
                out.append(tuple(y))
            else:
                rec(i - 1, rest)
        y[i] = 0

    if n == 0:
        return [()]
    rec(n - 1, float(bound) + slack)
    return out


def _exact_norm_z(lat: HermitianLattice, x: Sequence[Fraction]) -> Fraction:
    return lat.trace_form_z(x, x) / 2


def _check_definite(lat: HermitianLattice):
    if not lat.is_negative_definite():
        raise ValueError("enumeration requires a negative definite lattice")


def _coset_key(lat: HermitianLattice, gamma_z: Sequence[Fraction]) -> tuple:
    return reduce_mod_one(tuple(Fraction(c) for c in gamma_z))


def _gamma_z(lat: HermitianLattice, gamma) -> list[Fraction]:
    if isinstance(gamma, int):
        return list(lat.discriminant_group.reps_z[gamma])
    if isinstance(gamma, LatticeVector) or (gamma and isinstance(gamma[0], FieldElem)):
        return lat.to_z(gamma)
    return [Fraction(c) for c in gamma]


def norm_congruent(lat: HermitianLattice, gamma_z: Sequence[Fraction], m: Fraction) -> bool:
    q = _exact_norm_z(lat, gamma_z)
    return (Fraction(m) - q).denominator == 1


def _enumerate_z(lat: HermitianLattice, gamma_z: list[Fraction], m: Fraction) -> list[tuple[Fraction, ...]]:
    g = list(_coset_key(lat, gamma_z))
    a = [[-x / 2 for x in row] for row in lat.trace_gram]
    cands = _affine_fincke_pohst(a, g, -m)
    out = []
    for y in cands:
        x = tuple(gi + yi for gi, yi in zip(g, y))
        if _exact_norm_z(lat, x) == m:
            out.append(x)
    return out


def _validate_request(lat: HermitianLattice, gamma_z: list[Fraction], m: Fraction):
    _check_definite(lat)
    if m >= 0:
        raise ValueError(f"norm must be negative, got {m}")
    if not lat.in_dual(lat.from_z(gamma_z).coords if lat.rank else ()):
        raise ValueError("coset representative is not in the dual lattice")


def enumerate_norm_coset(lat: HermitianLattice, gamma, m, cache: EnumerationCache | None = None) -> list[LatticeVector]:
    """All lambda in gamma + lat with Q(lambda) = m, sorted lexicographically by coordinates."""
    m = Fraction(m)
    gamma_z = _gamma_z(lat, gamma)
    _validate_request(lat, gamma_z, m)
    if not norm_congruent(lat, gamma_z, m):
        return []
    key = ("enum", lat.hash_key, _coset_key(lat, gamma_z), m)
    rec = cache.get(key) if cache is not None else None
    if rec is not None and "vectors" in rec:
        vecs = [tuple(Fraction(c) for c in v) for v in rec["vectors"]]
    else:
        vecs = _enumerate_z(lat, gamma_z, m)
        if cache is not None:
            cache.put(key, {"count": len(vecs), "vectors": [[str(c) for c in v] for v in vecs]})
    result = [lat.from_z(v) for v in vecs]
    result.sort(key=LatticeVector.sort_key)
    return result


def count_norm_coset(lat: HermitianLattice, gamma, m, cache: EnumerationCache | None = None) -> int:
    m = Fraction(m)
    gamma_z = _gamma_z(lat, gamma)
    _validate_request(lat, gamma_z, m)
    if not norm_congruent(lat, gamma_z, m):
        return 0
    if cache is not None:
        rec = cache.get(("enum", lat.hash_key, _coset_key(lat, gamma_z), m))
        if rec is not None:
            return int(rec["count"])
    return len(enumerate_norm_coset(lat, gamma_z, m, cache))


def coset_norms(lat: HermitianLattice, gamma, max_abs: Fraction) -> list[Fraction]:
    """The admissible negative norms m in Z + Q(gamma) with |m| <= max_abs, increasing in |m|."""
    gamma_z = _gamma_z(lat, gamma)
    q = _exact_norm_z(lat, gamma_z)
    frac = q - math.floor(q)
    out = []
    m = frac - 1 if frac != 0 else Fraction(-1)
    while -m <= max_abs:
        out.append(m)
        m -= 1
    return out
