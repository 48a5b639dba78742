"""Cusp data at a primitive isotropic vector: definite part, Siegel domain, Heisenberg group.

Vectors of the ambient space are coordinate tuples (FieldElem) in the basis of L; vectors of
W = D (x) k are coordinate tuples in the computed O-basis of the definite part D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .hlattice import HermitianLattice, LatticeVector, dual_basis, reduce_mod_one
from .qfield import FieldElem, FieldSpec


class CuspError(ValueError):
    pass


class NonFreeModuleError(CuspError):
    pass


# -- helpers on O-ideals -------------------------------------------------------------------

def _ideal_z_basis(field: FieldSpec, elems: Sequence[FieldElem]) -> list[FieldElem]:
    rows = linalg.hermite_basis([[x.a, x.b] for x in elems])
    return [field(r[0], r[1]) for r in rows]


def _shortest_in_rank2(field: FieldSpec, w1: FieldElem, w2: FieldElem) -> FieldElem:
    # Lagrange-Gauss reduction for the norm form
    def nrm(x):
        return x.norm()

    def pair(x, y):
        return (x * y.conj()).trace() / 2

    if nrm(w1) > nrm(w2):
        w1, w2 = w2, w1
    while True:
        mu = round(pair(w2, w1) / nrm(w1))
        w2 = w2 - w1 * mu
        if nrm(w2) >= nrm(w1):
            return w1
        w1, w2 = w2, w1


def principal_generator(field: FieldSpec, elems: Sequence[FieldElem]) -> FieldElem:
    """A generator of the O-ideal generated by elems; raises if it is not principal."""
    gens = []
    for x in elems:
        gens.append(x)
        gens.append(x * field.zeta())
    basis = _ideal_z_basis(field, gens)
    if len(basis) != 2:
        raise NonFreeModuleError("degenerate ideal")
    alpha = _shortest_in_rank2(field, basis[0], basis[1])
    if not all((g / alpha).in_ring_of_integers() for g in basis):
        raise NonFreeModuleError("non-principal coefficient ideal; only free lattices are supported")
    return alpha


def o_basis_of_module(field: FieldSpec, gens: Sequence[LatticeVector]) -> list[LatticeVector]:
    """Echelon O-basis of the O-module whose Z-basis is gens (vectors in k^N)."""
    gens = [g for g in gens if not g.is_zero()]
    basis: list[LatticeVector] = []
    if not gens:
        return basis
    dim = len(gens[0])
    for p in range(dim):
        if not gens:
            break
        entries = [g[p] for g in gens]
        if all(e.is_zero() for e in entries):
            continue
        alpha = principal_generator(field, entries)
        mat = [[e.a for e in entries], [e.b for e in entries]]
        coeffs = linalg.integer_solve(mat, [alpha.a, alpha.b])
        if coeffs is None:
            raise NonFreeModuleError("module is not closed under the ring of integers")
        v = _zcomb(field, gens, coeffs)
        basis.append(v)
        ker = linalg.integer_kernel(mat)
        gens = [g for g in (_zcomb(field, gens, k) for k in ker) if not g.is_zero()]
    return basis


def _zcomb(field: FieldSpec, vecs: Sequence[LatticeVector], coeffs: Sequence[int]) -> LatticeVector:
    out = [field.zero()] * len(vecs[0])
    for c, v in zip(coeffs, vecs):
        if c:
            out = [o + x * c for o, x in zip(out, v)]
    return LatticeVector(out)


# -- data types ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class HeisenbergElem:
    """[h, t]: the Eichler element [0, t] followed by the central translation [h, 0]."""

    h: Fraction
    t: LatticeVector

    def __post_init__(self):
        object.__setattr__(self, "h", Fraction(self.h))


@dataclass(frozen=True)
class HeisenbergParams:
    N: Fraction
    D_sub_basis: tuple  # integer Z-coordinate vectors in the Z-basis of the definite part
    index: int

    def basis_vectors(self, cusp: "CuspData") -> list[LatticeVector]:
        return [cusp.D_part.from_z(b) for b in self.D_sub_basis]


@dataclass(frozen=True)
class SiegelPoint:
    tau: complex
    sigma: tuple


@dataclass
class CuspData:
    L: HermitianLattice
    ell: LatticeVector
    ell_prime: LatticeVector
    D_part: HermitianLattice
    embedding: list  # O-basis of D as L-coordinate vectors
    M1: Fraction
    M2: Fraction
    L_script: list  # indices into the discriminant group of L
    pi: dict  # L_script index -> D'/D index (liftable classes only)
    beta_dot: dict  # L_script index -> LatticeVector in L coordinates, in L' and orthogonal to ell
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def field(self) -> FieldSpec:
        return self.L.field

    @property
    def n(self) -> int:
        return self.D_part.rank

    @property
    def disc_group(self):
        return self.L.discriminant_group

    @property
    def D_disc_group(self):
        return self.D_part.discriminant_group

    @property
    def ell_ellp(self) -> FieldElem:
        return self.L.inner(self.ell, self.ell_prime)

    @property
    def ellp_ell(self) -> FieldElem:
        return self.L.inner(self.ell_prime, self.ell)

    # -- embeddings and decompositions -----------------------------------------------------
    def embed_w(self, w: Sequence[FieldElem]) -> LatticeVector:
        f = self.field
        out = [f.zero()] * self.L.rank
        for c, b in zip(w, self.embedding):
            if not c.is_zero():
                out = [o + c * x for o, x in zip(out, b)]
        return LatticeVector(out)

    def _gram_d_inv(self):
        if "gdinv" not in self._cache:
            self._cache["gdinv"] = linalg.inverse_k([list(r) for r in self.D_part.gram])
        return self._cache["gdinv"]

    def decompose(self, v: Sequence[FieldElem]) -> tuple[FieldElem, FieldElem, LatticeVector]:
        """v = a' ell' + a ell + w with w in W; returns (a', a, w in D coordinates)."""
        L = self.L
        a_p = L.inner(v, self.ell) / self.ellp_ell
        a = L.inner(v, self.ell_prime) / self.ell_ellp
        rest = LatticeVector(x - a_p * y - a * z for x, y, z in zip(v, self.ell_prime, self.ell))
        h = [L.inner(rest, b) for b in self.embedding]
        ginv = self._gram_d_inv()
        n = self.n
        w = [sum((h[i] * ginv[i][j] for i in range(n)), self.field.zero()) for j in range(n)]
        w = LatticeVector(w)
        if rest != self.embed_w(w):
            raise CuspError("vector does not decompose along ell', ell and W")
        return a_p, a, w

    def d_part_of(self, v: Sequence[FieldElem]) -> LatticeVector:
        return self.decompose(v)[2]

    def inner_w(self, x: Sequence[FieldElem], y: Sequence[FieldElem]) -> FieldElem:
        return self.D_part.inner(x, y)

    # -- complex data -------------------------------------------------------------------------
    def complex_gram_d(self) -> np.ndarray:
        if "cgd" not in self._cache:
            self._cache["cgd"] = np.array([[complex(x) for x in row] for row in self.D_part.gram])
        return self._cache["cgd"]

    def complex_gram_l(self) -> np.ndarray:
        if "cgl" not in self._cache:
            self._cache["cgl"] = np.array([[complex(x) for x in row] for row in self.L.gram])
        return self._cache["cgl"]

    def inner_w_complex(self, x, y) -> complex:
        return complex(np.asarray(x) @ self.complex_gram_d() @ np.conj(np.asarray(y)))

    def z_vector(self, p: SiegelPoint) -> np.ndarray:
        """z(tau, sigma) = ell' - delta tau <ell', ell> ell + sigma, in L coordinates."""
        f = self.field
        coef = -complex(f.delta() * self.ellp_ell) * p.tau
        emb = np.array([[complex(x) for x in b] for b in self.embedding]).reshape(self.n, self.L.rank)
        lp = np.array([complex(x) for x in self.ell_prime])
        l = np.array([complex(x) for x in self.ell])
        return lp + coef * l + np.asarray(p.sigma, dtype=complex) @ emb

    def inner_l_complex(self, x, y) -> complex:
        return complex(np.asarray(x) @ self.complex_gram_l() @ np.conj(np.asarray(y)))

    def point_from_vector(self, v: np.ndarray) -> SiegelPoint:
        """Recover (tau, sigma) from a vector projectively equivalent to some z(tau, sigma)."""
        f = self.field
        l = np.array([complex(x) for x in self.ell])
        lp = np.array([complex(x) for x in self.ell_prime])
        a_p = self.inner_l_complex(v, l) / complex(self.ellp_ell)
        v = v / a_p
        a = self.inner_l_complex(v, lp) / complex(self.ell_ellp)
        rest = v - lp - a * l
        h = np.array([self.inner_l_complex(rest, [complex(x) for x in b]) for b in self.embedding])
        ginv = np.linalg.inv(self.complex_gram_d())
        sigma = h @ ginv
        tau = a / (-complex(f.delta() * self.ellp_ell))
        return SiegelPoint(complex(tau), tuple(complex(s) for s in sigma))


# -- construction --------------------------------------------------------------------------------

def _as_vector(field: FieldSpec, v) -> LatticeVector:
    return v if isinstance(v, LatticeVector) else LatticeVector(v)


def is_primitive(L: HermitianLattice, v: LatticeVector) -> bool:
    """k v meets L exactly in O v (v in L)."""
    f = L.field
    gens = []
    for x in v:
        gens.append([x.a, x.b])
        y = x * f.zeta()
        gens.append([y.a, y.b])
    mat = linalg.transpose(gens)
    return linalg.integer_solve(mat, [1, 0]) is not None


def _k_to_q_rows(x: FieldElem) -> tuple[Fraction, Fraction]:
    return x.a, x.b


def build_cusp(L: HermitianLattice, ell, ell_prime) -> CuspData:
    f = L.field
    ell = _as_vector(f, ell)
    ell_prime = _as_vector(f, ell_prime)
    if len(ell) != L.rank or len(ell_prime) != L.rank:
        raise CuspError("cusp vectors have the wrong length")
    if not (L.is_integral() and L.is_even()):
        raise CuspError("ambient lattice must be even and integral")
    if L.norm(ell) != 0:
        raise CuspError("ell is not isotropic")
    if not L.in_lattice(ell):
        raise CuspError("ell is not a lattice vector")
    if not is_primitive(L, ell):
        raise CuspError("ell is not primitive")
    if not L.in_dual(ell_prime):
        raise CuspError("ell' is not in the dual lattice")
    if L.norm(ell_prime) != 0:
        raise CuspError("ell' is not isotropic")
    if L.inner(ell, ell_prime) != f.delta_inv():
        raise CuspError("<ell, ell'> must equal 1/delta")
    sig = L.signature()
    if sig[0] != 1:
        raise CuspError(f"ambient signature must be (1, n+1), got {sig}")

    N = L.rank
    # Z-kernel of v -> (<v, ell>, <v, ell'>) on L
    cols = []
    for s in range(2):
        for i in range(N):
            e = [f.zero()] * N
            e[i] = f.one() if s == 0 else f.zeta()
            x = L.inner(e, ell)
            y = L.inner(e, ell_prime)
            cols.append([x.a, x.b, y.a, y.b])
    mat = linalg.transpose([[c for c in col] for col in cols])
    ker = linalg.integer_kernel(mat)
    gens = [L.from_z(k) for k in ker]
    basis = o_basis_of_module(f, gens)
    n = len(basis)
    if n != N - 2:
        raise CuspError("definite part has unexpected rank")
    gram_d = [[L.inner(bi, bj) for bj in basis] for bi in basis]
    D = HermitianLattice(f, gram_d) if n else None
    if D is None:
        raise CuspError("definite part is zero; rank n >= 1 required")
    if not D.is_negative_definite():
        raise CuspError("definite part is not negative definite")

    def z_images(v: LatticeVector):
        out = []
        for s in range(2):
            for i in range(N):
                e = [f.zero()] * N
                e[i] = f.one() if s == 0 else f.zeta()
                out.append(L.inner(e, v))
        return out

    imgs = z_images(ell)
    M1 = linalg.gcd_rational([x.trace() for x in imgs])
    M2 = linalg.gcd_rational([x.abs_delta_imag() for x in imgs])

    cusp = CuspData(L=L, ell=ell, ell_prime=ell_prime, D_part=D, embedding=basis,
                    M1=M1, M2=M2, L_script=[], pi={}, beta_dot={})

    dg = L.discriminant_group
    lscript = []
    for idx, rep in enumerate(dg.coset_reps):
        x = L.inner(rep, ell)
        if _is_multiple(x.trace(), M1) and _is_multiple(x.abs_delta_imag(), M2):
            lscript.append(idx)
    cusp.L_script = lscript

    # lifts into ell-perp: solve <y, ell> = -<rep, ell> for y in L
    ell_mat = linalg.transpose([[x.a, x.b] for x in imgs])
    for idx in lscript:
        rep = dg.coset_reps[idx]
        target = -L.inner(rep, ell)
        y = linalg.integer_solve(ell_mat, [target.a, target.b])
        if y is None:
            continue
        lifted = LatticeVector(r + c for r, c in zip(rep, L.from_z(y)))
        a_p, a, w = cusp.decompose(lifted)
        assert a_p.is_zero()
        wz = reduce_mod_one(tuple(D.to_z(w)))
        w_red = D.from_z(wz)
        a_red = f(a.a - math.floor(a.a), a.b - math.floor(a.b))
        bdot = LatticeVector(x + y for x, y in zip(ell.scale(a_red), cusp.embed_w(w_red)))
        if dg.index_of_vector(bdot) != idx or not L.inner(bdot, ell).is_zero():
            raise CuspError("failed to lift a discriminant class into ell-perp")
        cusp.beta_dot[idx] = bdot
        cusp.pi[idx] = D.discriminant_group.index_of_vector(w_red)
    return cusp


def _is_multiple(x: Fraction, m: Fraction) -> bool:
    if m == 0:
        return x == 0
    return (Fraction(x) / m).denominator == 1


# -- Heisenberg group ---------------------------------------------------------------------------

def heisenberg_compose(cusp: CuspData, g: HeisenbergElem, g2: HeisenbergElem) -> HeisenbergElem:
    ip = cusp.inner_w(g2.t, g.t)
    # Im<t', t> / |delta| = b/2 for <t', t> = a + b zeta
    return HeisenbergElem(g.h + g2.h + ip.b / 2, g.t + g2.t)


def heisenberg_inverse(g: HeisenbergElem) -> HeisenbergElem:
    return HeisenbergElem(-g.h, -g.t)


def heisenberg_identity(cusp: CuspData) -> HeisenbergElem:
    return HeisenbergElem(Fraction(0), LatticeVector([cusp.field.zero()] * cusp.n))


def act_on_vector(cusp: CuspData, g: HeisenbergElem, v: Sequence[FieldElem]) -> LatticeVector:
    """Exact action of [h, t] = [h, 0] o [0, t] on an ambient vector in L coordinates."""
    L = cusp.L
    f = cusp.field
    t = cusp.embed_w(g.t)
    ell = cusp.ell
    v_ell = L.inner(v, ell)
    v_t = L.inner(v, t)
    qt = L.norm(t)
    coef_ell = -v_t - v_ell * qt / 2
    out = [x + v_ell * ti + coef_ell * li for x, ti, li in zip(v, t, ell)]
    # central part: v -> v - <v, ell> delta h ell ; <v, ell> is unchanged by the Eichler step
    c = -v_ell * f.delta() * g.h
    out = [x + c * li for x, li in zip(out, ell)]
    return LatticeVector(out)


def act_on_complex_vector(cusp: CuspData, g: HeisenbergElem, v: np.ndarray) -> np.ndarray:
    f = cusp.field
    t = np.array([complex(x) for x in cusp.embed_w(g.t)])
    ell = np.array([complex(x) for x in cusp.ell])
    v_ell = cusp.inner_l_complex(v, ell)
    v_t = cusp.inner_l_complex(v, t)
    qt = float(cusp.D_part.norm(g.t))
    out = v + v_ell * t + (-v_t - v_ell * qt / 2) * ell
    return out - v_ell * complex(f.delta()) * float(g.h) * ell


def in_domain(cusp: CuspData, p: SiegelPoint) -> bool:
    f = cusp.field
    lhs = 2 * p.tau.imag * f.sqrt_abs_disc * abs(complex(cusp.ell_ellp)) ** 2
    return lhs > -cusp.inner_w_complex(p.sigma, p.sigma).real


def heisenberg_act(cusp: CuspData, g: HeisenbergElem, p: SiegelPoint, check: bool = True) -> SiegelPoint:
    if check and not in_domain(cusp, p):
        raise CuspError("point is outside the Siegel domain")
    f = cusp.field
    delta = complex(f.delta())
    c = complex(cusp.ellp_ell)
    t = np.array([complex(x) for x in g.t])
    sigma = np.asarray(p.sigma, dtype=complex)
    tau = (p.tau + cusp.inner_w_complex(sigma, t) / (delta * c)
           + 0.5 * float(cusp.D_part.norm(g.t)) / delta + float(g.h))
    sigma2 = sigma + c * t
    return SiegelPoint(complex(tau), tuple(complex(s) for s in sigma2))


def in_neighborhood(cusp: CuspData, p: SiegelPoint, eps: float) -> bool:
    z = cusp.z_vector(p)
    ell = np.array([complex(x) for x in cusp.ell])
    zz = cusp.inner_l_complex(z, z).real
    zl = abs(cusp.inner_l_complex(z, ell)) ** 2
    return zz / zl * abs(complex(cusp.ellp_ell)) ** 2 > 1.0 / eps


# -- Gamma_L parameters ------------------------------------------------------------------------------

def _dual_z_basis_vectors(L: HermitianLattice) -> list[LatticeVector]:
    return dual_basis(L)


def central_generator(cusp: CuspData) -> Fraction:
    """Positive generator of {h : [h, 0] lies in the discriminant kernel}."""
    f = cusp.field
    vals = []
    for y in _dual_z_basis_vectors(cusp.L):
        x = f.delta() * cusp.L.inner(y, cusp.ell)
        vals.extend([x.a, x.b])
    g = linalg.gcd_rational(vals)
    return 1 / g


def in_discriminant_kernel(cusp: CuspData, g: HeisenbergElem) -> bool:
    """Whether [h, t] maps L' into itself acting trivially modulo L (hence also preserves L)."""
    L = cusp.L
    for y in _dual_z_basis_vectors(L):
        img = act_on_vector(cusp, g, y)
        if not LatticeVector(a - b for a, b in zip(img, y)).in_ring_of_integers():
            return False
    return True


def derive_heisenberg_params(cusp: CuspData) -> HeisenbergParams:
    """Translations t with [0, t] in the discriminant kernel, cut down to a lattice.

    The translation part and the quadratic correction along ell are made integral separately.
    When the full translation set is not closed under addition this picks the common sublattice.
    """
    L = cusp.L
    D = cusp.D_part
    n2 = 2 * D.rank
    duals = _dual_z_basis_vectors(L)
    # linear part: t -> <y, ell> t - <y, t> ell must land in L for every dual basis vector y
    rows = []
    for y in duals:
        y_ell = L.inner(y, cusp.ell)
        images = []
        for j in range(n2):
            e = [0] * n2
            e[j] = 1
            t = cusp.embed_w(D.from_z(e))
            v = [y_ell * ti - L.inner(y, t) * li for ti, li in zip(t, cusp.ell)]
            images.append(L.to_z(v))
        rows.extend(linalg.transpose(images))
    d_lin = _preimage_of_integers(rows, n2)
    # quadratic part: Q(t)/2 * <y, ell> must be integral
    ell_vals = []
    for y in duals:
        x = L.inner(y, cusp.ell)
        ell_vals.extend([x.a, x.b])
    c0 = 1 / linalg.gcd_rational(ell_vals)
    e = 2 * c0
    # M = {t in d_lin : b(t, s) in eZ for s in d_lin}; there Q mod e is additive
    bmat = [[D.trace_form_z(bi, bj) / e for bj in d_lin] for bi in d_lin]
    coeff_lattice = _preimage_of_integers(bmat, len(d_lin))
    m_basis = [_int_comb(d_lin, c) for c in coeff_lattice]
    qs = [D.trace_form_z(v, v) / 2 / e for v in m_basis]
    ker = _preimage_of_integers([qs], len(m_basis))
    sub = [_int_comb(m_basis, c) for c in ker]
    sub = [[int(x) for x in r] for r in linalg.hermite_basis(sub)]
    index = abs(int(linalg.det_q(sub)))
    Ncent = central_generator(cusp)
    params = HeisenbergParams(N=Ncent, D_sub_basis=tuple(tuple(r) for r in sub), index=index)
    _assert_params(cusp, params)
    return params


def _int_comb(vecs, coeffs):
    out = [0] * len(vecs[0])
    for c, v in zip(coeffs, vecs):
        if c:
            out = [o + c * int(x) for o, x in zip(out, v)]
    return out


def _preimage_of_integers(rows, n) -> list[list[int]]:
    """Z-basis of {x in Z^n : rows x in Z^k}."""
    if not rows:
        return linalg.identity(n)
    d = linalg.common_denominator(x for r in rows for x in r)
    k = len(rows)
    big = [[int(Fraction(x) * d) for x in r] + [-d if i == j else 0 for j in range(k)]
           for i, r in enumerate(rows)]
    ker = linalg.integer_kernel(big)
    proj = [v[:n] for v in ker]
    basis = linalg.hermite_basis(proj)
    return [[int(x) for x in r] for r in basis]


def _assert_params(cusp: CuspData, params: HeisenbergParams) -> None:
    D = cusp.D_part
    basis = params.basis_vectors(cusp)
    if len(basis) != 2 * D.rank:
        raise CuspError("Heisenberg lattice is not of full rank")
    zero_t = LatticeVector([cusp.field.zero()] * D.rank)
    if not in_discriminant_kernel(cusp, HeisenbergElem(params.N, zero_t)):
        raise CuspError("central generator is not in the discriminant kernel")
    for t in basis:
        if not in_discriminant_kernel(cusp, HeisenbergElem(Fraction(0), t)):
            raise CuspError("Eichler generator is not in the discriminant kernel")
    for t in basis:
        for t2 in basis:
            val = D.inner(t2, t).b / 2
            if (val / params.N).denominator != 1:
                raise CuspError("closure condition Im<t',t>/|delta| in N Z fails")


def params_with_override(cusp: CuspData, N=None, D_sub=None) -> HeisenbergParams:
    base = derive_heisenberg_params(cusp)
    if N is None and D_sub is None:
        return base
    sub = base.D_sub_basis if D_sub is None else tuple(tuple(int(x) for x in r) for r in D_sub)
    index = abs(int(linalg.det_q(sub)))
    params = HeisenbergParams(N=Fraction(N) if N is not None else base.N, D_sub_basis=sub, index=index)
    _assert_params(cusp, params)
    return params
