"""Dual Weil representation of the definite part, harmonic theta series and the obstruction pairing.

Vectors of W (x) C are stored as pairs (re, im) of field-coordinate vectors meaning re + i*im,
where i is the complex unit (which need not lie in the field).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .cache import EnumerationCache
from .cohomology import orthogonal_basis
from .cusp import CuspData
from .hlattice import HermitianLattice, LatticeVector, coset_norms, enumerate_norm_coset
from .local_products import HeegnerCombo
from .qfield import RealQuadVal, format_real_quad


def _e(x: float) -> complex:
    return cmath.exp(2j * math.pi * x)


def _frac_part(x: Fraction) -> Fraction:
    return x - math.floor(x)


# -- Weil representation ---------------------------------------------------------------------------

@dataclass
class WeilRep:
    lattice: HermitianLattice
    dim: int
    T_phases: list  # exact -Q(gamma) mod 1
    S_phases: list  # exact b(gamma, delta) mod 1
    n: int

    @property
    def weight(self) -> int:
        return self.n + 2

    @property
    def S_scale(self) -> complex:
        # sqrt(i)^(-2n) / sqrt|D'/D|
        return cmath.exp(-1j * math.pi * self.n / 2) / math.sqrt(self.dim)

    def T_matrix(self) -> np.ndarray:
        return np.diag([_e(float(p)) for p in self.T_phases])

    def S_matrix(self) -> np.ndarray:
        ph = np.array([[float(x) for x in row] for row in self.S_phases])
        return self.S_scale * np.exp(2j * np.pi * ph)


def build_weil_rep(D: HermitianLattice) -> WeilRep:
    if not D.is_even():
        raise ValueError("the Weil representation needs an even lattice")
    dg = D.discriminant_group
    T = [_frac_part(-D.norm(r)) for r in dg.coset_reps]
    S = [[dg.bilinear_mod_one(i, j) for j in range(dg.order)] for i in range(dg.order)]
    return WeilRep(D, dg.order, T, S, D.rank)


@dataclass(frozen=True)
class WeilReport:
    unitarity: float
    s2_vs_st3: float
    s4_identity: float
    t_order: int


def weil_relations(rep: WeilRep) -> WeilReport:
    S = rep.S_matrix()
    T = rep.T_matrix()
    I = np.eye(rep.dim)
    unit = float(np.max(np.abs(S @ S.conj().T - I)))
    st = S @ T
    rel = float(np.max(np.abs(S @ S - st @ st @ st)))
    s4 = float(np.max(np.abs(np.linalg.matrix_power(S, 4) - I)))
    order = linalg.common_denominator(rep.T_phases)
    return WeilReport(unit, rel, s4, order)


# -- vectors of W (x) C and the polynomials -------------------------------------------------------

@dataclass(frozen=True)
class CVec:
    re: LatticeVector
    im: LatticeVector

    def __add__(self, other: "CVec") -> "CVec":
        return CVec(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "CVec") -> "CVec":
        return CVec(self.re - other.re, self.im - other.im)

    def times_i(self) -> "CVec":
        return CVec(-self.im, self.re)

    def times_minus_i(self) -> "CVec":
        return CVec(self.im, -self.re)

    def scale(self, c) -> "CVec":
        """Multiply by a rational."""
        return CVec(self.re.scale(c), self.im.scale(c))

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()


def real_cvec(v: LatticeVector) -> CVec:
    return CVec(v, v.scale(0))


def _rq(x: Fraction, w: int) -> RealQuadVal:
    return RealQuadVal(x, 0, w)


def inner_c(D: HermitianLattice, x: CVec, y: CVec) -> tuple[RealQuadVal, RealQuadVal]:
    """(Re, Im) of <x, y> extended sesquilinearly to W (x) C."""
    a = D.inner(x.re, y.re) + D.inner(x.im, y.im)
    b = D.inner(x.im, y.re) - D.inner(x.re, y.im)
    w = D.field.abs_disc
    re = _rq(a.real(), w) - b.imag()
    im = a.imag() + _rq(b.real(), w)
    return re, im


def norm_c(D: HermitianLattice, x: CVec) -> RealQuadVal:
    return inner_c(D, x, x)[0]


@dataclass(frozen=True)
class PolynomialP:
    """P(u, v) = 2 (Re<u, v>)^2 - Q(u) Q(v) / n for a fixed polarization vector v."""

    v: CVec
    label: str = ""

    def __call__(self, D: HermitianLattice, u) -> RealQuadVal:
        u = u if isinstance(u, CVec) else real_cvec(LatticeVector(u))
        return eval_P(D, u, self.v)


def eval_P(D: HermitianLattice, u: CVec, v: CVec) -> RealQuadVal:
    r, _ = inner_c(D, u, v)
    return r * r * 2 - norm_c(D, u) * norm_c(D, v) / D.rank


def eval_p1(D: HermitianLattice, u: CVec, v: CVec, w: CVec) -> RealQuadVal:
    """Re F_u(v, w) - Q(u)/n Re<v, w>."""
    rv, _ = inner_c(D, v, u)
    rw, _ = inner_c(D, w, u)
    return rv * rw * 2 - norm_c(D, u) * inner_c(D, v, w)[0] / D.rank


def eval_p2(D: HermitianLattice, u: CVec, v: CVec, w: CVec) -> RealQuadVal:
    """Im F_u(v, w) - Q(u)/n Im<w, v>: the imaginary part of the torsion residual at (v, w)."""
    rv, _ = inner_c(D, v, u)
    _, iw = inner_c(D, w, u)
    return rv * iw * 2 - norm_c(D, u) * inner_c(D, w, v)[1] / D.rank


def p2_by_polarization(D: HermitianLattice, u: CVec, v: CVec, w: CVec) -> RealQuadVal:
    """p2(u, v, w) = p1(u, v, -i w), recovered from P alone."""
    mw = w.times_minus_i()
    return (eval_P(D, u, v + mw) - eval_P(D, u, v) - eval_P(D, u, mw)) / 2


def p1_by_polarization(D: HermitianLattice, u: CVec, v: CVec, w: CVec) -> RealQuadVal:
    return (eval_P(D, u, v + w) - eval_P(D, u, v) - eval_P(D, u, w)) / 2


class PEvaluator:
    """Fast exact evaluation of u -> P(u, v) from Z-coordinates of u.

    Re<u, v> is linear in the coordinates with coefficients r_k + s_k sqrt|d|; Q(u) is the trace form.
    """

    def __init__(self, D: HermitianLattice, v: CVec):
        self.D = D
        self.w = D.field.abs_disc
        self.lin = []
        for k in range(2 * D.rank):
            r, _ = inner_c(D, real_cvec(D.z_basis_vector(k)), v)
            self.lin.append((r.r, r.s))
        self.qv_over_n = norm_c(D, v) / D.rank
        self._den = math.lcm(*(c.denominator for pair in self.lin for c in pair))
        self._lin_int = [(int(r * self._den), int(s * self._den)) for r, s in self.lin]

    def shell_sum(self, xs, norm) -> RealQuadVal:
        """sum of P over vectors with Z-coordinates xs, all of norm `norm`, in integer arithmetic."""
        w = self.w
        if not xs:
            return RealQuadVal(0, 0, w)
        dx = math.lcm(*(Fraction(c).denominator for x in xs for c in x))
        srr = sss = srs = 0
        for x in xs:
            xi = [int(Fraction(c) * dx) for c in x]
            lr = sum(a * r for a, (r, _) in zip(xi, self._lin_int) if a and r)
            ls = sum(a * s for a, (_, s) in zip(xi, self._lin_int) if a and s)
            srr += lr * lr
            sss += ls * ls
            srs += lr * ls
        scale = (self._den * dx) ** 2
        sq = RealQuadVal(Fraction(2 * (srr + sss * w), scale), Fraction(4 * srs, scale), w)
        return sq - self.qv_over_n * (Fraction(norm) * len(xs))

    def __call__(self, x, norm=None) -> RealQuadVal:
        lr = sum((xk * r for xk, (r, _) in zip(x, self.lin) if xk and r), Fraction(0))
        ls = sum((xk * s for xk, (_, s) in zip(x, self.lin) if xk and s), Fraction(0))
        sq = RealQuadVal(lr * lr + ls * ls * self.w, 2 * lr * ls, self.w)
        qu = self.D.trace_form_z(x, x) / 2 if norm is None else norm
        return sq * 2 - self.qv_over_n * qu


def quadratic_matrix(D: HermitianLattice, v: CVec) -> list[list[RealQuadVal]]:
    """Symmetric M with P(u, v) = x^T M x for u with Z-coordinates x."""
    f = D.field
    w = f.abs_disc
    n = D.rank
    units = []
    for s in range(2):
        for i in range(n):
            e = [f.zero()] * n
            e[i] = f.one() if s == 0 else f.zeta()
            units.append(real_cvec(LatticeVector(e)))
    lin = [inner_c(D, e, v)[0] for e in units]
    qv = norm_c(D, v)
    B = D.trace_gram
    return [[lin[i] * lin[j] * 2 - qv * (_rq(B[i][j], w) / (2 * n)) for j in range(2 * n)] for i in range(2 * n)]


def laplacian_of_P(D: HermitianLattice, v: CVec) -> RealQuadVal:
    """Laplacian of u -> P(u, v) for the trace form: 2 tr(B^{-1} M), exactly."""
    M = quadratic_matrix(D, v)
    Binv = D.trace_gram_inverse
    w = D.field.abs_disc
    total = RealQuadVal(0, 0, w)
    size = len(M)
    for i in range(size):
        for j in range(size):
            if Binv[i][j]:
                total = total + M[j][i] * _rq(Binv[i][j], w)
    return total * 2


# -- theta series -----------------------------------------------------------------------------------

@dataclass
class ThetaExpansion:
    coeffs: dict  # (gamma, m) -> RealQuadVal, m > 0 the exponent of e(m tau)
    v_label: str
    max_norm: Fraction
    dim: int
    radicand: int
    counts: dict = field(default_factory=dict)

    def coefficient(self, gamma: int, m) -> RealQuadVal:
        m = Fraction(m)
        if m <= 0 or m > self.max_norm:
            raise KeyError(f"exponent {m} outside (0, {self.max_norm}]")
        return self.coeffs.get((gamma, m), RealQuadVal(0, 0, self.radicand))

    def evaluate(self, tau: complex) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        for (g, m), a in self.coeffs.items():
            if a:
                out[g] += float(a) * _e(float(m) * tau)
        return out

    def is_zero(self) -> bool:
        return all(not a for a in self.coeffs.values())

    def table(self) -> str:
        lines = ["# gamma m coefficient"]
        for (g, m) in sorted(self.coeffs, key=lambda k: (k[1], k[0])):
            lines.append(f"{g} {m} {format_real_quad(self.coeffs[(g, m)])}")
        return "\n".join(lines) + "\n"


def build_theta(cusp_or_D, v: PolynomialP, max_norm, cache: EnumerationCache | None = None) -> ThetaExpansion:
    D = cusp_or_D.D_part if isinstance(cusp_or_D, CuspData) else cusp_or_D
    max_norm = Fraction(max_norm)
    if max_norm <= 0:
        raise ValueError("max_norm must be positive")
    dg = D.discriminant_group
    coeffs = {}
    counts = {}
    evaluator = PEvaluator(D, v.v)
    for g in range(dg.order):
        for m in coset_norms(D, g, max_norm):
            vecs = enumerate_norm_coset(D, g, m, cache)
            total = evaluator.shell_sum([D.to_z(lam) for lam in vecs], m)
            coeffs[(g, -m)] = total
            counts[(g, -m)] = len(vecs)
    return ThetaExpansion(coeffs, v.label, max_norm, dg.order, D.field.abs_disc, counts)


def theta_modularity_check(rep: WeilRep, theta: ThetaExpansion, tau: complex) -> dict:
    """Deviations of f(tau+1) = rho(T) f(tau) and f(-1/tau) = tau^k rho(S) f(tau)."""
    tau = complex(tau)
    if tau.imag < 0.8 or (-1 / tau).imag < 0.8 - 1e-12:
        raise ValueError("need Im(tau) >= 0.8 and Im(-1/tau) >= 0.8")
    f = theta.evaluate(tau)
    dev_t = float(np.max(np.abs(theta.evaluate(tau + 1) - rep.T_matrix() @ f))) if rep.dim else 0.0
    lhs = theta.evaluate(-1 / tau)
    rhs = tau ** rep.weight * (rep.S_matrix() @ f)
    dev_s = float(np.max(np.abs(lhs - rhs))) if rep.dim else 0.0
    return {"T": dev_t, "S": dev_s}


def theta_tail_bound(theta: ThetaExpansion, tau: complex) -> float:
    """Rough bound for the omitted terms: the last computed shell's size times the decay beyond it."""
    y = min(complex(tau).imag, (-1 / complex(tau)).imag)
    big = max((abs(float(a)) for a in theta.coeffs.values()), default=0.0)
    m = float(theta.max_norm)
    return (1 + big) * (1 + m) ** 4 * math.exp(-2 * math.pi * m * y) / (1 - math.exp(-2 * math.pi * y))


# -- spanning set and the obstruction pairing -----------------------------------------------------

def spanning_set(cusp: CuspData) -> list[PolynomialP]:
    fs, _ = orthogonal_basis(cusp)
    real_basis = []
    for j, fj in enumerate(fs):
        real_basis.append((f"f{j + 1}", real_cvec(fj)))
        real_basis.append((f"i*f{j + 1}", real_cvec(fj).times_i()))
    out = [PolynomialP(v, label) for label, v in real_basis]
    for a in range(len(real_basis)):
        for b in range(a + 1, len(real_basis)):
            out.append(PolynomialP(real_basis[a][1] + real_basis[b][1], f"{real_basis[a][0]}+{real_basis[b][0]}"))
    return out


@dataclass
class ObstructionChecker:
    cusp: CuspData
    cache: EnumerationCache | None = None
    _memo: dict = field(default_factory=dict)

    def __post_init__(self):
        self.span = spanning_set(self.cusp)
        self.evaluators = [PEvaluator(self.cusp.D_part, P.v) for P in self.span]

    def coefficients(self, gamma: int, m: Fraction) -> list[RealQuadVal]:
        """a(gamma, m) for every spanning polynomial (m > 0)."""
        key = (gamma, m)
        if key not in self._memo:
            D = self.cusp.D_part
            vecs = enumerate_norm_coset(D, gamma, -m, self.cache)
            xs = [D.to_z(lam) for lam in vecs]
            vals = [ev.shell_sum(xs, -m) for ev in self.evaluators]
            self._memo[key] = vals
        return self._memo[key]

    def pairing(self, combo: HeegnerCombo) -> list[RealQuadVal]:
        w = self.cusp.field.abs_disc
        totals = [RealQuadVal(0, 0, w) for _ in self.span]
        for (beta, m), c in combo.items():
            vals = self.coefficients(self.cusp.pi[beta], -m)
            totals = [t + a * c for t, a in zip(totals, vals)]
        return totals

    def check(self, combo: HeegnerCombo) -> tuple[bool, list]:
        totals = self.pairing(combo)
        witnesses = [(P.label, t) for P, t in zip(self.span, totals) if t]
        return not witnesses, witnesses


def obstruction_check(cusp: CuspData, combo: HeegnerCombo, cache: EnumerationCache | None = None) -> tuple[bool, list]:
    return ObstructionChecker(cusp, cache).check(combo)
