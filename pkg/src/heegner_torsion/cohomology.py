"""Bilinear-form calculus on the Heisenberg lattice and exact torsion criteria for Heegner combinations.

Real-valued forms are stored through rational values: a form whose values are |delta| * Im(x)
for field elements x is kept as the matrix of those rationals on a Z-basis of the Heisenberg lattice.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .cache import EnumerationCache
from .cusp import CuspData, HeisenbergElem, HeisenbergParams, SiegelPoint, heisenberg_act, heisenberg_compose
from .hlattice import LatticeVector, enumerate_norm_coset
from .local_products import HeegnerCombo, eval_B, eval_H, expand_divisor, expand_key
from .qfield import FieldElem


# -- forms on the Heisenberg lattice ------------------------------------------------------------

@dataclass(frozen=True)
class BilZForm:
    kind: str  # "ImHermitian", "ImSymmetric", "Transgression" or "Combination"
    matrix: tuple  # rational values on basis pairs of the Heisenberg lattice

    def value(self, i: int, j: int) -> Fraction:
        return self.matrix[i][j]

    def evaluate(self, x: Sequence[int], y: Sequence[int]) -> Fraction:
        """Value on integer coordinate vectors with respect to the lattice basis."""
        return sum((Fraction(a) * self.matrix[i][j] * b for i, a in enumerate(x) if a
                    for j, b in enumerate(y) if b), Fraction(0))

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for row in self.matrix for v in row)

    def __add__(self, other: "BilZForm") -> "BilZForm":
        return BilZForm("Combination", tuple(tuple(a + b for a, b in zip(r, s))
                                             for r, s in zip(self.matrix, other.matrix)))

    def scale(self, c) -> "BilZForm":
        return BilZForm(self.kind, tuple(tuple(Fraction(c) * a for a in r) for r in self.matrix))


def _basis(cusp: CuspData, params: HeisenbergParams) -> list[LatticeVector]:
    return params.basis_vectors(cusp)


def im_inner_matrix(cusp: CuspData, params: HeisenbergParams) -> list[list[Fraction]]:
    """Im<t_i, t_j>/|delta| on the lattice basis."""
    b = _basis(cusp, params)
    # Im(x)/|delta| = x.b / 2 for x = a + b zeta
    return [[cusp.inner_w(ti, tj).b / 2 for tj in b] for ti in b]


def transgression_generator(cusp: CuspData, params: HeisenbergParams) -> BilZForm:
    m = [[v / params.N for v in row] for row in im_inner_matrix(cusp, params)]
    form = BilZForm("Transgression", tuple(tuple(r) for r in m))
    if not form.is_integral():
        raise ArithmeticError("transgression generator is not integral on the Heisenberg lattice")
    return form


def form_from_values(kind: str, cusp: CuspData, params: HeisenbergParams,
                     fn: Callable[[LatticeVector, LatticeVector], FieldElem]) -> BilZForm:
    """The real form (t, t') -> |delta| Im fn(t, t') stored on the lattice basis."""
    b = _basis(cusp, params)
    return BilZForm(kind, tuple(tuple(fn(ti, tj).abs_delta_imag() for tj in b) for ti in b))


def hermitian_form(cusp: CuspData, params: HeisenbergParams, hmat) -> BilZForm:
    """|delta| Im H for the hermitian form H(x, y) = x^T hmat conj(y) on W."""
    return form_from_values("ImHermitian", cusp, params, lambda x, y: sesquilinear(hmat, x, y))


def symmetric_form(cusp: CuspData, params: HeisenbergParams, gmat) -> BilZForm:
    return form_from_values("ImSymmetric", cusp, params, lambda x, y: bilinear(gmat, x, y))


def sesquilinear(mat, x, y) -> FieldElem:
    f = x[0].field
    return sum((x[i] * mat[i][j] * y[j].conj() for i in range(len(x)) for j in range(len(y))), f.zero())


def bilinear(mat, x, y) -> FieldElem:
    f = x[0].field
    return sum((x[i] * mat[i][j] * y[j] for i in range(len(x)) for j in range(len(y))), f.zero())


def chern_form_of_combo(cusp: CuspData, params: HeisenbergParams, combo: HeegnerCombo,
                        cache: EnumerationCache | None = None) -> BilZForm:
    """The Chern cocycle of the combination as a matrix on the lattice basis."""
    b = _basis(cusp, params)
    terms = expand_divisor(cusp, combo, cache)
    mat = []
    for ti in b:
        row = []
        for tj in b:
            total = Fraction(0)
            for term in terms:
                x = cusp.inner_w(ti, term.lam_D)
                y = cusp.inner_w(tj, term.lam_D)
                total += term.weight * (-x.trace() * y.abs_delta_imag())
            row.append(total)
        mat.append(tuple(row))
    return BilZForm("Combination", tuple(mat))


# -- verdicts ------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class TorsionVerdict:
    is_torsion: bool
    Q_factor: Fraction | None = None
    witness: tuple | None = None  # (i, j, residual) with i, j basis indices of the Heisenberg lattice

    def __post_init__(self):
        if self.is_torsion == (self.witness is not None):
            raise ValueError("a witness is required exactly for non-torsion verdicts")


def kernel_test(form: BilZForm, cusp: CuspData, params: HeisenbergParams) -> TorsionVerdict:
    """Is form = Q * Im<.,.>/|delta| on the lattice for some rational Q?"""
    ref = im_inner_matrix(cusp, params)
    size = len(ref)
    Q = None
    for i in range(size):
        for j in range(size):
            if ref[i][j] != 0:
                Q = form.matrix[i][j] / ref[i][j]
                break
        if Q is not None:
            break
    if Q is None:
        for i in range(size):
            for j in range(size):
                if form.matrix[i][j] != 0:
                    return TorsionVerdict(False, None, (i, j, form.matrix[i][j]))
        return TorsionVerdict(True, Fraction(0))
    for i in range(size):
        for j in range(size):
            res = form.matrix[i][j] - Q * ref[i][j]
            if res != 0:
                return TorsionVerdict(False, None, (i, j, res))
    return TorsionVerdict(True, Q)


@dataclass
class _KeySums:
    fsum: list  # F summed over the key's vectors, on basis pairs (field elements)
    count: int
    m: Fraction


def _key_sums(cusp: CuspData, basis, beta: int, m: Fraction, cache, functionals=None) -> _KeySums:
    vecs = enumerate_norm_coset(cusp.D_part, cusp.pi[beta], m, cache)
    f = cusp.field
    D = cusp.D_part
    size = len(basis)
    if functionals is None:
        functionals = [D.pairing_functional(t) for t in basis]
    if not vecs:
        return _KeySums([[f.zero()] * size for _ in range(size)], 0, m)
    # integer arithmetic: <w, t_i> = (A_i + B_i zeta) / scale
    den = math.lcm(*(c.denominator for fn in functionals for pair in fn for c in pair))
    fint = [[(int(a * den), int(b * den)) for a, b in fn] for fn in functionals]
    xs = [D.to_z(w) for w in vecs]
    dx = math.lcm(*(c.denominator for x in xs for c in x))
    tr_zeta = f.zeta_trace
    tz_num, tz_den = tr_zeta.numerator, tr_zeta.denominator
    acc_a = [[0] * size for _ in range(size)]
    acc_b = [[0] * size for _ in range(size)]
    for x in xs:
        xi = [int(c * dx) for c in x]
        pa = []
        pb = []
        for fn in fint:
            a = sum(k * ak for k, (ak, _) in zip(xi, fn) if k and ak)
            b = sum(k * bk for k, (_, bk) in zip(xi, fn) if k and bk)
            # conjugate of a + b zeta is (a + b tr zeta) - b zeta
            pa.append(a * tz_den + b * tz_num)
            pb.append(-b * tz_den)
        for i in range(size):
            # trace of <t_i, w>, times tz_den^2
            r = 2 * pa[i] + pb[i] * tz_num
            if r == 0:
                continue
            for j in range(size):
                acc_a[i][j] += pa[j] * r
                acc_b[i][j] += pb[j] * r
    scale = (den * dx * tz_den) ** 2 * tz_den
    fsum = [[f(Fraction(acc_a[i][j], scale), Fraction(acc_b[i][j], scale)) for j in range(size)] for i in range(size)]
    return _KeySums(fsum, len(vecs), m)


@dataclass
class TorsionChecker:
    """Evaluates the torsion criterion; per-key sums are memoized across combinations."""

    cusp: CuspData
    params: HeisenbergParams
    cache: EnumerationCache | None = None
    _memo: dict = field(default_factory=dict)

    def __post_init__(self):
        self.basis = _basis(self.cusp, self.params)
        self.functionals = [self.cusp.D_part.pairing_functional(t) for t in self.basis]
        self.gram = [[self.cusp.inner_w(tj, ti) for tj in self.basis] for ti in self.basis]  # <t', t> at [i][j]

    def key_sums(self, beta: int, m: Fraction) -> _KeySums:
        k = (beta, m)
        if k not in self._memo:
            self._memo[k] = _key_sums(self.cusp, self.basis, beta, m, self.cache, self.functionals)
        return self._memo[k]

    def residual_matrix(self, combo: HeegnerCombo) -> list[list[FieldElem]]:
        n = self.cusp.n
        f = self.cusp.field
        size = len(self.basis)
        res = [[f.zero()] * size for _ in range(size)]
        for (beta, m), c in combo.items():
            ks = self.key_sums(beta, m)
            w = Fraction(c, 2)
            coef = ks.count * m / n
            for i in range(size):
                for j in range(size):
                    res[i][j] = res[i][j] + (ks.fsum[i][j] - self.gram[i][j] * coef) * w
        return res

    def check(self, combo: HeegnerCombo) -> TorsionVerdict:
        res = self.residual_matrix(combo)
        size = len(self.basis)
        for i in range(size):
            for j in range(size):
                if not res[i][j].is_zero():
                    direct = residual_direct(self.cusp, combo, self.basis[i], self.basis[j], self.cache)
                    if direct != res[i][j]:
                        raise ArithmeticError("torsion residual disagrees between evaluation paths")
                    return TorsionVerdict(False, None, (i, j, res[i][j]))
        return TorsionVerdict(True, combo_Q_factor(self.cusp, combo, self.cache, self))


def residual_direct(cusp: CuspData, combo: HeegnerCombo, t, t2, cache=None) -> FieldElem:
    """Sum over lambda of weight * [B + H - (Q(lambda)/n) <t', t>], summed term by term."""
    f = cusp.field
    total = f.zero()
    ip = cusp.inner_w(t2, t)
    for term in expand_divisor(cusp, combo, cache):
        q = cusp.D_part.norm(term.lam_D)
        val = eval_B(cusp, term.lam_D, t, t2) + eval_H(cusp, term.lam_D, t, t2) - ip * (q / cusp.n)
        total = total + val * term.weight
    return total


def combo_Q_factor(cusp: CuspData, combo: HeegnerCombo, cache=None, checker: TorsionChecker | None = None) -> Fraction:
    """Q = |d| * sum weight * Q(lambda) / n, the proportionality constant against Im<.,.>/|delta|."""
    total = Fraction(0)
    for (beta, m), c in combo.items():
        count = checker.key_sums(beta, m).count if checker else len(expand_key(cusp, beta, m, cache))
        total += Fraction(c, 2) * count * m
    return cusp.field.abs_disc * total / cusp.n


def torsion_check_combo(cusp: CuspData, params: HeisenbergParams, combo: HeegnerCombo,
                        cache: EnumerationCache | None = None) -> TorsionVerdict:
    return TorsionChecker(cusp, params, cache).check(combo)


# -- traces -------------------------------------------------------------------------------------------

def orthogonal_basis(cusp: CuspData) -> tuple[list[LatticeVector], list[Fraction]]:
    """Gram-Schmidt over the field: vectors f_j (D coordinates) and their norms <f_j, f_j> < 0."""
    D = cusp.D_part
    f = cusp.field
    n = D.rank
    out: list[LatticeVector] = []
    norms: list[Fraction] = []
    for k in range(n):
        v = LatticeVector(f.one() if i == k else f.zero() for i in range(n))
        for u, nu in zip(out, norms):
            coef = D.inner(v, u) / nu
            v = v - u.scale(coef)
        out.append(v)
        norms.append(D.norm(v))
    return out, norms


def trace_of(cusp: CuspData, form: Callable[[LatticeVector, LatticeVector], FieldElem]) -> FieldElem:
    """sum_j X(e_j, e_j) over an orthonormal basis with <e_j, e_j> = -1, from the orthogonal basis."""
    fs, norms = orthogonal_basis(cusp)
    return sum((form(fj, fj) * (1 / (-nj)) for fj, nj in zip(fs, norms)), cusp.field.zero())


def trace_B(cusp: CuspData, lam_D) -> FieldElem:
    return trace_of(cusp, lambda a, b: eval_B(cusp, lam_D, a, b))


def trace_H(cusp: CuspData, lam_D) -> FieldElem:
    return trace_of(cusp, lambda a, b: eval_H(cusp, lam_D, a, b))


def trace_inner(cusp: CuspData) -> FieldElem:
    return trace_of(cusp, cusp.inner_w)


def necessary_trace_condition(cusp: CuspData, combo: HeegnerCombo,
                              cache: EnumerationCache | None = None) -> tuple[bool, FieldElem]:
    """Sum of weight * tr B_lambda over the divisor; zero is necessary for torsion."""
    D = cusp.D_part
    f = cusp.field
    fs, norms = orthogonal_basis(cusp)
    functionals = [D.pairing_functional(fj) for fj in fs]
    total = f.zero()
    for (beta, m), c in combo.items():
        acc = f.zero()
        for w in enumerate_norm_coset(D, cusp.pi[beta], m, cache):
            x = D.to_z(w)
            for fn, nj in zip(functionals, norms):
                a = sum((xk * ak for xk, (ak, _) in zip(x, fn) if xk and ak), Fraction(0))
                b = sum((xk * bk for xk, (_, bk) in zip(x, fn) if xk and bk), Fraction(0))
                pj = f(a, b).conj()  # <f_j, lambda>
                acc = acc + pj * pj * (1 / (-nj))
        total = total + acc * Fraction(c, 2)
    return total.is_zero(), total


def hermitian_torsion_identity(cusp: CuspData, hmat) -> bool:
    """Whether H + (tr H / n) <.,.> vanishes on W, i.e. H is the multiple of the form fixed by its trace."""
    D = cusp.D_part
    n = D.rank
    f = cusp.field
    tr = trace_of(cusp, lambda a, b: sesquilinear(hmat, a, b))
    basis = [LatticeVector(f.one() if i == k else f.zero() for i in range(n)) for k in range(n)]
    return all((sesquilinear(hmat, a, b) + D.inner(a, b) * (tr / n)).is_zero() for a in basis for b in basis)


# -- trivializing cochains -------------------------------------------------------------------------

@dataclass(frozen=True)
class CochainReport:
    passed: bool
    max_deviation: float
    z_spread: float


def _complex_form(mat, conj_second: bool):
    m = np.array([[complex(x) for x in row] for row in mat])

    def fn(x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        return complex(x @ m @ (np.conj(y) if conj_second else y))

    return fn


def cochain_value(cusp: CuspData, kind: str, mat, g: HeisenbergElem, p: SiegelPoint) -> complex:
    """The explicit cochain u([h, t], z) trivializing Im H (hermitian) or Im G (symmetric)."""
    c = complex(cusp.ellp_ell)
    t = np.array([complex(x) for x in g.t])
    sigma = np.asarray(p.sigma, dtype=complex)
    if kind == "hermitian":
        H = _complex_form(mat, True)
        return (2 * H(sigma, t) / c + H(t, t)) / 2j
    if kind == "symmetric":
        G = _complex_form(mat, False)
        return (G(sigma, t) / c + 0.5 * np.conj(G(t, t))) / 2j
    raise ValueError(f"unknown cochain kind {kind!r}")


def cochain_coboundary(cusp: CuspData, kind: str, mat, g, g2, p: SiegelPoint) -> complex:
    gp = heisenberg_act(cusp, g, p)
    return (cochain_value(cusp, kind, mat, g2, gp) - cochain_value(cusp, kind, mat, heisenberg_compose(cusp, g, g2), p)
            + cochain_value(cusp, kind, mat, g, p))


def random_siegel_point(cusp: CuspData, rng: random.Random) -> SiegelPoint:
    from .cusp import in_domain
    while True:
        sigma = tuple(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(cusp.n))
        tau = complex(rng.uniform(-1, 1), rng.uniform(0.2, 3.0))
        p = SiegelPoint(tau, sigma)
        if in_domain(cusp, p):
            return p


def random_lattice_element(cusp: CuspData, params: HeisenbergParams, rng: random.Random, bound: int = 3,
                           central: bool = True) -> HeisenbergElem:
    basis = params.basis_vectors(cusp)
    t = LatticeVector([cusp.field.zero()] * cusp.n)
    for b in basis:
        t = t + b.scale(rng.randint(-bound, bound))
    h = params.N * rng.randint(-bound, bound) if central else Fraction(0)
    return HeisenbergElem(h, t)


def trivializing_cochain_check(cusp: CuspData, params: HeisenbergParams, kind: str, mat,
                               rng: random.Random, trials: int = 20, tol: float = 1e-9,
                               spread_tol: float = 1e-10) -> CochainReport:
    """Check that the coboundary of the explicit cochain is the constant Im H(t, t') (resp. Im G(t', t))."""
    worst = 0.0
    spread = 0.0
    conj_second = kind == "hermitian"
    form = _complex_form(mat, conj_second)
    for _ in range(trials):
        g = random_lattice_element(cusp, params, rng)
        g2 = random_lattice_element(cusp, params, rng)
        t = np.array([complex(x) for x in g.t])
        t2 = np.array([complex(x) for x in g2.t])
        target = form(t, t2).imag if kind == "hermitian" else form(t2, t).imag
        vals = [cochain_coboundary(cusp, kind, mat, g, g2, random_siegel_point(cusp, rng)) for _ in range(2)]
        worst = max(worst, max(abs(v - target) for v in vals))
        spread = max(spread, abs(vals[0] - vals[1]))
    return CochainReport(bool(worst <= tol and spread <= spread_tol), float(worst), float(spread))
