"""Local Heegner divisors near a cusp, truncated local Borcherds products, their automorphy factor,
and the exact bilinear Chern cocycle."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from . import linalg
from .cache import EnumerationCache
from .cusp import (CuspData, HeisenbergElem, HeisenbergParams, SiegelPoint, in_domain)
from .hlattice import LatticeVector, enumerate_norm_coset
from .qfield import FieldElem, FieldSpec


class ComboError(ValueError):
    pass


class DivisorHit(ArithmeticError):
    """The evaluation point lies (numerically) on the divisor of the product."""


class NotInHeisenbergLattice(ValueError):
    pass


DIVISOR_TOLERANCE = 1e-12


def e(x: complex) -> complex:
    return cmath.exp(2j * math.pi * x)


# -- combinations of local Heegner divisors -------------------------------------------------------

@dataclass(frozen=True)
class HeegnerCombo:
    """Coefficients c(beta, m) keyed by (coset index in the cusp's subgroup, negative norm)."""

    terms: tuple  # sorted ((beta, m), c) pairs, symmetric under beta -> -beta

    def items(self):
        return iter(self.terms)

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def is_empty(self) -> bool:
        return not self.terms


def make_combo(cusp: CuspData, coeffs: Mapping | Iterable, symmetrize: bool = True) -> HeegnerCombo:
    """Validate coefficients and complete them to a symmetric combination.

    coeffs maps (beta, m) -> c, or is an iterable of (beta, m, c). Missing partners c(-beta, m) are
    filled in when symmetrize is set; an explicit partner with a different value is an error.
    """
    items = coeffs.items() if isinstance(coeffs, Mapping) else (((b, m), c) for b, m, c in coeffs)
    dg = cusp.disc_group
    given: dict = {}
    for (beta, m), c in items:
        beta = int(beta)
        m = Fraction(m)
        c = int(c)
        if beta not in cusp.L_script:
            raise ComboError(f"class {beta} is not in the subgroup attached to the cusp")
        if beta not in cusp.beta_dot:
            raise ComboError(f"class {beta} has no representative orthogonal to ell")
        if m >= 0:
            raise ComboError(f"norm must be negative, got {m}")
        q = cusp.L.norm(cusp.beta_dot[beta])
        if (m - q).denominator != 1:
            raise ComboError(f"norm {m} is not congruent to Q(beta) = {q} modulo 1 for class {beta}")
        key = (beta, m)
        if key in given and given[key] != c:
            raise ComboError(f"duplicate entry for {key} with different coefficients")
        given[key] = c
    out = dict(given)
    for (beta, m), c in given.items():
        partner = (dg.neg[beta], m)
        if partner in given:
            if given[partner] != c:
                raise ComboError(f"c({beta},{m}) = {c} but c({partner[0]},{m}) = {given[partner]}; "
                                 "coefficients must be symmetric under beta -> -beta")
        elif symmetrize:
            out[partner] = c
        else:
            raise ComboError(f"missing symmetric partner ({partner[0]}, {m})")
    terms = tuple(sorted(((k, v) for k, v in out.items() if v != 0), key=lambda kv: (kv[0][1], kv[0][0])))
    return HeegnerCombo(terms)


def combo_from_records(cusp: CuspData, records) -> HeegnerCombo:
    coeffs = {}
    dg = cusp.disc_group
    for rec in records:
        beta = rec.beta
        if not isinstance(beta, int):
            try:
                beta = dg.index_of_z(beta)
            except ValueError as exc:
                raise ComboError(f"line {rec.line}: {exc}") from None
        key = (beta, Fraction(rec.m))
        if key in coeffs and coeffs[key] != rec.c:
            raise ComboError(f"line {rec.line}: conflicting coefficient for {key}")
        coeffs[key] = rec.c
    return make_combo(cusp, coeffs)


@dataclass(frozen=True)
class ExpandedTerm:
    lam: LatticeVector  # in L coordinates
    lam_D: LatticeVector  # definite component, in D coordinates
    weight: Fraction
    key: tuple


def expand_key(cusp: CuspData, beta: int, m: Fraction, cache: EnumerationCache | None = None):
    """All lambda = kappa + beta_dot with kappa in D and Q(lambda) = m, as (lambda, lambda_D)."""
    bdot = cusp.beta_dot[beta]
    _, a, _ = cusp.decompose(bdot)
    ell_part = cusp.ell.scale(a)
    out = []
    for w in enumerate_norm_coset(cusp.D_part, cusp.pi[beta], m, cache):
        lam = ell_part + cusp.embed_w(w)
        out.append((lam, w))
    return out


def expand_divisor(cusp: CuspData, combo: HeegnerCombo, cache: EnumerationCache | None = None) -> list[ExpandedTerm]:
    out = []
    for (beta, m), c in combo.items():
        for lam, w in expand_key(cusp, beta, m, cache):
            out.append(ExpandedTerm(lam, w, Fraction(c, 2), (beta, m)))
    return out


# -- bilinear forms attached to lambda -----------------------------------------------------------

@dataclass(frozen=True)
class BilinearFormValue:
    value: FieldElem
    tag: str


def eval_B(cusp: CuspData, lam_D, t, t2) -> FieldElem:
    return cusp.inner_w(t, lam_D) * cusp.inner_w(t2, lam_D)


def eval_H(cusp: CuspData, lam_D, t, t2) -> FieldElem:
    return cusp.inner_w(t2, lam_D) * cusp.inner_w(lam_D, t)


def eval_F(cusp: CuspData, lam_D, t, t2) -> FieldElem:
    return cusp.inner_w(t, lam_D).trace() * cusp.inner_w(t2, lam_D)


def eval_forms(cusp: CuspData, lam_D, t, t2) -> dict[str, BilinearFormValue]:
    vals = {"F": eval_F(cusp, lam_D, t, t2), "B": eval_B(cusp, lam_D, t, t2), "H": eval_H(cusp, lam_D, t, t2)}
    assert vals["F"] == vals["B"] + vals["H"]
    return {k: BilinearFormValue(v, k) for k, v in vals.items()}


# -- Heisenberg lattice membership ---------------------------------------------------------------

@lru_cache(maxsize=64)
def _basis_inverse(d_sub_basis: tuple) -> list[list[Fraction]]:
    return linalg.inverse_q(linalg.transpose([list(b) for b in d_sub_basis]))


def d_sub_coordinates(cusp: CuspData, params: HeisenbergParams, t) -> list[Fraction]:
    """Coordinates of t in the basis of the Heisenberg lattice."""
    tz = cusp.D_part.to_z(t)
    return linalg.mat_vec(_basis_inverse(params.D_sub_basis), [Fraction(x) for x in tz])


def in_heisenberg_lattice(cusp: CuspData, params: HeisenbergParams, g: HeisenbergElem) -> bool:
    if (g.h / params.N).denominator != 1:
        return False
    coords = d_sub_coordinates(cusp, params, g.t)
    return all(c.denominator == 1 for c in coords)


# -- local Borcherds products ------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductValue:
    value: complex
    tail_bound: float
    truncation: int


def pairing_z_lambda(cusp: CuspData, lam, p: SiegelPoint) -> complex:
    z = cusp.z_vector(p)
    lv = [complex(x) for x in lam]
    return cusp.inner_l_complex(z, lv)


def _check_lambda(cusp: CuspData, lam) -> None:
    L = cusp.L
    if not L.inner(lam, cusp.ell).is_zero():
        raise ValueError("lambda is not orthogonal to ell")
    if not L.in_dual(lam):
        raise ValueError("lambda is not in the dual lattice")
    if L.norm(lam) >= 0:
        raise ValueError("lambda must have negative norm")


def product_in_w(field: FieldSpec, w: complex, truncation: int) -> ProductValue:
    """prod_{0<=p<|d|, |q|<=T} [1 - e(sgn(q)(w + (p + zeta q)/|d|))], sgn(0) = +1, with a tail bound."""
    if truncation < 1:
        raise ValueError("truncation must be at least 1")
    absd = field.abs_disc
    zeta = complex(field.zeta())
    value = 1 + 0j
    for q in range(-truncation, truncation + 1):
        sgn = 1 if q >= 0 else -1
        for p in range(absd):
            x = sgn * (w + (p + zeta * q) / absd)
            factor = 1 - e(x)
            if abs(factor) < DIVISOR_TOLERANCE:
                raise DivisorHit(f"factor (p={p}, q={q}) vanishes at the evaluation point")
            value *= factor
    # |e(x)| over the omitted factors is exp(-2 pi (sgn Im w + |q| Im zeta / |d|))
    r = math.exp(-2 * math.pi * zeta.imag / absd)
    s = absd * (math.exp(-2 * math.pi * w.imag) + math.exp(2 * math.pi * w.imag)) * r ** (truncation + 1) / (1 - r)
    tail = abs(value) * math.expm1(s) if s < 700 else math.inf
    return ProductValue(value, tail, truncation)


def eval_local_product(cusp: CuspData, lam, p: SiegelPoint, truncation: int = 40) -> ProductValue:
    _check_lambda(cusp, lam)
    if not in_domain(cusp, p):
        raise ValueError("point is outside the Siegel domain")
    return product_in_w(cusp.field, pairing_z_lambda(cusp, lam, p), truncation)


def automorphy_exponent(field: FieldSpec, w: complex, re_t_lam: Fraction) -> complex:
    """-2|d| w R - 2 R^2 zeta + R (zeta + 1) with R = Re<t, lambda>; the zeta part is exact in the field."""
    exact = automorphy_exponent_exact(field, re_t_lam)
    # e() only sees the real part mod 1; reducing it exactly keeps the float argument small
    shifted = complex(float(exact.real() % 1), float(exact.imag()))
    return -2 * field.abs_disc * w * float(re_t_lam) + shifted


def automorphy_exponent_exact(field: FieldSpec, re_t_lam: Fraction) -> FieldElem:
    """The field-valued part -2 R^2 zeta + R (zeta + 1) of the exponent."""
    R = Fraction(re_t_lam)
    zeta = field.zeta()
    return zeta * (-2 * R * R) + (zeta + 1) * R


def automorphy_exponent_at(cusp: CuspData, lam, g: HeisenbergElem, p: SiegelPoint, zeta_re=None) -> complex:
    field = cusp.field if zeta_re is None else cusp.field.with_zeta_re(zeta_re)
    w = pairing_z_lambda(cusp, lam, p)
    lam_D = cusp.d_part_of(lam)
    R = cusp.inner_w(g.t, lam_D).trace() / 2
    return automorphy_exponent(field, w, R)


def automorphy_factor(cusp: CuspData, lam, g: HeisenbergElem, p: SiegelPoint, zeta_re=None) -> complex:
    x = automorphy_exponent_at(cusp, lam, g, p, zeta_re)
    if abs(x.imag) * 2 * math.pi > 700:
        raise OverflowError(f"|log J| = {2 * math.pi * abs(x.imag):.1f} exceeds double range")
    return e(x)


# -- Chern cocycle ----------------------------------------------------------------------------------

def chern_cocycle_value(cusp: CuspData, lam_D, t, t2) -> Fraction:
    """-2|delta| Re<t, lambda> Im<t', lambda>, an exact rational."""
    x = cusp.inner_w(t, lam_D)
    y = cusp.inner_w(t2, lam_D)
    return -x.trace() * y.abs_delta_imag()


def chern_cocycle(cusp: CuspData, lam, g: HeisenbergElem, g2: HeisenbergElem,
                  params: HeisenbergParams | None = None) -> Fraction:
    """c_lambda(g, g'); lam may be given in L coordinates (length rank L) or D coordinates."""
    lam_D = cusp.d_part_of(lam) if len(lam) == cusp.L.rank else lam
    if params is not None:
        for h in (g, g2):
            if not in_heisenberg_lattice(cusp, params, h):
                raise NotInHeisenbergLattice(f"{h} is not in the Heisenberg lattice")
    val = chern_cocycle_value(cusp, lam_D, g.t, g2.t)
    if params is not None and val.denominator != 1:
        raise ArithmeticError(f"Chern cocycle value {val} is not integral on the Heisenberg lattice")
    return val


def chern_class_of_combo(cusp: CuspData, params: HeisenbergParams | None, combo: HeegnerCombo, t, t2,
                         cache: EnumerationCache | None = None) -> Fraction:
    total = Fraction(0)
    for term in expand_divisor(cusp, combo, cache):
        total += term.weight * chern_cocycle_value(cusp, term.lam_D, t, t2)
    return total
