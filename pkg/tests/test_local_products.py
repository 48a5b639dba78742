import cmath
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from heegner_torsion.cohomology import random_lattice_element, random_siegel_point
from heegner_torsion.cusp import HeisenbergElem, SiegelPoint, heisenberg_act, heisenberg_compose
from heegner_torsion.hlattice import LatticeVector
from heegner_torsion.local_products import (ComboError, DivisorHit, NotInHeisenbergLattice,
                                            automorphy_exponent_exact, automorphy_factor,
                                            chern_class_of_combo, chern_cocycle, chern_cocycle_value,
                                            combo_from_records, eval_B, eval_F, eval_forms, eval_H,
                                            eval_local_product, expand_divisor, expand_key, make_combo,
                                            pairing_z_lambda, product_in_w)
from heegner_torsion.fixtures import DivisorRecord

from conftest import setup


def _d(cusp, *entries):
    return LatticeVector(cusp.field(*e) if isinstance(e, tuple) else cusp.field(e) for e in entries)


def _field_vectors(cusp, bound=4):
    f = cusp.field
    ints = st.integers(-bound, bound)
    return st.lists(st.tuples(ints, ints), min_size=cusp.n, max_size=cusp.n).map(
        lambda cs: LatticeVector(f(a, b) for a, b in cs))


# -- combinations -----------------------------------------------------------------------------------

def test_make_combo_symmetrizes(eisenstein):
    c = eisenstein.cusp
    combo = make_combo(c, {(1, Fraction(-1, 3)): 5})
    assert combo.as_dict() == {(1, Fraction(-1, 3)): 5, (2, Fraction(-1, 3)): 5}
    with pytest.raises(ComboError, match="missing symmetric partner"):
        make_combo(c, {(1, Fraction(-1, 3)): 5}, symmetrize=False)


@pytest.mark.parametrize("coeffs,fragment", [
    ({(0, 1): 1}, "negative"),
    ({(0, Fraction(-1, 2)): 1}, "congruent"),
    ({(1, Fraction(-1, 3)): 1, (2, Fraction(-1, 3)): 2}, "symmetric"),
    ({(7, -1): 1}, "subgroup"),
])
def test_make_combo_rejects(eisenstein, coeffs, fragment):
    with pytest.raises(ComboError, match=fragment):
        make_combo(eisenstein.cusp, coeffs)


def test_make_combo_drops_zero_coefficients(gaussian):
    assert make_combo(gaussian.cusp, {(0, -1): 0}).is_empty()


def test_combo_from_records(eisenstein):
    c = eisenstein.cusp
    recs = [DivisorRecord(1, Fraction(-1, 3), 2, 1), DivisorRecord(1, Fraction(-1, 3), 3, 2)]
    with pytest.raises(ComboError, match="line 2"):
        combo_from_records(c, recs)
    combo = combo_from_records(c, recs[:1])
    assert combo.as_dict()[(2, Fraction(-1, 3))] == 2


# -- expansion ---------------------------------------------------------------------------------------

def test_expand_gaussian_example(gaussian):
    c = gaussian.cusp
    terms = expand_divisor(c, make_combo(c, {(0, -1): 2}), gaussian.cache)
    assert len(terms) == 4 and all(t.weight == 1 for t in terms)
    assert {t.lam_D for t in terms} == {_d(c, 1), _d(c, -1), _d(c, (0, 1)), _d(c, (0, -1))}
    assert expand_divisor(c, make_combo(c, {(0, -3): 2})) == []
    assert expand_divisor(c, make_combo(c, {})) == []


def test_expanded_vectors_are_heegner_vectors(small):
    c = small.cusp
    for beta in c.L_script:
        q = c.L.norm(c.beta_dot[beta])
        m = q - math.floor(q) - 2
        for lam, lam_d in expand_key(c, beta, m, small.cache):
            assert c.L.norm(lam) == m
            assert c.L.inner(lam, c.ell).is_zero()
            assert c.L.in_dual(lam)
            assert c.disc_group.index_of_vector(lam) == beta
            assert c.d_part_of(lam) == lam_d


# -- the forms F, B, H --------------------------------------------------------------------------------

def test_eval_F_gaussian_example(gaussian):
    c = gaussian.cusp
    one = _d(c, 1)
    assert eval_F(c, one, one, one) == c.field(2)
    assert eval_F(c, one, _d(c, 0), one).is_zero()


@pytest.mark.parametrize("name", ["gaussian", "eisenstein", "gaussian-rank2"])
def test_F_is_B_plus_H(name):
    c = setup(name).cusp

    @settings(max_examples=60, deadline=None)
    @given(_field_vectors(c), _field_vectors(c), _field_vectors(c))
    def check(lam, t, t2):
        assert eval_F(c, lam, t, t2) == eval_B(c, lam, t, t2) + eval_H(c, lam, t, t2)
        assert set(eval_forms(c, lam, t, t2)) == {"F", "B", "H"}
        # B is complex bilinear and symmetric, H is hermitian up to swapping the slots
        assert eval_B(c, lam, t, t2) == eval_B(c, lam, t2, t)
        assert eval_H(c, lam, t, t2) == eval_H(c, lam, t2, t).conj()
        # the cocycle equals Im(-|delta| F)
        value = chern_cocycle_value(c, lam, t, t2)
        f_val = eval_F(c, lam, t, t2)
        assert value == (f_val * Fraction(-1)).abs_delta_imag()
        assert abs(float(value) - (-math.sqrt(c.field.abs_disc) * complex(f_val)).imag) <= 1e-9 * max(1, abs(value))

    check()


# -- local products ----------------------------------------------------------------------------------

def _gaussian_lambda(s):
    return expand_key(s.cusp, 0, Fraction(-1), s.cache)[0][0]


def test_divisor_hit_is_signalled(gaussian):
    c = gaussian.cusp
    lam = _gaussian_lambda(gaussian)
    assert pairing_z_lambda(c, lam, SiegelPoint(2j, (0j,))) == 0
    with pytest.raises(DivisorHit):
        eval_local_product(c, lam, SiegelPoint(2j, (0j,)))
    with pytest.raises(DivisorHit):
        product_in_w(c.field, 0.25 + 0j, 5)


def test_product_argument_checks(gaussian):
    c = gaussian.cusp
    lam = _gaussian_lambda(gaussian)
    with pytest.raises(ValueError, match="truncation"):
        product_in_w(c.field, 0.1j, 0)
    with pytest.raises(ValueError, match="negative norm"):
        eval_local_product(c, _d(c, 0, 0, 0), SiegelPoint(2j, (0.1j,)))
    with pytest.raises(ValueError, match="outside"):
        eval_local_product(c, lam, SiegelPoint(0.01j, (3 + 3j,)))


def test_winding_number_around_divisor(gaussian):
    c = gaussian.cusp
    lam = _gaussian_lambda(gaussian)
    steps, radius = 200, 0.05
    total, prev = 0.0, None
    for k in range(steps + 1):
        p = SiegelPoint(2j, (radius * cmath.exp(2j * math.pi * k / steps),))
        v = eval_local_product(c, lam, p, 20).value
        if prev is not None:
            total += cmath.phase(v / prev)
        prev = v
    assert round(total / (2 * math.pi)) == 1
    assert abs(total / (2 * math.pi) - 1) < 1e-9


@pytest.mark.parametrize("name", ["gaussian", "eisenstein"])
def test_doubling_truncation_within_tail_bound(name):
    s = setup(name)
    c = s.cusp
    rng = random.Random(17)
    lams = [lam for b in c.L_script for lam, _ in expand_key(c, b, -1 + (c.L.norm(c.beta_dot[b]) % 1), s.cache)]
    for _ in range(5):
        lam = rng.choice(lams)
        p = random_siegel_point(c, rng)
        a = eval_local_product(c, lam, p, 10)
        b = eval_local_product(c, lam, p, 20)
        assert abs(a.value - b.value) <= a.tail_bound
        assert b.tail_bound < a.tail_bound


@pytest.mark.parametrize("name", ["gaussian", "eisenstein"])
def test_product_invariant_under_centre(name):
    s = setup(name)
    c = s.cusp
    rng = random.Random(23)
    lam = expand_key(c, c.L_script[-1], -1 + (c.L.norm(c.beta_dot[c.L_script[-1]]) % 1), s.cache)[0][0]
    for _ in range(5):
        p = random_siegel_point(c, rng)
        q = heisenberg_act(c, HeisenbergElem(s.params.N * rng.randint(1, 3), _d(c, *([0] * c.n))), p)
        a = eval_local_product(c, lam, p, 30)
        b = eval_local_product(c, lam, q, 30)
        assert abs(a.value - b.value) <= 1e-9 * abs(a.value) + a.tail_bound + b.tail_bound


# -- automorphy factor ----------------------------------------------------------------------------

def test_J_trivial_when_real_pairing_vanishes(gaussian):
    c = gaussian.cusp
    lam = _gaussian_lambda(gaussian)
    lam_d = c.d_part_of(lam)
    # pick t with Re<t, lambda> = 0
    t = LatticeVector([lam_d[0] * c.field(0, 1) if lam_d[0].b == 0 else lam_d[0]])
    assert c.inner_w(t, lam_d).trace() == 0
    p = random_siegel_point(c, random.Random(1))
    assert automorphy_factor(c, lam, HeisenbergElem(Fraction(0), t), p) == 1


@pytest.mark.parametrize("name", ["gaussian", "eisenstein", "gaussian-rank2"])
def test_J_cocycle_relation(name):
    s = setup(name)
    c = s.cusp
    rng = random.Random(31)
    lams = [lam for b in c.L_script for lam, _ in expand_key(c, b, -1 + (c.L.norm(c.beta_dot[b]) % 1), s.cache)]
    done = 0
    while done < 10:
        lam = rng.choice(lams)
        g, g2 = (random_lattice_element(c, s.params, rng, bound=1) for _ in range(2))
        p = random_siegel_point(c, rng)
        try:
            lhs = automorphy_factor(c, lam, heisenberg_compose(c, g, g2), p)
            rhs = automorphy_factor(c, lam, g, heisenberg_act(c, g2, p)) * automorphy_factor(c, lam, g2, p)
        except OverflowError:
            continue
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))
        done += 1


@pytest.mark.parametrize("name", ["gaussian", "eisenstein", "gaussian-rank2", "unimodular"])
def test_zeta_shift_changes_exponent_by_integer(name):
    s = setup(name)
    c = s.cusp
    rng = random.Random(43)
    alt = c.field.with_zeta_re(c.field.zeta_re + 2)
    lams = [lam for b in c.L_script for lam, _ in expand_key(c, b, -1 + (c.L.norm(c.beta_dot[b]) % 1), s.cache)]
    for _ in range(30):
        lam_d = c.d_part_of(rng.choice(lams))
        t = random_lattice_element(c, s.params, rng).t
        R = c.inner_w(t, lam_d).trace() / 2
        a = automorphy_exponent_exact(c.field, R)
        b = automorphy_exponent_exact(alt, R)
        diff = a.real() - b.real()
        assert diff.denominator == 1 and a.imag() == b.imag()


def test_J_matches_product_quotient(gaussian):
    c = gaussian.cusp
    rng = random.Random(5)
    lam = _gaussian_lambda(gaussian)
    g = HeisenbergElem(Fraction(0), gaussian.params.basis_vectors(c)[0])
    checked = 0
    while checked < 5:
        p = random_siegel_point(c, rng)
        J = automorphy_factor(c, lam, g, p)
        if not 1e-3 < abs(J) < 1e3:
            continue
        a = eval_local_product(c, lam, p, 40).value
        b = eval_local_product(c, lam, heisenberg_act(c, g, p), 40).value
        if abs(a) < 1e-6:
            continue
        assert abs(b / a - J) < 1e-8 * max(1, abs(J))
        assert abs(J - automorphy_factor(c, lam, g, p, zeta_re=c.field.zeta_re + 2)) <= 1e-12 * max(1, abs(J))
        checked += 1


# -- Chern cocycle -----------------------------------------------------------------------------------

def test_chern_cocycle_gaussian_example(gaussian):
    c = gaussian.cusp
    one, zeta = _d(c, 1), _d(c, (0, 1))
    g, g2 = HeisenbergElem(Fraction(0), one), HeisenbergElem(Fraction(0), zeta)
    assert chern_cocycle(c, one, g, g2) == -4
    # the second formula: Im(-|delta| F), with |delta| Im read off the zeta coefficient
    assert (-math.sqrt(c.field.abs_disc) * complex(eval_F(c, one, one, zeta))).imag == pytest.approx(-4)
    with pytest.raises(NotInHeisenbergLattice):
        chern_cocycle(c, one, g, g2, gaussian.params)


def test_chern_cocycle_central_is_zero(small):
    c = small.cusp
    rng = random.Random(2)
    lam = expand_key(c, 0, Fraction(-1), small.cache)[0][0]
    z = HeisenbergElem(small.params.N, _d(c, *([0] * c.n)))
    for _ in range(5):
        g = random_lattice_element(c, small.params, rng)
        assert chern_cocycle(c, lam, z, g, small.params) == 0
        assert chern_cocycle(c, lam, g, z, small.params) == 0


def test_chern_cocycle_ignores_ell_component(eisenstein):
    c = eisenstein.cusp
    rng = random.Random(3)
    lam = expand_key(c, 1, Fraction(-1, 3), eisenstein.cache)[0][0]
    shifted = lam + c.ell.scale(c.field.delta_inv() * c.field(1, 1))
    for _ in range(5):
        g, g2 = (random_lattice_element(c, eisenstein.params, rng) for _ in range(2))
        assert chern_cocycle(c, lam, g, g2) == chern_cocycle(c, shifted, g, g2)


def test_chern_cocycle_is_a_cocycle(small):
    c, params = small.cusp, small.params
    rng = random.Random(7)
    lams = [lam for lam, _ in expand_key(c, 0, Fraction(-1), small.cache)]
    for _ in range(50):
        lam = rng.choice(lams)
        g1, g2, g3 = (random_lattice_element(c, params, rng) for _ in range(3))
        dc = (chern_cocycle(c, lam, g2, g3, params) - chern_cocycle(c, lam, heisenberg_compose(c, g1, g2), g3, params)
              + chern_cocycle(c, lam, g1, heisenberg_compose(c, g2, g3), params) - chern_cocycle(c, lam, g1, g2, params))
        assert dc == 0


def test_chern_class_of_combo(gaussian):
    c = gaussian.cusp
    one = _d(c, 1)
    combo = make_combo(c, {(0, -1): 2})
    expected = sum(chern_cocycle_value(c, lam_d, one, one) for _, lam_d in expand_key(c, 0, Fraction(-1)))
    assert chern_class_of_combo(c, None, combo, one, one) == expected
    # Im<1, lambda> vanishes for lambda = +-1 and Re<1, lambda> for lambda = +-zeta
    assert expected == 0
    assert chern_class_of_combo(c, None, make_combo(c, {}), one, one) == 0
    zeta = _d(c, (0, 1))
    hand = sum(-(c.inner_w(one, l).trace()) * c.inner_w(zeta, l).abs_delta_imag()
               for l in (_d(c, 1), _d(c, -1), _d(c, (0, 1)), _d(c, (0, -1))))
    assert chern_class_of_combo(c, None, combo, one, zeta) == hand == -8
