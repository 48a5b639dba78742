import cmath
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from heegner_torsion.qfield import (FieldSpec, RealQuadVal, embed_complex, field_new, format_field_elem,
                                    format_real_quad, is_fundamental_discriminant, re_im)

DISCS = [-3, -4, -7, -8, -11, -15, -20, -23, -24]

rat = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def elems(field):
    return st.builds(lambda a, b: field(a, b), rat, rat)


def test_gaussian_zeta_is_i():
    f = field_new(-4)
    assert f.zeta_re == 0
    assert embed_complex(f.zeta()) == 1j


def test_eisenstein_zeta():
    f = field_new(-3)
    assert f.zeta_re == Fraction(1, 2)
    re, im = re_im(f.zeta())
    assert re == Fraction(1, 2)
    assert (im.r, im.s) == (0, Fraction(1, 2))


@pytest.mark.parametrize("disc", [-5, -1, 0, 5, -12, -9])
def test_rejects_non_fundamental(disc):
    with pytest.raises(ValueError):
        field_new(disc)


def test_fundamental_list():
    assert [d for d in range(-30, 0) if is_fundamental_discriminant(d)] == \
        [-24, -23, -20, -19, -15, -11, -8, -7, -4, -3]


def test_zeta_re_parity_enforced():
    with pytest.raises(ValueError):
        FieldSpec(-4, zeta_re=Fraction(1, 2))
    assert FieldSpec(-4, zeta_re=2).zeta_re == 2


def test_re_im_examples():
    f = field_new(-4)
    re, im = re_im(f(1, 2))
    assert re == 1 and float(im) == 2.0
    re, im = re_im(f(3))
    assert re == 3 and im.is_zero()


def test_embed_examples():
    f = field_new(-4)
    assert embed_complex(f(3)) == 3 + 0j
    e = field_new(-3)
    z = embed_complex(e(-1, 2))
    assert abs(z - math.sqrt(3) * 1j) < 1e-15
    # high-precision oracle
    with mpmath.workdps(50):
        exact = -1 + 2 * (mpmath.mpf(1) / 2 + mpmath.sqrt(3) / 2 * 1j)
        assert abs(complex(exact) - z) < 1e-15


@pytest.mark.parametrize("disc", DISCS)
def test_delta_squares_to_disc(disc):
    f = field_new(disc)
    assert f.delta() * f.delta() == f(disc)
    assert f.delta() * f.delta_inv() == f.one()
    assert abs(embed_complex(f.delta()) - cmath.sqrt(disc)) < 1e-12


@pytest.mark.parametrize("disc", DISCS)
def test_ring_of_integers_closed_under_zeta(disc):
    f = field_new(disc)
    z2 = f.zeta() * f.zeta()
    assert z2.in_ring_of_integers()
    assert f.zeta().norm().denominator == 1 and f.zeta().trace().denominator == 1


@pytest.mark.parametrize("disc", [-3, -4, -7, -8])
def test_field_axioms(disc):
    f = field_new(disc)

    @given(elems(f), elems(f), elems(f))
    def check(x, y, z):
        assert (x + y) * z == x * z + y * z
        assert (x * y) * z == x * (y * z)
        assert (x * y).conj() == x.conj() * y.conj()
        assert (x * y).norm() == x.norm() * y.norm()
        assert (x + y).trace() == x.trace() + y.trace()
        assert x.norm() == (x * x.conj()).a and (x * x.conj()).b == 0
        assert abs(embed_complex(x * y) - embed_complex(x) * embed_complex(y)) < 1e-9 * (1 + abs(embed_complex(x * y)))
        if not x.is_zero():
            assert x * x.inverse() == f.one()
            assert (y / x) * x == y

    check()


@pytest.mark.parametrize("disc", [-3, -4, -7])
def test_inverse_different_membership(disc):
    f = field_new(disc)
    assert f.delta_inv().in_inverse_different()
    assert f.one().in_inverse_different()
    assert not (f.delta_inv() / 2).in_inverse_different()


@given(rat, rat)
def test_real_quad_normalizes_square_radicand(r, s):
    x = RealQuadVal(r, s, 4)
    assert x.s == 0 and x.r == r + 2 * s
    assert (x - RealQuadVal(r + 2 * s, 0, 4)).is_zero()


@given(rat, rat, rat, rat)
def test_real_quad_arithmetic_matches_floats(a, b, c, d):
    x = RealQuadVal(a, b, 7)
    y = RealQuadVal(c, d, 7)
    assert abs(float(x * y) - float(x) * float(y)) < 1e-9 * (1 + abs(float(x) * float(y)))
    assert float(x + y) == pytest.approx(float(x) + float(y), abs=1e-9)


def test_canonical_strings():
    f = field_new(-4)
    assert format_field_elem(f(Fraction(1, 2), -1)) == "1/2-1*zeta"
    assert format_field_elem(f(3)) == "3"
    assert format_real_quad(RealQuadVal(Fraction(1, 3), Fraction(-2, 5), 7)) == "1/3-2/5*w"
    assert format_real_quad(RealQuadVal(1, 1, 4)) == "3"
