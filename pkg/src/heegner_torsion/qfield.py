"""Exact arithmetic in an imaginary quadratic field and in its real companion Q(sqrt|d|)."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def _squarefree(n: int) -> bool:
    n = abs(n)
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


def is_fundamental_discriminant(disc: int) -> bool:
    if disc % 4 == 1:
        return _squarefree(disc)
    if disc % 4 == 0:
        q = disc // 4
        return q % 4 in (2, 3) and _squarefree(q)
    return False


class FieldSpec:
    """The field Q(sqrt(disc)) together with the chosen generator zeta of its ring of integers.

    zeta = zeta_re + i * sqrt(|disc|)/2, so Im(zeta) is half the absolute value of sqrt(disc).
    """

    __slots__ = ("disc", "zeta_re", "zeta_im_sq")

    def __init__(self, disc: int, zeta_re=None, _check: bool = True):
        disc = int(disc)
        if _check:
            if disc >= 0:
                raise ValueError(f"discriminant must be negative, got {disc}")
            if not is_fundamental_discriminant(disc):
                raise ValueError(f"{disc} is not a fundamental discriminant")
        if zeta_re is None:
            zeta_re = Fraction(0) if disc % 4 == 0 else Fraction(1, 2)
        zeta_re = _frac(zeta_re)
        two_re = 2 * zeta_re
        if two_re.denominator != 1 or (two_re.numerator - disc) % 4 != 0:
            raise ValueError(f"2*Re(zeta) must be an integer congruent to {disc} mod 4")
        self.disc = disc
        self.zeta_re = zeta_re
        self.zeta_im_sq = Fraction(-disc, 4)

    @property
    def abs_disc(self) -> int:
        return -self.disc

    @property
    def zeta_norm(self) -> Fraction:
        return self.zeta_re * self.zeta_re + self.zeta_im_sq

    @property
    def zeta_trace(self) -> Fraction:
        return 2 * self.zeta_re

    @property
    def sqrt_abs_disc(self) -> float:
        return math.sqrt(-self.disc)

    def with_zeta_re(self, zeta_re) -> "FieldSpec":
        return FieldSpec(self.disc, zeta_re)

    def __call__(self, a=0, b=0) -> "FieldElem":
        return FieldElem(a, b, self)

    def zero(self) -> "FieldElem":
        return FieldElem(0, 0, self)

    def one(self) -> "FieldElem":
        return FieldElem(1, 0, self)

    def zeta(self) -> "FieldElem":
        return FieldElem(0, 1, self)

    def delta(self) -> "FieldElem":
        """sqrt(disc) = 2*zeta - 2*Re(zeta); purely imaginary with square disc."""
        return FieldElem(-2 * self.zeta_re, 2, self)

    def delta_inv(self) -> "FieldElem":
        return self.delta().inverse()

    def from_complex_parts(self, re, im_coeff) -> "FieldElem":
        """The element with real part re and imaginary part im_coeff*sqrt(|disc|)."""
        b = 2 * _frac(im_coeff)
        return FieldElem(_frac(re) - b * self.zeta_re, b, self)

    def key(self) -> tuple:
        return (self.disc, self.zeta_re)

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldSpec) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"FieldSpec(disc={self.disc}, zeta_re={self.zeta_re})"


def field_new(disc: int) -> FieldSpec:
    return FieldSpec(disc)


class FieldElem:
    """The element a + b*zeta of a FieldSpec, with rational a and b."""

    __slots__ = ("a", "b", "field")

    def __init__(self, a, b, field: FieldSpec):
        self.a = _frac(a)
        self.b = _frac(b)
        self.field = field

    def _coerce(self, other) -> "FieldElem | None":
        if isinstance(other, FieldElem):
            if other.field is not self.field and other.field != self.field:
                raise ValueError("field mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElem(other, 0, self.field)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElem(self.a + o.a, self.b + o.b, self.field)

    __radd__ = __add__

    def __neg__(self):
        return FieldElem(-self.a, -self.b, self.field)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElem(self.a - o.a, self.b - o.b, self.field)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        f = self.field
        # zeta^2 = tr(zeta)*zeta - N(zeta)
        bb = self.b * o.b
        a = self.a * o.a - bb * f.zeta_norm
        b = self.a * o.b + self.b * o.a + bb * f.zeta_trace
        return FieldElem(a, b, f)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = FieldElem(1, 0, self.field)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "FieldElem":
        # conj(zeta) = tr(zeta) - zeta
        return FieldElem(self.a + self.b * self.field.zeta_trace, -self.b, self.field)

    def trace(self) -> Fraction:
        return 2 * self.a + self.b * self.field.zeta_trace

    def norm(self) -> Fraction:
        f = self.field
        return self.a * self.a + self.a * self.b * f.zeta_trace + self.b * self.b * f.zeta_norm

    def inverse(self) -> "FieldElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in quadratic field")
        c = self.conj()
        return FieldElem(c.a / n, c.b / n, self.field)

    def real(self) -> Fraction:
        return self.a + self.b * self.field.zeta_re

    def imag(self) -> "RealQuadVal":
        return RealQuadVal(0, self.b / 2, self.field.abs_disc)

    def re_im(self) -> tuple[Fraction, "RealQuadVal"]:
        return self.real(), self.imag()

    def abs_delta_imag(self) -> Fraction:
        """|delta| * Im(x), which is always rational."""
        return self.b * self.field.abs_disc / 2

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def in_ring_of_integers(self) -> bool:
        return self.a.denominator == 1 and self.b.denominator == 1

    def in_inverse_different(self) -> bool:
        return (self * self.field.delta()).in_ring_of_integers()

    def embed_complex(self) -> complex:
        f = self.field
        return complex(float(self.a) + float(self.b) * float(f.zeta_re),
                       float(self.b) * f.sqrt_abs_disc / 2)

    __complex__ = embed_complex

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElem):
            return self.a == other.a and self.b == other.b and self.field == other.field
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.field.disc))

    def __bool__(self) -> bool:
        return not self.is_zero()

    def sort_key(self) -> tuple:
        return (self.a, self.b)

    def __repr__(self) -> str:
        return f"FieldElem({self.a}, {self.b}, d={self.field.disc})"

    def __str__(self) -> str:
        return format_field_elem(self)


def embed_complex(x: FieldElem) -> complex:
    return x.embed_complex()


def re_im(x: FieldElem) -> tuple[Fraction, "RealQuadVal"]:
    return x.re_im()


class RealQuadVal:
    """r + s*sqrt(w) with rationals r, s and a fixed positive integer w (= |disc|)."""

    __slots__ = ("r", "s", "w")

    def __init__(self, r, s, w: int):
        self.r = _frac(r)
        self.s = _frac(s)
        self.w = int(w)
        root = math.isqrt(self.w)
        if root * root == self.w and self.s:
            # rational radical (d = -4): keep the representation unique
            self.r += self.s * root
            self.s = Fraction(0)

    def _coerce(self, other):
        if isinstance(other, RealQuadVal):
            if other.w != self.w:
                raise ValueError("radicand mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return RealQuadVal(other, 0, self.w)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RealQuadVal(self.r + o.r, self.s + o.s, self.w)

    __radd__ = __add__

    def __neg__(self):
        return RealQuadVal(-self.r, -self.s, self.w)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RealQuadVal(self.r - o.r, self.s - o.s, self.w)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RealQuadVal(self.r * o.r + self.s * o.s * self.w,
                           self.r * o.s + self.s * o.r, self.w)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        den = o.r * o.r - o.s * o.s * self.w
        if den == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt w)")
        num = self * RealQuadVal(o.r, -o.s, self.w)
        return RealQuadVal(num.r / den, num.s / den, self.w)

    def is_zero(self) -> bool:
        return self.r == 0 and self.s == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __float__(self) -> float:
        return float(self.r) + float(self.s) * math.sqrt(self.w)

    def __eq__(self, other) -> bool:
        o = self._coerce(other) if isinstance(other, (RealQuadVal, int, Fraction)) else None
        if o is None:
            return NotImplemented
        return self.r == o.r and self.s == o.s

    def __hash__(self) -> int:
        return hash((self.r, self.s, self.w))

    def __repr__(self) -> str:
        return f"RealQuadVal({self.r}, {self.s}, w={self.w})"

    def __str__(self) -> str:
        return format_real_quad(self)


def format_field_elem(x: FieldElem) -> str:
    if x.b == 0:
        return str(x.a)
    return f"{x.a}+{x.b}*zeta" if x.b >= 0 else f"{x.a}{x.b}*zeta"


def format_real_quad(x: RealQuadVal) -> str:
    """Canonical 'p/q+r/s*w' with w = sqrt(radicand)."""
    if x.s == 0:
        return str(x.r)
    return f"{x.r}+{x.s}*w" if x.s >= 0 else f"{x.r}{x.s}*w"
