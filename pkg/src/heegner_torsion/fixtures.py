"""Text formats for lattice fixtures and divisor files, plus the built-in fixtures.

Fixture file (one directive per line, '#' starts a comment)::

    disc: -4
    rank: 3
    gram: 0, -1/2*zeta, 0
    gram: 1/2*zeta, 0, 0
    gram: 0, 0, -1
    ell: 1, 0, 0
    ell_prime: 0, 1, 0
    N: 1                  # optional override
    D_sub: 2, 0, 0, 0     # optional, one row per line (Z-coordinates in the definite part)

Divisor file: lines ``beta: <coset index or Z-coordinates>; m: <rational>; c: <integer>``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .hlattice import HermitianLattice, LatticeVector
from .qfield import FieldElem, FieldSpec


class FixtureError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<fixture>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


_RAT = r"[+-]?\d+(?:/\d+)?"
_TERM = re.compile(rf"^(?:(?P<coef>{_RAT})\*)?zeta$|^(?P<sign>[+-]?)zeta$|^(?P<rat>{_RAT})$")


def parse_field_elem(text: str, field: FieldSpec) -> FieldElem:
    """Parse 'a', 'b*zeta', 'a+b*zeta', 'a-zeta' and the like (a, b rationals 'p/q')."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty field element")
    # split into signed terms
    terms = re.findall(r"[+-]?[^+-]+", s)
    if "".join(terms) != s:
        raise ValueError(f"cannot parse field element {text!r}")
    a = Fraction(0)
    b = Fraction(0)
    for t in terms:
        m = _TERM.match(t)
        if not m:
            raise ValueError(f"cannot parse term {t!r} in {text!r}")
        if m.group("rat") is not None:
            a += Fraction(m.group("rat"))
        elif m.group("coef") is not None:
            b += Fraction(m.group("coef"))
        else:
            b += -1 if m.group("sign") == "-" else 1
    return field(a, b)


@dataclass
class Fixture:
    field: FieldSpec
    lattice: HermitianLattice
    ell: LatticeVector
    ell_prime: LatticeVector
    N: Fraction | None = None
    D_sub: list | None = None
    name: str = "<fixture>"


def parse_fixture(text: str, source: str = "<fixture>") -> Fixture:
    disc = rank = None
    gram_rows: list[tuple[int, str]] = []
    vecs: dict[str, tuple[int, str]] = {}
    N = None
    d_sub: list[list[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise FixtureError("expected 'key: value'", lineno, source)
        key, val = (p.strip() for p in line.split(":", 1))
        try:
            if key == "disc":
                disc = int(val)
            elif key == "rank":
                rank = int(val)
            elif key == "gram":
                gram_rows.append((lineno, val))
            elif key in ("ell", "ell_prime"):
                vecs[key] = (lineno, val)
            elif key == "N":
                N = Fraction(val)
            elif key == "D_sub":
                d_sub.append([int(x) for x in val.split(",")])
            else:
                raise FixtureError(f"unknown key {key!r}", lineno, source)
        except FixtureError:
            raise
        except ValueError as exc:
            raise FixtureError(str(exc), lineno, source) from None
    if disc is None:
        raise FixtureError("missing 'disc'", None, source)
    if rank is None:
        raise FixtureError("missing 'rank'", None, source)
    try:
        field = FieldSpec(disc)
    except ValueError as exc:
        raise FixtureError(str(exc), None, source) from None
    if len(gram_rows) != rank:
        raise FixtureError(f"expected {rank} gram rows, found {len(gram_rows)}", None, source)
    gram = []
    for lineno, val in gram_rows:
        parts = [p for p in val.split(",")]
        if len(parts) != rank:
            raise FixtureError(f"gram row has {len(parts)} entries, expected {rank}", lineno, source)
        try:
            gram.append([parse_field_elem(p, field) for p in parts])
        except ValueError as exc:
            raise FixtureError(str(exc), lineno, source) from None
    for i in range(rank):
        for j in range(rank):
            if gram[i][j] != gram[j][i].conj():
                lineno = gram_rows[i][0]
                raise FixtureError(f"Gram matrix is not hermitian at entry ({i + 1},{j + 1})", lineno, source)
    try:
        lattice = HermitianLattice(field, gram)
    except ValueError as exc:
        raise FixtureError(str(exc), gram_rows[0][0] if gram_rows else None, source) from None
    out = {}
    for key in ("ell", "ell_prime"):
        if key not in vecs:
            raise FixtureError(f"missing {key!r}", None, source)
        lineno, val = vecs[key]
        parts = val.split(",")
        if len(parts) != rank:
            raise FixtureError(f"{key} has {len(parts)} entries, expected {rank}", lineno, source)
        try:
            out[key] = LatticeVector(parse_field_elem(p, field) for p in parts)
        except ValueError as exc:
            raise FixtureError(str(exc), lineno, source) from None
    return Fixture(field, lattice, out["ell"], out["ell_prime"], N, d_sub or None, source)


def load_fixture(path: str) -> Fixture:
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        if name not in BUILTIN:
            raise FixtureError(f"unknown built-in fixture {name!r}; choose from {sorted(BUILTIN)}", None, path)
        return parse_fixture(BUILTIN[name], path)
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise FixtureError(f"cannot read fixture: {exc.strerror}", None, path) from None
    return parse_fixture(text, path)


def format_fixture(fx: Fixture) -> str:
    from .qfield import format_field_elem
    lines = [f"disc: {fx.field.disc}", f"rank: {fx.lattice.rank}"]
    for row in fx.lattice.gram:
        lines.append("gram: " + ", ".join(format_field_elem(x) for x in row))
    lines.append("ell: " + ", ".join(format_field_elem(x) for x in fx.ell))
    lines.append("ell_prime: " + ", ".join(format_field_elem(x) for x in fx.ell_prime))
    if fx.N is not None:
        lines.append(f"N: {fx.N}")
    for row in fx.D_sub or []:
        lines.append("D_sub: " + ", ".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


# -- divisor files ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DivisorRecord:
    beta: object  # int coset index or tuple of Fractions (Z-coordinates of a representative)
    m: Fraction
    c: int
    line: int | None = None


def parse_divisor_file(text: str, source: str = "<divisor>") -> list[DivisorRecord]:
    recs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = {}
        for part in line.split(";"):
            part = part.strip()
            if not part:
                continue
            if ":" not in part:
                raise FixtureError(f"expected 'key: value' in {part!r}", lineno, source)
            k, v = (x.strip() for x in part.split(":", 1))
            fields[k] = v
        missing = {"beta", "m", "c"} - set(fields)
        if missing:
            raise FixtureError(f"missing field(s) {sorted(missing)}", lineno, source)
        try:
            bv = fields["beta"]
            beta = tuple(Fraction(x) for x in bv.split(",")) if "," in bv else int(bv)
            recs.append(DivisorRecord(beta, Fraction(fields["m"]), int(fields["c"]), lineno))
        except ValueError as exc:
            raise FixtureError(str(exc), lineno, source) from None
    return recs


def load_divisor_file(path: str) -> list[DivisorRecord]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FixtureError(f"cannot read divisor file: {exc.strerror}", None, path) from None
    return parse_divisor_file(text, path)


# -- built-in fixtures ------------------------------------------------------------------------

GAUSSIAN = """\
# hyperbolic plane (Gram 1/delta off the diagonal) plus the rank-one lattice <-1> over Z[i]
disc: -4
rank: 3
gram: 0, -1/2*zeta, 0
gram: 1/2*zeta, 0, 0
gram: 0, 0, -1
ell: 1, 0, 0
ell_prime: 0, 1, 0
"""

EISENSTEIN = """\
disc: -3
rank: 3
gram: 0, 1/3-2/3*zeta, 0
gram: -1/3+2/3*zeta, 0, 0
gram: 0, 0, -1
ell: 1, 0, 0
ell_prime: 0, 1, 0
"""

GAUSSIAN_RANK2 = """\
# definite part [[-1, (1+i)/2], [(1-i)/2, -2]]
disc: -4
rank: 4
gram: 0, -1/2*zeta, 0, 0
gram: 1/2*zeta, 0, 0, 0
gram: 0, 0, -1, 1/2+1/2*zeta
gram: 0, 0, 1/2-1/2*zeta, -2
ell: 1, 0, 0, 0
ell_prime: 0, 1, 0, 0
"""

# E8 with multiplication by i acting on coordinate pairs; even unimodular of rank 4 over Z[i]
UNIMODULAR = """\
disc: -4
rank: 6
gram: 0, -1/2*zeta, 0, 0, 0, 0
gram: 1/2*zeta, 0, 0, 0, 0, 0
gram: 0, 0, -1, 0, 0, -1/2
gram: 0, 0, 0, -1, 1/2, 0
gram: 0, 0, 0, 1/2, -1, 1/2-1/2*zeta
gram: 0, 0, -1/2, 0, 1/2+1/2*zeta, -1
ell: 1, 0, 0, 0, 0, 0
ell_prime: 0, 1, 0, 0, 0, 0
"""

BUILTIN = {
    "gaussian": GAUSSIAN,
    "eisenstein": EISENSTEIN,
    "gaussian-rank2": GAUSSIAN_RANK2,
    "unimodular": UNIMODULAR,
}


def builtin(name: str) -> Fixture:
    return parse_fixture(BUILTIN[name], f"builtin:{name}")
