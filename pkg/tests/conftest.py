from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import pytest

from heegner_torsion.cache import EnumerationCache
from heegner_torsion.cusp import CuspData, HeisenbergParams, build_cusp, params_with_override
from heegner_torsion.fixtures import BUILTIN, Fixture, parse_fixture

# two more fields, hyperbolic plane scaled so <ell, ell'> = 1/sqrt(d), plus <-1>
EXTRA = {
    "disc7": """\
disc: -7
rank: 3
gram: 0, 1/7-2/7*zeta, 0
gram: -1/7+2/7*zeta, 0, 0
gram: 0, 0, -1
ell: 1, 0, 0
ell_prime: 0, 1, 0
""",
    "disc8": """\
disc: -8
rank: 3
gram: 0, -1/4*zeta, 0
gram: 1/4*zeta, 0, 0
gram: 0, 0, -1
ell: 1, 0, 0
ell_prime: 0, 1, 0
""",
}

ALL_TEXT = {**BUILTIN, **EXTRA}


@dataclass
class Setup:
    name: str
    fx: Fixture
    cusp: CuspData
    params: HeisenbergParams
    cache: EnumerationCache


@lru_cache(maxsize=None)
def setup(name: str) -> Setup:
    fx = parse_fixture(ALL_TEXT[name], name)
    cusp = build_cusp(fx.lattice, fx.ell, fx.ell_prime)
    params = params_with_override(cusp, fx.N, fx.D_sub)
    return Setup(name, fx, cusp, params, EnumerationCache())


@pytest.fixture(scope="session")
def gaussian() -> Setup:
    return setup("gaussian")


@pytest.fixture(scope="session")
def eisenstein() -> Setup:
    return setup("eisenstein")


@pytest.fixture(scope="session")
def rank2() -> Setup:
    return setup("gaussian-rank2")


@pytest.fixture(scope="session")
def unimodular() -> Setup:
    return setup("unimodular")


@pytest.fixture(scope="session")
def disc7() -> Setup:
    return setup("disc7")


SMALL = ["gaussian", "eisenstein", "gaussian-rank2"]


@pytest.fixture(scope="session", params=SMALL)
def small(request) -> Setup:
    return setup(request.param)
