"""Seeded randomized verification suites shared by the command line and the test-suite.

Each suite returns a SuiteReport: the largest deviation seen, the tolerance it was held to,
and enough detail (seed, sample count) to reproduce a failure.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .cache import EnumerationCache
from .cohomology import random_lattice_element, trivializing_cochain_check
from .cusp import (CuspData, HeisenbergElem, HeisenbergParams, SiegelPoint, heisenberg_act,
                   heisenberg_compose, in_domain)
from .hlattice import LatticeVector
from .local_products import (DivisorHit, automorphy_exponent_at, automorphy_factor, chern_cocycle,
                             eval_local_product, expand_key)
from .sampling import candidate_keys
from .weil_theta import build_theta, build_weil_rep, spanning_set, theta_modularity_check, weil_relations

SUITES = ("cocycle", "automorphy", "weil", "theta-modularity", "cochain")

DEFAULT_TOLERANCE = {
    "cocycle": 0.0,
    "automorphy": 1e-8,
    "weil": 1e-12,
    "theta-modularity": 1e-6,
    "cochain": 1e-9,
}


@dataclass
class SuiteReport:
    suite: str
    seed: int
    samples: int
    max_deviation: float
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def _random_t(cusp: CuspData, params: HeisenbergParams, rng: random.Random, bound: int) -> LatticeVector:
    t = LatticeVector([cusp.field.zero()] * cusp.n)
    for b in params.basis_vectors(cusp):
        t = t + b.scale(rng.randint(-bound, bound))
    return t


def _lambda_pool(cusp: CuspData, max_abs_m, cache, limit: int = 300, definite: bool = False) -> list[LatticeVector]:
    """Heegner vectors from the smallest shells, stopping once `limit` are collected.

    With definite set, only their components in the definite part are returned.
    """
    lams = []
    for beta, m in sorted(candidate_keys(cusp, max_abs_m), key=lambda k: (-k[1], k[0])):
        if len(lams) >= limit:
            break
        lams.extend(w if definite else lam for lam, w in expand_key(cusp, beta, m, cache))
    return lams


def cocycle_suite(cusp: CuspData, params: HeisenbergParams, seed: int, trials: int = 1000,
                  cache: EnumerationCache | None = None) -> SuiteReport:
    """Exact coboundary of the Chern cocycle of a random lambda on random lattice triples."""
    rng = random.Random(seed)
    # the cocycle only sees the definite component, so project once up front
    lams = _lambda_pool(cusp, 2, cache, definite=True)
    failures = 0
    for _ in range(trials):
        lam = rng.choice(lams)
        g1, g2, g3 = (random_lattice_element(cusp, params, rng) for _ in range(3))
        dc = (chern_cocycle(cusp, lam, g2, g3, params)
              - chern_cocycle(cusp, lam, heisenberg_compose(cusp, g1, g2), g3, params)
              + chern_cocycle(cusp, lam, g1, heisenberg_compose(cusp, g2, g3), params)
              - chern_cocycle(cusp, lam, g1, g2, params))
        failures += dc != 0
    return SuiteReport("cocycle", seed, trials, float(failures), 0.0, {"failures": failures, "lambdas": len(lams)})


def automorphy_suite(cusp: CuspData, params: HeisenbergParams, seed: int, trials: int = 20,
                     truncation: int = 40, tolerance: float = 1e-8,
                     cache: EnumerationCache | None = None) -> SuiteReport:
    """Compare Psi(g z) / Psi(z) with the closed-form factor, and J under the alternate zeta."""
    rng = random.Random(seed)
    lams = _lambda_pool(cusp, 2, cache)
    worst = 0.0
    zeta_worst = 0.0
    tail = 0.0
    done = 0
    attempts = 0
    alt = cusp.field.zeta_re + 2
    while done < trials:
        attempts += 1
        if attempts > 200 * trials:
            raise RuntimeError("could not find enough admissible automorphy samples")
        lam = rng.choice(lams)
        g = HeisenbergElem(Fraction(0), _random_t(cusp, params, rng, 1))
        p = SiegelPoint(complex(rng.uniform(-1, 1), rng.uniform(0.5, 1.5)),
                        tuple(complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)) for _ in range(cusp.n)))
        if not in_domain(cusp, p):
            continue
        # keep |J| moderate so the ratio is not dominated by float cancellation
        if abs(automorphy_exponent_at(cusp, lam, g, p).imag) > 1:
            continue
        try:
            before = eval_local_product(cusp, lam, p, truncation)
            after = eval_local_product(cusp, lam, heisenberg_act(cusp, g, p), truncation)
        except DivisorHit:
            continue
        if abs(before.value) < 1e-6:
            continue
        J = automorphy_factor(cusp, lam, g, p)
        worst = max(worst, abs(after.value / before.value - J))
        zeta_worst = max(zeta_worst, abs(J - automorphy_factor(cusp, lam, g, p, zeta_re=alt)))
        tail = max(tail, before.tail_bound / abs(before.value), after.tail_bound / abs(after.value))
        done += 1
    return SuiteReport("automorphy", seed, done, worst, tolerance,
                       {"zeta_shift_deviation": zeta_worst, "relative_tail_bound": tail,
                        "truncation": truncation})


def weil_suite(cusp: CuspData, seed: int, tolerance: float = 1e-12) -> SuiteReport:
    rep = build_weil_rep(cusp.D_part)
    rel = weil_relations(rep)
    worst = max(rel.unitarity, rel.s2_vs_st3, rel.s4_identity)
    return SuiteReport("weil", seed, 1, worst, tolerance,
                       {"unitarity": rel.unitarity, "s2_vs_st3": rel.s2_vs_st3, "s4_identity": rel.s4_identity,
                        "t_order": rel.t_order, "dimension": rep.dim, "weight": rep.weight})


def theta_modularity_suite(cusp: CuspData, seed: int, max_norm=25, tolerance: float = 1e-6,
                           t_tolerance: float = 1e-10, tau: complex = 1j,
                           cache: EnumerationCache | None = None) -> SuiteReport:
    rep = build_weil_rep(cusp.D_part)
    cache = cache if cache is not None else EnumerationCache()
    worst_s = 0.0
    worst_t = 0.0
    per_v = {}
    for P in spanning_set(cusp):
        theta = build_theta(cusp, P, max_norm, cache)
        dev = theta_modularity_check(rep, theta, tau)
        per_v[P.label] = dev
        worst_s = max(worst_s, dev["S"])
        worst_t = max(worst_t, dev["T"])
    # the T identity is held to its own, tighter tolerance
    worst = worst_s if worst_t <= t_tolerance else math.inf
    return SuiteReport("theta-modularity", seed, len(per_v), worst, tolerance,
                       {"S": worst_s, "T": worst_t, "t_tolerance": t_tolerance, "max_norm": str(max_norm),
                        "per_polynomial": per_v})


def _random_matrix(cusp: CuspData, rng: random.Random, hermitian: bool):
    f = cusp.field
    n = cusp.n
    mat = [[f.zero()] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            x = f(rng.randint(-3, 3), rng.randint(-3, 3))
            if i == j and hermitian:
                x = f(rng.randint(-3, 3))
            mat[i][j] = x
            mat[j][i] = x.conj() if hermitian else x
    return mat


def cochain_suite(cusp: CuspData, params: HeisenbergParams, seed: int, trials: int = 20,
                  tolerance: float = 1e-9, spread_tolerance: float = 1e-10) -> SuiteReport:
    rng = random.Random(seed)
    herm = trivializing_cochain_check(cusp, params, "hermitian", _random_matrix(cusp, rng, True), rng,
                                      trials, tolerance, spread_tolerance)
    sym = trivializing_cochain_check(cusp, params, "symmetric", _random_matrix(cusp, rng, False), rng,
                                     trials, tolerance, spread_tolerance)
    worst = max(herm.max_deviation, sym.max_deviation)
    spread = max(herm.z_spread, sym.z_spread)
    if spread > spread_tolerance:
        worst = math.inf
    return SuiteReport("cochain", seed, 2 * trials, worst, tolerance,
                       {"hermitian": herm.max_deviation, "symmetric": sym.max_deviation, "z_spread": spread,
                        "spread_tolerance": spread_tolerance})


def run_suite(name: str, cusp: CuspData, params: HeisenbergParams, seed: int, tolerance: float | None = None,
              truncation: int = 40, cache: EnumerationCache | None = None, max_norm=25) -> SuiteReport:
    if name not in DEFAULT_TOLERANCE:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    tol = DEFAULT_TOLERANCE[name] if tolerance is None else tolerance
    if name == "cocycle":
        return cocycle_suite(cusp, params, seed, cache=cache)
    if name == "automorphy":
        return automorphy_suite(cusp, params, seed, truncation=truncation, tolerance=tol, cache=cache)
    if name == "weil":
        return weil_suite(cusp, seed, tol)
    if name == "theta-modularity":
        return theta_modularity_suite(cusp, seed, max_norm, tolerance=tol, cache=cache)
    return cochain_suite(cusp, params, seed, tolerance=tol)
