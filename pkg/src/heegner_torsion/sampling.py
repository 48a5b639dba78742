"""Seeded generators of valid Heegner combinations, used by the verification suites."""

from __future__ import annotations

import random
from fractions import Fraction

from . import linalg
from .cohomology import TorsionChecker
from .cusp import CuspData
from .hlattice import coset_norms
from .local_products import HeegnerCombo, make_combo
from .weil_theta import ObstructionChecker


def candidate_keys(cusp: CuspData, max_abs_m, nonempty_only: bool = False, checker=None) -> list[tuple[int, Fraction]]:
    """One key (beta, m) per orbit {beta, -beta}, for liftable beta and admissible m with |m| <= max_abs_m."""
    neg = cusp.disc_group.neg
    keys = []
    for beta in sorted(cusp.beta_dot):
        if neg[beta] < beta:
            continue
        for m in coset_norms(cusp.D_part, cusp.pi[beta], Fraction(max_abs_m)):
            if nonempty_only and checker is not None and checker.key_sums(beta, m).count == 0:
                continue
            keys.append((beta, m))
    return keys


def random_combo(cusp: CuspData, rng: random.Random, max_abs_m=6, max_terms: int = 3, keys=None) -> HeegnerCombo:
    keys = keys if keys is not None else candidate_keys(cusp, max_abs_m)
    chosen = rng.sample(keys, min(len(keys), rng.randint(1, max_terms)))
    coeffs = {}
    for k in chosen:
        c = rng.choice([-3, -2, -1, 1, 2, 3])
        coeffs[k] = c
    return make_combo(cusp, coeffs)


def _orbit_combo(cusp: CuspData, keys, weights) -> HeegnerCombo:
    return make_combo(cusp, {k: w for k, w in zip(keys, weights) if w})


def _functional_columns_theta(cusp: CuspData, keys, obs: ObstructionChecker) -> list[list[Fraction]]:
    cols = []
    for k in keys:
        vals = obs.pairing(make_combo(cusp, {k: 1}))
        col = []
        for v in vals:
            col.extend([v.r, v.s])
        cols.append(col)
    return cols


def _functional_columns_bilinear(cusp: CuspData, keys, tc: TorsionChecker) -> list[list[Fraction]]:
    cols = []
    for k in keys:
        res = tc.residual_matrix(make_combo(cusp, {k: 1}))
        col = []
        for row in res:
            for x in row:
                col.extend([x.a, x.b])
        cols.append(col)
    return cols


def torsion_lattice(cusp: CuspData, keys, route: str, obs=None, tc=None) -> list[list[int]]:
    """Integer basis of coefficient vectors (one entry per key) whose combination is torsion."""
    if route == "theta":
        cols = _functional_columns_theta(cusp, keys, obs)
    else:
        cols = _functional_columns_bilinear(cusp, keys, tc)
    if not cols:
        return []
    mat = linalg.transpose(cols)
    return linalg.integer_kernel(mat)


def random_torsion_combo(cusp: CuspData, rng: random.Random, kernel: list[list[int]], keys) -> HeegnerCombo | None:
    if not kernel:
        return None
    for _ in range(20):
        weights = [0] * len(keys)
        for vec in rng.sample(kernel, min(len(kernel), rng.randint(1, 3))):
            c = rng.choice([-2, -1, 1, 2])
            weights = [w + c * x for w, x in zip(weights, vec)]
        if any(weights):
            return _orbit_combo(cusp, keys, weights)
    return None


def mixed_combos(cusp: CuspData, seed: int, count: int, max_abs_m=6, tc: TorsionChecker | None = None,
                 obs: ObstructionChecker | None = None) -> list[HeegnerCombo]:
    """count combos: roughly half drawn from torsion lattices (alternating the route that builds them)."""
    rng = random.Random(seed)
    keys = candidate_keys(cusp, max_abs_m)
    kernels = {}
    if tc is not None:
        kernels["bilinear"] = torsion_lattice(cusp, keys, "bilinear", tc=tc)
    if obs is not None:
        kernels["theta"] = torsion_lattice(cusp, keys, "theta", obs=obs)
    out = []
    routes = sorted(kernels)
    for i in range(count):
        combo = None
        if i % 2 == 1 and routes:
            route = routes[(i // 2) % len(routes)]
            combo = random_torsion_combo(cusp, rng, kernels[route], keys)
        if combo is None:
            combo = random_combo(cusp, rng, max_abs_m, keys=keys)
        out.append(combo)
    return out
