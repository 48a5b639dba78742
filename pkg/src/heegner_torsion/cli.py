"""Command line: lattice summaries, enumeration, torsion verdicts, theta tables and the verification suites.

Every command prints a JSON report on standard output.  Exit codes: 0 ok (or verdict true),
1 verdict false or suite failure, 2 input error, 3 internal consistency alarm.
"""

from __future__ import annotations

import json
import sys
import time
from fractions import Fraction

import click

from .cache import EnumerationCache
from .cohomology import TorsionChecker, combo_Q_factor, necessary_trace_condition
from .cusp import CuspData, CuspError, build_cusp, params_with_override
from .fixtures import Fixture, FixtureError, load_divisor_file, load_fixture, parse_field_elem
from .hlattice import LatticeVector, count_norm_coset, enumerate_norm_coset
from .local_products import ComboError, combo_from_records
from .qfield import format_field_elem, format_real_quad
from .suites import SUITES, run_suite
from .weil_theta import CVec, ObstructionChecker, PolynomialP, build_theta, real_cvec, spanning_set

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_INPUT = 2
EXIT_ALARM = 3


class InputError(Exception):
    pass


class ConsistencyAlarm(Exception):
    pass


def _vec(v) -> list[str]:
    return [format_field_elem(x) for x in v]


def _emit(ctx: click.Context, verdict, payload: dict, witnesses=None, started: float | None = None,
          cache: EnumerationCache | None = None) -> None:
    report = {
        "command": ["heegner-torsion"] + sys.argv[1:] if ctx.obj is None else ctx.obj["argv"],
        "verdict": verdict,
        "payload": payload,
        "witnesses": witnesses or [],
        "timing_seconds": round(time.perf_counter() - started, 6) if started is not None else None,
        "cache": cache.stats() if cache is not None else None,
    }
    click.echo(json.dumps(report, indent=2, sort_keys=True))


def _load(path: str) -> tuple[Fixture, CuspData]:
    fx = load_fixture(path)
    try:
        cusp = build_cusp(fx.lattice, fx.ell, fx.ell_prime)
    except CuspError as exc:
        raise InputError(f"{fx.name}: {exc}") from None
    return fx, cusp


def _params(fx: Fixture, cusp: CuspData):
    try:
        return params_with_override(cusp, fx.N, fx.D_sub)
    except (ValueError, ArithmeticError) as exc:
        raise InputError(f"{fx.name}: invalid Heisenberg override: {exc}") from None


def _cache(cache_dir) -> EnumerationCache:
    return EnumerationCache(cache_dir)


def _guard(fn):
    """Map the package's exceptions onto the documented exit codes."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (FixtureError, InputError, ComboError, CuspError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        except ConsistencyAlarm as exc:
            click.echo(f"ALARM: {exc}", err=True)
            sys.exit(EXIT_ALARM)
        except ArithmeticError as exc:
            click.echo(f"ALARM: internal consistency check failed: {exc}", err=True)
            sys.exit(EXIT_ALARM)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


cache_option = click.option("--cache-dir", type=click.Path(file_okay=False), default=None,
                            help="Directory for persistent enumeration records.")


@click.group()
@click.pass_context
def main(ctx: click.Context) -> None:
    """Torsion of local Heegner divisor combinations on unitary Shimura varieties."""
    ctx.obj = {"argv": ["heegner-torsion"] + sys.argv[1:]}


@main.command("lattice-info")
@click.argument("fixture")
@cache_option
@click.pass_context
@_guard
def lattice_info(ctx, fixture, cache_dir):
    """Rank, signature, discriminant group and Heisenberg data of a fixture."""
    started = time.perf_counter()
    fx, cusp = _load(fixture)
    params = _params(fx, cusp)
    L = cusp.L
    dg = cusp.disc_group
    ddg = cusp.D_disc_group
    payload = {
        "field_discriminant": L.field.disc,
        "rank": L.rank,
        "signature": list(L.signature()),
        "discriminant_group_order": dg.order,
        "discriminant_group_invariants": [f for f in dg.invariant_factors if f != 1],
        "definite_part_rank": cusp.n,
        "definite_discriminant_order": ddg.order,
        "M1": str(cusp.M1),
        "M2": str(cusp.M2),
        "cusp_subgroup_order": len(cusp.L_script),
        "liftable_classes": len(cusp.pi),
        "N": str(params.N),
        "D_sub_index": params.index,
        "D_sub_basis": [[int(x) for x in row] for row in params.D_sub_basis],
    }
    _emit(ctx, "ok", payload, started=started)


def _parse_gamma(cusp_or_lat, text: str):
    lat = cusp_or_lat
    dg = lat.discriminant_group
    text = text.strip()
    try:
        if "," in text:
            return dg.index_of_z([Fraction(x) for x in text.split(",")])
        idx = int(text)
    except ValueError as exc:
        raise InputError(f"invalid coset {text!r}: {exc}") from None
    if not 0 <= idx < dg.order:
        raise InputError(f"coset index {idx} out of range 0..{dg.order - 1}")
    return idx


@main.command("enumerate", context_settings={"ignore_unknown_options": True})
@click.argument("fixture")
@click.argument("gamma")
@click.argument("m")
@click.option("--count-only", is_flag=True, help="Report only the number of vectors.")
@cache_option
@click.pass_context
@_guard
def enumerate_cmd(ctx, fixture, gamma, m, count_only, cache_dir):
    """Vectors of norm M in the coset GAMMA of the definite part's dual.

    GAMMA is a coset index or comma-separated Z-coordinates of a representative.
    """
    started = time.perf_counter()
    fx, cusp = _load(fixture)
    D = cusp.D_part
    try:
        m = Fraction(m)
    except ValueError:
        raise InputError(f"invalid norm {m!r}") from None
    if m >= 0:
        raise click.UsageError(f"the norm must be negative, got {m}")
    g = _parse_gamma(D, gamma)
    cache = _cache(cache_dir)
    hits_before = cache.hits
    try:
        if count_only:
            count = count_norm_coset(D, g, m, cache)
            vectors = None
        else:
            vecs = enumerate_norm_coset(D, g, m, cache)
            count = len(vecs)
            vectors = [_vec(v) for v in vecs]
    except ValueError as exc:
        raise InputError(str(exc)) from None
    payload = {"gamma": g, "m": str(m), "count": count, "cache_hit": cache.hits > hits_before}
    if vectors is not None:
        payload["vectors"] = vectors
    _emit(ctx, "ok", payload, started=started, cache=cache)


def _matrix_strings(mat) -> list[list[str]]:
    return [[format_field_elem(x) for x in row] for row in mat]


@main.command("torsion")
@click.argument("fixture")
@click.argument("divisor")
@click.option("--route", type=click.Choice(["bilinear", "theta", "both"]), default="both", show_default=True)
@click.option("--inject-fault", type=click.Choice(["bilinear", "theta"]), default=None, hidden=True,
              help="Corrupt one route's sum (exercises the disagreement alarm).")
@cache_option
@click.pass_context
@_guard
def torsion(ctx, fixture, divisor, route, inject_fault, cache_dir):
    """Decide whether the divisor combination in DIVISOR is torsion near the cusp."""
    started = time.perf_counter()
    fx, cusp = _load(fixture)
    params = _params(fx, cusp)
    combo = combo_from_records(cusp, load_divisor_file(divisor))
    cache = _cache(cache_dir)
    payload = {"combo": [[beta, str(m), c] for (beta, m), c in combo.items()]}
    verdicts = {}
    witnesses = []
    if route in ("bilinear", "both"):
        tc = TorsionChecker(cusp, params, cache)
        res = tc.residual_matrix(combo)
        if inject_fault == "bilinear":
            res[0][0] = res[0][0] + 1
        else:
            # re-verifies any nonzero residual through the term-by-term sum
            tc.check(combo)
        is_torsion = all(x.is_zero() for row in res for x in row)
        q = combo_Q_factor(cusp, combo, cache, tc) if is_torsion else None
        trace_ok, trace_val = necessary_trace_condition(cusp, combo, cache)
        payload["bilinear"] = {"torsion": is_torsion, "Q": str(q) if q is not None else None,
                               "residual_matrix": _matrix_strings(res),
                               "trace_condition": {"holds": trace_ok, "value": format_field_elem(trace_val)}}
        verdicts["bilinear"] = is_torsion
        for i, row in enumerate(res):
            for j, x in enumerate(row):
                if not x.is_zero():
                    witnesses.append({"route": "bilinear", "basis_pair": [i, j], "residual": format_field_elem(x)})
    if route in ("theta", "both"):
        ob = ObstructionChecker(cusp, cache)
        totals = ob.pairing(combo)
        if inject_fault == "theta":
            totals[0] = totals[0] + 1
        labels = [P.label for P in ob.span]
        is_torsion = all(not t for t in totals)
        payload["theta"] = {"torsion": is_torsion,
                            "pairings": {lab: format_real_quad(t) for lab, t in zip(labels, totals)}}
        verdicts["theta"] = is_torsion
        for lab, t in zip(labels, totals):
            if t:
                witnesses.append({"route": "theta", "polynomial": lab, "pairing": format_real_quad(t)})
    agree = len(set(verdicts.values())) == 1
    payload["agreement"] = agree
    if not agree:
        _emit(ctx, "alarm", payload, witnesses, started, cache)
        raise ConsistencyAlarm(f"routes disagree: {verdicts}")
    verdict = next(iter(verdicts.values()))
    _emit(ctx, "torsion" if verdict else "not-torsion", payload, witnesses, started, cache)
    sys.exit(EXIT_OK if verdict else EXIT_FALSE)


def _parse_v(cusp: CuspData, spec: str) -> PolynomialP:
    spec = spec.strip()
    if spec == "0":
        zero = real_cvec(LatticeVector([cusp.field.zero()] * cusp.n))
        return PolynomialP(zero, "0")
    for P in spanning_set(cusp):
        if P.label == spec:
            return P
    rotate = spec.startswith("i*")
    body = spec[2:] if rotate else spec
    try:
        coords = [parse_field_elem(x, cusp.field) for x in body.split(",")]
    except ValueError as exc:
        raise InputError(f"invalid v-spec {spec!r}: {exc}") from None
    if len(coords) != cusp.n:
        raise InputError(f"invalid v-spec {spec!r}: expected {cusp.n} coordinates or a spanning label")
    v: CVec = real_cvec(LatticeVector(coords))
    return PolynomialP(v.times_i() if rotate else v, spec)


@main.command("theta")
@click.argument("fixture")
@click.argument("v_spec")
@click.option("--max-norm", default="5", show_default=True, help="Largest exponent m of e(m tau) kept.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the coefficient table here (default: standard output).")
@cache_option
@click.pass_context
@_guard
def theta(ctx, fixture, v_spec, max_norm, out, cache_dir):
    """Exact Fourier coefficients of the theta function attached to V_SPEC.

    V_SPEC is a spanning label (f1, i*f1, f1+i*f2, ...), 0, or comma-separated
    field coordinates of a vector of the definite part, optionally prefixed by i*.
    """
    started = time.perf_counter()
    fx, cusp = _load(fixture)
    P = _parse_v(cusp, v_spec)
    try:
        bound = Fraction(max_norm)
    except ValueError:
        raise InputError(f"invalid max-norm {max_norm!r}") from None
    if bound <= 0:
        raise InputError("max-norm must be positive")
    cache = _cache(cache_dir)
    th = build_theta(cusp, P, bound, cache)
    table = th.table()
    if out is None:
        click.echo(table, nl=False)
        return
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(table)
    payload = {"v": P.label, "max_norm": str(bound), "out": out, "rows": len(th.coeffs),
               "all_zero": th.is_zero()}
    _emit(ctx, "ok", payload, started=started, cache=cache)


@main.command("verify")
@click.argument("fixture")
@click.argument("suite", type=click.Choice(list(SUITES)))
@click.option("--seed", type=int, default=20240, show_default=True)
@click.option("--truncation", type=int, default=40, show_default=True)
@click.option("--tolerance", type=float, default=None, help="Override the suite's tolerance.")
@click.option("--max-norm", default="25", show_default=True, help="Theta truncation (theta-modularity).")
@cache_option
@click.pass_context
@_guard
def verify(ctx, fixture, suite, seed, truncation, tolerance, max_norm, cache_dir):
    """Run a seeded randomized verification suite and report the largest deviation."""
    started = time.perf_counter()
    fx, cusp = _load(fixture)
    params = _params(fx, cusp)
    cache = _cache(cache_dir)
    rep = run_suite(suite, cusp, params, seed, tolerance, truncation, cache, Fraction(max_norm))
    payload = {"suite": rep.suite, "seed": rep.seed, "samples": rep.samples,
               "max_deviation": rep.max_deviation, "tolerance": rep.tolerance, "details": rep.details}
    _emit(ctx, "pass" if rep.passed else "fail", payload, started=started, cache=cache)
    if not rep.passed:
        click.echo(f"suite {suite} failed; reproduce with --seed {seed}", err=True)
        sys.exit(EXIT_FALSE)


if __name__ == "__main__":
    main()
