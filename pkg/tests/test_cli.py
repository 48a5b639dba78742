import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from heegner_torsion.cli import EXIT_ALARM, EXIT_FALSE, EXIT_INPUT, EXIT_OK, main

FIX = Path(__file__).resolve().parent.parent / "fixtures"
GAUSS = str(FIX / "gaussian.fix")
EIS = str(FIX / "eisenstein.fix")
RANK2 = str(FIX / "gaussian-rank2.fix")


def run(*args):
    result = CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)
    return result


def report(result):
    return json.loads(result.stdout)


def test_lattice_info_gaussian():
    r = run("lattice-info", GAUSS)
    assert r.exit_code == EXIT_OK
    p = report(r)["payload"]
    assert p["definite_discriminant_order"] == 4
    assert p["signature"] == [1, 2]
    assert (p["M1"], p["M2"], p["N"], p["D_sub_index"]) == ("1", "1", "1", 4)


def test_lattice_info_unimodular_and_builtin():
    p = report(run("lattice-info", str(FIX / "unimodular.fix")))["payload"]
    assert p["discriminant_group_order"] == 1 and p["cusp_subgroup_order"] == 1
    assert report(run("lattice-info", "builtin:eisenstein"))["payload"]["D_sub_index"] == 12


def test_lattice_info_bad_hermitian():
    r = run("lattice-info", FIX / "bad_hermitian.fix")
    assert r.exit_code == EXIT_INPUT
    assert "bad_hermitian.fix:4:" in r.stderr and "entry (2,3)" in r.stderr


def test_missing_fixture():
    r = run("lattice-info", FIX / "nope.fix")
    assert r.exit_code == EXIT_INPUT and "cannot read" in r.stderr


def test_enumerate_lists_vectors(tmp_path):
    r = run("enumerate", GAUSS, 0, -1, "--cache-dir", tmp_path)
    assert r.exit_code == EXIT_OK
    p = report(r)["payload"]
    assert p["count"] == 4 and p["cache_hit"] is False
    assert p["vectors"] == [["-1"], ["0-1*zeta"], ["0+1*zeta"], ["1"]]
    warm = report(run("enumerate", GAUSS, 0, -1, "--count-only", "--cache-dir", tmp_path))["payload"]
    assert warm["count"] == 4 and warm["cache_hit"] is True and "vectors" not in warm
    assert report(run("enumerate", GAUSS, 0, -3))["payload"]["count"] == 0


@pytest.mark.parametrize("m", ["0", "1/2"])
def test_enumerate_rejects_nonnegative_norm(m):
    r = run("enumerate", GAUSS, 0, m)
    assert r.exit_code == EXIT_INPUT and "negative" in r.output + r.stderr


def test_enumerate_bad_gamma():
    assert run("enumerate", GAUSS, 17, -1).exit_code == EXIT_INPUT
    assert run("enumerate", GAUSS, 0, "abc").exit_code == EXIT_INPUT


def test_torsion_gaussian_example():
    r = run("torsion", GAUSS, FIX / "gaussian_torsion.div")
    assert r.exit_code == EXIT_OK
    rep = report(r)
    assert rep["verdict"] == "torsion" and rep["payload"]["agreement"] is True
    assert rep["payload"]["bilinear"]["Q"] == "-16"
    assert rep["payload"]["bilinear"]["trace_condition"]["holds"] is True
    assert set(rep["payload"]["theta"]["pairings"].values()) == {"0"}
    assert rep["witnesses"] == []


def test_torsion_rank2_not_torsion():
    r = run("torsion", RANK2, FIX / "rank2_single_orbit.div")
    assert r.exit_code == EXIT_FALSE
    rep = report(r)
    assert rep["verdict"] == "not-torsion" and rep["payload"]["agreement"] is True
    routes = {w["route"] for w in rep["witnesses"]}
    assert routes == {"bilinear", "theta"}


@pytest.mark.parametrize("route", ["bilinear", "theta"])
def test_torsion_single_route(route):
    rep = report(run("torsion", GAUSS, FIX / "gaussian_torsion.div", "--route", route))
    assert rep["verdict"] == "torsion"
    other = {"bilinear": "theta", "theta": "bilinear"}[route]
    assert other not in rep["payload"]


def test_torsion_asymmetric_divisor():
    r = run("torsion", EIS, FIX / "bad_symmetry.div")
    assert r.exit_code == EXIT_INPUT and "symmetric" in r.stderr


@pytest.mark.parametrize("fault", ["bilinear", "theta"])
def test_fault_injection_raises_alarm(fault):
    r = run("torsion", GAUSS, FIX / "gaussian_torsion.div", "--inject-fault", fault)
    assert r.exit_code == EXIT_ALARM
    assert report(r)["verdict"] == "alarm" and "ALARM" in r.stderr


def test_theta_table_stdout_and_file(tmp_path):
    r = run("theta", GAUSS, "f1", "--max-norm", 5)
    assert r.exit_code == EXIT_OK
    rows = r.stdout.splitlines()
    assert rows[0].startswith("#") and "0 1 0" in rows
    out = tmp_path / "t.txt"
    r2 = run("theta", GAUSS, "f1", "--max-norm", 5, "--out", out)
    assert out.read_text() == r.stdout
    assert report(r2)["payload"]["all_zero"] is False


def test_theta_zero_and_coordinates():
    zero = run("theta", GAUSS, "0", "--max-norm", 3).stdout.splitlines()[1:]
    assert zero and all(line.split()[2] == "0" for line in zero)
    assert run("theta", GAUSS, "1").stdout == run("theta", GAUSS, "f1").stdout
    assert run("theta", GAUSS, "i*1").stdout == run("theta", GAUSS, "i*f1").stdout


@pytest.mark.parametrize("spec", ["f9", "1,2", "x*zeta"])
def test_theta_bad_v_spec(spec):
    assert run("theta", GAUSS, spec).exit_code == EXIT_INPUT


@pytest.mark.parametrize("suite", ["weil", "cochain", "cocycle"])
def test_verify_suites_pass(suite):
    r = run("verify", GAUSS, suite, "--seed", 7)
    assert r.exit_code == EXIT_OK
    rep = report(r)
    assert rep["verdict"] == "pass" and rep["payload"]["seed"] == 7


def test_verify_automorphy():
    rep = report(run("verify", GAUSS, "automorphy"))
    assert rep["verdict"] == "pass" and rep["payload"]["max_deviation"] < 1e-8


def test_verify_failure_reports_seed():
    r = run("verify", GAUSS, "cochain", "--tolerance", "-1", "--seed", 99)
    assert r.exit_code == EXIT_FALSE
    assert "--seed 99" in r.stderr


def test_verify_unknown_suite():
    assert run("verify", GAUSS, "nope").exit_code == 2


def _stable(rep):
    return rep["verdict"], rep["payload"], rep["witnesses"]


def test_determinism_and_cache(tmp_path):
    args = ("torsion", RANK2, FIX / "rank2_single_orbit.div")
    cold = report(run(*args, "--cache-dir", tmp_path))
    warm = report(run(*args, "--cache-dir", tmp_path))
    fresh = report(run(*args))
    assert _stable(cold) == _stable(warm) == _stable(fresh)
    assert warm["cache"]["hits"] > 0
    t1 = run("theta", RANK2, "f1+i*f2", "--max-norm", 3, "--cache-dir", tmp_path).stdout
    t2 = run("theta", RANK2, "f1+i*f2", "--max-norm", 3).stdout
    assert t1 == t2
