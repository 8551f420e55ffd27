import csv
import inspect
import io
import json
import subprocess
import sys

import pytest

from discrete_stein import bounds, information, pmf, repro, stein
from discrete_stein.cli import COMMAND_OPERATIONS, parse_dist, run
from discrete_stein.pmf import make_geometric, write_pmf

# operations every command table must reach
LIBRARY_OPERATIONS = [
    pmf.make_poisson, pmf.make_binomial, pmf.make_geometric, pmf.convolve, pmf.convolve_n,
    pmf.expectation, pmf.mean, pmf.cdf,
    stein.t1_apply, stein.canonical_f_z, stein.stein_solution_1, stein.p_tilde, stein.t2_apply,
    stein.stein_solution_2, stein.characterization_residual,
    information.r1_score, information.r2_score, information.k1_scaled_fisher,
    information.k2_discrete_fisher, information.jm_fisher_information, information.factorization_check_1,
    information.identity_check_1, information.identity_check_2, information.k1_subadditive_bound,
    bounds.tv_distance, bounds.optimal_tv_test_function, bounds.d_H, bounds.stein_magic_H,
    bounds.stein_factor_sup_1, bounds.stein_factor_sup_2, bounds.tv_bound_k1, bounds.tv_bound_k2,
    bounds.h1_constant, bounds.h2_constant,
    repro.ex1_bernoulli, repro.ex2_mu_sqrt_n, repro.ex3_geometric,
]


def _run(args, capsys):
    code = run(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_every_operation_reachable_from_a_command():
    reached = {fn for ops in COMMAND_OPERATIONS.values() for fn in ops}
    missing = [fn.__name__ for fn in LIBRARY_OPERATIONS if fn not in reached]
    assert not missing
    assert all(callable(fn) for fn in reached)


def test_every_public_function_is_reached():
    reached = {fn for ops in COMMAND_OPERATIONS.values() for fn in ops}
    serialization = {pmf.read_pmf, pmf.write_pmf}
    for mod in (pmf, stein, information, bounds, repro):
        for name in mod.__all__:
            obj = getattr(mod, name)
            if inspect.isfunction(obj) and obj not in serialization and not name.startswith("rows_to"):
                assert obj in reached, f"{mod.__name__}.{name}"


def test_k1_binomial(capsys):
    code, out, _ = _run(["k1", "--target-lambda", "1", "--dist", "binomial:10,0.1"], capsys)
    assert code == 0
    assert float(out) == pytest.approx(1 / 90, rel=1e-10)
    assert out.startswith("0.0111111")


def test_k1_defaults_target_to_mean(capsys):
    code, out, _ = _run(["k1", "--dist", "binomial:10,0.1"], capsys)
    assert code == 0 and float(out) == pytest.approx(1 / 90, rel=1e-10)


def test_bound_k2_rejects_finite_support(capsys):
    code, out, err = _run(["bound-k2", "--target-lambda", "1", "--dist", "binomial:10,0.1"], capsys)
    assert code == 1 and out == ""
    assert err.startswith("error: precondition:")
    assert "K2 bound requires full support (N = ∞)" in err


def test_bound_k1_json(capsys):
    code, out, _ = _run(["bound-k1", "--target-lambda", "1", "--dist", "binomial:10,0.1", "--output", "json"],
                        capsys)
    rec = json.loads(out)
    assert code == 0 and rec["holds"] is True and rec["kind"] == "K1"
    assert rec["khj"] > rec["bound"]


def test_bound_k2_geometric_csv(capsys):
    code, out, _ = _run(["bound-k2", "--target-lambda", "1", "--dist", "geometric:0.5", "--tail-tol", "1e-15",
                         "--output", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["holds"] == "True"
    assert float(rows[0]["info"]) == pytest.approx(1.0, abs=1e-10)


def test_k2_jm_tv(capsys):
    assert _run(["k2", "--target-lambda", "1", "--dist", "geometric:0.5", "--tail-tol", "1e-15"], capsys)[0] == 0
    code, out, _ = _run(["jm", "--dist", "geometric:0.5", "--tail-tol", "1e-15"], capsys)
    assert code == 0 and float(out) == pytest.approx(1.0, abs=1e-12)
    code, out, _ = _run(["tv", "--dist", "point:0", "--dist", "point:1"], capsys)
    assert code == 0 and float(out) == 1.0
    code, out, _ = _run(["tv", "--target-lambda", "1", "--dist", "poisson:1", "--output", "json"], capsys)
    assert code == 0 and json.loads(out)["tv"] < 1e-11


def test_repro_ex1(capsys):
    code, out, _ = _run(["repro", "ex1", "--n", "10", "--lambda", "1"], capsys)
    row = next(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert float(row["k1"]) == pytest.approx(1 / 90, rel=1e-12)
    assert float(row["khj_ref"]) == pytest.approx(0.2)


def test_repro_ex3_csv_single_row(capsys):
    code, out, _ = _run(["repro", "ex3", "--n", "100", "--lambda", "1", "--output", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1
    assert rows[0]["k1_bound"] and rows[0]["k2_bound"]


def test_repro_ex2_json_and_grid(capsys):
    code, out, _ = _run(["repro", "ex2", "--n", "100", "--n", "4", "--mu", "1", "--output", "json"], capsys)
    rows = json.loads(out)
    assert code == 0 and [r["n"] for r in rows] == [4, 100]
    assert rows[1]["lambda"] == 10.0


def test_repro_output_is_byte_identical(capsys):
    args = ["repro", "ex3", "--n", "5", "--n", "20", "--lambda", "0.5", "--lambda", "2"]
    _, first, _ = _run(args, capsys)
    _, second, _ = _run(args, capsys)
    assert first == second


def test_check_suites_pass(capsys):
    code, out, _ = _run(["check-stein", "--n", "5"], capsys)
    assert code == 0 and "FAIL" not in out
    code, out, _ = _run(["check-identity", "--n", "5", "--seed", "3", "--output", "json"], capsys)
    assert code == 0 and all(r["violations"] == 0 for r in json.loads(out))


def test_check_violation_exits_2(capsys, monkeypatch):
    from discrete_stein import checks

    def broken(seed=0, count=None):
        res = checks.SuiteResult("identity-1")
        res.record(1.0, 1e-10, "lambda=1.0 N=3 #7")
        return [res]

    monkeypatch.setattr(checks, "identity_suite", broken)
    code, _, err = _run(["check-identity"], capsys)
    assert code == 2
    assert "identity-1 [lambda=1.0 N=3 #7]" in err


@pytest.mark.parametrize("args,prefix", [
    (["k1", "--target-lambda", "-1", "--dist", "poisson:1"], "error: parameter:"),
    (["k1", "--dist", "poisson:x"], "error: parameter:"),
    (["k1", "--dist", "poisson"], "error: usage:"),
    (["k1", "--dist", "zeta:2"], "error: usage:"),
    (["frobnicate"], "error: usage:"),
    (["k1"], "error: usage:"),
    (["repro", "ex1", "--n", "3", "--lambda", "3"], "error: parameter:"),
    (["repro", "ex1", "--lambda", "1"], "error: usage:"),
    (["k2", "--target-lambda", "1", "--dist", "point:2"], "error: domain:"),
    (["k1", "--dist", "file:/no/such/file.json"], "error: file:"),
])
def test_error_prefixes(args, prefix, capsys):
    code, _, err = _run(args, capsys)
    assert code == 1
    assert err.startswith(prefix)
    assert err.count("\n") == 1


def test_file_specs(tmp_path, capsys):
    good = tmp_path / "g.json"
    write_pmf(make_geometric(0.5, 1e-15), good)
    code, out, _ = _run(["k2", "--target-lambda", "1", "--dist", f"file:{good}"], capsys)
    assert code == 0 and float(out) == pytest.approx(1.0, abs=1e-10)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = _run(["k1", "--dist", f"file:{bad}"], capsys)
    assert code == 1 and err.startswith("error: json:")
    shape = tmp_path / "shape.json"
    shape.write_text("[1, 2]")
    code, _, err = _run(["k1", "--dist", f"file:{shape}"], capsys)
    assert code == 1 and err.startswith("error: json:")


def test_tail_tol_environment(monkeypatch):
    monkeypatch.setenv("STEIN_TAIL_TOL", "1e-3")
    assert run(["k1", "--dist", "poisson:1"]) == 0
    monkeypatch.setenv("STEIN_TAIL_TOL", "abc")
    assert run(["k1", "--dist", "poisson:1"]) == 1


def test_geomsum_spec():
    g = parse_dist("geomsum:0.5,0.5,0.5", 1e-12)
    assert g.tail_mass < 1e-12 and not g.finite
    assert pmf.mean(g) == pytest.approx(3.0, rel=1e-9)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "discrete_stein", "k1", "--target-lambda", "1",
                          "--dist", "binomial:10,0.1"], capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert float(res.stdout) == pytest.approx(1 / 90, rel=1e-10)
