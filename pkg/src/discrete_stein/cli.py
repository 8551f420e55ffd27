"""Command-line front end: ``discrete-stein <command> [options]``.

Distribution specs follow ``family:param[,param...]``::

    poisson:LAM  binomial:N,P  bernoulli:P  geometric:Q  geomsum:Q1,Q2,...  point:K  file:PATH

Exit status is 0 on success, 1 on bad input or an unmet precondition and 2
when a ``check-*`` suite finds a violated invariant.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import bounds, checks, information, pmf, repro, stein
from .errors import DomainError, ParameterError, PreconditionError
from .pmf import Pmf

__all__ = ["COMMAND_OPERATIONS", "CliError", "parse_dist", "main", "run"]

DEFAULT_TAIL_TOL = 1e-12
TAIL_TOL_ENV = "STEIN_TAIL_TOL"

# Builders behind the --dist grammar; every command taking --dist reaches them.
DIST_CONSTRUCTORS = (pmf.make_poisson, pmf.make_binomial, pmf.make_bernoulli, pmf.make_geometric,
                     pmf.point_mass, pmf.pmf_from_probs, pmf.convolve)

# Library operations each command reaches, directly or through a check suite.
COMMAND_OPERATIONS = {
    "k1": (information.k1_scaled_fisher, pmf.mean) + DIST_CONSTRUCTORS,
    "k2": (information.k2_discrete_fisher, pmf.mean) + DIST_CONSTRUCTORS,
    "jm": (information.jm_fisher_information,) + DIST_CONSTRUCTORS,
    "tv": (bounds.tv_distance, bounds.optimal_tv_test_function, bounds.d_H, bounds.kolmogorov_class,
           bounds.poisson_target, pmf.expectation) + DIST_CONSTRUCTORS,
    "bound-k1": (bounds.tv_bound_k1, bounds.khj_tv_bound, bounds.stein_magic_H,
                 bounds.optimal_tv_test_function, stein.stein_solution_1) + DIST_CONSTRUCTORS,
    "bound-k2": (bounds.tv_bound_k2, bounds.stein_magic_H, information.k2_discrete_fisher) + DIST_CONSTRUCTORS,
    "check-stein": (checks.zero_mean_suite, checks.characterization_suite, checks.factorization_suite,
                    checks.stein_factor_suite, stein.t1_apply, stein.make_test_function,
                    stein.canonical_f_z, stein.canonical_family, stein.stein_solution_1, stein.t1_values,
                    stein.characterization_residual, stein.cdf_discrepancy, pmf.cdf,
                    information.factorization_check_1, bounds.stein_factor_sup_1,
                    bounds.stein_factor_sup_2, bounds.scaled_stein_solution_2, stein.p_tilde),
    "check-identity": (checks.identity1_suite, checks.identity2_suite, checks.holder_suite,
                       information.identity_check_1, information.identity_check_2, information.r1_score,
                       information.r2_score, stein.stein_solution_2, stein.t2_values, stein.t2_apply,
                       stein.p_tilde, stein.poisson_family, stein.geometric_family,
                       bounds.h1_constant, bounds.h2_constant, bounds.d_H, bounds.poisson_target,
                       information.k1_scaled_fisher, information.k2_discrete_fisher),
    "repro": (repro.ex1_bernoulli, repro.ex2_mu_sqrt_n, repro.ex3_geometric, bounds.tv_bound_k1,
              bounds.tv_bound_k2, information.k1_subadditive_bound, pmf.make_bernoulli,
              pmf.make_geometric, pmf.convolve, pmf.convolve_n),
}


class CliError(Exception):
    """Input problem reported with ``prefix`` (``usage``, ``file`` or ``json``)."""

    def __init__(self, prefix: str, message: str):
        super().__init__(message)
        self.prefix = prefix


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


def _floats(text: str, spec: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise ParameterError(f"bad number in distribution spec {spec!r}") from None


def _int(text: str, spec: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParameterError(f"expected an integer in distribution spec {spec!r}") from None


def _arity(args: list, k: int, spec: str) -> None:
    if len(args) != k:
        raise ParameterError(f"{spec!r} takes {k} parameter(s), got {len(args)}")


def _read_pmf_file(path: str) -> Pmf:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError("file", f"cannot read {path!r}: {exc.strerror or exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError("json", f"{path}: {exc}") from None
    if not isinstance(obj, dict) or "a" not in obj or "probs" not in obj:
        raise CliError("json", f"{path}: expected an object with keys 'a' and 'probs'")
    p = Pmf.from_json(obj)
    return p if p.label else pmf.pmf_from_probs(p.probs, p.a, p.tail_mass, Path(path).name, p.finite)


def parse_dist(spec: str, tail_tol: float) -> Pmf:
    """Build a :class:`Pmf` from a ``family:params`` spec."""
    family, sep, rest = spec.partition(":")
    if not sep or not rest:
        raise CliError("usage", f"distribution spec {spec!r} must look like family:params")
    family = family.strip().lower()
    if family == "file":
        return _read_pmf_file(rest)
    if family == "point":
        return pmf.point_mass(_int(rest, spec))
    if family == "binomial":
        parts = rest.split(",")
        _arity(parts, 2, spec)
        return pmf.make_binomial(_int(parts[0], spec), _floats(parts[1], spec)[0])
    args = _floats(rest, spec)
    if family == "poisson":
        _arity(args, 1, spec)
        return pmf.make_poisson(args[0], tail_tol)
    if family == "bernoulli":
        _arity(args, 1, spec)
        return pmf.make_bernoulli(args[0])
    if family == "geometric":
        _arity(args, 1, spec)
        return pmf.make_geometric(args[0], tail_tol)
    if family == "geomsum":
        # split the tolerance so the convolution's total dropped mass stays below it
        parts = [pmf.make_geometric(q, tail_tol / len(args)) for q in args]
        out = parts[0]
        for g in parts[1:]:
            out = pmf.convolve(out, g)
        return out
    raise CliError("usage", f"unknown distribution family {family!r}")


def _tail_tol(arg: float | None) -> float:
    if arg is not None:
        tol = arg
    else:
        raw = os.environ.get(TAIL_TOL_ENV)
        if raw is None:
            return DEFAULT_TAIL_TOL
        try:
            tol = float(raw)
        except ValueError:
            raise ParameterError(f"{TAIL_TOL_ENV}={raw!r} is not a number") from None
    if not 0.0 < tol < 1.0:
        raise ParameterError(f"tail tolerance must lie in (0, 1), got {tol!r}")
    return tol


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="discrete-stein", description="Discrete Stein characterizations and Poisson TV bounds.")
    ap.add_argument("command", choices=list(COMMAND_OPERATIONS))
    ap.add_argument("example", nargs="?", choices=["ex1", "ex2", "ex3"], help="example table for repro")
    ap.add_argument("--target-lambda", type=float, help="Poisson target parameter (default: mean of --dist)")
    ap.add_argument("--dist", action="append", default=[], help="distribution spec (repeatable)")
    ap.add_argument("--tail-tol", type=float, help=f"truncation tolerance (default ${TAIL_TOL_ENV} or 1e-12)")
    ap.add_argument("--output", choices=["csv", "json", "plain"])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, action="append", help="sample size for repro, instance count for checks")
    ap.add_argument("--lambda", dest="lam", type=float, action="append", help="repro parameter")
    ap.add_argument("--mu", type=float, action="append", help="repro parameter (ex2)")
    ap.add_argument("--window", type=int, default=30, help="Stein-factor window for check-stein")
    return ap


def _need(value, flag: str, command: str):
    if value is None:
        raise CliError("usage", f"{command} requires {flag}")
    return value


def _dists(ns, tail_tol: float, count: int) -> list[Pmf]:
    if len(ns.dist) != count:
        raise CliError("usage", f"{ns.command} takes exactly {count} --dist, got {len(ns.dist)}")
    return [parse_dist(s, tail_tol) for s in ns.dist]


def _format_record(record: dict, output: str) -> str:
    if output == "json":
        return json.dumps(record)
    if output == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(record.keys())
        w.writerow([repr(v) if isinstance(v, float) else v for v in record.values()])
        return buf.getvalue().rstrip("\n")
    if len(record) == 1:
        return repr(next(iter(record.values())))
    return "\n".join(f"{k} = {v!r}" for k, v in record.items())


def _scalar(ns, tail_tol: float) -> dict:
    cmd = ns.command
    if cmd == "jm":
        (q,) = _dists(ns, tail_tol, 1)
        return {"jm": information.jm_fisher_information(q)}
    if cmd == "tv":
        if ns.target_lambda is not None:
            (q,) = _dists(ns, tail_tol, 1)
            p = bounds.poisson_target(ns.target_lambda, q)
        else:
            p, q = _dists(ns, tail_tol, 2)
        return {"tv": bounds.tv_distance(p, q)}
    (q,) = _dists(ns, tail_tol, 1)
    # without an explicit target, match the mean of q
    lam = pmf.mean(q) if ns.target_lambda is None else ns.target_lambda
    if cmd == "k1":
        return {"k1": information.k1_scaled_fisher(lam, q)}
    if cmd == "k2":
        return {"k2": information.k2_discrete_fisher(lam, q)}
    if cmd == "bound-k1":
        rec = bounds.tv_bound_k1(lam, q).to_json()
        rec["khj"] = bounds.khj_tv_bound(lam, q)
        return rec
    return bounds.tv_bound_k2(lam, q).to_json()


def _run_checks(ns, out) -> int:
    count = None if ns.n is None else ns.n[-1]
    if count is not None and count < 1:
        raise ParameterError("--n must be positive for check suites")
    if ns.command == "check-stein":
        results = checks.stein_suite(seed=ns.seed, count=count, window=ns.window)
    else:
        results = checks.identity_suite(seed=ns.seed, count=count)
    records = [{"suite": r.name, "checked": r.checked, "worst": r.worst, "violations": len(r.violations)}
               for r in results]
    output = ns.output or "plain"
    if output == "json":
        print(json.dumps(records), file=out)
    elif output == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(records[0].keys())
        for rec in records:
            w.writerow([repr(v) if isinstance(v, float) else v for v in rec.values()])
    else:
        for rec in records:
            status = "ok" if rec["violations"] == 0 else "FAIL"
            print(f"{rec['suite']}: {status} ({rec['checked']} instances, worst {rec['worst']!r})", file=out)
    bad = [v for r in results for v in r.violations]
    for v in bad:
        print(f"violation: {v} (seed {ns.seed})", file=sys.stderr)
    return 2 if bad else 0


def _run_repro(ns, out) -> int:
    example = _need(ns.example, "an example name (ex1, ex2 or ex3)", "repro")
    ns_list = _need(ns.n, "--n", "repro")
    if example == "ex2":
        second = _need(ns.mu, "--mu", "repro ex2")
        rows = [repro.ex2_mu_sqrt_n(n, mu) for n in ns_list for mu in second]
    else:
        second = _need(ns.lam, "--lambda", f"repro {example}")
        fn = repro.ex1_bernoulli if example == "ex1" else repro.ex3_geometric
        rows = [fn(n, lam) for n in ns_list for lam in second]
    if (ns.output or "csv") == "json":
        print(repro.rows_to_json(rows), file=out)
    else:
        out.write(repro.rows_to_csv(rows))
    bad = [(r, msg) for r in rows for msg in r.check()]
    for r, msg in bad:
        print(f"violation: {r.example} n={r.n} lambda={r.lam!r}: {msg}", file=sys.stderr)
    return 2 if bad else 0


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        ns = build_parser().parse_args(argv)
        if ns.example is not None and ns.command != "repro":
            raise CliError("usage", f"unexpected argument {ns.example!r}")
        tail_tol = _tail_tol(ns.tail_tol)
        if ns.command.startswith("check-"):
            return _run_checks(ns, out)
        if ns.command == "repro":
            return _run_repro(ns, out)
        print(_format_record(_scalar(ns, tail_tol), ns.output or "plain"), file=out)
        return 0
    except CliError as exc:
        print(f"error: {exc.prefix}: {exc}", file=sys.stderr)
    except ParameterError as exc:
        print(f"error: parameter: {exc}", file=sys.stderr)
    except DomainError as exc:
        print(f"error: domain: {exc}", file=sys.stderr)
    except PreconditionError as exc:
        print(f"error: precondition: {exc}", file=sys.stderr)
    return 1


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
