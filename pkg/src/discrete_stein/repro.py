"""Tables for the three Poisson-approximation examples.

* ex1: sums of ``n`` Bernoulli(lam/n) variables against Po(lam);
* ex2: the same with ``lam = mu sqrt(n)``;
* ex3: sums of ``n`` geometrics with common parameter ``n/(n+lam)``.

Every row is a pure function of its parameters, so tables are
bit-identical across runs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .bounds import stein_magic_H, tv_bound_k1, tv_bound_k2
from .errors import ParameterError
from .information import k1_scaled_fisher, k1_subadditive_bound
from .pmf import convolve_n, make_bernoulli, make_geometric

__all__ = [
    "CSV_HEADER",
    "DP86_CONSTANT",
    "EX3_TAIL_TOL",
    "ExampleRow",
    "ex1_bernoulli",
    "ex2_mu_sqrt_n",
    "ex3_geometric",
    "rows_to_csv",
    "rows_to_json",
]

CSV_HEADER = ["n", "lambda", "mu", "tv", "k1", "k1_bound", "k2", "k2_bound",
              "khj_ref", "error_term", "better_bound"]
# Best constant for the TV distance in the mu sqrt(n) regime, reported for context only.
DP86_CONSTANT = math.sqrt(1.0 / (2.0 * math.pi * math.e))
# Total dropped mass allowed for the geometric convolution.
EX3_TAIL_TOL = 1e-13
ROW_TOL = 1e-12


@dataclass(frozen=True)
class ExampleRow:
    example: str
    n: int
    lam: float
    tv_exact: float
    k1: float
    k1_bound: float
    khj_reference: float
    error_term: float
    mu: float | None = None
    k2: float | None = None
    k2_bound: float | None = None
    better_bound: str = ""
    params: dict = field(default_factory=dict)

    def check(self) -> list[str]:
        """Violated hard inequalities, empty when the row is sound."""
        bad = []
        if not self.tv_exact <= self.k1_bound + ROW_TOL:
            bad.append(f"tv {self.tv_exact!r} exceeds k1_bound {self.k1_bound!r}")
        if self.k2_bound is not None and not self.tv_exact <= self.k2_bound + ROW_TOL:
            bad.append(f"tv {self.tv_exact!r} exceeds k2_bound {self.k2_bound!r}")
        sub = self.params.get("k1_subadditive")
        if sub is not None and not sub >= self.k1 - ROW_TOL * max(1.0, self.k1):
            bad.append(f"subadditive K1 {sub!r} below direct K1 {self.k1!r}")
        return bad

    def csv_fields(self) -> list:
        def cell(v):
            return "" if v is None else repr(v)
        return [str(self.n), repr(self.lam), cell(self.mu), repr(self.tv_exact), repr(self.k1),
                repr(self.k1_bound), cell(self.k2), cell(self.k2_bound), repr(self.khj_reference),
                repr(self.error_term), self.better_bound]

    def to_json(self) -> dict:
        return {
            "example": self.example,
            "n": self.n,
            "lambda": self.lam,
            "mu": self.mu,
            "tv": self.tv_exact,
            "k1": self.k1,
            "k1_bound": self.k1_bound,
            "k2": self.k2,
            "k2_bound": self.k2_bound,
            "khj_ref": self.khj_reference,
            "error_term": self.error_term,
            "better_bound": self.better_bound,
            "params": dict(sorted(self.params.items())),
        }


def _bernoulli_sum_row(example: str, n: int, lam: float, mu: float | None, extra: dict) -> ExampleRow:
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if not 0.0 < lam < n:
        raise ParameterError(f"need 0 < lambda < n, got lambda = {lam!r}, n = {n}")
    q = convolve_n(make_bernoulli(lam / n), n)
    report = tv_bound_k1(lam, q)
    closed = lam * lam / (n * (n - lam))
    if abs(report.info_value - closed) > 1e-10 * closed:
        raise ArithmeticError(f"K1 {report.info_value!r} disagrees with {closed!r} for n={n}, lambda={lam!r}")
    # Ratio of the exact boundary term to lam^n / n^(n+1), computed in logs.
    order = math.exp(n * math.log(lam) - (n + 1) * math.log(n))
    params = {"n": n, "lambda": lam, "k1_closed_form": closed,
              "error_order_ratio": report.error_term / order if order > 0.0 else math.inf,
              "main_term": report.magic_constant * math.sqrt(report.info_value)}
    params.update(extra)
    return ExampleRow(example, n, lam, report.distance_exact, report.info_value, report.bound_value,
                      2.0 * lam / n, report.error_term, mu=mu, better_bound="k1", params=params)


def ex1_bernoulli(n: int, lam: float) -> ExampleRow:
    """Binomial(n, lam/n), built by convolving Bernoullis, against Po(lam); KHJ reference ``2 lam / n``."""
    return _bernoulli_sum_row("ex1", n, float(lam), None, {})


def ex2_mu_sqrt_n(n: int, mu: float) -> ExampleRow:
    """Example 1 pipeline at ``lam = mu sqrt(n)``; KHJ reference ``2 mu / sqrt(n)``."""
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    mu = float(mu)
    if not 0.0 < mu < math.sqrt(n):
        raise ParameterError(f"need 0 < mu < sqrt(n), got mu = {mu!r}, n = {n}")
    lam = mu * math.sqrt(n)
    return _bernoulli_sum_row("ex2", n, lam, mu, {"mu": mu, "dp86_constant": DP86_CONSTANT})


def ex3_geometric(n: int, lam: float) -> ExampleRow:
    """Sum of ``n`` Geom(n/(n+lam)) against Po(lam), comparing the K1 and K2 bounds.

    The K1 bound uses the subadditive estimate of K1 in the closed form
    ``sqrt(2/(lam e)) * sqrt(sum (1-q)^3/q^2)``; K1 is also computed directly.
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    lam = float(lam)
    if not lam > 0.0:
        raise ParameterError(f"lambda must be positive, got {lam!r}")
    qi = n / (n + lam)
    q = convolve_n(make_geometric(qi, EX3_TAIL_TOL / n), n)
    k1_direct = k1_scaled_fisher(lam, q)
    k1_sub = k1_subadditive_bound(lam, [qi] * n)
    cubic_sum = math.fsum([(1.0 - qi) ** 3 / qi**2] * n)
    k1_bound = math.sqrt(2.0 / (lam * math.e)) * math.sqrt(cubic_sum)
    r2 = tv_bound_k2(lam, q)
    better = "k2" if r2.bound_value < k1_bound else "k1"
    params = {"n": n, "lambda": lam, "q_i": qi, "k1_subadditive": k1_sub,
              "k1_magic_bound": math.sqrt(lam) * stein_magic_H(lam) * math.sqrt(k1_sub),
              "tail_mass": q.tail_mass}
    return ExampleRow("ex3", n, lam, r2.distance_exact, k1_direct, k1_bound,
                      math.sqrt(2.0 * k1_sub), 0.0, k2=r2.info_value, k2_bound=r2.bound_value,
                      better_bound=better, params=params)


def _sorted(rows) -> list[ExampleRow]:
    return sorted(rows, key=lambda r: (r.example, r.n, r.lam, -1.0 if r.mu is None else r.mu))


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in _sorted(rows):
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def rows_to_json(rows) -> str:
    return json.dumps([r.to_json() for r in _sorted(rows)], indent=2)
