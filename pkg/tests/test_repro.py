import csv
import io
import json
import math

import pytest
from scipy import stats

from discrete_stein.errors import ParameterError
from discrete_stein.repro import (
    CSV_HEADER,
    DP86_CONSTANT,
    ex1_bernoulli,
    ex2_mu_sqrt_n,
    ex3_geometric,
    rows_to_csv,
    rows_to_json,
)


def test_ex1_reference_row():
    row = ex1_bernoulli(10, 1.0)
    assert row.k1 == pytest.approx(1 / 90, rel=1e-10)
    assert row.params["main_term"] == pytest.approx(0.09042, abs=1e-5)
    assert row.khj_reference == pytest.approx(0.2)
    assert row.tv_exact < row.k1_bound and not row.check()


def test_ex1_small_and_large_n():
    assert ex1_bernoulli(2, 1.0).k1 == pytest.approx(0.5, rel=1e-12)
    row = ex1_bernoulli(100, 1.0)
    assert row.tv_exact < row.k1_bound
    assert math.isfinite(row.params["error_order_ratio"])


@pytest.mark.parametrize("n,lam", [(n, lam) for n in (2, 5, 10, 50, 100) for lam in (0.5, 1.0, 2.0) if lam < n])
def test_ex1_k1_closed_form_grid(n, lam):
    assert ex1_bernoulli(n, lam).k1 == pytest.approx(lam**2 / (n * (n - lam)), rel=1e-10)


def test_ex1_tv_matches_scipy_oracle():
    row = ex1_bernoulli(10, 1.0)
    xs = range(0, 60)
    ref = 0.5 * math.fsum(abs(stats.poisson.pmf(x, 1.0) - stats.binom.pmf(x, 10, 0.1)) for x in xs)
    assert row.tv_exact == pytest.approx(ref, abs=1e-14)


def test_ex1_rejects_lambda_at_least_n():
    with pytest.raises(ParameterError):
        ex1_bernoulli(3, 3.0)


def test_ex2_parameter_mapping():
    row = ex2_mu_sqrt_n(100, 1.0)
    assert row.lam == 10.0 and row.mu == 1.0
    assert row.params["main_term"] == pytest.approx(math.sqrt(2 / math.e) / math.sqrt(90), rel=1e-10)
    assert row.params["dp86_constant"] == pytest.approx(0.24197, abs=1e-5)
    assert ex2_mu_sqrt_n(4, 1.0).lam == 2.0
    assert DP86_CONSTANT == pytest.approx(math.sqrt(1 / (2 * math.pi * math.e)))
    with pytest.raises(ParameterError):
        ex2_mu_sqrt_n(4, 2.0)


def test_ex3_single_geometric_equality():
    row = ex3_geometric(1, 1.0)
    assert row.params["q_i"] == 0.5
    assert row.k1 == pytest.approx(0.5, rel=1e-10)
    assert row.params["k1_subadditive"] == pytest.approx(0.5, rel=1e-12)
    assert not row.check()


def test_ex3_subadditivity_and_bounds():
    for n in (5, 20, 100):
        row = ex3_geometric(n, 1.0)
        assert row.params["k1_subadditive"] >= row.k1
        assert row.tv_exact <= row.k1_bound and row.tv_exact <= row.k2_bound
    row = ex3_geometric(100, 1.0)
    # displayed rate sqrt(2/e) * lam / sqrt(n (n + lam))
    assert row.k1_bound == pytest.approx(math.sqrt(2 / math.e) / math.sqrt(100 * 101), rel=1e-12)


def test_ex3_comparison_regression_pin():
    # recorded comparison at n = 100, lambda = 1: the K1 route gives the smaller bound here
    row = ex3_geometric(100, 1.0)
    assert row.better_bound == "k1"
    assert row.k2 == pytest.approx(2.931844804929652e-04, rel=1e-9)
    assert row.k2_bound == pytest.approx(0.014687174190012975, rel=1e-9)


def test_tables_are_deterministic_and_sorted():
    make = lambda: [ex3_geometric(5, 1.0), ex1_bernoulli(10, 1.0), ex1_bernoulli(2, 1.0)]
    a, b = rows_to_csv(make()), rows_to_csv(make())
    assert a == b
    rows = list(csv.reader(io.StringIO(a)))
    assert rows[0] == CSV_HEADER
    assert [r[0] for r in rows[1:]] == ["2", "10", "5"]
    assert rows_to_json(make()) == rows_to_json(make())
    parsed = json.loads(rows_to_json(make()))
    assert parsed[0]["example"] == "ex1" and "params" in parsed[0]
