import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_stein.errors import DomainError, ParameterError, PreconditionError
from discrete_stein.information import (
    factorization_check_1,
    identity_check_1,
    identity_check_2,
    jm_fisher_information,
    k1_scaled_fisher,
    k1_subadditive_bound,
    k2_discrete_fisher,
    r1_score,
    r2_score,
)
from discrete_stein.pmf import (
    RealFunctionOnZ,
    convolve_n,
    make_bernoulli,
    make_binomial,
    make_geometric,
    make_poisson,
    pmf_from_probs,
)
from discrete_stein.stein import geometric_family, p_tilde, poisson_family


def _k2_geometric_closed_form(lam, q):
    # score is c - x for x >= 1 and 0 at x = 0, with c = lam/(1-q):
    # K2 = E[(c - X)^2] - q c^2 = Var X + (E X - c)^2 - q c^2
    c = lam / (1 - q)
    m, v = (1 - q) / q, (1 - q) / q**2
    return v + (m - c) ** 2 - q * c * c


@pytest.mark.parametrize("n,lam", [(n, lam) for n in (2, 5, 10, 50, 100) for lam in (0.5, 1.0, 2.0) if lam < n])
def test_k1_binomial_closed_form(n, lam):
    k1 = k1_scaled_fisher(lam, make_binomial(n, lam / n))
    assert k1 == pytest.approx(lam**2 / (n * (n - lam)), rel=1e-10)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
def test_k1_geometric_closed_form(q):
    lam = (1 - q) / q
    assert k1_scaled_fisher(lam, make_geometric(q, 1e-15)) == pytest.approx((1 - q) ** 2 / q, rel=1e-10)


def test_k1_zero_for_poisson_and_rejects_bad_lambda():
    assert k1_scaled_fisher(2.0, make_poisson(2.0, 1e-14)) < 1e-25
    with pytest.raises(ParameterError):
        k1_scaled_fisher(0.0, make_poisson(1.0))


def test_k2_geometric_closed_form():
    g = make_geometric(0.5, 1e-16)
    assert _k2_geometric_closed_form(1.0, 0.5) == 1.0
    assert k2_discrete_fisher(1.0, g) == pytest.approx(1.0, abs=1e-10)
    for lam, q in [(0.7, 0.3), (2.0, 0.6)]:
        ref = _k2_geometric_closed_form(lam, q)
        assert k2_discrete_fisher(lam, make_geometric(q, 1e-16)) == pytest.approx(ref, rel=1e-10)


def test_k2_vanishes_on_matching_poisson():
    for lam in [0.5, 1.0, 4.0]:
        assert k2_discrete_fisher(lam, make_poisson(lam, 1e-14)) <= 1e-12


def test_jm_information_oracles():
    assert jm_fisher_information(make_geometric(0.5, 1e-16)) == pytest.approx(1.0, abs=1e-12)
    # Poisson(mu): q(x-1)/q(x) = x/mu, so I = E[(X/mu - 1)^2] = 1/mu
    assert jm_fisher_information(make_poisson(0.3, 1e-16)) == pytest.approx(1 / 0.3, rel=1e-12)
    with pytest.raises(DomainError):
        jm_fisher_information(pmf_from_probs([0.5, 0.5], a=1))


def test_r1_score_values():
    p = make_poisson(1.0, 1e-12)
    q = make_bernoulli(0.5)
    r = r1_score(p, q)
    np.testing.assert_allclose(r.values, [1.0 - 1.0, 0.5], atol=1e-15)
    assert r.kind == "r1"


def test_r1_vanishes_when_laws_agree():
    p = make_poisson(2.0, 1e-12)
    assert np.max(np.abs(r1_score(p, p).values)) < 1e-15


def test_r1_requires_cover():
    with pytest.raises(DomainError):
        r1_score(make_binomial(3, 0.5), make_binomial(5, 0.5))


def test_r2_score_poisson_specialization():
    lam = 1.5
    q = make_geometric(0.4, 1e-10)
    p = make_poisson(lam, 1e-14, min_n=q.n_max + 1)
    pt = p_tilde(poisson_family(), lam, 1e-14, min_n=p.n_max)
    r = r2_score(p, pt, q)
    back = np.r_[0.0, np.full(q.n_max, 1 / 0.6)]
    expected = math.exp(lam) / lam * (lam * back - q.xs)
    np.testing.assert_allclose(r.values, expected, rtol=1e-11)
    with pytest.raises(DomainError):
        r2_score(p, pt, make_binomial(3, 0.2))


def test_identity_1_on_binomial():
    p = make_poisson(1.0, 1e-16, min_n=11)
    q = make_binomial(10, 0.1)
    l = RealFunctionOnZ(0, np.array([1.0, -1.0, 0.5, 0.25]))
    rep = identity_check_1(p, q, l)
    assert rep.ok and abs(rep.residual) < 1e-14
    assert set(rep.to_json()) == {"lhs", "main_term", "error_term", "residual"}


def test_identity_1_error_term_is_needed():
    p = make_poisson(3.0, 1e-16)
    q = pmf_from_probs([0.25, 0.25, 0.5])
    l = RealFunctionOnZ.identity(0, 10)
    rep = identity_check_1(p, q, l)
    assert rep.ok
    assert abs(rep.error_term) > 1e-3


def test_identity_2_on_geometric_q():
    lam = 1.0
    q = make_geometric(0.5, 1e-14)
    p = make_poisson(lam, 1e-16, min_n=q.n_max + 1)
    pt = p_tilde(poisson_family(), lam, 1e-16, min_n=p.n_max)
    l = RealFunctionOnZ(0, np.array([0.0, 1.0, -1.0, 0.5]))
    rep = identity_check_2(p, pt, q, l)
    assert rep.ok and rep.error_term == 0.0


def test_identity_2_rejects_non_constant_ratio_family():
    q = make_geometric(0.5, 1e-8)
    p = make_geometric(0.4, 1e-12)
    pt = p_tilde(geometric_family(), 0.4, 1e-12, min_n=p.n_max)
    with pytest.raises(PreconditionError):
        identity_check_2(p, pt, q, RealFunctionOnZ.constant(1.0, 0, 3))


def test_factorization_and_ablation():
    p = make_poisson(2.0, 1e-14, min_n=6)
    q = pmf_from_probs([0.1, 0.2, 0.3, 0.4])
    f = RealFunctionOnZ(0, np.r_[0.0, np.linspace(1, -1, 8)])
    assert factorization_check_1(f, p, q) < 1e-12
    assert factorization_check_1(f, p, q, include_error_term=False) > 1e-6
    # a test function that vanishes beyond N makes the error term irrelevant
    g = RealFunctionOnZ(0, np.array([0.0, 1.0, -0.5, 0.25]))
    assert factorization_check_1(g, p, q, include_error_term=False) < 1e-12
    with pytest.raises(ParameterError):
        factorization_check_1(RealFunctionOnZ.constant(1.0, 0, 3), p, q)


def test_subadditive_bound():
    g = make_geometric(0.5, 1e-16)
    assert k1_subadditive_bound(1.0, [0.5]) == pytest.approx(k1_scaled_fisher(1.0, g), rel=1e-10)
    qi = 5 / 6
    s = convolve_n(make_geometric(qi, 1e-15), 5)
    assert k1_subadditive_bound(1.0, [qi] * 5) >= k1_scaled_fisher(1.0, s)
    with pytest.raises(ParameterError):
        k1_subadditive_bound(2.0, [0.5])
    with pytest.raises(ParameterError):
        k1_subadditive_bound(1.0, [])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.05, 1.0), min_size=1, max_size=12), st.floats(0.3, 6.0),
       st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=15))
def test_property_identity_1(weights, lam, lvals):
    q = pmf_from_probs(np.array(weights) / math.fsum(weights))
    p = make_poisson(lam, 1e-15, min_n=q.n_max + 1)
    rep = identity_check_1(p, q, RealFunctionOnZ(0, np.array(lvals)))
    assert abs(rep.residual) <= 1e-10
