"""Seeded randomized suites for the Stein characterizations, identities and bounds.

Each suite returns a :class:`SuiteResult`; an empty ``violations`` list means
every instance passed at its tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._compensated import fsum
from .bounds import (
    d_H,
    h1_constant,
    h2_constant,
    optimal_tv_test_function,
    poisson_target,
    stein_factor_sup_1,
    stein_factor_sup_2,
)
from .errors import PreconditionError
from .information import (
    factorization_check_1,
    identity_check_1,
    identity_check_2,
    k1_scaled_fisher,
    k2_discrete_fisher,
)
from .pmf import Pmf, RealFunctionOnZ, expectation, make_geometric, make_poisson, pmf_from_probs
from .stein import (
    canonical_family,
    cdf_discrepancy,
    characterization_residual,
    geometric_family,
    make_test_function,
    p_tilde,
    poisson_family,
    stein_solution_2,
    t1_apply,
    t2_apply,
    t2_values,
)

__all__ = [
    "Violation",
    "SuiteResult",
    "random_pmf",
    "random_full_support_pmf",
    "random_test_function",
    "random_h_range_2",
    "zero_mean_suite",
    "characterization_suite",
    "factorization_suite",
    "stein_factor_suite",
    "identity1_suite",
    "identity2_suite",
    "holder_suite",
    "stein_suite",
    "identity_suite",
]

SUITE_TAIL_TOL = 1e-14


@dataclass(frozen=True)
class Violation:
    check: str
    instance: str
    detail: str

    def __str__(self) -> str:
        return f"{self.check} [{self.instance}]: {self.detail}"


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    worst: float = -math.inf
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def record(self, value: float, limit: float, instance: str, detail: str = "") -> None:
        self.checked += 1
        self.worst = max(self.worst, value)
        if not value <= limit:
            self.violations.append(Violation(self.name, instance, detail or f"{value!r} > {limit!r}"))


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


def random_pmf(rng: np.random.Generator, lo: int, hi: int, label: str = "q") -> Pmf:
    """Strictly positive finite pmf on ``[lo, hi]`` with weights uniform in ``[0.05, 1]``."""
    w = rng.uniform(0.05, 1.0, hi - lo + 1)
    return pmf_from_probs(w / fsum(w), a=lo, label=label)


def random_full_support_pmf(rng: np.random.Generator, tail_tol: float = 1e-13) -> Pmf:
    """A perturbed Poisson law on the naturals, truncated once the tail drops below ``tail_tol``.

    The first thirteen weights are multiplied by factors in ``[0.5, 1.5]``;
    beyond that the Poisson shape is kept, so the law has full support.
    """
    mu = rng.uniform(0.5, 4.0)
    xs = np.arange(0, 200)
    logw = xs * math.log(mu) - mu - np.array([math.lgamma(x + 1.0) for x in xs])
    w = np.exp(logw)
    w[:13] *= rng.uniform(0.5, 1.5, 13)
    w = w[w > 0.0]
    w = w / fsum(w)
    tails = np.append(np.cumsum(w[::-1])[::-1][1:], 0.0)
    n = int(np.argmax(tails < tail_tol))
    return pmf_from_probs(w[: n + 1], tail_mass=fsum(w[n + 1:]),
                          label=f"perturbed-Po({mu:.3f})", finite=False)


def random_test_function(rng: np.random.Generator, hi: int, vanish_at_zero: bool = True) -> RealFunctionOnZ:
    """Values uniform in ``[-1, 1]`` on ``[0, hi]``; ``f(0) = 0`` by default."""
    vals = rng.uniform(-1.0, 1.0, hi + 1)
    if vanish_at_zero:
        vals[0] = 0.0
    return RealFunctionOnZ(0, vals)


def random_h_range_2(rng: np.random.Generator, hi: int = 20) -> RealFunctionOnZ:
    """Test function on ``[0, hi]`` with ``sup h = 1`` and ``inf h = -1`` attained."""
    vals = rng.uniform(-1.0, 1.0, hi + 1)
    i, j = rng.choice(hi + 1, size=2, replace=False)
    vals[i], vals[j] = 1.0, -1.0
    return RealFunctionOnZ(0, vals)


def zero_mean_suite(lams=(0.5, 1.0, 2.0, 5.0), count: int = 100, seed: int = 0,
                    tail_tol: float = SUITE_TAIL_TOL, tol: float = 1e-10) -> SuiteResult:
    """``|E_p[T1(f, p)]| <= tol`` for Poisson ``p`` and random bounded ``f`` with ``f(0) = 0``."""
    res = SuiteResult("stein-zero-mean")
    rng = _rng(seed, 1)
    for lam in lams:
        p = make_poisson(lam, tail_tol)
        for i in range(count):
            hi = int(rng.integers(1, p.n_max + 1))
            f = make_test_function(random_test_function(rng, hi).values, 0, "F1", p=p)
            val = abs(fsum([p.prob(x) * t1_apply(f, p, x) for x in range(p.n_max + 1)]))
            res.record(val, tol, f"lambda={lam!r} f#{i}")
    return res


def characterization_suite(count: int = 50, seed: int = 0, tol: float = 1e-12) -> SuiteResult:
    """``max_z`` residual over ``f_z`` equals the cdf discrepancy and is positive for distinct pmfs on ``[0, 12]``."""
    res = SuiteResult("stein-characterization")
    rng = _rng(seed, 2)
    for i in range(count):
        a = int(rng.integers(0, 6))
        b = int(rng.integers(a + 1, 13))
        p = random_pmf(rng, a, b, "p")
        x_law = random_pmf(rng, 0, 12, "x")
        resid = characterization_residual(p, x_law, canonical_family(p))
        oracle = cdf_discrepancy(p, x_law)
        gap = abs(resid - oracle)
        if not oracle > 0.0:
            res.violations.append(Violation(res.name, f"pair#{i}", "distinct laws not detected"))
        res.record(gap, tol, f"pair#{i} support=[{a},{b}]", f"residual {resid!r} vs oracle {oracle!r}")
    return res


def factorization_suite(count: int = 100, seed: int = 0, tol: float = 1e-12,
                        tail_tol: float = SUITE_TAIL_TOL) -> SuiteResult:
    """Pointwise factorization of ``T1`` with its error term, plus the ablation showing the term matters."""
    res = SuiteResult("factorization")
    rng = _rng(seed, 3)
    ablation_hit = False
    for i in range(count):
        lam = float(rng.uniform(0.5, 5.0))
        n = int(rng.integers(1, 13))
        q = random_pmf(rng, 0, n)
        p = make_poisson(lam, tail_tol, min_n=n + 1)
        f = random_test_function(rng, int(rng.integers(1, p.n_max + 2)))
        val = factorization_check_1(f, p, q)
        res.record(val, tol, f"lambda={lam!r} N={n} #{i}")
        if np.any(f.on(n + 1, f.window_hi) != 0.0):
            ablation_hit |= factorization_check_1(f, p, q, include_error_term=False) > 1e-6
    if not ablation_hit:
        res.violations.append(Violation(res.name, "ablation", "dropping the error term never mattered"))
    return res


def stein_factor_suite(lams=(0.5, 1.0, 2.0, 5.0, 10.0), count: int = 20, seed: int = 0,
                       window: int = 30) -> SuiteResult:
    """Both Stein factors stay below ``H(lam) * 2`` for test functions of range 2."""
    res = SuiteResult("stein-factor-cap")
    rng = _rng(seed, 4)
    hs = [random_h_range_2(rng) for _ in range(count)]
    for lam in lams:
        for i, h in enumerate(hs):
            for which, fn in (("sup1", stein_factor_sup_1), ("sup2", stein_factor_sup_2)):
                sup, cap = fn(lam, h, window)
                res.record(sup - cap, 1e-12, f"lambda={lam!r} h#{i} {which}", f"{sup!r} > cap {cap!r}")
    return res


def identity1_suite(count: int = 200, seed: int = 0, tol: float = 1e-10,
                    tail_tol: float = SUITE_TAIL_TOL) -> SuiteResult:
    """First identity for truncated Poisson targets against random ``q`` on ``[0, N <= 12]``."""
    res = SuiteResult("identity-1")
    rng = _rng(seed, 5)
    for i in range(count):
        lam = float(rng.uniform(0.5, 5.0))
        n = int(rng.integers(0, 13))
        q = random_pmf(rng, 0, n)
        p = make_poisson(lam, tail_tol, min_n=n + 1)
        l = random_test_function(rng, int(rng.integers(0, 16)), vanish_at_zero=False)
        rep = identity_check_1(p, q, l, tol)
        res.record(abs(rep.residual), tol, f"lambda={lam!r} N={n} #{i}")
    return res


def identity2_suite(count: int = 100, seed: int = 0, tol: float = 1e-9,
                    tail_tol: float = SUITE_TAIL_TOL) -> SuiteResult:
    """Second identity for Poisson targets against random full-support laws."""
    res = SuiteResult("identity-2")
    rng = _rng(seed, 6)
    fam = poisson_family()
    for i in range(count):
        lam = float(rng.uniform(0.5, 5.0))
        q = random_full_support_pmf(rng)
        p = make_poisson(lam, tail_tol, min_n=q.n_max + 1)
        pt = p_tilde(fam, lam, tail_tol, min_n=p.n_max)
        l = random_test_function(rng, int(rng.integers(0, 16)), vanish_at_zero=False)
        rep = identity_check_2(p, pt, q, l, tol)
        res.record(abs(rep.residual), tol, f"lambda={lam!r} {q.label} #{i}")
        # the second Stein solution must solve its equation on the bulk of the window
        f = stein_solution_2(p, pt, l)
        el = expectation(p, l)
        bulk = [x for x in range(p.n_max + 1) if p.prob(x) > 1e-8]
        vals = t2_values(f, p, pt)
        gap = max(abs(vals[x] - (l(x) - el)) for x in bulk)
        # pointwise operator agrees with the vectorised one
        gap = max(gap, abs(t2_apply(f, p, pt, bulk[-1]) - vals[bulk[-1]]))
        res.record(gap, tol, f"T2 solution lambda={lam!r} #{i}")
    # families whose pt(x+1)/p(x) is not constant must be refused
    g = make_geometric(0.5, tail_tol)
    gq = random_full_support_pmf(rng, tail_tol=1e-6)
    try:
        identity_check_2(g, p_tilde(geometric_family(), 0.5, tail_tol, min_n=g.n_max), gq,
                         RealFunctionOnZ.constant(1.0, 0, 3))
    except PreconditionError:
        pass
    else:
        res.violations.append(Violation(res.name, "geometric target", "non-constant ratio was accepted"))
    return res


def holder_suite(count: int = 50, seed: int = 0, class_size: int = 5) -> SuiteResult:
    """``d_H <= H_1 sqrt(K1)`` and ``d_H <= H_2 sqrt(K2)`` on random finite classes."""
    res = SuiteResult("holder")
    rng = _rng(seed, 7)
    for i in range(count):
        lam = float(rng.uniform(0.5, 5.0))
        q1 = random_pmf(rng, 0, int(rng.integers(1, 13)))
        q2 = random_full_support_pmf(rng)
        for tag, q, const_fn, info_fn in (("K1", q1, h1_constant, k1_scaled_fisher),
                                          ("K2", q2, h2_constant, k2_discrete_fisher)):
            p = poisson_target(lam, q)
            hs = [random_test_function(rng, 15, vanish_at_zero=False) for _ in range(class_size)]
            hs.append(optimal_tv_test_function(p, q))
            lhs = d_H(p, q, hs)
            rhs = const_fn(lam, q, hs) * math.sqrt(info_fn(lam, q))
            res.record(lhs - rhs, 1e-12, f"{tag} lambda={lam!r} #{i}", f"d_H {lhs!r} > {rhs!r}")
    return res


def stein_suite(seed: int = 0, count: int | None = None, window: int = 30) -> list[SuiteResult]:
    """Characterization-side checks: zero mean, detection, factorization, Stein-factor cap."""
    kw = {} if count is None else {"count": count}
    return [
        zero_mean_suite(seed=seed, **kw),
        characterization_suite(seed=seed, **kw),
        factorization_suite(seed=seed, **kw),
        stein_factor_suite(seed=seed, window=window, **kw),
    ]


def identity_suite(seed: int = 0, count: int | None = None) -> list[SuiteResult]:
    """Identity-side checks: both expectation identities and the Hölder bounds."""
    kw = {} if count is None else {"count": count}
    return [
        identity1_suite(seed=seed, **kw),
        identity2_suite(seed=seed, **kw),
        holder_suite(seed=seed, **kw),
    ]
