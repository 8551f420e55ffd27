"""Stein operators for discrete densities and solutions of their Stein equations.

Two operators are provided:

* ``T1(f, p)(x) = [f(x+1)p(x+1) - f(x)p(x)] / p(x)`` on the support,
* ``T2(f, p)(x) = [f(x+1)pt(x+1) - f(x)pt(x)] / p(x)`` on the support,

where ``pt`` is the derivative in the parameter of ``x -> p_theta(x)/p_theta(a)``.
Both vanish off the support. For a truncated pmf the value ``p(N+1)`` is the
family's analytic continuation when the constructor recorded one and zero
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._compensated import compensated_cumsum, compensated_revcumsum, fsum
from .errors import DomainError, ParameterError
from .pmf import Pmf, RealFunctionOnZ, cdf, make_geometric, make_poisson

__all__ = [
    "F1",
    "F2",
    "UNCONSTRAINED",
    "TestFunction",
    "ParametricFamily",
    "poisson_family",
    "geometric_family",
    "make_test_function",
    "t1_apply",
    "t1_values",
    "canonical_f_z",
    "canonical_family",
    "stein_solution_1",
    "p_tilde",
    "t2_apply",
    "t2_values",
    "stein_solution_2",
    "characterization_residual",
    "cdf_discrepancy",
]

F1 = "F1"
F2 = "F2"
UNCONSTRAINED = "unconstrained"
_TAGS = (F1, F2, UNCONSTRAINED)


@dataclass(frozen=True, eq=False)
class TestFunction(RealFunctionOnZ):
    """A :class:`RealFunctionOnZ` tagged with the test class it was built for."""

    __test__ = False  # not a pytest class

    class_tag: str = UNCONSTRAINED

    def __post_init__(self):
        super().__post_init__()
        if self.class_tag not in _TAGS:
            raise ParameterError(f"unknown test-function class {self.class_tag!r}")


def make_test_function(values, window_lo: int, class_tag: str = UNCONSTRAINED,
                       p: Pmf | None = None, ptilde: RealFunctionOnZ | None = None) -> TestFunction:
    """Build a tagged test function, checking class membership against ``p``.

    F1 requires ``f(a) = 0``; F1 and F2 require ``f*p`` (resp. ``f*pt``) to be
    finite on the window, which on a finite window means finite values.
    """
    f = TestFunction(window_lo, np.asarray(values, dtype=np.float64), class_tag)
    if class_tag == F1:
        if p is None:
            raise ParameterError("F1 membership is checked against a pmf; pass p")
        if f(p.a) != 0.0:
            raise ParameterError(f"F1 test functions must vanish at a = {p.a}, got {f(p.a)!r}")
    elif class_tag == F2:
        if ptilde is None:
            raise ParameterError("F2 membership is checked against pt; pass ptilde")
        lo, hi = f.window_lo, f.window_hi
        if not np.all(np.isfinite(f.on(lo, hi) * ptilde.on(lo, hi))):
            raise ParameterError("f * pt must be bounded on the window")
    return f


@dataclass(frozen=True)
class ParametricFamily:
    """A family ``theta -> p_theta`` with theta-independent support.

    ``log_pmf(theta, xs)`` evaluates the untruncated log-density at integer
    points; ``pmf_at(theta, tail_tol)`` returns the truncated :class:`Pmf`.
    ``dpmf_dtheta(theta, xs)``, when given, is the closed-form derivative
    ``d/dtheta p_theta(x)``; otherwise central differences are used.
    """

    name: str
    pmf_at: Callable[[float, float], Pmf]
    log_pmf: Callable[[float, np.ndarray], np.ndarray]
    theta_domain: tuple[float, float]
    a: int = 0
    dpmf_dtheta: Callable[[float, np.ndarray], np.ndarray] | None = None


def _poisson_log_pmf(lam, xs):
    xs = np.asarray(xs, dtype=np.float64)
    lg = np.array([math.lgamma(x + 1.0) for x in xs])
    return xs * math.log(lam) - lam - lg


def _poisson_dpmf(lam, xs):
    xs = np.asarray(xs)
    here = np.exp(_poisson_log_pmf(lam, xs))
    prev = np.where(xs >= 1, np.exp(_poisson_log_pmf(lam, np.maximum(xs - 1, 0))), 0.0)
    return prev - here


def poisson_family() -> ParametricFamily:
    return ParametricFamily(
        name="poisson",
        pmf_at=lambda lam, tol: make_poisson(lam, tol),
        log_pmf=_poisson_log_pmf,
        theta_domain=(0.0, math.inf),
        dpmf_dtheta=_poisson_dpmf,
    )


def _geometric_log_pmf(q, xs):
    return math.log(q) + np.asarray(xs, dtype=np.float64) * math.log1p(-q)


def _geometric_dpmf(q, xs):
    xs = np.asarray(xs, dtype=np.float64)
    # d/dq q(1-q)^x = (1-q)^(x-1) (1 - (x+1) q)
    return np.exp((xs - 1.0) * math.log1p(-q)) * (1.0 - (xs + 1.0) * q)


def geometric_family() -> ParametricFamily:
    """Geometric laws ``q (1-q)^x`` indexed by the success probability ``q``."""
    return ParametricFamily(
        name="geometric",
        pmf_at=lambda q, tol: make_geometric(q, tol),
        log_pmf=_geometric_log_pmf,
        theta_domain=(0.0, 1.0),
        dpmf_dtheta=_geometric_dpmf,
    )


def t1_values(f: RealFunctionOnZ, p: Pmf) -> np.ndarray:
    """``T1(f, p)(x)`` for every ``x`` in the stored window ``[a, N]``."""
    lo, hi = p.a, p.n_max
    return f.on(lo + 1, hi + 1) * p.ratios - f.on(lo, hi)


def t1_apply(f: RealFunctionOnZ, p: Pmf, x: int) -> float:
    if x < p.a or x > p.n_max:
        return 0.0
    return f(x + 1) * p.ratio(x) - f(x)


def _tail_value(l: RealFunctionOnZ, p: Pmf) -> float:
    # dropped tail mass is credited with l(N+1); exact whenever l is constant beyond N
    return l(p.n_max + 1) * p.tail_mass


def _stein_sums(p: Pmf, l: RealFunctionOnZ) -> tuple[np.ndarray, float]:
    """Partial sums ``S(x) = sum_{k<=x} (l(k) - E_p l) p(k)`` for ``x = a..N``.

    Below the median the sums run forward; above it they are obtained from
    the complementary tail sums, which keeps ``S(x)/p(x)`` accurate where
    ``p(x)`` is tiny.
    """
    lv = l.on(p.a, p.n_max)
    tail = _tail_value(l, p)
    el = fsum(np.append(lv * p.probs, tail))
    terms = (lv - el) * p.probs
    forward = compensated_cumsum(terms)
    # sum over k > x including the dropped tail, credited with l(N+1)
    tail_term = (l(p.n_max + 1) - el) * p.tail_mass
    after = np.append(compensated_revcumsum(terms)[1:], 0.0) + tail_term
    backward = -after
    below = compensated_cumsum(p.probs) <= 0.5
    return np.where(below, forward, backward), el


def _divide(num: np.ndarray, log_den: np.ndarray, sign_den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num)
    nz = num != 0.0
    out[nz] = np.sign(num[nz]) * sign_den[nz] * np.exp(np.log(np.abs(num[nz])) - log_den[nz])
    return out


def stein_solution_1(p: Pmf, l: RealFunctionOnZ) -> TestFunction:
    """Solution of ``T1(f, p) = l - E_p l`` with ``f(a) = 0``.

    ``f(x) = (1/p(x)) sum_{k=a}^{x-1} (l(k) - E_p l) p(k)``. The window is
    ``[a, N+1]`` when ``p`` carries its family ratio, ``[a, N]`` otherwise.
    ``E_p l`` credits the dropped tail with ``l(N+1)``.
    """
    s, _ = _stein_sums(p, l)
    log_den = p.log_probs[1:]
    num = s[:-1]
    if p.next_ratio is not None and p.next_ratio > 0.0:
        log_den = np.append(log_den, p.log_probs[-1] + math.log(p.next_ratio))
        num = s
    vals = np.concatenate(([0.0], _divide(num, log_den, np.ones_like(log_den))))
    return TestFunction(p.a, vals, F1)


def canonical_f_z(p: Pmf, z: int) -> TestFunction:
    """The characterising function ``f_z`` solving ``T1(f_z, p) = 1[x<=z] - P_p(X<=z)``."""
    hi = p.n_max + 1
    return stein_solution_1(p, RealFunctionOnZ.indicator_le(z, p.a, hi))


def canonical_family(p: Pmf) -> list[TestFunction]:
    """``f_z`` for every ``z`` in the stored window."""
    return [canonical_f_z(p, z) for z in range(p.a, p.n_max + 1)]


def p_tilde(fam: ParametricFamily, theta: float, tail_tol: float = 1e-12,
            min_n: int = 0) -> RealFunctionOnZ:
    """Derivative in theta of ``x -> p_theta(x)/p_theta(a)`` on ``[a, N+1]``.

    ``N`` is the truncation point of ``fam.pmf_at(theta, tail_tol)``, raised
    to ``min_n`` when that is larger.

    Uses ``fam.dpmf_dtheta`` through the quotient rule when available,
    otherwise a central difference with step ``cbrt(eps) * max(1, |theta|)``.
    """
    lo_dom, hi_dom = fam.theta_domain
    if not (lo_dom < theta < hi_dom):
        raise ParameterError(f"theta = {theta!r} is not interior to {fam.theta_domain}")
    n = max(fam.pmf_at(theta, tail_tol).n_max, int(min_n))
    xs = np.arange(fam.a, n + 2)
    if fam.dpmf_dtheta is not None:
        logp = fam.log_pmf(theta, xs)
        d = fam.dpmf_dtheta(theta, xs)
        inv_pa = math.exp(-logp[0])
        vals = d * inv_pa - np.exp(logp - logp[0]) * (d[0] * inv_pa)
    else:
        h = np.cbrt(np.finfo(np.float64).eps) * max(1.0, abs(theta))
        if not (lo_dom < theta - h and theta + h < hi_dom):
            raise ParameterError(f"theta = {theta!r} too close to the boundary for differencing")
        up = fam.log_pmf(theta + h, xs)
        dn = fam.log_pmf(theta - h, xs)
        vals = (np.exp(up - up[0]) - np.exp(dn - dn[0])) / (2.0 * h)
    vals[0] = 0.0
    return RealFunctionOnZ(fam.a, vals)


def t2_values(f: RealFunctionOnZ, p: Pmf, ptilde: RealFunctionOnZ) -> np.ndarray:
    """``T2(f, p)(x)`` for every ``x`` in ``[a, N]``."""
    lo, hi = p.a, p.n_max
    fp_next = f.on(lo + 1, hi + 1) * ptilde.on(lo + 1, hi + 1)
    fp_here = f.on(lo, hi) * ptilde.on(lo, hi)
    return (fp_next - fp_here) / p.probs


def t2_apply(f: RealFunctionOnZ, p: Pmf, ptilde: RealFunctionOnZ, x: int) -> float:
    if x < p.a or x > p.n_max:
        return 0.0
    return (f(x + 1) * ptilde(x + 1) - f(x) * ptilde(x)) / p.prob(x)


def stein_solution_2(p: Pmf, ptilde: RealFunctionOnZ, l: RealFunctionOnZ) -> TestFunction:
    """Solution of ``T2(f, p) = l - E_p l``.

    ``f(x) = (1/pt(x)) sum_{k=a}^{x-1} (l(k) - E_p l) p(k)`` for ``x > a`` and
    ``f(a) = 0`` (``pt(a) = 0``, so that value never enters ``T2``).
    """
    hi = min(p.n_max + 1, ptilde.window_hi)
    pt = ptilde.on(p.a + 1, hi)
    inner = pt[: p.n_max - p.a]
    if np.any(inner == 0.0):
        bad = p.a + 1 + int(np.nonzero(inner == 0.0)[0][0])
        raise DomainError(f"pt vanishes at x = {bad}; the second Stein solution is undefined")
    s, _ = _stein_sums(p, l)
    num = s[: len(pt)]
    if len(pt) and pt[-1] == 0.0:
        # pt(N+1) unavailable: stop the window at N
        pt, num = pt[:-1], num[:-1]
    with np.errstate(divide="ignore"):
        vals = _divide(num, np.log(np.abs(pt)), np.sign(pt))
    return TestFunction(p.a, np.concatenate(([0.0], vals)), F2)


def characterization_residual(p: Pmf, x_law: Pmf, fs) -> float:
    """``max_f |E_{x_law}[T1(f, p)(X)]|`` over the supplied test functions."""
    fs = list(fs)
    if not fs:
        raise ParameterError("characterization check needs at least one test function")
    lo, hi = max(p.a, x_law.a), min(p.n_max, x_law.n_max)
    if lo > hi:
        return 0.0
    weights = x_law.on(lo, hi)
    worst = 0.0
    for f in fs:
        if f(p.a) != 0.0:
            raise ParameterError("characterization test functions must vanish at a")
        t = t1_values(f, p)[lo - p.a : hi - p.a + 1]
        worst = max(worst, abs(fsum(weights * t)))
    return worst


def cdf_discrepancy(p: Pmf, x_law: Pmf) -> float:
    """``max_z |P(X<=z, X in S_p) - P(X in S_p) P_p(X<=z)|``: what ``f_z`` detects."""
    lo, hi = p.a, p.n_max
    in_support = fsum(x_law.on(lo, hi))
    worst = 0.0
    for z in range(lo, hi + 1):
        joint = fsum(x_law.on(lo, z))
        worst = max(worst, abs(joint - in_support * cdf(p, z)))
    return worst
