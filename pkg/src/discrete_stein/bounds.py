"""Probability metrics, Stein factors and total-variation bounds for Poisson approximation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._compensated import fsum
from .errors import DomainError, ParameterError, PreconditionError
from .information import k1_scaled_fisher, k2_discrete_fisher
from .pmf import Pmf, RealFunctionOnZ, expectation, make_poisson
from .stein import p_tilde, poisson_family, stein_solution_1, stein_solution_2

__all__ = [
    "TARGET_TAIL_TOL",
    "BoundReport",
    "SteinFactor",
    "tv_distance",
    "optimal_tv_test_function",
    "d_H",
    "kolmogorov_class",
    "stein_magic_H",
    "stein_factor_sup_1",
    "stein_factor_sup_2",
    "scaled_stein_solution_2",
    "tv_bound_k1",
    "tv_bound_k2",
    "khj_tv_bound",
    "h1_constant",
    "h2_constant",
    "poisson_target",
]

# Poisson targets are truncated far below every tolerance used on bounds.
TARGET_TAIL_TOL = 1e-16
HOLDS_TOL = 1e-12


@dataclass(frozen=True)
class BoundReport:
    kind: str
    distance_exact: float
    info_value: float
    magic_constant: float
    error_term: float
    bound_value: float

    @property
    def slack(self) -> float:
        return self.bound_value - self.distance_exact

    @property
    def holds(self) -> bool:
        return self.slack >= -HOLDS_TOL

    def to_json(self) -> dict:
        return {
            "distance": self.distance_exact,
            "info": self.info_value,
            "constant": self.magic_constant,
            "error_term": self.error_term,
            "bound": self.bound_value,
            "slack": self.slack,
            "holds": self.holds,
            "kind": self.kind,
        }


class SteinFactor(NamedTuple):
    sup: float
    cap: float


def poisson_target(lam: float, q: Pmf, tail_tol: float = TARGET_TAIL_TOL) -> Pmf:
    """Poisson(lam) truncated so its window covers ``q`` and one step beyond, if representable."""
    return make_poisson(lam, tail_tol, min_n=q.n_max + 1)


def _union(p: Pmf, q: Pmf) -> tuple[int, int]:
    return min(p.a, q.a), max(p.n_max, q.n_max)


def optimal_tv_test_function(p: Pmf, q: Pmf) -> RealFunctionOnZ:
    """``h = 2 * 1[p <= q] - 1`` on the union of the windows (ties map to +1)."""
    lo, hi = _union(p, q)
    pv, qv = p.on(lo, hi), q.on(lo, hi)
    return RealFunctionOnZ(lo, np.where(pv <= qv, 1.0, -1.0))


def tv_distance(p: Pmf, q: Pmf, count_tails: bool = True) -> float:
    """Half the L1 distance between the stored vectors.

    With ``count_tails`` the dropped tail masses are added as pure
    discrepancy, which can only overstate the distance between the
    untruncated laws.
    """
    lo, hi = _union(p, q)
    diff = p.on(lo, hi) - q.on(lo, hi)
    half_l1 = 0.5 * fsum(np.abs(diff))
    h = optimal_tv_test_function(p, q)
    via_h = 0.5 * (expectation(q, h) - expectation(p, h))
    if abs(via_h - half_l1) > 1e-12:
        raise ArithmeticError(f"TV cross-check failed: {half_l1!r} vs {via_h!r}")
    if count_tails:
        return half_l1 + 0.5 * (p.tail_mass + q.tail_mass)
    return half_l1


def d_H(p: Pmf, q: Pmf, hs) -> float:
    """``max_h |E_q h - E_p h|`` over a finite class: a lower bound for the supremum over any larger class."""
    hs = list(hs)
    if not hs:
        raise ParameterError("d_H needs a non-empty class of test functions")
    return max(abs(expectation(q, h) - expectation(p, h)) for h in hs)


def kolmogorov_class(p: Pmf, q: Pmf) -> list[RealFunctionOnZ]:
    """Indicators ``1[x <= z]`` for ``z`` across both windows."""
    lo, hi = _union(p, q)
    return [RealFunctionOnZ.indicator_le(z, lo, hi) for z in range(lo, hi + 1)]


def stein_magic_H(lam: float) -> float:
    """``min(1, sqrt(2 / (e lam)))``."""
    if not lam > 0:
        raise ParameterError(f"lambda must be positive, got {lam!r}")
    return min(1.0, math.sqrt(2.0 / (math.e * lam)))


def _oscillation(h: RealFunctionOnZ) -> float:
    # h is zero off its window, and the naturals always reach past it
    vals = h.values
    return max(float(vals.max()), 0.0) - min(float(vals.min()), 0.0)


def _poisson_for_window(lam: float, h: RealFunctionOnZ, window: int, tail_tol: float) -> Pmf:
    if window < 0:
        raise ParameterError("window must be non-negative")
    p = make_poisson(lam, tail_tol, min_n=max(window + 1, h.window_hi))
    if p.n_max < window + 1:
        raise DomainError(f"Poisson({lam:g}) is not representable up to x = {window + 1}")
    return p


def stein_factor_sup_1(lam: float, h: RealFunctionOnZ, window: int,
                       tail_tol: float = TARGET_TAIL_TOL) -> SteinFactor:
    """``sup_{0 <= x <= window} |f(x+1)/(x+1)|`` for the first Poisson Stein solution of ``h``.

    Returned with the cap ``H(lam) * (sup h - inf h)``.
    """
    p = _poisson_for_window(lam, h, window, tail_tol)
    f = stein_solution_1(p, h)
    xs = np.arange(window + 1, dtype=np.float64)
    vals = f.on(1, window + 1) / (xs + 1.0)
    return SteinFactor(float(np.max(np.abs(vals))), stein_magic_H(lam) * _oscillation(h))


def stein_factor_sup_2(lam: float, h: RealFunctionOnZ, window: int,
                       tail_tol: float = TARGET_TAIL_TOL) -> SteinFactor:
    """``sup_{0 <= x <= window} |e^lam f(x) / lam|`` for the second Poisson Stein solution of ``h``."""
    p = _poisson_for_window(lam, h, window, tail_tol)
    vals = scaled_stein_solution_2(lam, p, h).on(0, window)
    return SteinFactor(float(np.max(np.abs(vals))), stein_magic_H(lam) * _oscillation(h))


def scaled_stein_solution_2(lam: float, p: Pmf, h: RealFunctionOnZ) -> RealFunctionOnZ:
    """``e^lam f(x) / lam`` for the second Stein solution against ``p = Poisson(lam)``."""
    pt = p_tilde(poisson_family(), lam, TARGET_TAIL_TOL, min_n=p.n_max)
    f = stein_solution_2(p, pt, h)
    return RealFunctionOnZ(f.window_lo, f.values * math.exp(lam - math.log(lam)))


def _first_error_term(p: Pmf, q: Pmf, h: RealFunctionOnZ) -> float:
    """``|q(N) f(N+1) p(N+1)/p(N)|`` with ``f`` the first Stein solution of ``h``.

    When ``p`` cannot be represented out to ``N`` the exact value is replaced
    by the bound ``q(N) osc(h) lam/(N+1-lam)`` on the Poisson tail ratio.
    """
    n = q.n_max
    if n <= p.n_max:
        f = stein_solution_1(p, h)
        return abs(q.prob(n) * f(n + 1) * p.ratio(n))
    lam = p.next_ratio * (p.n_max + 1)
    if n + 1 <= lam:
        raise DomainError(f"Poisson({lam:g}) is not representable across the window of {q.label}")
    return q.prob(n) * _oscillation(h) * lam / (n + 1 - lam)


def tv_bound_k1(lam: float, q: Pmf, tail_tol: float = TARGET_TAIL_TOL) -> BoundReport:
    """``TV(Po(lam), q) <= sqrt(lam) H(lam) sqrt(K1) + e^N`` with the exact error term."""
    if q.a < 0:
        raise DomainError("q must be supported in the naturals")
    p = poisson_target(lam, q, tail_tol)
    tv = tv_distance(p, q)
    k1 = k1_scaled_fisher(lam, q)
    err = _first_error_term(p, q, optimal_tv_test_function(p, q))
    magic = math.sqrt(lam) * stein_magic_H(lam)
    return BoundReport("K1", tv, k1, magic, err, magic * math.sqrt(k1) + err)


def tv_bound_k2(lam: float, q: Pmf, tail_tol: float = TARGET_TAIL_TOL) -> BoundReport:
    """``TV(Po(lam), q) <= H(lam) sqrt(K2)``; only for ``q`` with full support."""
    if q.finite:
        raise PreconditionError("K2 bound requires full support (N = ∞)")
    if not lam > 0:
        raise ParameterError(f"lambda must be positive, got {lam!r}")
    p = poisson_target(lam, q, tail_tol)
    tv = tv_distance(p, q)
    k2 = k2_discrete_fisher(lam, q)
    magic = stein_magic_H(lam)
    return BoundReport("K2", tv, k2, magic, 0.0, magic * math.sqrt(k2))


def khj_tv_bound(lam: float, q: Pmf) -> float:
    """Comparison bound ``sqrt(2 K1)`` obtained from a Poincare inequality."""
    return math.sqrt(2.0 * k1_scaled_fisher(lam, q))


def h1_constant(lam: float, q: Pmf, hs, tail_tol: float = TARGET_TAIL_TOL) -> float:
    """Stein factor of the first bound over a finite class.

    ``sup_h ( sqrt(E_q[(sqrt(lam) f_h(X+1)/(X+1))^2]) + |e^N(h)| / sqrt(K1) )``;
    the second term is dropped when ``K1 = 0``.
    """
    hs = list(hs)
    if not hs:
        raise ParameterError("h1_constant needs a non-empty class of test functions")
    if q.a != 0:
        raise DomainError("q must be supported on the naturals starting at 0")
    p = poisson_target(lam, q, tail_tol)
    n = q.n_max
    if n > p.n_max:
        raise DomainError(f"Poisson({lam:g}) is not representable across the window of {q.label}")
    k1 = k1_scaled_fisher(lam, q)
    xs = np.arange(n + 1, dtype=np.float64)
    best = -math.inf
    for h in hs:
        f = stein_solution_1(p, h)
        w = math.sqrt(lam) * f.on(1, n + 1) / (xs + 1.0)
        val = math.sqrt(fsum(q.probs * w * w))
        if k1 > 0.0:
            val += abs(q.prob(n) * f(n + 1) * p.ratio(n)) / math.sqrt(k1)
        best = max(best, val)
    return best


def h2_constant(lam: float, q: Pmf, hs, tail_tol: float = TARGET_TAIL_TOL) -> float:
    """``sqrt(sup_h E_q[(e^lam f_h(X) / lam)^2])`` for the second Stein solution."""
    hs = list(hs)
    if not hs:
        raise ParameterError("h2_constant needs a non-empty class of test functions")
    if q.finite:
        raise PreconditionError("the second Stein factor needs q with full support (N = ∞)")
    if q.a != 0:
        raise DomainError("q must be supported on the naturals starting at 0")
    p = poisson_target(lam, q, tail_tol)
    n = q.n_max
    if n > p.n_max:
        raise DomainError(f"Poisson({lam:g}) is not representable across the window of {q.label}")
    best = 0.0
    for h in hs:
        g = scaled_stein_solution_2(lam, p, h).on(0, n)
        best = max(best, fsum(q.probs * g * g))
    return math.sqrt(best)
