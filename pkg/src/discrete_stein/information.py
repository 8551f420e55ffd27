"""Score functions, discrete information functionals and the identities linking them.

For a target ``p`` on the naturals and a law ``q`` stored on ``[0, N]``:

* ``r1(p, q)(x) = p(x+1)/p(x) - q(x+1)/q(x)`` on ``[0, N]``,
* ``r2(p, q)(x) = pt(x+1)/p(x) * q(x-1)/q(x) - pt(x)/p(x)``,

and, for a Poisson target, the scaled Fisher information ``K1``, the
discrete (Katti-Panjer) Fisher information ``K2`` and Johnstone-MacGibbon's
``I(q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._compensated import fsum
from .errors import DomainError, ParameterError, PreconditionError
from .pmf import Pmf, RealFunctionOnZ, expectation
from .stein import stein_solution_1, stein_solution_2, t1_values

__all__ = [
    "ScoreField",
    "IdentityReport",
    "r1_score",
    "r2_score",
    "k1_scaled_fisher",
    "k2_discrete_fisher",
    "jm_fisher_information",
    "factorization_check_1",
    "identity_check_1",
    "identity_check_2",
    "k1_subadditive_bound",
]


@dataclass(frozen=True, eq=False)
class ScoreField(RealFunctionOnZ):
    kind: str = "r1"


@dataclass(frozen=True)
class IdentityReport:
    """``lhs = E_q l - E_p l`` against ``main_term + error_term``."""

    lhs: float
    main_term: float
    error_term: float
    residual: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return abs(self.residual) <= self.tolerance

    def to_json(self) -> dict:
        return {
            "lhs": self.lhs,
            "main_term": self.main_term,
            "error_term": self.error_term,
            "residual": self.residual,
        }


def _require_naturals(*pmfs: Pmf) -> None:
    for p in pmfs:
        if p.a != 0:
            raise DomainError(f"{p.label or 'pmf'} must be supported on the naturals starting at 0 (a = {p.a})")


def _require_cover(p: Pmf, q: Pmf) -> None:
    if q.n_max > p.n_max:
        if p.finite:
            raise DomainError(f"support of {q.label} is not contained in the support of {p.label}")
        raise DomainError(
            f"window of {p.label} ends at {p.n_max} before {q.label} ends at {q.n_max}; "
            "truncate the target further"
        )


def _backward_ratios(q: Pmf) -> np.ndarray:
    """``q(x-1)/q(x)`` on the window, zero at ``x = a``."""
    return np.concatenate(([0.0], np.exp(-np.diff(q.log_probs))))


def r1_score(p: Pmf, q: Pmf) -> ScoreField:
    """First score function on ``[0, N_q]``; ``q(N+1)`` is 0 unless ``q`` records its family ratio."""
    _require_naturals(p, q)
    _require_cover(p, q)
    n = q.n_max
    vals = p.ratios[: n + 1] - q.ratios
    return ScoreField(0, vals, "r1")


def r2_score(p: Pmf, ptilde: RealFunctionOnZ, q: Pmf) -> ScoreField:
    """Second score function on ``[0, N_q]`` (``q(-1) = 0``)."""
    _require_naturals(p, q)
    if q.finite:
        raise DomainError("the second score needs q with full support on the naturals")
    _require_cover(p, q)
    n = q.n_max
    if ptilde.window_hi < n + 1:
        raise DomainError(f"pt must be known up to {n + 1}")
    pq = p.probs[: n + 1]
    ahead = ptilde.on(1, n + 1) / pq
    here = ptilde.on(0, n) / pq
    return ScoreField(0, ahead * _backward_ratios(q) - here, "r2")


def k1_scaled_fisher(lam: float, q: Pmf) -> float:
    """``lam * E_q[((X+1) q(X+1) / (lam q(X)) - 1)^2]``."""
    if not lam > 0:
        raise ParameterError(f"lambda must be positive, got {lam!r}")
    if q.a < 0:
        raise DomainError("K1 needs q supported in the naturals")
    score = (q.xs + 1.0) * q.ratios / lam - 1.0
    return lam * fsum(q.probs * score * score)


def k2_discrete_fisher(lam: float, q: Pmf) -> float:
    """``E_q[(lam q(X-1)/q(X) - X)^2]``, summed directly so ``e^lam`` never appears."""
    if not lam > 0:
        raise ParameterError(f"lambda must be positive, got {lam!r}")
    _require_naturals(q)
    score = lam * _backward_ratios(q) - q.xs
    return fsum(q.probs * score * score)


def jm_fisher_information(q: Pmf) -> float:
    """``E_q[(q(X-1)/q(X) - 1)^2]``."""
    _require_naturals(q)
    score = _backward_ratios(q) - 1.0
    return fsum(q.probs * score * score)


def _boundary_masked_r1(p: Pmf, q: Pmf) -> np.ndarray:
    # At x = N the ratio p(N+1)/q(N+1) leaves S_q; the indicator convention
    # zeroes it and the boundary contribution is carried by e^N instead.
    r = r1_score(p, q).values.copy()
    r[-1] = 0.0
    return r


def factorization_check_1(f: RealFunctionOnZ, p: Pmf, q: Pmf, include_error_term: bool = True) -> float:
    """Largest pointwise residual of ``T1(f,p) = T1(f,q) + f(x+1) r1 + e^N_{f,p}`` on ``p``'s window.

    ``q`` is treated as a density on ``[0, N]`` (``q(N+1) = 0``). With
    ``include_error_term=False`` the error term is dropped, which is only
    harmless when ``f`` vanishes beyond ``N``.
    """
    _require_naturals(p, q)
    _require_cover(p, q)
    if f(0) != 0.0:
        raise ParameterError("factorization needs f in F1(p) and F1(q): f(0) must be 0")
    n, m = q.n_max, p.n_max
    lhs = t1_values(f, p)
    q_ratios = q.ratios.copy()
    q_ratios[-1] = 0.0
    t1q = np.zeros(m + 1)
    t1q[: n + 1] = f.on(1, n + 1) * q_ratios - f.on(0, n)
    score = np.zeros(m + 1)
    score[: n + 1] = f.on(1, n + 1) * _boundary_masked_r1(p, q)
    rhs = t1q + score
    if include_error_term:
        xs = np.arange(m + 1)
        err = np.where(xs >= n, f.on(1, m + 1) * p.ratios, 0.0) - np.where(xs >= n + 1, f.on(0, m), 0.0)
        rhs = rhs + err
    return float(np.max(np.abs(lhs - rhs)))


def identity_check_1(p: Pmf, q: Pmf, l: RealFunctionOnZ, tol: float = 1e-10) -> IdentityReport:
    """Check ``E_q l - E_p l = E_q[f(X+1) r1(X)] + q(N) f(N+1) p(N+1)/p(N)`` with ``f`` the first Stein solution."""
    _require_naturals(p, q)
    _require_cover(p, q)
    n = q.n_max
    lhs = expectation(q, l) - expectation(p, l)
    f = stein_solution_1(p, l)
    main = fsum(q.probs * f.on(1, n + 1) * _boundary_masked_r1(p, q))
    err = q.prob(n) * f(n + 1) * p.ratio(n)
    return IdentityReport(lhs, main, err, lhs - main - err, tol)


def identity_check_2(p: Pmf, ptilde: RealFunctionOnZ, q: Pmf, l: RealFunctionOnZ,
                     tol: float = 1e-9) -> IdentityReport:
    """Check ``E_q l - E_p l = E_q[f(X) r2(X)]`` with ``f`` the second Stein solution.

    Only valid when ``pt(x+1)/p(x)`` is constant; that is verified first.
    """
    _require_naturals(p, q)
    _require_cover(p, q)
    n = q.n_max
    if ptilde.window_hi < n + 1:
        raise DomainError(f"pt must be known up to {n + 1}")
    c = ptilde.on(1, n + 1) / p.probs[: n + 1]
    spread = float(np.max(np.abs(c - c[0])))
    if not (c[0] != 0.0 and spread <= 1e-10 * abs(c[0])):
        raise PreconditionError(
            f"pt(x+1)/p(x) is not constant for {p.label} (relative spread {spread / abs(c[0]):.3g}); "
            "this family is not supported by the second identity"
        )
    lhs = expectation(q, l) - expectation(p, l)
    f = stein_solution_2(p, ptilde, l)
    main = fsum(q.probs * f.on(0, n) * r2_score(p, ptilde, q).values)
    return IdentityReport(lhs, main, 0.0, lhs - main, tol)


def k1_subadditive_bound(lam: float, q_params) -> float:
    """Subadditivity bound on ``K1`` for a sum of independent geometrics.

    ``(1/lam) * sum (1-q_i)^3 / q_i^2``, with ``lam`` the mean of the sum.
    """
    qs = [float(q) for q in q_params]
    if not qs:
        raise ParameterError("need at least one geometric parameter")
    if any(not (0.0 < q < 1.0) for q in qs):
        raise ParameterError("geometric parameters must lie in (0, 1)")
    total_mean = math.fsum((1.0 - q) / q for q in qs)
    if abs(total_mean - lam) > 1e-10 * max(1.0, abs(lam)):
        raise ParameterError(f"lambda = {lam!r} differs from the mean {total_mean!r} of the sum")
    return math.fsum((1.0 - q) ** 3 / q**2 for q in qs) / lam
