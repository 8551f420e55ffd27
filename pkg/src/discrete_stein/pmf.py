"""Probability mass functions on contiguous integer supports.

A :class:`Pmf` stores strictly positive probabilities on ``[a, N]``. Laws
with infinite support are truncated at ``N`` and the dropped probability is
kept in ``tail_mass``; truncated pmfs are never renormalised, so every sum
over the stored window sees the raw mass.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammainc

from ._compensated import fsum
from .errors import DomainError, ParameterError

__all__ = [
    "MASS_TOL",
    "DEFAULT_TAIL_TOL",
    "Support",
    "Pmf",
    "RealFunctionOnZ",
    "pmf_from_probs",
    "point_mass",
    "make_poisson",
    "make_binomial",
    "make_bernoulli",
    "make_geometric",
    "convolve",
    "convolve_n",
    "expectation",
    "mean",
    "cdf",
    "read_pmf",
    "write_pmf",
]

MASS_TOL = 1e-12
DEFAULT_TAIL_TOL = 1e-12

# exp(-700) ~ 1e-304: constructors stop extending a window before probabilities
# leave the normal floating-point range.
_LOG_FLOOR = -700.0
_TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class Support:
    """Integer interval ``[a, b]``; ``b is None`` encodes an infinite upper end."""

    a: int
    b: int | None = None

    def __post_init__(self):
        if self.b is not None and self.b < self.a:
            raise ParameterError(f"support [{self.a}, {self.b}] is empty")

    @property
    def infinite(self) -> bool:
        return self.b is None

    def __contains__(self, x: int) -> bool:
        return x >= self.a and (self.b is None or x <= self.b)


@dataclass(frozen=True, eq=False)
class RealFunctionOnZ:
    """Real function on a finite integer window, zero everywhere else."""

    window_lo: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise ParameterError("function values must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "window_lo", int(self.window_lo))
        object.__setattr__(self, "values", vals)

    @property
    def window_hi(self) -> int:
        return self.window_lo + len(self.values) - 1

    def __call__(self, x: int) -> float:
        i = int(x) - self.window_lo
        if 0 <= i < len(self.values):
            return float(self.values[i])
        return 0.0

    def on(self, lo: int, hi: int) -> np.ndarray:
        """Values at ``lo..hi`` inclusive, zero outside the window."""
        out = np.zeros(max(hi - lo + 1, 0), dtype=np.float64)
        s = max(lo, self.window_lo)
        e = min(hi, self.window_hi)
        if s <= e:
            out[s - lo : e - lo + 1] = self.values[s - self.window_lo : e - self.window_lo + 1]
        return out

    @classmethod
    def from_callable(cls, fn, lo: int, hi: int) -> "RealFunctionOnZ":
        return cls(lo, np.array([float(fn(x)) for x in range(lo, hi + 1)]))

    @classmethod
    def constant(cls, c: float, lo: int, hi: int) -> "RealFunctionOnZ":
        return cls(lo, np.full(hi - lo + 1, float(c)))

    @classmethod
    def identity(cls, lo: int, hi: int) -> "RealFunctionOnZ":
        return cls(lo, np.arange(lo, hi + 1, dtype=np.float64))

    @classmethod
    def indicator_le(cls, z: int, lo: int, hi: int) -> "RealFunctionOnZ":
        """``x -> 1[x <= z]`` on ``lo..hi``."""
        xs = np.arange(lo, hi + 1)
        return cls(lo, (xs <= z).astype(np.float64))

    @classmethod
    def indicator_at(cls, k: int, lo: int, hi: int) -> "RealFunctionOnZ":
        xs = np.arange(lo, hi + 1)
        return cls(lo, (xs == k).astype(np.float64))

    def to_json(self) -> dict:
        return {"window_lo": self.window_lo, "values": self.values.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "RealFunctionOnZ":
        return cls(int(obj["window_lo"]), np.asarray(obj["values"], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class Pmf:
    """Strictly positive pmf stored on the window ``[a, N]``.

    ``finite`` marks a law whose support genuinely ends at ``N``; otherwise
    the law is a truncation and ``tail_mass`` holds what was dropped.
    ``next_ratio`` is the family's analytic ``p(N+1)/p(N)`` when the
    constructor knows it (Poisson, geometric), else ``None``.
    """

    a: int
    probs: np.ndarray
    log_probs: np.ndarray
    tail_mass: float = 0.0
    label: str = ""
    finite: bool = True
    next_ratio: float | None = field(default=None)

    def __post_init__(self):
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        logs = np.ascontiguousarray(self.log_probs, dtype=np.float64)
        if probs.ndim != 1 or probs.shape != logs.shape or len(probs) == 0:
            raise ParameterError("probs and log_probs must be non-empty 1-D arrays of equal length")
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0.0):
            raise ParameterError("probabilities must be strictly positive and finite on the support")
        if not (self.tail_mass >= 0.0 and math.isfinite(self.tail_mass)):
            raise ParameterError("tail_mass must be a finite non-negative number")
        if self.finite and self.tail_mass != 0.0:
            raise ParameterError("a finite-support law cannot carry tail mass")
        total = fsum(probs)
        if abs(total + self.tail_mass - 1.0) > MASS_TOL:
            raise ParameterError(
                f"mass conservation violated: sum(probs) + tail_mass = {total + self.tail_mass!r}"
            )
        rel = np.abs(np.exp(logs) - probs) / probs
        if np.max(rel) > 1e-12:
            raise ParameterError("log_probs inconsistent with probs")
        probs.setflags(write=False)
        logs.setflags(write=False)
        object.__setattr__(self, "a", int(self.a))
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "log_probs", logs)
        if self.finite:
            object.__setattr__(self, "next_ratio", None)

    @property
    def n_max(self) -> int:
        """Upper end ``N`` of the stored window."""
        return self.a + len(self.probs) - 1

    @property
    def support(self) -> Support:
        return Support(self.a, self.n_max if self.finite else None)

    @property
    def xs(self) -> np.ndarray:
        return np.arange(self.a, self.n_max + 1)

    def prob(self, x: int) -> float:
        i = int(x) - self.a
        if 0 <= i < len(self.probs):
            return float(self.probs[i])
        return 0.0

    def log_prob(self, x: int) -> float:
        i = int(x) - self.a
        if 0 <= i < len(self.probs):
            return float(self.log_probs[i])
        return -math.inf

    def on(self, lo: int, hi: int) -> np.ndarray:
        return RealFunctionOnZ(self.a, self.probs).on(lo, hi)

    @property
    def ratios(self) -> np.ndarray:
        """``p(x+1)/p(x)`` for ``x = a..N`` computed in log space.

        The last entry uses ``next_ratio`` (zero for finite laws or when the
        family ratio is unknown).
        """
        r = np.exp(np.diff(self.log_probs))
        last = self.next_ratio if self.next_ratio is not None else 0.0
        return np.append(r, last)

    def ratio(self, x: int) -> float:
        """``p(x+1)/p(x)`` on the window, 0 outside it."""
        i = int(x) - self.a
        if 0 <= i < len(self.probs) - 1:
            return math.exp(self.log_probs[i + 1] - self.log_probs[i])
        if i == len(self.probs) - 1 and self.next_ratio is not None:
            return float(self.next_ratio)
        return 0.0

    def to_json(self) -> dict:
        return {
            "a": self.a,
            "probs": self.probs.tolist(),
            "tail_mass": float(self.tail_mass),
            "label": self.label,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Pmf":
        try:
            a = int(obj["a"])
            probs = np.asarray(obj["probs"], dtype=np.float64)
            tail = float(obj.get("tail_mass", 0.0))
            label = str(obj.get("label", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"malformed pmf object: {exc}") from exc
        return pmf_from_probs(probs, a=a, tail_mass=tail, label=label)

    def __repr__(self) -> str:
        kind = "finite" if self.finite else f"truncated, tail={self.tail_mass:.3g}"
        return f"Pmf({self.label or '?'}, [{self.a}, {self.n_max}], {kind})"


def pmf_from_probs(probs, a: int = 0, tail_mass: float = 0.0, label: str = "",
                   finite: bool | None = None, next_ratio: float | None = None) -> Pmf:
    """Build a :class:`Pmf` from a probability vector.

    ``finite`` defaults to ``tail_mass == 0``.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or len(probs) == 0:
        raise ParameterError("probs must be a non-empty 1-D vector")
    if np.any(~np.isfinite(probs)) or np.any(probs <= 0.0):
        raise ParameterError("probabilities must be strictly positive and finite on the support")
    if finite is None:
        finite = tail_mass == 0.0
    return Pmf(a, probs, np.log(probs), float(tail_mass), label, finite, next_ratio)


def point_mass(k: int = 0) -> Pmf:
    """Dirac mass at ``k``; the neutral element of :func:`convolve` when ``k == 0``."""
    return Pmf(k, np.array([1.0]), np.array([0.0]), 0.0, f"delta({k})", True)


def _check_tail_tol(tail_tol: float) -> None:
    if not (0.0 < tail_tol < 1.0):
        raise ParameterError(f"tail_tol must lie in (0, 1), got {tail_tol!r}")


def _poisson_log_probs(lam: float, n: int) -> np.ndarray:
    xs = np.arange(n + 1, dtype=np.float64)
    lg = np.array([math.lgamma(x + 1.0) for x in xs])
    return xs * math.log(lam) - lam - lg


def make_poisson(lam: float, tail_tol: float = DEFAULT_TAIL_TOL, min_n: int = 0) -> Pmf:
    """Poisson(lam) truncated at the smallest ``N`` with ``P(X > N) < tail_tol``.

    ``min_n`` forces the window to reach at least ``min_n`` so that it can
    cover another pmf; the extension stops early where probabilities would
    leave the normal floating-point range, so check ``n_max`` afterwards.
    The tail mass is the regularised incomplete gamma ``P(N+1, lam)``.
    """
    if not (lam > 0.0 and math.isfinite(lam)):
        raise ParameterError(f"Poisson mean must be positive, got {lam!r}")
    _check_tail_tol(tail_tol)
    if -lam < _LOG_FLOOR:
        raise ParameterError(f"Poisson mean {lam!r} too large: p(0) underflows")
    n = 0
    while gammainc(n + 1, lam) >= tail_tol:
        n += 1
    n = max(n, int(min_n))
    logs = _poisson_log_probs(lam, n)
    below = np.nonzero((logs < _LOG_FLOOR) & (np.arange(n + 1) > lam))[0]
    if len(below):
        n = int(below[0]) - 1
        logs = logs[: n + 1]
    tail = float(gammainc(n + 1, lam))
    return Pmf(0, np.exp(logs), logs, tail, f"poisson({lam:g})", False, lam / (n + 1))


def make_binomial(n: int, p: float) -> Pmf:
    """Binomial(n, p) on ``[0, n]`` via log-gamma, normalised by an exact sum."""
    if int(n) != n or n < 1:
        raise ParameterError(f"binomial size must be a positive integer, got {n!r}")
    if not (0.0 < p < 1.0):
        raise ParameterError(f"binomial probability must lie in (0, 1), got {p!r}")
    n = int(n)
    xs = np.arange(n + 1, dtype=np.float64)
    logc = np.array([math.lgamma(n + 1.0) - math.lgamma(x + 1.0) - math.lgamma(n - x + 1.0) for x in xs])
    logs = logc + xs * math.log(p) + (n - xs) * math.log1p(-p)
    if np.any(logs < _LOG_FLOOR):
        raise ParameterError(f"binomial({n}, {p:g}) has probabilities below the floating-point range")
    probs = np.exp(logs)
    total = fsum(probs)
    return Pmf(0, probs / total, logs - math.log(total), 0.0, f"binomial({n},{p:g})", True)


def make_bernoulli(p: float) -> Pmf:
    return make_binomial(1, p)


def make_geometric(q: float, tail_tol: float = DEFAULT_TAIL_TOL) -> Pmf:
    """Geometric law ``(1-q)^x q`` on ``x >= 0``, mean ``(1-q)/q``.

    Truncated at the smallest ``N`` with ``(1-q)^(N+1) < tail_tol``.
    """
    if not (0.0 < q < 1.0):
        raise ParameterError(f"geometric parameter must lie in (0, 1), got {q!r}")
    _check_tail_tol(tail_tol)
    log_fail = math.log1p(-q)
    n = max(int(math.ceil(math.log(tail_tol) / log_fail)) - 1, 0)
    while n > 0 and n * log_fail < math.log(tail_tol):
        n -= 1
    while (n + 1) * log_fail >= math.log(tail_tol):
        n += 1
    logs = math.log(q) + np.arange(n + 1) * log_fail
    if logs[-1] < _LOG_FLOOR:
        raise ParameterError("tail_tol too small for the floating-point range")
    tail = math.exp((n + 1) * log_fail)
    return Pmf(0, np.exp(logs), logs, tail, f"geometric({q:g})", False, 1.0 - q)


def convolve(p1: Pmf, p2: Pmf) -> Pmf:
    """Law of the sum of independent variables distributed as ``p1`` and ``p2``.

    The dropped mass of the result is ``t1 + t2 - t1*t2``. Trailing entries
    that underflow below the normal floating-point range are discarded.
    """
    probs = np.convolve(p1.probs, p2.probs)
    keep = len(probs)
    while keep > 1 and probs[keep - 1] < _TINY:
        keep -= 1
    probs = probs[:keep]
    if np.any(probs <= 0.0):
        raise DomainError("convolution produced a zero probability inside the support")
    t1, t2 = p1.tail_mass, p2.tail_mass
    tail = t1 + t2 - t1 * t2
    finite = p1.finite and p2.finite
    label = f"{p1.label}*{p2.label}"
    return Pmf(p1.a + p2.a, probs, np.log(probs), 0.0 if finite else tail, label, finite)


def convolve_n(p: Pmf, n: int) -> Pmf:
    """``n``-fold convolution power by repeated squaring; ``n == 0`` gives ``point_mass(0)``."""
    if int(n) != n or n < 0:
        raise ParameterError(f"convolution power must be a non-negative integer, got {n!r}")
    n = int(n)
    if n == 0:
        return point_mass(0)
    result = None
    base = p
    k = n
    while k:
        if k & 1:
            result = base if result is None else convolve(result, base)
        k >>= 1
        if k:
            base = convolve(base, base)
    if n == 1:
        return p
    return Pmf(result.a, result.probs, result.log_probs, result.tail_mass,
               f"{p.label}^*{n}", result.finite)


def expectation(p: Pmf, l: RealFunctionOnZ) -> float:
    """``sum_{x=a}^{N} l(x) p(x)`` with exactly rounded summation."""
    return fsum(l.on(p.a, p.n_max) * p.probs)


def mean(p: Pmf) -> float:
    return fsum(p.xs * p.probs)


def cdf(p: Pmf, z: int) -> float:
    """``sum_{x <= z} p(x)`` over the stored window."""
    if z < p.a:
        return 0.0
    return fsum(p.probs[: min(z, p.n_max) - p.a + 1])


def read_pmf(path: str | Path) -> Pmf:
    """Read a pmf from the JSON format ``{"a", "probs", "tail_mass", "label"}``."""
    text = Path(path).read_text()
    return Pmf.from_json(json.loads(text))


def write_pmf(p: Pmf, path: str | Path) -> None:
    Path(path).write_text(json.dumps(p.to_json()))
