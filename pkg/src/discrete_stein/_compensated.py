"""Compensated summation helpers.

Totals go through :func:`math.fsum` (exactly rounded). Running prefix sums,
which ``fsum`` cannot produce, use Neumaier's variant of Kahan summation.
"""

from __future__ import annotations

import math

import numpy as np


def fsum(values) -> float:
    return math.fsum(np.asarray(values, dtype=np.float64).tolist())


def compensated_cumsum(values) -> np.ndarray:
    """Prefix sums ``out[i] = values[0] + ... + values[i]`` with Neumaier compensation."""
    vals = np.asarray(values, dtype=np.float64).tolist()
    out = np.empty(len(vals), dtype=np.float64)
    total = 0.0
    carry = 0.0
    for i, v in enumerate(vals):
        t = total + v
        if abs(total) >= abs(v):
            carry += (total - t) + v
        else:
            carry += (v - t) + total
        total = t
        out[i] = total + carry
    return out


def compensated_revcumsum(values) -> np.ndarray:
    """Suffix sums ``out[i] = values[i] + ... + values[-1]``."""
    vals = np.asarray(values, dtype=np.float64)
    return compensated_cumsum(vals[::-1])[::-1].copy()
