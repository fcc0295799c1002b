"""Compensated accumulation helpers.

The big arithmetic sums here reach 1e12 magnitude with unit-scale terms, so
plain left-to-right accumulation loses digits that the identity tests
downstream would notice.  Scalar reductions go through math.fsum (exact up
to one final rounding); cumulative arrays get a first-order error-feedback
correction on top of numpy's cumsum.
"""

from __future__ import annotations

import math

import numpy as np


def fsum(values) -> float:
    """Exactly rounded sum of an iterable or ndarray of floats."""
    if isinstance(values, np.ndarray):
        return math.fsum(values.tolist())
    return math.fsum(values)


def compensated_cumsum(values: np.ndarray) -> np.ndarray:
    """Cumulative sum with the local rounding errors fed back in.

    c[k] = fl(c[k-1] + v[k]) loses (c[k-1] + v[k]) - c[k] at each step; the
    lost parts are recovered to first order from diff(c) and re-accumulated.
    One correction pass is enough to push the error to O(eps^2 * n * sum).
    """
    values = np.asarray(values, dtype=np.float64)
    raw = np.cumsum(values)
    lost = values - np.diff(raw, prepend=0.0)
    return raw + np.cumsum(lost)


def pairwise_dot(a: np.ndarray, b: np.ndarray) -> float:
    """Deterministic sum of a*b using numpy's pairwise reduction.

    The reduction tree depends only on the array length, never on thread
    count, which keeps CLI output byte-identical across --threads settings.
    """
    return float(np.add.reduce(a * b))
