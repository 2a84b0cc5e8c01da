"""Deterministic pairwise (cascade) summation.

Plain left-to-right accumulation makes the rounding of a long sum depend on
chunk boundaries, which breaks bit-reproducibility as soon as work is split
across threads. The cascade tree used here is fixed by the input length
alone: adjacent elements are folded pairwise, an odd leftover rides along to
the next round. Any two runs over the same values therefore produce the
same bits, and the error bound grows like O(log n) instead of O(n).
"""
from __future__ import annotations

import numpy as np

__all__ = ["pairwise_sum", "pairwise_mean"]


def pairwise_sum(values) -> float:
    """Sum `values` (any shape, flattened in C order) over a fixed pair tree."""
    a = np.ascontiguousarray(values, dtype=np.float64).ravel()
    if a.size == 0:
        return 0.0
    while a.size > 1:
        m = a.size // 2
        folded = a[: 2 * m : 2] + a[1 : 2 * m : 2]
        if a.size % 2:
            folded = np.concatenate([folded, a[-1:]])
        a = folded
    return float(a[0])


def pairwise_mean(values) -> float:
    """Arithmetic mean built on :func:`pairwise_sum`; 0 elements is an error."""
    a = np.ascontiguousarray(values, dtype=np.float64).ravel()
    if a.size == 0:
        raise ValueError("mean of zero elements")
    return pairwise_sum(a) / a.size
