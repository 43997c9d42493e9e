"""
Summary statistics in the form the evaluation figures use: median and half a
population standard deviation.
"""

from typing import NamedTuple, Sequence

import numpy as np

from ..errors import ArgumentError


class Summary(NamedTuple):
    median: float
    half_std: float


def summarize(values: Sequence[float]) -> Summary:
    """Median (mean of the two middles for even length) and population std / 2"""
    if len(values) == 0:
        raise ArgumentError("cannot summarize an empty list")
    arr = np.asarray(values, dtype=float)
    if np.all(arr == arr[0]):
        return Summary(median=float(arr[0]), half_std=0.0)
    return Summary(median=float(np.median(arr)), half_std=float(np.std(arr) / 2.0))


def quantile(values: Sequence[float], q: float) -> float:
    """Linear-interpolation quantile, q in [0, 1]"""
    if len(values) == 0:
        raise ArgumentError("cannot take a quantile of an empty list")
    if not 0.0 <= q <= 1.0:
        raise ArgumentError(f"quantile must be in [0, 1], got {q!r}")
    return float(np.quantile(np.asarray(values, dtype=float), q))
