"""Series primitives: normalization, centering, ranking and the rank-based CDF.

A *series* is a one-dimensional float64 numpy array.  Ranking a series gives
its sequence of ranged amplitudes (SRA): the same multiset of values, sorted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import DegenerateSeries, IndexOutOfRange, TooShort, WrongDirection

Direction = Literal["ascending", "descending"]


def as_series(values, min_length: int = 2) -> np.ndarray:
    """Coerce ``values`` to a 1-D float64 array of at least ``min_length``."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"series must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise TooShort(f"series needs at least {min_length} values, got {arr.size}")
    return arr


@dataclass(frozen=True)
class RankedSeries:
    values: np.ndarray
    direction: Direction
    source_length: int

    def __len__(self) -> int:
        return self.source_length


@dataclass(frozen=True)
class CdfPoints:
    """Ranked amplitudes ``x`` paired with their empirical quantiles ``z``."""

    x: np.ndarray
    z: np.ndarray

    def __len__(self) -> int:
        return self.x.size


def normalize(s) -> np.ndarray:
    """Affine map onto [0, 1]: the minimum goes to 0 and the maximum to 1."""
    s = as_series(s)
    lo = s.min()
    hi = s.max()
    if not hi > lo:
        raise DegenerateSeries("cannot normalize a constant series")
    out = (s - lo) / (hi - lo)
    # pin the endpoints so rounding can never push them outside [0, 1]
    out[s == lo] = 0.0
    out[s == hi] = 1.0
    return out


def center(s) -> np.ndarray:
    s = as_series(s)
    return s - s.mean()


def rank(s, direction: Direction = "ascending") -> RankedSeries:
    """Stable sort of ``s``; equal values keep their original relative order."""
    s = as_series(s)
    if direction == "ascending":
        values = np.sort(s, kind="stable")
    elif direction == "descending":
        # stable descending: sort the negation, which keeps ties in input order
        order = np.argsort(-s, kind="stable")
        values = s[order]
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return RankedSeries(values=values, direction=direction, source_length=s.size)


def empirical_cdf(r: RankedSeries, n: int) -> float:
    """CDF value ``(N + 1 - n) / N`` of the n-th largest amplitude (1-based)."""
    if r.direction != "descending":
        raise WrongDirection("empirical_cdf is defined on descending rankings")
    N = r.source_length
    if not 1 <= n <= N:
        raise IndexOutOfRange(f"rank index {n} outside 1..{N}")
    return (N + 1 - n) / N


def cdf_points(r: RankedSeries) -> CdfPoints:
    """Pair the ascending SRA with the quantile grid ``z_n = n / N``."""
    if r.direction != "ascending":
        raise WrongDirection("cdf_points needs an ascending ranking")
    N = r.source_length
    z = np.arange(1, N + 1, dtype=np.float64) / N
    return CdfPoints(x=r.values, z=z)


def sum_function(s, g: Callable[[np.ndarray], np.ndarray]) -> float:
    """Return ``sum(g(x) for x in s)``.

    ``g`` is applied elementwise (it receives the whole array) and the
    terms are added with ``math.fsum``, which is exactly rounded and so
    independent of summation order.
    """
    s = np.asarray(s, dtype=np.float64)
    return math.fsum(np.asarray(g(s), dtype=np.float64).tolist())
