"""Four-way subsample topology and the Pearson pair criteria built on it.

A series of length 2N is covered twice by pairs of length-N subsamples:
front/back halves (1 & 2) and odd/even positions (3 & 4).  A high R^2
between halves points at very long-range structure, a high R^2 between
odd and even samples at short-lag regression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeries, LengthMismatch, OddLength, TooShort
from .series import as_series

DEFAULT_PEARSON_FACTOR = 10.0


@dataclass(frozen=True)
class SubsampleQuad:
    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    s4: np.ndarray
    source_length: int

    @property
    def n(self) -> int:
        return self.source_length // 2


@dataclass(frozen=True)
class PairCriterion:
    r2_12: float
    r2_34: float
    n: int

    def threshold(self, factor: float = DEFAULT_PEARSON_FACTOR) -> float:
        """Alarm level ``factor / n``; the i.i.d. expectation of R^2 is ``1 / n``."""
        return factor / self.n

    def flags(self, factor: float = DEFAULT_PEARSON_FACTOR) -> tuple[bool, bool]:
        t = self.threshold(factor)
        return self.r2_12 > t, self.r2_34 > t


def split_quad(s) -> SubsampleQuad:
    s = as_series(s)
    if s.size % 2:
        raise OddLength(f"topology split needs an even length, got {s.size}")
    n = s.size // 2
    # copies so the quad never aliases the caller's buffer
    return SubsampleQuad(
        s1=s[:n].copy(),
        s2=s[n:].copy(),
        s3=s[0::2].copy(),
        s4=s[1::2].copy(),
        source_length=s.size,
    )


def pearson_r2(a, b) -> float:
    """Squared Pearson correlation of two equal-length series."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths differ: {a.size} vs {b.size}")
    if a.size < 2:
        raise TooShort("pearson_r2 needs at least two points")
    da = a - a.mean()
    db = b - b.mean()
    saa = float(np.dot(da, da))
    sbb = float(np.dot(db, db))
    if saa == 0.0 or sbb == 0.0:
        raise DegenerateSeries("pearson_r2 of a constant series is undefined")
    sab = float(np.dot(da, db))
    # squared form keeps identical inputs at exactly 1.0
    r2 = (sab * sab) / (saa * sbb)
    return min(max(r2, 0.0), 1.0)


def pair_criteria(q: SubsampleQuad) -> PairCriterion:
    return PairCriterion(
        r2_12=pearson_r2(q.s1, q.s2),
        r2_34=pearson_r2(q.s3, q.s4),
        n=q.n,
    )
