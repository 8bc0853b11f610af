"""Angle/radius decomposition of a centered sample pair and sign-bit extraction.

For a pair ``(x_k, y_k)`` the angle is ``phi = arcsin(2 x y / r^2) / 2`` and the
radius ``r = sqrt(x^2 + y^2)``.  The discrete derivatives of ``phi`` and ``r``
split the pair into ``(sign(phi'), |phi'|, r')``; the sign channel, with -1
mapped to 0, is the extracted bit stream.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .erf_fit import DECIMATION_CAP, ErfFitResult, fit_erf, fit_erf_extended
from .errors import LengthMismatch, NotCentered, TooShort
from .series import cdf_points, normalize, rank

_log = logging.getLogger(__name__)

RADIUS_EPS2 = 1e-24
CENTER_RTOL = 1e-9
CLAMP_SLACK = 1e-9
MIN_FIT_LENGTH = 64


@dataclass(frozen=True)
class AngleDecomposition:
    phi: np.ndarray
    r: np.ndarray
    dropped: int


@dataclass(frozen=True)
class SplitTriple:
    signs: np.ndarray
    abs_dphi: np.ndarray
    dr: np.ndarray
    zero_fraction: float

    @property
    def dphi(self) -> np.ndarray:
        return self.signs * self.abs_dphi


@dataclass(frozen=True)
class BitStream:
    bits: np.ndarray
    source_zeros_dropped: int

    @property
    def ones_fraction(self) -> float:
        return float(self.bits.mean()) if self.bits.size else float("nan")


def _check_centered(name: str, v: np.ndarray) -> None:
    scale = float(v.std())
    if abs(float(v.mean())) > CENTER_RTOL * max(scale, 1e-300):
        raise NotCentered(f"{name} is not centered (mean {v.mean():.3g}, std {scale:.3g})")


def decompose(x, y) -> AngleDecomposition:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    _check_centered("x", x)
    _check_centered("y", y)
    r2 = x * x + y * y
    keep = r2 >= RADIUS_EPS2
    dropped = int(keep.size - np.count_nonzero(keep))
    if dropped:
        x, y, r2 = x[keep], y[keep], r2[keep]
    ratio = 2.0 * x * y / r2
    excess = np.abs(ratio).max(initial=0.0) - 1.0
    if excess > CLAMP_SLACK:
        raise ArithmeticError(f"|2xy/r^2| exceeds 1 by {excess:.3g}")
    phi = 0.5 * np.arcsin(np.clip(ratio, -1.0, 1.0))
    return AngleDecomposition(phi=phi, r=np.sqrt(r2), dropped=dropped)


def diff(s) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if s.size < 2:
        raise TooShort("a discrete derivative needs at least two values")
    return s[1:] - s[:-1]


def split(d: AngleDecomposition) -> SplitTriple:
    dphi = diff(d.phi)
    signs = np.sign(dphi).astype(np.int8)
    zeros = int(np.count_nonzero(signs == 0))
    return SplitTriple(
        signs=signs,
        abs_dphi=np.abs(dphi),
        dr=diff(d.r),
        zero_fraction=zeros / signs.size,
    )


def extract_bits(t: SplitTriple) -> BitStream:
    """Drop zero signs, then map -1 to 0 and +1 to 1, preserving order."""
    nonzero = t.signs[t.signs != 0]
    return BitStream(
        bits=(nonzero > 0).astype(np.uint8),
        source_zeros_dropped=int(t.signs.size - nonzero.size),
    )


def angle_uniformity(phi) -> float:
    """Sup distance between the normalized ascending SRA of ``phi`` and a straight line.

    The reference line joins the normalized endpoints, ``(n - 1) / (N - 1)``.
    A constant ``phi`` has no spread and scores 1.0.
    """
    phi = np.asarray(phi, dtype=np.float64)
    if phi.size < 64:
        raise TooShort("angle_uniformity needs at least 64 angles")
    line = np.arange(phi.size, dtype=np.float64) / (phi.size - 1)
    lo, hi = phi.min(), phi.max()
    if hi == lo:
        _log.warning("all angles are equal; uniformity is degenerate")
        return 1.0
    v = (np.sort(phi) - lo) / (hi - lo)
    return float(np.abs(v - line).max())


def uniformity_band(n: int) -> float:
    """1% critical value of the Kolmogorov distance for ``n`` samples."""
    return 1.63 / np.sqrt(n)


def sra_fit(v: np.ndarray, cap: int = DECIMATION_CAP) -> ErfFitResult:
    """erf fit of the normalized ascending SRA of ``v``."""
    return fit_erf(cdf_points(rank(normalize(v), "ascending")), cap=cap)


def inhomogeneity_fits(t: SplitTriple, cap: int = DECIMATION_CAP) -> tuple[ErfFitResult, ErfFitResult]:
    """erf fits of the normalized SRAs of phi' (signed) and r'."""
    if t.signs.size < MIN_FIT_LENGTH:
        raise TooShort(f"inhomogeneity fits need at least {MIN_FIT_LENGTH} derivatives")
    return sra_fit(t.dphi, cap), sra_fit(t.dr, cap)


def radius_fit(r, cap: int = DECIMATION_CAP) -> ErfFitResult:
    """Fit ``z = a + b * erf((r - r0) / dr)`` to the normalized radius SRA.

    The radius of a Gaussian pair is Rayleigh distributed, so the two free
    affine coefficients are needed; the symmetric ``(1 + erf) / 2`` form
    cannot follow its skew.
    """
    r = np.asarray(r, dtype=np.float64)
    if r.size < MIN_FIT_LENGTH:
        raise TooShort(f"radius fit needs at least {MIN_FIT_LENGTH} radii")
    points = cdf_points(rank(normalize(r), "ascending"))
    return fit_erf_extended(points, theta_grid=(1.0,), cap=cap)
