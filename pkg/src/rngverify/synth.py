"""Deterministic synthetic sources, clean and with injected defects.

Every stream is a pure function of its parameters.  The generator is the
SplitMix64 output function evaluated on a counter: draw ``k`` (0-based) of
seed ``s`` is ``mix64(s + (k + 1) * 0x9E3779B97F4A7C15 mod 2**64)``, i.e. the
k-th output of a SplitMix64 stream started from state ``s``.  Uniforms use
the top 53 bits, ``u = (raw >> 11 + 0.5) / 2**53``, which lies strictly inside
(0, 1); normals are ``ndtri(u)`` (inverse CDF, one uniform per normal, no
rejection).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.signal import lfilter
from scipy.special import ndtri

from .errors import (
    InvalidBitDepth,
    InvalidParameter,
    InvalidPeriod,
    InvalidRho,
    OddLength,
    TooShort,
)
from .series import as_series

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_DERIVE = 0xD1B54A32D192ED03

Kind = Literal["gaussian", "ar1", "duplicate_halves", "sinusoid_drift"]


def splitmix64(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Raw 64-bit outputs ``start .. start + count - 1`` of the seeded stream."""
    s = np.uint64(int(seed) & _MASK64)
    k = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = s + k * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, index: int) -> int:
    """Independent child seed number ``index`` of ``seed``."""
    return int(splitmix64(int(seed) ^ _DERIVE, 1, start=index)[0])


def uniforms(n: int, seed: int, start: int = 0) -> np.ndarray:
    raw = splitmix64(seed, n, start)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def random_bits(n: int, seed: int) -> np.ndarray:
    """``n`` bits as uint8, most significant bit of each draw first."""
    words = splitmix64(seed, (n + 63) // 64)
    as_bytes = words.astype(">u8").view(np.uint8)
    return np.unpackbits(as_bytes)[:n]


def _check_n(n: int) -> int:
    n = int(n)
    if n < 4:
        raise TooShort(f"sources need n >= 4, got {n}")
    return n


def gaussian(n: int, seed: int) -> np.ndarray:
    """i.i.d. standard normal draws."""
    return ndtri(uniforms(_check_n(n), seed))


def ar1(n: int, rho: float, seed: int) -> np.ndarray:
    """Stationary unit-variance AR(1): ``x[k+1] = rho x[k] + sqrt(1 - rho^2) g[k+1]``.

    ``x[0] = g[0]``, so ``rho = 0`` reproduces ``gaussian(n, seed)`` exactly.
    """
    if not abs(rho) < 1:
        raise InvalidRho(f"|rho| must be < 1, got {rho}")
    g = gaussian(n, seed)
    drive = np.sqrt(1.0 - rho * rho) * g
    drive[0] = g[0]
    return lfilter([1.0], [1.0, -rho], drive)


def duplicate_halves(n: int, jitter: float, seed: int) -> np.ndarray:
    """Second half repeats the first half plus ``jitter`` times fresh noise."""
    n = _check_n(n)
    if n % 2:
        raise OddLength(f"duplicate_halves needs an even length, got {n}")
    if jitter < 0:
        raise InvalidParameter(f"jitter must be >= 0, got {jitter}")
    g = gaussian(n, seed)
    h = n // 2
    return np.concatenate([g[:h], g[:h] + jitter * g[h:]])


def sinusoid_drift(n: int, amplitude: float, period: float, seed: int) -> np.ndarray:
    if not period >= 2:
        raise InvalidPeriod(f"period must be >= 2, got {period}")
    g = gaussian(n, seed)
    if amplitude == 0:
        return g
    k = np.arange(g.size, dtype=np.float64)
    return g + amplitude * np.sin(2.0 * np.pi * k / period)


def quantize(s, bits: int) -> np.ndarray:
    """Uniform quantizer with ``2**bits`` equal cells spanning ``[min, max]``.

    Decision thresholds sit at the cell boundaries (mid-rise); cell ``i`` is
    reconstructed as ``min + i * (max - min) / (2**bits - 1)`` so the output
    keeps the input's extremes and quantizing twice changes nothing.
    """
    if not 1 <= int(bits) <= 24:
        raise InvalidBitDepth(f"bit depth must be in 1..24, got {bits}")
    s = as_series(s)
    levels = 1 << int(bits)
    lo = s.min()
    hi = s.max()
    if hi == lo:
        return s.copy()
    cell = np.floor((s - lo) / (hi - lo) * levels)
    cell = np.clip(cell, 0, levels - 1)
    out = lo + cell * ((hi - lo) / (levels - 1))
    out[cell == levels - 1] = hi
    return out


@dataclass(frozen=True)
class SourceSpec:
    kind: Kind
    n: int
    seed: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise InvalidParameter(f"source length must be even and >= 4, got {self.n}")


def generate(spec: SourceSpec) -> np.ndarray:
    p = spec.params
    if spec.kind == "gaussian":
        return gaussian(spec.n, spec.seed)
    if spec.kind == "ar1":
        return ar1(spec.n, p.get("rho", 0.0), spec.seed)
    if spec.kind == "duplicate_halves":
        return duplicate_halves(spec.n, p.get("jitter", 0.0), spec.seed)
    if spec.kind == "sinusoid_drift":
        return sinusoid_drift(spec.n, p.get("amplitude", 1.0), p.get("period", spec.n), spec.seed)
    raise InvalidParameter(f"unknown source kind {spec.kind!r}")
