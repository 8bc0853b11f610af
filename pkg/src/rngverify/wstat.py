"""w-statistics: the ranked square root of the product of two normalized samples.

The erf-fit parameters ``(w0, dw)`` of the w-SRA form a two-parameter
correlation criterion.  Two pairs are declared different when either
parameter moves by more than a band calibrated on an i.i.d. Gaussian null.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass

import numpy as np

from .erf_fit import DECIMATION_CAP, ErfFitResult, fit_erf
from .errors import InvalidParameter, LengthMismatch, NotNormalized, TooShort, UnconvergedFit
from .series import RankedSeries, cdf_points, normalize, rank
from .synth import derive_seed, gaussian

_log = logging.getLogger(__name__)

NORMALIZED_SLACK = 1e-12
MIN_PIPELINE_LENGTH = 64
LOW_CONFIDENCE_DRAWS = 100


@dataclass(frozen=True)
class WStatistic:
    w_ranked: RankedSeries
    fit: ErfFitResult
    pair_label: str


@dataclass(frozen=True)
class WBands:
    band_w0: float
    band_dw: float
    n: int
    draws: int
    quantile: float
    seed: int
    median_w0: float
    median_dw: float

    @property
    def low_confidence(self) -> bool:
        return self.draws < LOW_CONFIDENCE_DRAWS


@dataclass(frozen=True)
class WCriterion:
    delta_w0: float
    delta_dw: float
    significant: bool
    band_w0: float
    band_dw: float


def product_sra(x, y) -> RankedSeries:
    """Ascending SRA of ``sqrt(x_k * y_k)`` for two series already on [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    for name, v in (("x", x), ("y", y)):
        if v.min() < -NORMALIZED_SLACK or v.max() > 1 + NORMALIZED_SLACK:
            raise NotNormalized(f"{name} has values outside [0, 1]")
    w = np.sqrt(np.clip(x * y, 0.0, 1.0))
    return rank(w, "ascending")


def w_criterion_pipeline(x_raw, y_raw, label: str = "", cap: int = DECIMATION_CAP) -> WStatistic:
    x_raw = np.asarray(x_raw, dtype=np.float64)
    y_raw = np.asarray(y_raw, dtype=np.float64)
    if x_raw.shape != y_raw.shape:
        raise LengthMismatch(f"lengths differ: {x_raw.size} vs {y_raw.size}")
    if x_raw.size < MIN_PIPELINE_LENGTH:
        raise TooShort(f"w pipeline needs at least {MIN_PIPELINE_LENGTH} samples")
    ranked = product_sra(normalize(x_raw), normalize(y_raw))
    fit = fit_erf(cdf_points(ranked), cap=cap)
    return WStatistic(w_ranked=ranked, fit=fit, pair_label=label)


def compare_w(a: WStatistic, b: WStatistic, bands: WBands) -> WCriterion:
    if not (a.fit.converged and b.fit.converged):
        raise UnconvergedFit("both w fits must have converged to be compared")
    d_w0 = a.fit.model.w0 - b.fit.model.w0
    d_dw = a.fit.model.dw - b.fit.model.dw
    return WCriterion(
        delta_w0=d_w0,
        delta_dw=d_dw,
        significant=bool(abs(d_w0) > bands.band_w0 or abs(d_dw) > bands.band_dw),
        band_w0=bands.band_w0,
        band_dw=bands.band_dw,
    )


@functools.lru_cache(maxsize=32)
def bootstrap_bands(
    n: int,
    draws: int = 200,
    quantile: float = 0.99,
    seed: int = 0,
    cap: int = DECIMATION_CAP,
) -> WBands:
    """Null bands for ``(w0, dw)`` from ``draws`` i.i.d. Gaussian pairs of length ``n``.

    Each band is the ``quantile`` of the absolute deviation of the parameter
    about its ensemble median.  Draw ``i`` uses ``derive_seed(seed, i)``, so
    the result depends only on the arguments.  Results are memoized.
    """
    if draws < 2:
        raise InvalidParameter("bootstrap needs at least 2 draws")
    if not 0.5 <= quantile < 1:
        raise InvalidParameter(f"quantile must be in [0.5, 1), got {quantile}")
    if draws < LOW_CONFIDENCE_DRAWS:
        _log.warning("bootstrap with %d draws is low confidence", draws)
    w0s = np.empty(draws)
    dws = np.empty(draws)
    for i in range(draws):
        g = gaussian(2 * n, derive_seed(seed, i))
        fit = w_criterion_pipeline(g[:n], g[n:], cap=cap).fit
        w0s[i] = fit.model.w0
        dws[i] = fit.model.dw
    m_w0 = float(np.median(w0s))
    m_dw = float(np.median(dws))
    return WBands(
        band_w0=float(np.quantile(np.abs(w0s - m_w0), quantile)),
        band_dw=float(np.quantile(np.abs(dws - m_dw), quantile)),
        n=n,
        draws=draws,
        quantile=quantile,
        seed=seed,
        median_w0=m_w0,
        median_dw=m_dw,
    )
