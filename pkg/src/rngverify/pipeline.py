"""Ingestion, the full analysis pipeline, chunked monitoring and plot output."""

from __future__ import annotations

import hashlib
import logging
import math
import struct
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, Optional

import numpy as np

from . import angle, nist
from .config import AnalysisConfig
from .erf_fit import decimate
from .errors import (
    DegenerateInput,
    DegenerateSeries,
    IngestError,
    NonFiniteValue,
    ParseError,
    RngVerifyError,
    TooShort,
    UnconvergedFit,
)
from .report import (
    AngleReport,
    AngleSection,
    BatterySummary,
    FitSummary,
    Flag,
    FullReport,
    InputDescriptor,
    NistSection,
    PairCriterionReport,
    WBandsReport,
    WCriterionReport,
    WSection,
    WStatReport,
)
from .series import as_series, cdf_points, center, normalize, rank
from .topology import pair_criteria, split_quad
from .wstat import bootstrap_bands, compare_w, w_criterion_pipeline

_log = logging.getLogger(__name__)

FORMATS = ("f64le", "i16le", "csv")
MIN_ANALYZE_LENGTH = 2048
_DTYPES = {"f64le": np.dtype("<f8"), "i16le": np.dtype("<i2")}


# --------------------------------------------------------------------------
# ingestion


def _decode_binary(raw: bytes, fmt: str, base_offset: int = 0) -> np.ndarray:
    dtype = _DTYPES[fmt]
    if len(raw) % dtype.itemsize:
        raise ParseError(
            f"{len(raw)} bytes is not a whole number of {fmt} values",
            base_offset + len(raw) - len(raw) % dtype.itemsize,
            unit="byte offset",
        )
    values = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NonFiniteValue(base_offset + int(bad[0]) * dtype.itemsize)
    return values


def _decode_csv(text: str, first_line: int = 1) -> np.ndarray:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=first_line):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            v = float(s)
        except ValueError:
            raise ParseError(f"not a number: {s[:40]!r}", lineno) from None
        if not math.isfinite(v):
            raise NonFiniteValue(lineno, unit="line")
        out.append(v)
    return np.array(out, dtype=np.float64)


def ingest(path, fmt: str = "f64le") -> np.ndarray:
    """Read a whole file as a series of float64 values.

    Formats: ``f64le`` (IEEE-754 binary64, little endian), ``i16le`` (signed
    16-bit little endian) and ``csv`` (one decimal value per line; blank
    lines and lines starting with ``#`` are ignored).
    """
    if fmt not in FORMATS:
        raise IngestError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    if fmt == "csv":
        return _decode_csv(raw.decode("utf-8", errors="strict"))
    return _decode_binary(raw, fmt)


def iter_binary_chunks(fh: BinaryIO, fmt: str, chunk_size: int) -> Iterator[np.ndarray]:
    """Yield consecutive ``chunk_size``-sample chunks; a short tail is dropped."""
    itemsize = _DTYPES[fmt].itemsize
    nbytes = chunk_size * itemsize
    offset = 0
    while True:
        raw = fh.read(nbytes)
        while raw and len(raw) < nbytes:
            more = fh.read(nbytes - len(raw))
            if not more:
                break
            raw += more
        if len(raw) < nbytes:
            if raw:
                _log.warning("dropping %d trailing bytes (incomplete chunk)", len(raw))
            return
        yield _decode_binary(raw, fmt, offset)
        offset += nbytes


def iter_chunks(values, chunk_size: int) -> Iterator[np.ndarray]:
    values = np.asarray(values, dtype=np.float64)
    full = values.size // chunk_size
    if values.size % chunk_size:
        _log.warning("dropping %d trailing samples (incomplete chunk)", values.size % chunk_size)
    for i in range(full):
        yield values[i * chunk_size : (i + 1) * chunk_size]


def write_series(path, values, fmt: str = "f64le") -> None:
    values = np.asarray(values, dtype=np.float64)
    if fmt == "csv":
        Path(path).write_text("".join(f"{v!r}\n" for v in values.tolist()))
    elif fmt == "i16le":
        Path(path).write_bytes(np.round(values).astype("<i2").tobytes())
    elif fmt == "f64le":
        Path(path).write_bytes(values.astype("<f8").tobytes())
    else:
        raise IngestError(f"unknown format {fmt!r}")


def write_bitfile(path, bits) -> None:
    """Packed bits, most significant bit first, after an 8-byte LE bit count."""
    bits = np.asarray(bits, dtype=np.uint8)
    Path(path).write_bytes(struct.pack("<Q", bits.size) + np.packbits(bits).tobytes())


def read_bitfile(path) -> np.ndarray:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    if len(raw) < 8:
        raise ParseError("bit file is shorter than its 8-byte header", 0, unit="byte offset")
    (count,) = struct.unpack("<Q", raw[:8])
    payload = np.frombuffer(raw[8:], dtype=np.uint8)
    if payload.size * 8 < count:
        raise ParseError(f"header promises {count} bits, file holds {payload.size * 8}", 8, unit="byte offset")
    return np.unpackbits(payload)[:count]


# --------------------------------------------------------------------------
# analysis


@dataclass(frozen=True)
class Curves:
    """Plot-ready arrays: w-SRA points and ranked derivative pairs per pair."""

    w_sra: dict
    inhomogeneity: dict


def _guarded_fit(fn, *args):
    try:
        return fn(*args)
    except (DegenerateSeries, DegenerateInput) as exc:
        _log.warning("angle fit skipped: %s", exc)
        return None


def _summary(fit) -> Optional[FitSummary]:
    return FitSummary.from_fit(fit) if fit is not None else None


def _sra_or_empty(v: np.ndarray, cap: int) -> np.ndarray:
    if v.size < 2 or v.max() == v.min():
        return np.zeros(0)
    return decimate(cdf_points(rank(normalize(v))), cap).x


def _pair_angle(x, y, cfg: AnalysisConfig):
    d = angle.decompose(center(x), center(y))
    t = angle.split(d)
    bits = angle.extract_bits(t)
    battery = nist.run_battery(bits.bits, alpha=cfg.nist_alpha, block_len=cfg.nist_block_len)
    cap = cfg.decimation_cap
    if t.signs.size < angle.MIN_FIT_LENGTH:
        raise TooShort(f"inhomogeneity fits need at least {angle.MIN_FIT_LENGTH} derivatives")
    dphi_fit = _guarded_fit(angle.sra_fit, t.dphi, cap)
    dr_fit = _guarded_fit(angle.sra_fit, t.dr, cap)
    r_fit = _guarded_fit(angle.radius_fit, d.r, cap)
    uniformity = angle.angle_uniformity(d.phi)
    rep = AngleReport(
        n_pairs=int(d.phi.size),
        dropped=d.dropped,
        uniformity=uniformity,
        uniformity_band=float(angle.uniformity_band(d.phi.size)),
        zero_fraction=t.zero_fraction,
        n_bits=int(bits.bits.size),
        ones_fraction=bits.ones_fraction if bits.bits.size else None,
        zeros_dropped=bits.source_zeros_dropped,
        dphi_fit=_summary(dphi_fit),
        dr_fit=_summary(dr_fit),
        radius_fit=_summary(r_fit),
    )
    dr_sra = _sra_or_empty(t.dr, cap)
    dphi_sra = _sra_or_empty(t.dphi, cap)
    if dr_sra.size != dphi_sra.size:
        dr_sra = dphi_sra = np.zeros(0)
    return rep, BatterySummary.from_battery(battery), np.column_stack([dr_sra, dphi_sra])


def _flag(flags: list, role: str, criterion: str, detail: str) -> None:
    flags.append(Flag(criterion=criterion, severity=role, detail=detail))


def _verdict(flags: list) -> str:
    if any(f.severity == "hard" for f in flags):
        return "fail"
    if any(f.severity == "soft" for f in flags):
        return "warn"
    return "pass"


def analyze_with_curves(
    series, config: Optional[AnalysisConfig] = None, descriptor: Optional[str] = None
) -> tuple[FullReport, Curves]:
    cfg = config or AnalysisConfig()
    s = as_series(series)
    truncated = bool(s.size % 2)
    if truncated:
        _log.warning("odd input length %d truncated to %d", s.size, s.size - 1)
        s = s[:-1]
    if s.size < MIN_ANALYZE_LENGTH:
        raise TooShort(f"analyze needs at least {MIN_ANALYZE_LENGTH} samples, got {s.size}")
    digest = hashlib.sha256(s.astype("<f8").tobytes()).hexdigest()
    flags: list[Flag] = []

    quad = split_quad(s)
    n = quad.n
    pc = pair_criteria(quad)
    threshold = pc.threshold(cfg.pearson_factor)
    f12, f34 = pc.flags(cfg.pearson_factor)
    for hit, label, value in ((f12, "12", pc.r2_12), (f34, "34", pc.r2_34)):
        if hit:
            _flag(flags, cfg.pearson_role, f"pearson_{label}", f"R2={value:.3g} > {threshold:.3g}")

    cap = cfg.decimation_cap
    w12 = w_criterion_pipeline(quad.s1, quad.s2, "1&2", cap)
    w34 = w_criterion_pipeline(quad.s3, quad.s4, "3&4", cap)
    bands = bootstrap_bands(n, cfg.bootstrap_draws, cfg.bootstrap_quantile, cfg.seed, cap)
    if bands.low_confidence:
        _flag(flags, "soft", "bootstrap_low_confidence", f"only {bands.draws} bootstrap draws")
    try:
        wc = compare_w(w12, w34, bands)
        crit = WCriterionReport(
            delta_w0=wc.delta_w0,
            delta_dw=wc.delta_dw,
            significant=wc.significant,
            band_w0=wc.band_w0,
            band_dw=wc.band_dw,
        )
        if wc.significant:
            _flag(
                flags,
                cfg.w_role,
                "w_significance",
                f"dw0={wc.delta_w0:.4g} (band {wc.band_w0:.3g}), ddw={wc.delta_dw:.4g} (band {wc.band_dw:.3g})",
            )
    except UnconvergedFit as exc:
        crit = None
        _flag(flags, "soft", "w_fit_unconverged", str(exc))

    a12, nist12, inh12 = _pair_angle(quad.s1, quad.s2, cfg)
    a34, nist34, inh34 = _pair_angle(quad.s3, quad.s4, cfg)
    for label, a in (("12", a12), ("34", a34)):
        if a.uniformity > a.uniformity_band:
            _flag(
                flags,
                cfg.uniformity_role,
                f"angle_uniformity_{label}",
                f"deviation {a.uniformity:.3g} > {a.uniformity_band:.3g}",
            )
        missing = [k for k in ("dphi_fit", "dr_fit", "radius_fit") if getattr(a, k) is None]
        if missing:
            _flag(flags, cfg.uniformity_role, f"angle_degenerate_{label}", "constant input to " + ", ".join(missing))
    for label, b in (("12", nist12), ("34", nist34)):
        failed = [r.name for r in b.results if not r.passed]
        if failed:
            _flag(flags, cfg.nist_role, f"nist_{label}", "failed: " + ", ".join(failed))
        elif not b.results:
            _flag(flags, cfg.nist_role, f"nist_{label}", "no test could run on the extracted bits")

    report = FullReport(
        input=InputDescriptor(
            descriptor=descriptor if descriptor is not None else f"series:{digest[:16]}",
            sha256=digest,
            n_samples=int(s.size),
            truncated=truncated,
        ),
        config=cfg,
        pair_criterion=PairCriterionReport(
            r2_12=pc.r2_12, r2_34=pc.r2_34, n=n, threshold=threshold, flag_12=f12, flag_34=f34
        ),
        w_stats=WSection(
            pair_12=WStatReport(label="1&2", n=n, fit=FitSummary.from_fit(w12.fit)),
            pair_34=WStatReport(label="3&4", n=n, fit=FitSummary.from_fit(w34.fit)),
            bands=WBandsReport(
                band_w0=bands.band_w0,
                band_dw=bands.band_dw,
                median_w0=bands.median_w0,
                median_dw=bands.median_dw,
                draws=bands.draws,
                quantile=bands.quantile,
                seed=bands.seed,
                low_confidence=bands.low_confidence,
            ),
            criterion=crit,
        ),
        angle=AngleSection(pair_12=a12, pair_34=a34),
        nist=NistSection(pair_12=nist12, pair_34=nist34),
        flags=flags,
        verdict=_verdict(flags),
    )
    curves = Curves(
        w_sra={
            "12": decimate(cdf_points(w12.w_ranked), cap),
            "34": decimate(cdf_points(w34.w_ranked), cap),
        },
        inhomogeneity={"12": inh12, "34": inh34},
    )
    return report, curves


def analyze(series, config: Optional[AnalysisConfig] = None, descriptor: Optional[str] = None) -> FullReport:
    """Run every criterion on one series and assemble the verdict.

    The series is split into the four subsamples; pairs 1&2 and 3&4 each get
    the w-statistic, angle analysis and the NIST battery on their sign bits.
    """
    return analyze_with_curves(series, config, descriptor)[0]


def write_plots(curves: Curves, directory) -> list[Path]:
    """Write two-column text files for the w-SRA and derivative-SRA curves."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for label, pts in curves.w_sra.items():
        p = out / f"w_sra_{label}.tsv"
        np.savetxt(p, np.column_stack([pts.x, pts.z]), delimiter="\t", header="w\tz", fmt="%.17g")
        written.append(p)
    for label, arr in curves.inhomogeneity.items():
        p = out / f"inhomogeneity_{label}.tsv"
        np.savetxt(p, arr, delimiter="\t", header="r_prime\tphi_prime", fmt="%.17g")
        written.append(p)
    return written


# --------------------------------------------------------------------------
# monitoring


@dataclass(frozen=True)
class ChunkRecord:
    index: int
    verdict: str
    alarm: bool
    report: Optional[FullReport] = None
    error: Optional[str] = None


def monitor(chunks: Iterable, config: Optional[AnalysisConfig] = None) -> Iterator[ChunkRecord]:
    """Analyze consecutive chunks and raise alarms on runs of failures.

    Chunks are numbered from 1.  An alarm is attached to the chunk at which
    the count of consecutive ``fail`` verdicts reaches
    ``config.consecutive_alarms``; any other outcome (pass, warn or an
    errored chunk) resets the count.
    """
    cfg = config or AnalysisConfig()
    streak = 0
    for index, chunk in enumerate(chunks, start=1):
        try:
            report = analyze(chunk, cfg, descriptor=f"chunk:{index}")
        except (RngVerifyError, ArithmeticError) as exc:
            streak = 0
            _log.warning("chunk %d errored: %s", index, exc)
            yield ChunkRecord(index=index, verdict="error", alarm=False, error=str(exc))
            continue
        streak = streak + 1 if report.verdict == "fail" else 0
        alarm = streak == cfg.consecutive_alarms
        if alarm:
            _log.warning("alarm at chunk %d: %d consecutive failing chunks", index, streak)
        yield ChunkRecord(index=index, verdict=report.verdict, alarm=alarm, report=report)


def open_stream(path: str) -> BinaryIO:
    if path == "-":
        return sys.stdin.buffer
    try:
        return open(path, "rb")
    except OSError as exc:
        raise IngestError(f"cannot open {path}: {exc}") from exc
