"""Report document models, JSON emission and parsing.

The field layout is pinned by ``schema/report.schema.json`` (generated from
these models; a test keeps the two in sync).  Bump ``SCHEMA_VERSION`` on any
incompatible change.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict

from .config import AnalysisConfig
from .erf_fit import ErfFitResult, ErfModel
from .nist import BatteryReport, TestResult

SCHEMA_VERSION = "1.0"
SCHEMA_PATH = Path(__file__).parent / "schema" / "report.schema.json"

Verdict = Literal["pass", "warn", "fail"]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class FitSummary(_Model):
    family: Literal["erf", "erf_extended"]
    w0: float
    dw: float
    a: Optional[float] = None
    b: Optional[float] = None
    theta: Optional[float] = None
    r2: float
    rss: float
    iterations: int
    converged: bool
    status: str
    n_points: int

    @classmethod
    def from_fit(cls, fit: ErfFitResult) -> "FitSummary":
        m = fit.model
        common = dict(
            w0=m.w0,
            dw=m.dw,
            r2=fit.r2,
            rss=fit.rss,
            iterations=fit.iterations,
            converged=fit.converged,
            status=fit.status,
            n_points=fit.n_points,
        )
        if isinstance(m, ErfModel):
            return cls(family="erf", **common)
        return cls(family="erf_extended", a=m.a, b=m.b, theta=m.theta, **common)


class InputDescriptor(_Model):
    descriptor: str
    sha256: str
    n_samples: int
    truncated: bool


class PairCriterionReport(_Model):
    r2_12: float
    r2_34: float
    n: int
    threshold: float
    flag_12: bool
    flag_34: bool


class WStatReport(_Model):
    label: str
    n: int
    fit: FitSummary


class WBandsReport(_Model):
    band_w0: float
    band_dw: float
    median_w0: float
    median_dw: float
    draws: int
    quantile: float
    seed: int
    low_confidence: bool


class WCriterionReport(_Model):
    delta_w0: float
    delta_dw: float
    significant: bool
    band_w0: float
    band_dw: float


class WSection(_Model):
    pair_12: WStatReport
    pair_34: WStatReport
    bands: WBandsReport
    criterion: Optional[WCriterionReport]


class AngleReport(_Model):
    n_pairs: int
    dropped: int
    uniformity: float
    uniformity_band: float
    zero_fraction: float
    n_bits: int
    ones_fraction: Optional[float]
    zeros_dropped: int
    dphi_fit: Optional[FitSummary]
    dr_fit: Optional[FitSummary]
    radius_fit: Optional[FitSummary]


class AngleSection(_Model):
    pair_12: AngleReport
    pair_34: AngleReport


class TestResultReport(_Model):
    name: str
    statistic: float
    p_value: float
    passed: bool
    n_bits: int

    __test__ = False

    @classmethod
    def from_result(cls, r: TestResult) -> "TestResultReport":
        return cls(name=r.name, statistic=r.statistic, p_value=r.p_value, passed=r.passed, n_bits=r.n_bits)


class SkippedTest(_Model):
    name: str
    reason: str


class BatterySummary(_Model):
    results: list[TestResultReport]
    skipped: list[SkippedTest]
    all_passed: bool
    n_bits: int
    empty: bool
    alpha: float

    @classmethod
    def from_battery(cls, b: BatteryReport) -> "BatterySummary":
        return cls(
            results=[TestResultReport.from_result(r) for r in b.results],
            skipped=[SkippedTest(name=n, reason=why) for n, why in b.skipped],
            all_passed=b.all_passed,
            n_bits=b.n_bits,
            empty=b.empty,
            alpha=b.alpha,
        )


class NistSection(_Model):
    pair_12: BatterySummary
    pair_34: BatterySummary


class Flag(_Model):
    criterion: str
    severity: Literal["hard", "soft", "info"]
    detail: str


class FullReport(_Model):
    schema_version: str = SCHEMA_VERSION
    input: InputDescriptor
    config: AnalysisConfig
    pair_criterion: PairCriterionReport
    w_stats: WSection
    angle: AngleSection
    nist: NistSection
    flags: list[Flag]
    verdict: Verdict


def dumps_report(report: FullReport) -> str:
    return report.model_dump_json(indent=2) + "\n"


def emit_report(report: FullReport, path) -> None:
    Path(path).write_text(dumps_report(report))


def parse_report(text: str) -> FullReport:
    data = json.loads(text)
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema version {version!r}")
    return FullReport.model_validate(data)


def load_report(path) -> FullReport:
    return parse_report(Path(path).read_text())


def report_schema() -> dict:
    return FullReport.model_json_schema()
