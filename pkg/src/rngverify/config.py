"""Analysis configuration, loadable from a JSON file."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .erf_fit import DECIMATION_CAP
from .nist import ALPHA

_log = logging.getLogger(__name__)

Role = Literal["hard", "soft", "info"]


class AnalysisConfig(BaseModel):
    """Thresholds and switches for ``analyze`` and ``monitor``.

    Each criterion has a role: ``hard`` findings fail the verdict, ``soft``
    ones downgrade it to warn, ``info`` ones are reported only.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    pearson_factor: float = Field(10.0, gt=0)
    bootstrap_draws: int = Field(200, ge=2)
    bootstrap_quantile: float = Field(0.99, ge=0.5, lt=1)
    nist_alpha: float = Field(ALPHA, gt=0, lt=1)
    nist_block_len: int = Field(128, ge=20)
    chunk_size: int = Field(65536, ge=2048)
    consecutive_alarms: int = Field(3, ge=1)
    seed: int = Field(42, ge=0, lt=2**64)
    decimation_cap: int = Field(DECIMATION_CAP, ge=8)
    pearson_role: Role = "hard"
    w_role: Role = "hard"
    nist_role: Role = "soft"
    uniformity_role: Role = "soft"

    @field_validator("nist_alpha")
    @classmethod
    def _warn_alpha(cls, v: float) -> float:
        if v != ALPHA:
            _log.warning("nist_alpha overridden to %g (standard pass rule is p > 0.01)", v)
        return v

    @field_validator("chunk_size")
    @classmethod
    def _even_chunk(cls, v: int) -> int:
        if v % 2:
            raise ValueError("chunk_size must be even")
        return v


def load_config(path) -> AnalysisConfig:
    text = Path(path).read_text()
    return AnalysisConfig.model_validate(json.loads(text))
