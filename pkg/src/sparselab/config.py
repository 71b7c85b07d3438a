"""Run configuration: a strict, JSON-round-trippable description of a
single experiment.

Parsing is strict in both directions: unknown keys are rejected at
every level, and model_dump -> model_validate is the identity, so a
config written next to results always reproduces them.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError

__all__ = [
    "EXPERIMENT_NAMES",
    "EnsembleModel",
    "DecompositionModel",
    "GridModel",
    "ExperimentConfig",
    "load_config",
    "parse_config",
]

EXPERIMENT_NAMES = (
    "square-sv",
    "rect-sv",
    "tail-curve",
    "ric-exact",
    "ric-prop1",
    "sparse-min",
    "hyperplane-dist",
    "berry-esseen",
    "net-bounds",
    "l1-recovery",
    "decomposition",
)

# experiments that need an explicit second dimension / sparsity / etc.
_NEEDS_n = {"rect-sv", "ric-exact", "ric-prop1", "l1-recovery"}
_NEEDS_s = {"ric-exact", "ric-prop1", "l1-recovery"}
_NEEDS_eps = {"net-bounds"}
_NEEDS_delta = {"ric-prop1"}


class EnsembleModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    distribution: Literal[
        "gaussian", "rademacher", "uniform", "heavy-tail4", "identity-debug"
    ] = "gaussian"
    normalization: Literal["raw", "inv-sqrt-rows"] = "raw"


class DecompositionModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sparsity_fraction: float = Field(default=0.1, gt=0.0, lt=1.0)
    compressibility_radius: float = Field(default=0.2, gt=0.0, le=1.4142135623730951)
    spread_level: float = Field(default=1.0, gt=0.0)
    spread_fraction: float = Field(default=0.1, gt=0.0, lt=1.0)


class GridModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lo: float = 0.0
    hi: float = 1.0
    points: int = Field(default=101, ge=2)

    @model_validator(mode="after")
    def _ordered(self) -> "GridModel":
        if not self.hi > self.lo:
            raise ValueError(f"grid needs hi > lo, got [{self.lo}, {self.hi}]")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


class ExperimentConfig(BaseModel):
    """Everything a run depends on.  Output files are a pure function
    of this object; in particular no timestamps or host details leak
    into them."""

    model_config = ConfigDict(extra="forbid")

    experiment: Literal[EXPERIMENT_NAMES]  # type: ignore[valid-type]
    N: int = Field(ge=1)
    n: Optional[int] = Field(default=None, ge=1)
    s: Optional[int] = Field(default=None, ge=0)
    eps: Optional[float] = Field(default=None, gt=0.0, le=2.0)
    eps_grid: GridModel = GridModel()
    delta: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    trials: int = Field(default=100, ge=1)
    probes: int = Field(default=10_000, ge=1)
    seed: int = Field(default=0, ge=0, lt=1 << 64)
    workers: int = Field(default=1, ge=1, le=64)
    budget: int = Field(default=1_000_000, ge=1)
    support_trials: Optional[int] = Field(default=None, ge=1)
    net_candidates: int = Field(default=800, ge=1)
    ensemble: EnsembleModel = EnsembleModel()
    params: DecompositionModel = DecompositionModel()
    out: Optional[str] = None
    format: Literal["csv", "json", "both"] = "both"

    @model_validator(mode="after")
    def _cross_checks(self) -> "ExperimentConfig":
        name = self.experiment
        if name in _NEEDS_n and self.n is None:
            raise ValueError(f"{name} requires n")
        if name in _NEEDS_s and self.s is None:
            raise ValueError(f"{name} requires s")
        if name in _NEEDS_eps and self.eps is None:
            raise ValueError(f"{name} requires eps")
        if name in _NEEDS_delta and self.delta is None:
            raise ValueError(f"{name} requires delta")
        if name == "rect-sv" and self.n is not None and self.n > self.N:
            raise ValueError(f"rect-sv needs n <= N, got n={self.n}, N={self.N}")
        if name in ("hyperplane-dist", "berry-esseen") and self.N < 2:
            raise ValueError(f"{name} needs N >= 2")
        if self.s is not None and self.s > self.N:
            raise ValueError(f"s={self.s} exceeds N={self.N}")
        if name == "l1-recovery" and self.s is not None and self.n is not None:
            if self.s > self.n:
                raise ValueError(f"l1-recovery needs s <= n, got s={self.s}, n={self.n}")
        if name == "ric-exact" and self.s is not None and self.s < 1:
            raise ValueError("ric-exact needs s >= 1")
        if name == "ric-prop1" and self.s is not None and self.s < 1:
            raise ValueError("ric-prop1 needs s >= 1")
        if name == "net-bounds" and self.s is not None:
            if not 1 <= self.s <= self.N // 2:
                raise ValueError(
                    f"net-bounds with sparse target needs 1 <= s <= N/2, got s={self.s}, N={self.N}"
                )
        return self

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2, sort_keys=True)


def parse_config(data) -> ExperimentConfig:
    """Validate a dict or JSON string, mapping pydantic failures to the
    library's ConfigError so callers get exit code 2."""
    try:
        if isinstance(data, (str, bytes)):
            return ExperimentConfig.model_validate_json(data)
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    return parse_config(text)
