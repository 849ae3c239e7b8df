"""
Experiment configuration.

Experiment files are flat KEY=value documents (dotenv syntax, keys
case-insensitive, lists comma-separated):

    NAME=exp2
    FAMILY=gaussian
    SIGMA=1.0
    MEANS=7.25,7.05,7,7.1
    POLICIES=at2,iat2,eb-tcb:0.5,eb-itcb:0.5
    DELTA=0.001
    THRESHOLD=gk16
    RUNS=4000
    SEED=2024

Command-line overrides are applied on top of the file before validation.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from anchored_bai.config.settings import get_settings
from anchored_bai.sampling.policy import Policy, ThresholdStyle
from anchored_bai.spef.instance import BanditInstance
from anchored_bai.utils.errors import BaiError, ConfigError

SERIES = ("anchor", "indexes", "proportions")


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "experiment"
    family: str = "gaussian"
    sigma: float = Field(default=1.0, gt=0.0)
    means: List[float] = Field(..., min_length=2)
    policies: List[str] = Field(default_factory=lambda: ["at2"], min_length=1)
    delta: float = Field(default=0.001, gt=0.0, lt=1.0)
    threshold: ThresholdStyle = ThresholdStyle.GK16
    runs: int = Field(default=100, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    cap: Optional[int] = Field(default=None, ge=2)
    alpha: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    workers: Optional[int] = None

    # Diagnostic capture (stop rule disabled, runs go to the horizon)
    horizon: Optional[int] = Field(default=None, ge=2)
    trajectory_stride: int = Field(default=10, ge=1)
    series: List[str] = Field(default_factory=lambda: list(SERIES))

    # Outputs
    output_dir: Optional[str] = None
    per_run_csv: bool = False

    @field_validator("means", "policies", "series", mode="before")
    @classmethod
    def _lists(cls, value):
        return _split_list(value)

    @field_validator("threshold", mode="before")
    @classmethod
    def _threshold(cls, value):
        return value.strip().lower() if isinstance(value, str) else value

    @field_validator("series")
    @classmethod
    def _series(cls, value: List[str]) -> List[str]:
        unknown = sorted(set(value) - set(SERIES))
        if unknown:
            raise ValueError(f"unknown series {unknown}, expected a subset of {list(SERIES)}")
        return value

    @model_validator(mode="after")
    def _domain(self) -> "ExperimentConfig":
        # Family, means and policy strings are checked by building them once
        try:
            self.instance()
            self.policy_objects()
        except BaiError as exc:
            raise ValueError(str(exc)) from None
        if self.horizon is not None and self.horizon < len(self.means):
            raise ValueError(f"horizon {self.horizon} is below the number of arms")
        return self

    def instance(self) -> BanditInstance:
        return BanditInstance.from_means(self.means, self.family, self.sigma)

    @property
    def resolved_alpha(self) -> float:
        return get_settings().default_alpha if self.alpha is None else self.alpha

    @property
    def resolved_cap(self) -> int:
        return get_settings().default_cap if self.cap is None else self.cap

    def policy_objects(self) -> List[Policy]:
        return [Policy.parse(text, alpha=self.resolved_alpha) for text in self.policies]

    def resolved(self) -> Dict[str, Any]:
        """Config with defaults filled in, as embedded in every output header"""
        data = self.model_dump(mode="json")
        data["alpha"] = self.resolved_alpha
        data["cap"] = self.resolved_cap
        data.pop("workers")
        data.pop("output_dir")
        return data

    def header(self) -> str:
        """Single ``# config:`` comment line for CSV artifacts"""
        return "# config: " + json.dumps(self.resolved(), sort_keys=True)


def load_config(
    path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """
    Build an ExperimentConfig from a key-value file plus overrides.

    Args:
        path: Experiment file (dotenv syntax); optional when overrides name the means
        overrides: Values taking precedence over the file; None entries are ignored

    Raises:
        ConfigError: on a missing file, unknown keys or invalid values
    """
    values: Dict[str, Any] = {}
    if path is not None:
        file_path = Path(path)
        if not file_path.is_file():
            raise ConfigError(f"config file not found: {path}")
        values.update(
            {key.strip().lower(): value for key, value in dotenv_values(file_path).items()}
        )
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key.lower()] = value
    try:
        return ExperimentConfig(**values)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
            for err in exc.errors()
        )
        raise ConfigError(f"invalid configuration: {problems}") from None
