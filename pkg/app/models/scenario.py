"""Scenario and sweep descriptions (pydantic models loaded from TOML files)."""

from typing import Any, Dict, List, Optional
import logging
import math

import numpy as np
import tomli
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.core.exceptions import ConfigurationError
from app.models.models import MethodId, MseForm, SweepKind, ThetaInit

logger = logging.getLogger(__name__)


class Position(BaseModel):
    """Planar node position in meters."""

    model_config = ConfigDict(frozen=True)

    x: float
    y: float

    @model_validator(mode="before")
    @classmethod
    def _from_pair(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple)):
            if len(data) != 2:
                raise ValueError(f"position needs two coordinates, got {len(data)}")
            return {"x": data[0], "y": data[1]}
        return data

    @model_validator(mode="after")
    def _finite(self) -> "Position":
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("position coordinates must be finite")
        return self

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def _default_ap_positions() -> List[Position]:
    return [Position(x=x, y=-50.0) for x in (0.0, 30.0, 60.0, 90.0, 120.0)]


class ScenarioConfig(BaseModel):
    """Full experiment description. Powers in dBm, distances in meters."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_aps: int = Field(5, ge=1)
    antennas_per_ap: int = Field(8, ge=1)
    num_users: int = Field(4, ge=1)
    ris_elements: int = Field(100, ge=1)

    ap_positions: List[Position] = Field(default_factory=_default_ap_positions)
    ris_position: Position = Position(x=60.0, y=10.0)
    user_circle_center: Position = Position(x=60.0, y=0.0)
    user_circle_radius: float = Field(5.0, ge=0.0)

    p_max_dbm: float = 20.0
    noise_dbm: float = -70.0
    pathloss_ref_db: float = -32.0
    ref_distance: float = Field(1.0, gt=0.0)
    exponent_ap_user: float = Field(3.6, gt=0.0)
    exponent_ap_ris: float = Field(2.2, gt=0.0)
    exponent_ris_user: float = Field(2.6, gt=0.0)

    rate_weights: Optional[List[float]] = None

    convergence_eps: float = Field(1e-3, gt=0.0)
    max_iterations: int = Field(100, ge=1)
    seed: int = Field(0, ge=0)

    theta_init: ThetaInit = ThetaInit.ones
    mse_form: MseForm = MseForm.per_ap
    finalize_unit_modulus: bool = False
    centralized_inner_passes: int = Field(3, ge=1)

    @model_validator(mode="after")
    def _check_lengths(self) -> "ScenarioConfig":
        if len(self.ap_positions) != self.num_aps:
            raise ValueError(
                f"ap_positions has {len(self.ap_positions)} entries but num_aps={self.num_aps}"
            )
        if self.rate_weights is not None:
            if len(self.rate_weights) != self.num_users:
                raise ValueError(
                    f"rate_weights has {len(self.rate_weights)} entries but num_users={self.num_users}"
                )
            if any(not (w > 0 and math.isfinite(w)) for w in self.rate_weights):
                raise ValueError("rate_weights must be positive and finite")
        return self

    @property
    def p_max_mw(self) -> float:
        from app.utils.channel import dbm_to_linear
        return dbm_to_linear(self.p_max_dbm)

    @property
    def noise_mw(self) -> float:
        from app.utils.channel import dbm_to_linear
        return dbm_to_linear(self.noise_dbm)

    @property
    def weights(self) -> np.ndarray:
        if self.rate_weights is None:
            return np.ones(self.num_users)
        return np.asarray(self.rate_weights, dtype=float)

    def with_overrides(self, **changes: Any) -> "ScenarioConfig":
        """Validated copy with some fields replaced."""
        data = self.model_dump()
        data.update(changes)
        try:
            return ScenarioConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigurationError(str(e)) from e


# Default grids for each sweep kind
DEFAULT_SWEEP_VALUES: Dict[SweepKind, List[float]] = {
    SweepKind.power: [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
    SweepKind.user_location: [0.0, 20.0, 40.0, 60.0, 80.0, 100.0, 120.0],
    SweepKind.ris_elements: [20.0, 40.0, 60.0, 80.0, 100.0],
}


class SweepSpec(BaseModel):
    """A Monte-Carlo sweep over one scenario parameter."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SweepKind
    values: List[float]
    methods: List[MethodId] = Field(default_factory=lambda: list(MethodId))
    num_seeds: int = Field(50, ge=1)
    seed_offset: int = Field(0, ge=0)
    base_config: ScenarioConfig = Field(default_factory=ScenarioConfig)

    @model_validator(mode="after")
    def _non_empty(self) -> "SweepSpec":
        if not self.values:
            raise ValueError("sweep values must not be empty")
        if not self.methods:
            raise ValueError("sweep methods must not be empty")
        if self.kind == SweepKind.ris_elements and any(v < 1 or v != int(v) for v in self.values):
            raise ValueError("RIS element counts must be positive integers")
        return self

    @classmethod
    def preset(cls, kind: SweepKind, num_users: int = 4, num_seeds: int = 50, **overrides: Any) -> "SweepSpec":
        base = ScenarioConfig(num_users=num_users, **overrides)
        return cls(kind=kind, values=DEFAULT_SWEEP_VALUES[kind], num_seeds=num_seeds, base_config=base)

    def config_for(self, value: float) -> ScenarioConfig:
        """Scenario of one sweep cell."""
        if self.kind == SweepKind.power:
            return self.base_config.with_overrides(p_max_dbm=float(value))
        if self.kind == SweepKind.user_location:
            return self.base_config.with_overrides(user_circle_center={"x": float(value), "y": 0.0})
        return self.base_config.with_overrides(ris_elements=int(value))

    def seeds(self) -> List[int]:
        return list(range(self.seed_offset, self.seed_offset + self.num_seeds))


def _read_toml(path: str) -> Dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except (OSError, tomli.TOMLDecodeError) as e:
        logger.error(f"Error reading config file {path}: {str(e)}")
        raise ConfigurationError(f"cannot read {path}: {e}") from e


def load_scenario(path: str) -> ScenarioConfig:
    """Load a scenario TOML file; the literal 'default' returns the built-in scenario."""
    if path == "default":
        return ScenarioConfig()
    data = _read_toml(path)
    data = data.get("scenario", data)
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e


def load_sweep_spec(path: str) -> SweepSpec:
    """Load a sweep TOML file with a [sweep] table and an optional [scenario] table."""
    data = _read_toml(path)
    if "sweep" not in data:
        raise ConfigurationError(f"{path} has no [sweep] table")
    payload = dict(data["sweep"])
    if "scenario" in data:
        payload["base_config"] = data["scenario"]
    if "values" not in payload and "kind" in payload:
        try:
            payload["values"] = DEFAULT_SWEEP_VALUES[SweepKind(payload["kind"])]
        except ValueError as e:
            raise ConfigurationError(str(e)) from e
    try:
        return SweepSpec.model_validate(payload)
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e
