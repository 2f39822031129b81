"""Scenario files: schema, validation and loading.

A scenario is one YAML (or JSON) document. Every angle in a scenario file is
in degrees; everything else is SI. Unknown keys are rejected so that a typo in
a tactical parameter cannot silently fall back to a default.

Minimal example::

    name: head_on
    base_dt: 0.1
    duration: 300
    scoring: {pair: [blue, red]}
    entities:
      - id: blue
        initial: {x: 0, y: 0, z: 3000, heading: 0, speed: 250}
        agent: {type: fsm_stern}
        target: red
      - id: red
        initial: {x: 15000, y: 2000, z: 3000, heading: 180, speed: 200}
        agent: {type: straight_and_level}
"""

from __future__ import annotations

import copy
import math
from pathlib import Path
from typing import Annotated, Any, Literal, Mapping, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .agents import (
    ActionQuanta,
    Agent,
    BtSternAgent,
    FsmSternAgent,
    LowLevelAction,
    LowLevelScriptAgent,
    PursuitSettings,
    StraightAndLevel,
    SternConversionParams,
    TreeError,
    WaypointAgent,
    load_tree,
)
from .dynamics import PerformanceLimits
from .scoring import ScoringConfig
from .state import EntityState


class ConfigError(ValueError):
    """Scenario failed validation; the message names the offending field."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


Range = tuple[float, float]


class InitialState(_Model):
    x: float
    y: float
    z: float = Field(ge=0.0)
    heading: float = 0.0
    speed: float = Field(gt=0.0)
    gamma: float = 0.0
    bank: float = 0.0

    def to_state(self) -> EntityState:
        return EntityState(
            x=self.x, y=self.y, z=self.z,
            heading=math.radians(self.heading), speed=self.speed,
            gamma=math.radians(self.gamma), bank=math.radians(self.bank),
        )


class Randomization(_Model):
    """Uniform draws replacing the initial value, each as ``[low, high]``."""

    x: Optional[Range] = None
    y: Optional[Range] = None
    z: Optional[Range] = None
    heading: Optional[Range] = None
    speed: Optional[Range] = None

    @model_validator(mode="after")
    def _ordered(self) -> "Randomization":
        for key in ("x", "y", "z", "heading", "speed"):
            r = getattr(self, key)
            if r is not None and not r[0] <= r[1]:
                raise ValueError(f"{key}: low must not exceed high")
        if self.z is not None and self.z[0] < 0.0:
            raise ValueError("z: altitude range must be non-negative")
        if self.speed is not None and self.speed[0] <= 0.0:
            raise ValueError("speed: range must be positive")
        return self


class LimitsModel(_Model):
    v_min: float = 50.0
    v_max: float = 400.0
    bank_max: float = 60.0
    roll_rate_max: float = 90.0
    gamma_max: float = 20.0
    pitch_rate_max: float = 10.0
    accel_min: float = -8.0
    accel_max: float = 8.0
    g: float = 9.81
    k_alt: float = 0.005
    k_v: float = 1.0
    k_bank: float = 4.0
    heading_deadband: float = 0.5

    @model_validator(mode="after")
    def _check(self) -> "LimitsModel":
        self.to_limits()
        return self

    def to_limits(self) -> PerformanceLimits:
        r = math.radians
        return PerformanceLimits(
            v_min=self.v_min, v_max=self.v_max,
            bank_max=r(self.bank_max), roll_rate_max=r(self.roll_rate_max),
            gamma_max=r(self.gamma_max), pitch_rate_max=r(self.pitch_rate_max),
            accel_min=self.accel_min, accel_max=self.accel_max, g=self.g,
            k_alt=self.k_alt, k_v=self.k_v, k_bank=self.k_bank,
            heading_deadband=r(self.heading_deadband),
        )


class SternParamsModel(_Model):
    r_conversion: float = 4000.0
    d_offset: float = 2000.0
    r_turn_in: float = 1500.0
    r_station: float = 500.0
    v_match_tol: float = 20.0
    capture_aa: float = 60.0
    capture_ata: float = 30.0

    @model_validator(mode="after")
    def _check(self) -> "SternParamsModel":
        self.to_params()
        return self

    def to_params(self) -> SternConversionParams:
        return SternConversionParams(
            r_conversion=self.r_conversion, d_offset=self.d_offset, r_turn_in=self.r_turn_in,
            r_station=self.r_station, v_match_tol=self.v_match_tol,
            capture_aa=math.radians(self.capture_aa), capture_ata=math.radians(self.capture_ata),
        )

    @classmethod
    def from_params(cls, p: SternConversionParams) -> "SternParamsModel":
        d = p.as_dict()
        d["capture_aa"] = math.degrees(d["capture_aa"])
        d["capture_ata"] = math.degrees(d["capture_ata"])
        return cls(**d)


class PursuitModel(_Model):
    intercept_speed: float = 250.0
    cut_angle: float = 30.0
    closure_gain: float = 0.04

    @model_validator(mode="after")
    def _check(self) -> "PursuitModel":
        self.to_settings()
        return self

    def to_settings(self) -> PursuitSettings:
        return PursuitSettings(self.intercept_speed, math.radians(self.cut_angle), self.closure_gain)


class StraightSpec(_Model):
    type: Literal["straight_and_level"]
    heading: Optional[float] = None
    altitude: Optional[float] = None
    speed: Optional[float] = None

    def build(self) -> Agent:
        h = None if self.heading is None else math.radians(self.heading)
        return StraightAndLevel(h, self.altitude, self.speed)


class WaypointSpec(_Model):
    type: Literal["waypoint"]
    waypoints: list[tuple[float, float, float]] = Field(min_length=1)
    speed: float = Field(200.0, gt=0.0)
    capture_radius: float = Field(500.0, gt=0.0)
    loop: bool = False

    def build(self) -> Agent:
        return WaypointAgent(self.waypoints, self.speed, self.capture_radius, self.loop)


class ScriptSpec(_Model):
    type: Literal["low_level_script"]
    script: list[LowLevelAction] = Field(default_factory=list)
    loop: bool = False
    heading_quantum: float = 10.0
    speed_quantum: float = 10.0
    altitude_quantum: float = 100.0

    def build(self) -> Agent:
        q = ActionQuanta(math.radians(self.heading_quantum), self.speed_quantum, self.altitude_quantum)
        return LowLevelScriptAgent(self.script, q, self.loop)


class FsmSternSpec(_Model):
    type: Literal["fsm_stern"]
    params: SternParamsModel = SternParamsModel()
    settings: PursuitModel = PursuitModel()

    def build(self, params: SternConversionParams | None = None) -> Agent:
        return FsmSternAgent(params or self.params.to_params(), self.settings.to_settings())


class BtSternSpec(_Model):
    type: Literal["bt_stern"]
    params: SternParamsModel = SternParamsModel()
    settings: PursuitModel = PursuitModel()
    tree: Optional[dict[str, Any]] = None

    @field_validator("tree")
    @classmethod
    def _tree_loads(cls, v: dict[str, Any] | None) -> dict[str, Any] | None:
        if v is not None:
            try:
                load_tree(v)
            except TreeError as e:
                raise ValueError(str(e)) from None
        return v

    def build(self, params: SternConversionParams | None = None) -> Agent:
        return BtSternAgent(params or self.params.to_params(), self.settings.to_settings(), self.tree)


AgentSpec = Annotated[
    Union[StraightSpec, WaypointSpec, ScriptSpec, FsmSternSpec, BtSternSpec],
    Field(discriminator="type"),
]


class EntitySpec(_Model):
    id: str = Field(min_length=1)
    team: Optional[str] = None
    initial: InitialState
    limits: LimitsModel = LimitsModel()
    agent: AgentSpec
    decision_period: int = Field(1, ge=1)
    target: Optional[str] = None
    sensor_range: Optional[float] = Field(None, gt=0.0)
    randomize: Optional[Randomization] = None

    @property
    def team_id(self) -> str:
        return self.team if self.team is not None else self.id


class ScoringModel(_Model):
    r_desired: float = 500.0
    k: float = 100.0
    r_min: float = 150.0
    r_max: float = 1000.0
    v_min: float = 20.0
    t_hold: float = 3.0
    pair: Optional[tuple[str, str]] = None

    @model_validator(mode="after")
    def _check(self) -> "ScoringModel":
        self.to_config()
        return self

    def to_config(self) -> ScoringConfig:
        return ScoringConfig(self.r_desired, self.k, self.r_min, self.r_max, self.v_min, self.t_hold)


class ScenarioConfig(_Model):
    name: str = "scenario"
    base_dt: float = Field(0.1, gt=0.0)
    duration: float = Field(gt=0.0)
    seed: int = Field(0, ge=0)
    collision_floor: float = Field(50.0, ge=0.0)
    scoring: ScoringModel = ScoringModel()
    entities: list[EntitySpec] = Field(min_length=1)

    @model_validator(mode="after")
    def _references(self) -> "ScenarioConfig":
        seen: set[str] = set()
        for e in self.entities:
            if e.id in seen:
                raise ValueError(f"duplicate entity id {e.id!r}")
            seen.add(e.id)
        for e in self.entities:
            if e.target is not None:
                if e.target not in seen:
                    raise ValueError(f"entity {e.id!r}: target {e.target!r} does not exist")
                if e.target == e.id:
                    raise ValueError(f"entity {e.id!r} cannot target itself")
        if self.scoring.pair is not None:
            blue, red = self.scoring.pair
            for who in (blue, red):
                if who not in seen:
                    raise ValueError(f"scoring.pair: entity {who!r} does not exist")
            if blue == red:
                raise ValueError("scoring.pair: entities must differ")
        return self

    def entity(self, entity_id: str) -> EntitySpec:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise KeyError(entity_id)

    def scoring_pair(self) -> tuple[str, str] | None:
        """Explicit ``scoring.pair`` or the smallest id that has a target."""
        if self.scoring.pair is not None:
            return self.scoring.pair
        with_target = sorted(e.id for e in self.entities if e.target is not None)
        if not with_target:
            return None
        blue = with_target[0]
        return blue, self.entity(blue).target


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        msg = e["msg"]
        if msg.startswith("Value error, "):
            msg = msg[len("Value error, "):]
        lines.append(f"{loc}: {msg}")
    return "; ".join(lines)


def parse_scenario(data: Mapping[str, Any]) -> ScenarioConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("scenario document must be a mapping")
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_errors(e)) from None


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read scenario {path}: {e.strerror or e}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: not valid YAML/JSON: {e}") from None
    return parse_scenario(data or {})


def scenario_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    return cfg.model_dump(mode="json", exclude_none=True)


def merge_fragment(data: Mapping[str, Any], fragment: Mapping[str, Any]) -> dict[str, Any]:
    """Deep-merge ``fragment`` into a scenario dict; entity lists merge by ``id``."""

    def merge(base: Any, over: Any) -> Any:
        if isinstance(base, Mapping) and isinstance(over, Mapping):
            out = dict(base)
            for k, v in over.items():
                out[k] = merge(base[k], v) if k in base else copy.deepcopy(v)
            return out
        return copy.deepcopy(over)

    out = dict(copy.deepcopy(dict(data)))
    for key, value in fragment.items():
        if key == "entities":
            by_id = {e["id"]: i for i, e in enumerate(out.get("entities", []))}
            for ent in value:
                if ent.get("id") not in by_id:
                    raise ConfigError(f"fragment entity {ent.get('id')!r} not in scenario")
                i = by_id[ent["id"]]
                out["entities"][i] = merge(out["entities"][i], ent)
        else:
            out[key] = merge(out.get(key, {}), value) if key in out else copy.deepcopy(value)
    return out


def bundled_scenario(name: str) -> Path:
    """Path of a scenario shipped with the package, e.g. ``"stern_conversion"``."""
    here = Path(__file__).parent / "scenarios"
    path = here / (name if name.endswith((".yaml", ".yml", ".json")) else f"{name}.yaml")
    if not path.exists():
        raise FileNotFoundError(path)
    return path
