"""Deterministic time-stepped multi-agent simulator for aerial manoeuvring."""

from .config import ConfigError, ScenarioConfig, bundled_scenario, load_scenario, parse_scenario
from .dynamics import ActuatorState, FlightCommand, PerformanceLimits, dynamics_step, fcs_step
from .engine import EpisodeResult, SimState, SimulationError, init_scenario, run_batch, run_episode, step
from .geometry import OrientationCategory, RelativeGeometry, classify_orientation, relative_geometry
from .scoring import ScoreSample, ScoreSummary, ScoringConfig, aggregate_scores, score_s1, score_s2, score_s3
from .state import EntityState, wrap_angle

__version__ = "0.1.0"

__all__ = [
    "ActuatorState",
    "ConfigError",
    "EntityState",
    "EpisodeResult",
    "FlightCommand",
    "OrientationCategory",
    "PerformanceLimits",
    "RelativeGeometry",
    "ScenarioConfig",
    "ScoreSample",
    "ScoreSummary",
    "ScoringConfig",
    "SimState",
    "SimulationError",
    "aggregate_scores",
    "bundled_scenario",
    "classify_orientation",
    "dynamics_step",
    "fcs_step",
    "init_scenario",
    "load_scenario",
    "parse_scenario",
    "relative_geometry",
    "run_batch",
    "run_episode",
    "score_s1",
    "score_s2",
    "score_s3",
    "step",
    "wrap_angle",
]
