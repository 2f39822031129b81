"""Tactical scoring of the blue/red relative geometry.

Three per-tick scores are provided:

``score_s1``
    Offensive-quadrant indicator.
``score_s2``
    Dense score, an angular term times an exponential range term that
    peaks at the desired range.
``score_s3``
    Gun-solution score, the rear-quarter weapons-employment conditions. The "held
    for a period of time" part lives in :func:`aggregate_scores`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .geometry import HALF_PI, OrientationCategory, RelativeGeometry

SHAW_AA_MAX = math.pi / 3.0
SHAW_ATA_MAX = math.pi / 6.0


class EmptyTraceError(ValueError):
    """Raised when an aggregate is requested over zero samples."""


@dataclass(frozen=True, slots=True)
class ScoringConfig:
    r_desired: float = 500.0
    k: float = 100.0
    r_min: float = 150.0
    r_max: float = 1000.0
    v_min: float = 20.0
    t_hold: float = 3.0

    def __post_init__(self) -> None:
        if not self.r_min < self.r_max:
            raise ValueError("r_min must be below r_max")
        if not self.k > 0.0:
            raise ValueError("k must be positive")
        if not self.r_desired > 0.0:
            raise ValueError("r_desired must be positive")
        if self.t_hold < 0.0:
            raise ValueError("t_hold must be non-negative")


class ScoreSample(NamedTuple):
    s1: int
    s2: float
    s3: int
    time: float


@dataclass
class ScoreSummary:
    mean_s1: float
    mean_s2: float
    mean_s3: float
    shaw_hold_success: bool
    time_in_category: dict[str, float] = field(default_factory=dict)


def score_s1(g: RelativeGeometry) -> int:
    return 1 if abs(g.aa) <= HALF_PI and abs(g.ata) <= HALF_PI else 0


def score_s2(g: RelativeGeometry, cfg: ScoringConfig) -> float:
    # magnitudes keep the score in [0, 1] for signed angles
    angular = 0.5 * ((1.0 - abs(g.aa) / math.pi) + (1.0 - abs(g.ata) / math.pi))
    return angular * math.exp(-abs(g.range - cfg.r_desired) / (math.pi * cfg.k))


def score_s3(g: RelativeGeometry, cfg: ScoringConfig) -> int:
    ok = (
        abs(g.aa) <= SHAW_AA_MAX
        and abs(g.ata) <= SHAW_ATA_MAX
        and cfg.r_min <= g.range <= cfg.r_max
        and g.delta_v <= cfg.v_min
    )
    return 1 if ok else 0


def score_all(g: RelativeGeometry, cfg: ScoringConfig) -> tuple[int, float, int]:
    """``(s1, s2, s3)`` in one pass; same arithmetic as the single scores."""
    aa = abs(g.aa)
    ata = abs(g.ata)
    rng = g.range
    s1 = 1 if aa <= HALF_PI and ata <= HALF_PI else 0
    s2 = 0.5 * ((1.0 - aa / math.pi) + (1.0 - ata / math.pi)) * math.exp(-abs(rng - cfg.r_desired) / (math.pi * cfg.k))
    s3 = 1 if (aa <= SHAW_AA_MAX and ata <= SHAW_ATA_MAX and cfg.r_min <= rng <= cfg.r_max
               and g.delta_v <= cfg.v_min) else 0
    return s1, s2, s3


def score_sample(g: RelativeGeometry, cfg: ScoringConfig, time: float) -> ScoreSample:
    return ScoreSample(s1=score_s1(g), s2=score_s2(g, cfg), s3=score_s3(g, cfg), time=time)


def hold_ticks(t_hold: float, dt: float) -> int:
    """Number of consecutive ticks with s3 = 1 that span at least ``t_hold``."""
    return max(1, math.ceil(t_hold / dt - 1e-9))


def longest_run(flags: Sequence[int]) -> int:
    best = run = 0
    for f in flags:
        run = run + 1 if f else 0
        if run > best:
            best = run
    return best


def aggregate_scores(
    samples: Sequence[ScoreSample],
    categories: Sequence[OrientationCategory | str],
    dt: float,
    cfg: ScoringConfig,
) -> ScoreSummary:
    """Episode-level means, the Shaw hold test and time spent per orientation category."""
    if not samples:
        raise EmptyTraceError("cannot aggregate an empty trace")
    if len(samples) != len(categories):
        raise ValueError("samples and categories must have equal length")
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    n = len(samples)
    ticks_in = {c.value: 0 for c in OrientationCategory}
    for c in categories:
        ticks_in[OrientationCategory(c).value] += 1
    return ScoreSummary(
        mean_s1=math.fsum(s.s1 for s in samples) / n,
        mean_s2=math.fsum(s.s2 for s in samples) / n,
        mean_s3=math.fsum(s.s3 for s in samples) / n,
        shaw_hold_success=longest_run([s.s3 for s in samples]) >= hold_ticks(cfg.t_hold, dt),
        time_in_category={k: float(f"{v * dt:.9g}") for k, v in ticks_in.items()},
    )
