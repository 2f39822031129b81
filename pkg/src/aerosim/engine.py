"""Time-stepped simulation engine.

Every tick runs the same phases in a fixed order:

1. build a :class:`Perception` for each entity from the states at the start
   of the tick (a snapshot, so declaration order never matters);
2. consult the agent of every entity whose decision period divides the tick
   index, otherwise reuse its last command;
3. FCS and dynamics for every entity at ``base_dt``;
4. relative geometry and scores for the scored (blue, red) pair;
5. emit one :class:`TraceRecord`.

The clock is ``tick * base_dt`` and never a running sum.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .agents import Agent, AgentError, Perception, TreeError
from .config import ScenarioConfig
from .dynamics import FlightCommand, PerformanceLimits, fly_step
from .geometry import GeometryError, OrientationCategory, RelativeGeometry, classify_orientation, relative_geometry
from .results import (
    TERMINATION_COLLISION,
    TERMINATION_DURATION,
    TERMINATION_SHAW,
    TRACE_FORMAT,
    EntityRecord,
    SummaryReport,
    TraceRecord,
    q9,
    summarize,
)
from .scoring import ScoreSample, ScoringConfig, aggregate_scores, hold_ticks, score_all
from .state import EntityState

RANDOMIZED_FIELDS = ("x", "y", "z", "heading", "speed")
_CATEGORY_NAME = {c: c.value for c in OrientationCategory}


class SimulationError(RuntimeError):
    """A runtime failure inside a tick, tagged with the entity and tick index."""

    def __init__(self, entity_id: str, tick: int, cause: BaseException):
        super().__init__(f"entity {entity_id!r} at tick {tick}: {cause}")
        self.entity_id = entity_id
        self.tick = tick
        self.cause = cause


@dataclass(frozen=True)
class _Plan:
    """Per-scenario constants resolved once."""

    ids: tuple[str, ...]
    teams: Mapping[str, str]
    limits: Mapping[str, PerformanceLimits]
    periods: Mapping[str, int]
    targets: Mapping[str, str | None]
    sensor_ranges: Mapping[str, float | None]
    pair: tuple[str, str] | None
    scoring: ScoringConfig
    dt: float
    n_ticks: int
    hold: int
    collision_floor: float
    # everyone but the entity itself, in id order
    others: Mapping[str, tuple[str, ...]] = field(default_factory=dict)


def tick_count(duration: float, dt: float) -> int:
    # the epsilon absorbs representation error, e.g. 0.3 / 0.1 = 2.9999999999999996
    return max(1, math.ceil(duration / dt - 1e-9))


def _plan(cfg: ScenarioConfig) -> _Plan:
    ents = sorted(cfg.entities, key=lambda e: e.id)
    scoring = cfg.scoring.to_config()
    return _Plan(
        ids=tuple(e.id for e in ents),
        teams={e.id: e.team_id for e in ents},
        limits={e.id: e.limits.to_limits() for e in ents},
        periods={e.id: e.decision_period for e in ents},
        targets={e.id: e.target for e in ents},
        sensor_ranges={e.id: e.sensor_range for e in ents},
        pair=cfg.scoring_pair(),
        scoring=scoring,
        dt=cfg.base_dt,
        n_ticks=tick_count(cfg.duration, cfg.base_dt),
        hold=hold_ticks(scoring.t_hold, cfg.base_dt),
        collision_floor=cfg.collision_floor,
        others={e.id: tuple(o.id for o in ents if o.id != e.id) for e in ents},
    )


@dataclass
class SimState:
    plan: _Plan
    tick: int
    states: dict[str, EntityState]
    agents: dict[str, Agent]
    commands: dict[str, FlightCommand | None]
    rng: np.random.Generator
    seed: int
    decisions: dict[str, int] = field(default_factory=dict)
    s3_run: int = 0
    termination: str | None = None
    # raw scored-pair geometry of the current states, reused by the next perception
    pair_geometry: Any = None

    @property
    def clock(self) -> float:
        return self.tick * self.plan.dt

    @property
    def done(self) -> bool:
        return self.termination is not None

    def to_dict(self) -> dict[str, Any]:
        """Plain-data snapshot (agents as their memory) for replay and comparison."""
        return {
            "tick": self.tick,
            "clock": self.clock,
            "seed": self.seed,
            "states": {k: v._asdict() for k, v in sorted(self.states.items())},
            "agents": {k: self.agents[k].memory() for k in sorted(self.agents)},
            "commands": {k: (None if c is None else c._asdict()) for k, c in sorted(self.commands.items())},
            "decisions": dict(sorted(self.decisions.items())),
            "rng": self.rng.bit_generator.state,
            "s3_run": self.s3_run,
            "termination": self.termination,
        }


def init_scenario(
    cfg: ScenarioConfig,
    seed: int | None = None,
    agents: Mapping[str, Agent] | None = None,
) -> SimState:
    """Place every entity at its (optionally randomized) initial condition; clock 0.

    ``agents`` overrides the agents declared in the scenario, keyed by entity id.
    """
    seed = cfg.seed if seed is None else seed
    if seed < 0:
        raise ValueError("seed must be non-negative")
    plan = _plan(cfg)
    rng = np.random.default_rng(seed)
    states: dict[str, EntityState] = {}
    built: dict[str, Agent] = {}
    for spec in sorted(cfg.entities, key=lambda e: e.id):
        st = spec.initial.to_state()
        if spec.randomize is not None:
            draws = {}
            for key in RANDOMIZED_FIELDS:
                r = getattr(spec.randomize, key)
                if r is not None:
                    draws[key] = float(rng.uniform(r[0], r[1]))
            if "heading" in draws:
                draws["heading"] = math.radians(draws["heading"])
            st = st._replace(**draws)
        lim = plan.limits[spec.id]
        st = st._replace(speed=min(max(st.speed, lim.v_min), lim.v_max), time=0.0)
        states[spec.id] = st
        built[spec.id] = agents[spec.id] if agents and spec.id in agents else spec.agent.build()
    return SimState(
        plan=plan, tick=0, states=states, agents=built,
        commands={i: None for i in plan.ids}, rng=rng, seed=seed,
        decisions={i: 0 for i in plan.ids},
    )


def _perceive(plan: _Plan, eid: str, snapshot: Mapping[str, EntityState], time: float,
              cached: Any = None) -> Perception:
    own = snapshot[eid]
    sensor = plan.sensor_ranges[eid]
    if sensor is None:
        contacts = tuple([(o, snapshot[o]) for o in plan.others[eid]])
    else:
        contacts = tuple((o, snapshot[o]) for o in plan.others[eid]
                         if math.dist(own.position, snapshot[o].position) <= sensor)
    tid = plan.targets[eid]
    target = None
    geometry = None
    if tid is not None:
        for cid, st in contacts:
            if cid == tid:
                target = st
                if cached is not None and plan.pair == (eid, tid):
                    geometry = cached
                else:
                    geometry = relative_geometry(own, st)
                break
    return Perception(own, time, contacts, tid, target, geometry, plan.limits[eid])


def _advance(s: SimState) -> tuple[int, Any]:
    """Phases 1-4 of a tick. Returns the tick index and scored geometry data."""
    plan = s.plan
    k = s.tick
    if s.termination is not None or k >= plan.n_ticks:
        raise RuntimeError("episode already finished")
    dt = plan.dt
    snapshot = s.states
    commands = s.commands
    periods = plan.periods
    for eid in plan.ids:
        if k % periods[eid] == 0 or commands[eid] is None:
            try:
                p = _perceive(plan, eid, snapshot, k * dt, s.pair_geometry)
                commands[eid] = s.agents[eid].decide(p)
            except (AgentError, GeometryError, TreeError, ValueError, RuntimeError) as e:
                raise SimulationError(eid, k, e) from e
            s.decisions[eid] += 1
    t_next = (k + 1) * dt
    new: dict[str, EntityState] = {}
    limits = plan.limits
    for eid in plan.ids:
        try:
            new[eid] = fly_step(snapshot[eid], commands[eid], limits[eid], dt, t_next)
        except ValueError as e:
            raise SimulationError(eid, k, e) from e
    s.states = new
    s.tick = k + 1
    s.pair_geometry = None

    scored = None
    if plan.pair is not None:
        blue, red = plan.pair
        try:
            raw = relative_geometry(new[blue], new[red])
        except GeometryError as e:
            raise SimulationError(blue, k, e) from e
        s.pair_geometry = raw
        # scores come from the quantized geometry so a parsed trace rescores identically;
        # this is quantize_geometry inlined
        ata, aa, rng_, dv, brg = raw
        g = RelativeGeometry(float(format(ata, ".9g")), float(format(aa, ".9g")), float(format(rng_, ".9g")),
                             float(format(dv, ".9g")), float(format(brg, ".9g")))
        s1, s2, s3 = score_all(g, plan.scoring)
        scored = (g, s1, q9(s2), s3, _CATEGORY_NAME[classify_orientation(g)])
        s.s3_run = s.s3_run + 1 if s3 else 0
        if g.range < plan.collision_floor:
            s.termination = TERMINATION_COLLISION
        elif s.s3_run >= plan.hold:
            s.termination = TERMINATION_SHAW
    if s.termination is None and s.tick >= plan.n_ticks:
        s.termination = TERMINATION_DURATION
    return k, scored


def _record(s: SimState, k: int, scored: Any) -> TraceRecord:
    plan = s.plan
    ents = []
    for eid in plan.ids:
        st = s.states[eid]
        agent = s.agents[eid]
        ents.append(EntityRecord(
            eid, plan.teams[eid], q9(st.x), q9(st.y), q9(st.z), q9(st.heading), q9(st.gamma),
            q9(st.bank), q9(st.speed), agent.label, agent.node))
    t = q9(s.clock)
    if scored is None:
        return TraceRecord(k, t, tuple(ents))
    g, s1, s2, s3, cat = scored
    return TraceRecord(k, t, tuple(ents), g, s1, s2, s3, cat)


def step(s: SimState, cfg: ScenarioConfig | None = None) -> tuple[SimState, list[TraceRecord]]:
    """Advance one tick in place; returns the state and the tick's trace record(s).

    ``cfg`` is accepted for symmetry with :func:`init_scenario`; the resolved
    scenario travels inside the state.
    """
    k, scored = _advance(s)
    return s, [_record(s, k, scored)]


@dataclass
class EpisodeResult:
    records: list[TraceRecord]
    summary: SummaryReport | None
    final: SimState
    header: dict[str, Any]

    @property
    def termination(self) -> str:
        return self.final.termination


def trace_header(cfg: ScenarioConfig, seed: int) -> dict[str, Any]:
    sc = cfg.scoring.to_config()
    pair = cfg.scoring_pair()
    return {
        "format": TRACE_FORMAT,
        "scenario": cfg.name,
        "seed": seed,
        "base_dt": cfg.base_dt,
        "duration": cfg.duration,
        "collision_floor": cfg.collision_floor,
        "pair": None if pair is None else list(pair),
        "scoring": {"r_desired": sc.r_desired, "k": sc.k, "r_min": sc.r_min, "r_max": sc.r_max,
                    "v_min": sc.v_min, "t_hold": sc.t_hold},
    }


def run_episode(
    cfg: ScenarioConfig,
    seed: int | None = None,
    *,
    agents: Mapping[str, Agent] | None = None,
    record: bool = True,
) -> EpisodeResult:
    """Run until the duration elapses, the Shaw hold succeeds or the pair collides.

    With ``record=False`` no trace is kept and the summary comes straight from
    the per-tick scores (the fast path used for fitness evaluation).
    """
    s = init_scenario(cfg, seed, agents)
    header = trace_header(cfg, s.seed)
    records: list[TraceRecord] = []
    samples: list[ScoreSample] = []
    cats: list[str] = []
    last = None
    while not s.done:
        k, scored = _advance(s)
        if record:
            records.append(_record(s, k, scored))
        elif scored is not None:
            g, s1, s2, s3, cat = scored
            samples.append(ScoreSample(s1, s2, s3, s.clock))
            cats.append(cat)
            last = g
    plan = s.plan
    summary = None
    if plan.pair is not None:
        if record:
            summary = summarize(records, plan.scoring, plan.dt, plan.collision_floor)
        else:
            summary = SummaryReport(
                score=aggregate_scores(samples, cats, plan.dt, plan.scoring),
                ticks=len(samples),
                duration=q9(len(samples) * plan.dt),
                termination=s.termination,
                final_geometry=last,
                final_category=cats[-1],
            )
    return EpisodeResult(records, summary, s, header)


def _batch_one(args: tuple[ScenarioConfig, int]) -> tuple[int, SummaryReport | None, str | None]:
    cfg, seed = args
    try:
        res = run_episode(cfg, seed)
    except SimulationError as e:
        return seed, None, str(e)
    return seed, res.summary, None


def run_batch(
    cfg: ScenarioConfig, seeds: Sequence[int], workers: int = 1
) -> list[tuple[int, SummaryReport | None, str | None]]:
    """Run one episode per seed; results come back in seed order whatever ``workers`` is."""
    jobs = [(cfg, int(sd)) for sd in seeds]
    if workers <= 1 or len(jobs) <= 1:
        return [_batch_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_batch_one, jobs))
