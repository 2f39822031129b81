"""Trace records, their line-delimited serialization and post-run analytics.

A trace file is JSON lines. An optional first line ``{"header": {...}}``
carries what is needed to re-derive the summary without the scenario (time
step, scoring parameters, collision floor). Each following line is one tick:

``tick, time, entities[id, team, x, y, z, psi, gamma, phi, v, label, node],
geometry[ata, aa, range, delta_v, bearing], scores[s1, s2, s3], category``

Floats are quantized to 9 significant digits when a record is built, so
``parse_trace(serialize_trace(r))`` gives back ``r`` exactly and identical
runs give byte-identical files. Angles are radians in the trace and degrees
in the orientation CSV.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .geometry import OrientationCategory, RelativeGeometry, classify_orientation
from .scoring import (
    EmptyTraceError,
    ScoreSample,
    ScoreSummary,
    ScoringConfig,
    aggregate_scores,
    hold_ticks,
)

TRACE_FORMAT = "aerosim-trace/1"
ORIENTATION_HEADER = ("time", "abs_aa_deg", "abs_ata_deg", "range_m", "category")
ENTITY_KEYS = ("id", "team", "x", "y", "z", "psi", "gamma", "phi", "v", "label", "node")
GEOMETRY_KEYS = ("ata", "aa", "range", "delta_v", "bearing")
RECORD_KEYS = ("tick", "time", "entities", "geometry", "scores", "category")

TERMINATION_DURATION = "duration"
TERMINATION_SHAW = "shaw_hold_success"
TERMINATION_COLLISION = "collision"


class TraceParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def q9(x: float) -> float:
    """Round to 9 significant digits."""
    return float(format(x, ".9g"))


@dataclass(frozen=True, slots=True)
class EntityRecord:
    id: str
    team: str
    x: float
    y: float
    z: float
    psi: float
    gamma: float
    phi: float
    v: float
    label: str
    node: str


@dataclass(frozen=True, slots=True)
class TraceRecord:
    tick: int
    time: float
    entities: tuple[EntityRecord, ...]
    geometry: RelativeGeometry | None = None
    s1: int | None = None
    s2: float | None = None
    s3: int | None = None
    category: str | None = None

    def sample(self) -> ScoreSample:
        return ScoreSample(self.s1, self.s2, self.s3, self.time)


def quantize_geometry(g: RelativeGeometry) -> RelativeGeometry:
    return RelativeGeometry(q9(g.ata), q9(g.aa), q9(g.range), q9(g.delta_v), q9(g.bearing))


# -- serialization ----------------------------------------------------------

def _record_obj(r: TraceRecord) -> dict[str, Any]:
    ents = [
        {"id": e.id, "team": e.team, "x": e.x, "y": e.y, "z": e.z, "psi": e.psi, "gamma": e.gamma,
         "phi": e.phi, "v": e.v, "label": e.label, "node": e.node}
        for e in r.entities
    ]
    g = r.geometry
    geom = None if g is None else {
        "ata": g.ata, "aa": g.aa, "range": g.range, "delta_v": g.delta_v, "bearing": g.bearing}
    scores = None if r.s1 is None else {"s1": r.s1, "s2": r.s2, "s3": r.s3}
    return {"tick": r.tick, "time": r.time, "entities": ents, "geometry": geom, "scores": scores,
            "category": r.category}


def record_line(r: TraceRecord) -> str:
    return json.dumps(_record_obj(r), separators=(",", ":"), allow_nan=False)


def serialize_trace(records: Iterable[TraceRecord], header: dict[str, Any] | None = None) -> str:
    lines = []
    if header is not None:
        lines.append(json.dumps({"header": header}, separators=(",", ":"), allow_nan=False))
    lines.extend(record_line(r) for r in records)
    return "".join(line + "\n" for line in lines)


def _num(obj: dict, key: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ValueError(f"{key} must be a finite number")
    return float(v)


def _parse_record(obj: Any) -> TraceRecord:
    if not isinstance(obj, dict) or tuple(obj) != RECORD_KEYS:
        raise ValueError(f"record keys must be {list(RECORD_KEYS)}")
    ents = []
    for e in obj["entities"]:
        if not isinstance(e, dict) or tuple(e) != ENTITY_KEYS:
            raise ValueError(f"entity keys must be {list(ENTITY_KEYS)}")
        ents.append(EntityRecord(
            str(e["id"]), str(e["team"]), _num(e, "x"), _num(e, "y"), _num(e, "z"), _num(e, "psi"),
            _num(e, "gamma"), _num(e, "phi"), _num(e, "v"), str(e["label"]), str(e["node"])))
    g = obj["geometry"]
    geom = None
    if g is not None:
        if not isinstance(g, dict) or tuple(g) != GEOMETRY_KEYS:
            raise ValueError(f"geometry keys must be {list(GEOMETRY_KEYS)}")
        geom = RelativeGeometry(*(_num(g, k) for k in GEOMETRY_KEYS))
    s = obj["scores"]
    s1 = s2 = s3 = None
    if s is not None:
        if not isinstance(s, dict) or tuple(s) != ("s1", "s2", "s3"):
            raise ValueError("scores keys must be ['s1', 's2', 's3']")
        s1, s2, s3 = int(_num(s, "s1")), _num(s, "s2"), int(_num(s, "s3"))
    cat = obj["category"]
    if cat is not None:
        cat = OrientationCategory(cat).value
    tick = obj["tick"]
    if isinstance(tick, bool) or not isinstance(tick, int):
        raise ValueError("tick must be an integer")
    return TraceRecord(tick, _num(obj, "time"), tuple(ents), geom, s1, s2, s3, cat)


def parse_trace(text: str) -> tuple[dict[str, Any] | None, list[TraceRecord]]:
    """Inverse of :func:`serialize_trace`. Raises :class:`TraceParseError` naming the bad line."""
    header = None
    records: list[TraceRecord] = []
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    elif lines:
        raise TraceParseError(len(lines), "truncated record (no trailing newline)")
    for i, line in enumerate(lines, start=1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise TraceParseError(i, f"invalid JSON ({e.msg})") from None
        if i == 1 and isinstance(obj, dict) and tuple(obj) == ("header",):
            if not isinstance(obj["header"], dict):
                raise TraceParseError(i, "header must be an object")
            header = obj["header"]
            continue
        try:
            records.append(_parse_record(obj))
        except (ValueError, TypeError, KeyError) as e:
            raise TraceParseError(i, str(e)) from None
    return header, records


# -- analytics --------------------------------------------------------------

def _scored(records: Sequence[TraceRecord]) -> None:
    if not records:
        raise EmptyTraceError("trace is empty")
    if any(r.geometry is None or r.s1 is None for r in records):
        raise ValueError("trace has no scored pair on every tick")


def export_orientation_csv(records: Sequence[TraceRecord]) -> str:
    """Orientation-space trajectory, one row per tick: time, |AA|, |ATA| (degrees), range, category."""
    _scored(records)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ORIENTATION_HEADER)
    for r in records:
        g = r.geometry
        w.writerow([
            repr(r.time),
            repr(round(math.degrees(abs(g.aa)), 6)),
            repr(round(math.degrees(abs(g.ata)), 6)),
            repr(round(g.range, 3)),
            r.category,
        ])
    return buf.getvalue()


def termination_reason(records: Sequence[TraceRecord], cfg: ScoringConfig, dt: float,
                       collision_floor: float = 50.0) -> str:
    """Why an episode ending with ``records[-1]`` stopped; same order of checks as the engine."""
    _scored(records)
    if records[-1].geometry.range < collision_floor:
        return TERMINATION_COLLISION
    trailing = 0
    for r in reversed(records):
        if not r.s3:
            break
        trailing += 1
    return TERMINATION_SHAW if trailing >= hold_ticks(cfg.t_hold, dt) else TERMINATION_DURATION


@dataclass
class SummaryReport:
    score: ScoreSummary
    ticks: int
    duration: float
    termination: str
    final_geometry: RelativeGeometry
    final_category: str

    def to_dict(self) -> dict[str, Any]:
        s = self.score
        g = self.final_geometry
        return {
            "ticks": self.ticks,
            "duration": self.duration,
            "termination": self.termination,
            "mean_s1": s.mean_s1,
            "mean_s2": s.mean_s2,
            "mean_s3": s.mean_s3,
            "shaw_hold_success": s.shaw_hold_success,
            "time_in_category": {c.value: s.time_in_category[c.value] for c in OrientationCategory},
            "final_geometry": {k: getattr(g, k) for k in GEOMETRY_KEYS},
            "final_category": self.final_category,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def digest(self) -> str:
        s = self.score
        return (f"ticks={self.ticks} duration={self.duration:.1f}s termination={self.termination} "
                f"S1={s.mean_s1:.3f} S2={s.mean_s2:.4f} S3={s.mean_s3:.3f} "
                f"shaw_hold={'yes' if s.shaw_hold_success else 'no'}")


def summarize(records: Sequence[TraceRecord], cfg: ScoringConfig, dt: float,
              collision_floor: float = 50.0) -> SummaryReport:
    _scored(records)
    score = aggregate_scores([r.sample() for r in records], [r.category for r in records], dt, cfg)
    last = records[-1]
    return SummaryReport(
        score=score,
        ticks=len(records),
        duration=q9(len(records) * dt),
        termination=termination_reason(records, cfg, dt, collision_floor),
        final_geometry=last.geometry,
        final_category=classify_orientation(last.geometry).value,
    )


def summarize_from_header(header: dict[str, Any], records: Sequence[TraceRecord]) -> SummaryReport:
    sc = header["scoring"]
    cfg = ScoringConfig(sc["r_desired"], sc["k"], sc["r_min"], sc["r_max"], sc["v_min"], sc["t_hold"])
    return summarize(records, cfg, float(header["base_dt"]), float(header["collision_floor"]))
