"""Behaviour trees and the behaviour-tree stern-conversion agent.

Trees are built from four node kinds: ``Sequence`` and ``Selector``
composites, ``Condition`` leaves that test a named predicate on the
blackboard, and ``Action`` leaves that run one of the stern behaviours.
Actions always report ``RUNNING``; a tick therefore yields exactly one
command when some action is reached.

Trees are usually declared as nested dicts (and so can live in a scenario
file)::

    {"selector": [
        {"sequence": [{"condition": "range_le", "args": {"threshold": "r_turn_in"}},
                      {"action": "Convert"}]},
        {"action": "PurePursuit"}]}

A string argument names a :class:`SternConversionParams` field and is read
from the agent's parameters at tick time, so evolved genomes need no tree
rebuild. Every identifier is checked when the tree is loaded.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

from ..dynamics import FlightCommand
from ..geometry import HALF_PI, lateral_offset
from .base import Agent, Perception
from .stern import (
    BEHAVIOURS,
    PursuitSettings,
    SternConversionParams,
    SternPhase,
    capture_lost,
    captured,
)


class BtStatus(str, enum.Enum):
    SUCCESS = "Success"
    FAILURE = "Failure"
    RUNNING = "Running"


class TreeError(ValueError):
    """A behaviour-tree declaration is malformed."""


@dataclass
class Blackboard:
    perception: Perception
    params: SternConversionParams = field(default_factory=SternConversionParams)
    settings: PursuitSettings = field(default_factory=PursuitSettings)
    memory: dict[str, Any] = field(default_factory=dict)
    command: FlightCommand | None = None
    path: str = ""
    evaluations: int = 0

    @property
    def phase(self) -> SternPhase:
        return SternPhase(self.memory.get("phase", SternPhase.PURE_PURSUIT.value))

    def resolve(self, value: float | str) -> float:
        return getattr(self.params, value) if isinstance(value, str) else value


class Node:
    name: str

    def tick(self, bb: Blackboard, path: str) -> BtStatus:
        raise NotImplementedError

    def count(self) -> int:
        return 1


class Sequence(Node):
    def __init__(self, children: Iterable[Node], name: str = "Sequence"):
        self.children = list(children)
        if not self.children:
            raise TreeError(f"{name}: composite needs at least one child")
        self.name = name

    def tick(self, bb: Blackboard, path: str) -> BtStatus:
        bb.evaluations += 1
        here = f"{path}/{self.name}" if path else self.name
        for child in self.children:
            status = child.tick(bb, here)
            if status is not BtStatus.SUCCESS:
                return status
        return BtStatus.SUCCESS

    def count(self) -> int:
        return 1 + sum(c.count() for c in self.children)


class Selector(Sequence):
    def __init__(self, children: Iterable[Node], name: str = "Selector"):
        super().__init__(children, name)

    def tick(self, bb: Blackboard, path: str) -> BtStatus:
        bb.evaluations += 1
        here = f"{path}/{self.name}" if path else self.name
        for child in self.children:
            status = child.tick(bb, here)
            if status is not BtStatus.FAILURE:
                return status
        return BtStatus.FAILURE


Predicate = Callable[..., bool]


# -- condition library ------------------------------------------------------

def _range_le(bb: Blackboard, threshold: float | str) -> bool:
    _, g = bb.perception.require_target()
    return g.range <= bb.resolve(threshold)


def _range_gt(bb: Blackboard, threshold: float | str) -> bool:
    return not _range_le(bb, threshold)


def _abs_ata_le(bb: Blackboard, limit: float | str) -> bool:
    _, g = bb.perception.require_target()
    return abs(g.ata) <= bb.resolve(limit)


def _abs_aa_le(bb: Blackboard, limit: float | str) -> bool:
    _, g = bb.perception.require_target()
    return abs(g.aa) <= bb.resolve(limit)


def _offset_ge(bb: Blackboard, distance: float | str) -> bool:
    target, _ = bb.perception.require_target()
    return lateral_offset(bb.perception.own, target) >= bb.resolve(distance)


def _target_abeam(bb: Blackboard) -> bool:
    _, g = bb.perception.require_target()
    return abs(g.ata) > HALF_PI


def _captured(bb: Blackboard) -> bool:
    _, g = bb.perception.require_target()
    return captured(g, bb.params)


def _capture_held(bb: Blackboard) -> bool:
    _, g = bb.perception.require_target()
    return not capture_lost(g, bb.params)


def _phase_is(bb: Blackboard, phase: str) -> bool:
    return bb.phase is SternPhase(phase)


def _phase_at_least(bb: Blackboard, phase: str) -> bool:
    return bb.phase.rank >= SternPhase(phase).rank


# name -> (predicate, {arg: kind}); kind is "number" (float or genome field) or "phase"
CONDITIONS: dict[str, tuple[Predicate, dict[str, str]]] = {
    "range_le": (_range_le, {"threshold": "number"}),
    "range_gt": (_range_gt, {"threshold": "number"}),
    "abs_ata_le": (_abs_ata_le, {"limit": "number"}),
    "abs_aa_le": (_abs_aa_le, {"limit": "number"}),
    "offset_ge": (_offset_ge, {"distance": "number"}),
    "target_abeam": (_target_abeam, {}),
    "captured": (_captured, {}),
    "capture_held": (_capture_held, {}),
    "phase_is": (_phase_is, {"phase": "phase"}),
    "phase_at_least": (_phase_at_least, {"phase": "phase"}),
}

ACTIONS: dict[str, SternPhase] = {
    "PurePursuit": SternPhase.PURE_PURSUIT,
    "FlyRelativeBearing": SternPhase.FLY_RELATIVE_BEARING,
    "FlyOffset": SternPhase.FLYING_OFFSET,
    "Convert": SternPhase.CONVERTING,
    "MatchSpeed": SternPhase.MATCHING,
}


class Condition(Node):
    def __init__(self, predicate_id: str, args: Mapping[str, Any] | None = None, name: str | None = None):
        if predicate_id not in CONDITIONS:
            raise TreeError(f"unknown condition {predicate_id!r}")
        fn, spec = CONDITIONS[predicate_id]
        args = dict(args or {})
        if set(args) != set(spec):
            raise TreeError(f"condition {predicate_id!r} takes arguments {sorted(spec)}, got {sorted(args)}")
        for key, kind in spec.items():
            value = args[key]
            if kind == "phase":
                try:
                    SternPhase(value)
                except ValueError:
                    raise TreeError(f"condition {predicate_id!r}: unknown phase {value!r}") from None
            elif isinstance(value, str):
                if value not in SternConversionParams.names():
                    raise TreeError(f"condition {predicate_id!r}: unknown parameter {value!r}")
            elif isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise TreeError(f"condition {predicate_id!r}: {key} must be a number or parameter name")
        self.predicate_id = predicate_id
        self.fn = fn
        self.args = args
        self.name = name or predicate_id

    def tick(self, bb: Blackboard, path: str) -> BtStatus:
        bb.evaluations += 1
        return BtStatus.SUCCESS if self.fn(bb, **self.args) else BtStatus.FAILURE


class Action(Node):
    def __init__(self, behaviour_id: str, name: str | None = None):
        if behaviour_id not in ACTIONS:
            raise TreeError(f"unknown action {behaviour_id!r}")
        self.behaviour_id = behaviour_id
        self.phase = ACTIONS[behaviour_id]
        self.name = name or behaviour_id

    def tick(self, bb: Blackboard, path: str) -> BtStatus:
        bb.evaluations += 1
        bb.command = BEHAVIOURS[self.phase](bb.perception, bb.params, bb.settings)
        bb.memory["phase"] = self.phase.value
        bb.path = f"{path}/{self.name}" if path else self.name
        return BtStatus.RUNNING


def load_tree(spec: Mapping[str, Any] | Node) -> Node:
    """Build a tree from its nested-dict declaration."""
    if isinstance(spec, Node):
        return spec
    if not isinstance(spec, Mapping):
        raise TreeError(f"tree node must be a mapping, got {type(spec).__name__}")
    kinds = [k for k in ("sequence", "selector", "condition", "action") if k in spec]
    if len(kinds) != 1:
        raise TreeError(f"tree node needs exactly one of sequence/selector/condition/action: {dict(spec)!r}")
    kind = kinds[0]
    allowed = {kind, "name"} | ({"args"} if kind == "condition" else set())
    extra = set(spec) - allowed
    if extra:
        raise TreeError(f"unexpected keys {sorted(extra)} in {kind} node")
    name = spec.get("name")
    if kind in ("sequence", "selector"):
        children = spec[kind]
        if not isinstance(children, (list, tuple)):
            raise TreeError(f"{kind} children must be a list")
        nodes = [load_tree(c) for c in children]
        cls = Sequence if kind == "sequence" else Selector
        return cls(nodes, name or kind.capitalize())
    if kind == "condition":
        return Condition(spec["condition"], spec.get("args"), name)
    return Action(spec["action"], name)


def bt_tick(root: Node, bb: Blackboard) -> tuple[BtStatus, FlightCommand | None]:
    bb.command = None
    bb.path = ""
    bb.evaluations = 0
    status = root.tick(bb, "")
    return status, bb.command


def _cond(cid: str, **args: Any) -> dict[str, Any]:
    return {"condition": cid, "args": args} if args else {"condition": cid}


_CONVERSION_REACHED = {"selector": [
    _cond("phase_at_least", phase="FlyRelativeBearing"),
    _cond("range_le", threshold="r_conversion"),
], "name": "ConversionRange"}

_TURN_IN_REACHED = {"selector": [
    _cond("phase_at_least", phase="Converting"),
    {"sequence": [
        _CONVERSION_REACHED,
        {"selector": [_cond("range_le", threshold="r_turn_in"), _cond("target_abeam")], "name": "TurnInCue"},
    ]},
], "name": "TurnInReached"}

_OFFSET_REACHED = {"selector": [
    _cond("phase_at_least", phase="FlyingOffset"),
    {"sequence": [_CONVERSION_REACHED, _cond("offset_ge", distance="d_offset")]},
], "name": "OffsetReached"}

STERN_TREE: dict[str, Any] = {"name": "SternConversion", "selector": [
    {"name": "HoldStation", "sequence": [
        _cond("phase_is", phase="Matching"), _cond("capture_held"), {"action": "MatchSpeed"}]},
    {"name": "Capture", "sequence": [_TURN_IN_REACHED, _cond("captured"), {"action": "MatchSpeed"}]},
    {"name": "Convert", "sequence": [_TURN_IN_REACHED, {"action": "Convert"}]},
    {"name": "Offset", "sequence": [_OFFSET_REACHED, {"action": "FlyOffset"}]},
    {"name": "BuildOffset", "sequence": [_CONVERSION_REACHED, {"action": "FlyRelativeBearing"}]},
    {"action": "PurePursuit"},
]}


class BtSternAgent(Agent):
    kind = "bt_stern"

    def __init__(
        self,
        params: SternConversionParams = SternConversionParams(),
        settings: PursuitSettings = PursuitSettings(),
        tree: Mapping[str, Any] | Node | None = None,
    ):
        self.params = params
        self.settings = settings
        self.root = load_tree(STERN_TREE if tree is None else tree)
        self.memory_ = {"phase": SternPhase.PURE_PURSUIT.value}
        self.path = ""

    def decide(self, p: Perception) -> FlightCommand:
        p.require_target()
        bb = Blackboard(p, self.params, self.settings, self.memory_)
        status, cmd = bt_tick(self.root, bb)
        if cmd is None:
            raise RuntimeError(f"behaviour tree finished with {status.value} and no command")
        self.path = bb.path
        return cmd

    @property
    def label(self) -> str:
        return self.memory_["phase"]

    @property
    def node(self) -> str:
        return self.path

    def memory(self) -> dict[str, Any]:
        return {"phase": self.memory_["phase"], "path": self.path}

    def restore(self, memory: dict[str, Any]) -> None:
        self.memory_ = {"phase": SternPhase(memory["phase"]).value}
        self.path = memory.get("path", "")
