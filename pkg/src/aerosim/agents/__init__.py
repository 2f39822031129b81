from .base import (
    ActionQuanta,
    Agent,
    AgentError,
    LowLevelAction,
    LowLevelScriptAgent,
    MissingTargetError,
    Perception,
    StraightAndLevel,
    WaypointAgent,
    low_level_apply,
    pure_pursuit_heading,
)
from .bt import (
    STERN_TREE,
    Action,
    Blackboard,
    BtStatus,
    BtSternAgent,
    Condition,
    Selector,
    Sequence,
    TreeError,
    bt_tick,
    load_tree,
)
from .stern import FsmSternAgent, PursuitSettings, SternConversionParams, SternPhase, fsm_step

__all__ = [
    "Action",
    "ActionQuanta",
    "Agent",
    "AgentError",
    "Blackboard",
    "BtStatus",
    "BtSternAgent",
    "Condition",
    "FsmSternAgent",
    "LowLevelAction",
    "LowLevelScriptAgent",
    "MissingTargetError",
    "Perception",
    "PursuitSettings",
    "STERN_TREE",
    "Selector",
    "Sequence",
    "SternConversionParams",
    "SternPhase",
    "StraightAndLevel",
    "TreeError",
    "WaypointAgent",
    "bt_tick",
    "fsm_step",
    "load_tree",
    "low_level_apply",
    "pure_pursuit_heading",
]
