r"""
State machine versus behaviour tree
===================================

The baseline stern conversion exists twice: as a finite state machine and
as a behaviour tree. Given the same seed both fly exactly the same
trajectory; only the reported active node differs.
"""

from aerosim import bundled_scenario, load_scenario, run_episode
from aerosim.agents import BtSternAgent, FsmSternAgent

cfg = load_scenario(bundled_scenario("stern_conversion"))
blue = cfg.entity("blue").agent
params, settings = blue.params.to_params(), blue.settings.to_settings()

for seed in range(5):
    fsm = run_episode(cfg, seed, agents={"blue": FsmSternAgent(params, settings)})
    bt = run_episode(cfg, seed, agents={"blue": BtSternAgent(params, settings)})
    fsm_path = [(e.x, e.y, e.z, e.psi, e.v, e.label) for r in fsm.records for e in r.entities]
    bt_path = [(e.x, e.y, e.z, e.psi, e.v, e.label) for r in bt.records for e in r.entities]
    same_path = fsm_path == bt_path
    print(f"seed {seed}: {len(fsm.records)} ticks, identical trajectories: {same_path}, "
          f"last BT node: {bt.records[-1].entities[0].node}")
