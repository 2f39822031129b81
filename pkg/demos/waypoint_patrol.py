r"""
Waypoint patrol
===============

Two aircraft fly the same looping waypoint circuit, one trailing the
other. The trailing aircraft stays in the Offensive quadrant for the
whole flight.
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from aerosim import bundled_scenario, load_scenario, run_episode

cfg = load_scenario(bundled_scenario("waypoint_demo"))
res = run_episode(cfg, seed=0)
print(res.summary.digest())
print("time in category:", res.summary.score.time_in_category)

tracks = {
    e.id: np.array([(r.entities[i].x, r.entities[i].y) for r in res.records])
    for i, e in enumerate(res.records[0].entities)
}
ranges = np.array([r.geometry.range for r in res.records])
times = np.array([r.time for r in res.records])

fig, (left, right) = plt.subplots(1, 2, figsize=(12, 5))
for eid, xy in tracks.items():
    left.plot(*xy.T, label=eid)
left.set_aspect("equal")
left.legend()
left.set_title("Ground tracks")
right.plot(times, ranges)
right.set_xlabel("time [s]")
right.set_ylabel("range [m]")
right.set_title("Blue to red range")

out = sys.argv[1] if len(sys.argv) > 1 else "waypoint_patrol.png"
fig.savefig(out, dpi=120, bbox_inches="tight")
print(f"minimum range {ranges.min():.0f} m; wrote {out}")
