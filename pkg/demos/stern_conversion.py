r"""
Stern conversion
================

Blue flies the baseline stern-conversion state machine against a
straight-and-level red. The plots show the ground tracks coloured by
blue's phase and the path through the (|AA|, |ATA|) orientation space,
where the lower-left quadrant is Offensive.
"""

import math
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from aerosim import bundled_scenario, load_scenario, run_episode

cfg = load_scenario(bundled_scenario("stern_conversion"))
res = run_episode(cfg, seed=0)
print(res.summary.digest())

blue = np.array([(r.entities[0].x, r.entities[0].y) for r in res.records])
red = np.array([(r.entities[1].x, r.entities[1].y) for r in res.records])
phases = [r.entities[0].label for r in res.records]
aa = np.degrees([abs(r.geometry.aa) for r in res.records])
ata = np.degrees([abs(r.geometry.ata) for r in res.records])

fig, (left, right) = plt.subplots(1, 2, figsize=(12, 5))
colours = dict(zip(dict.fromkeys(phases), plt.rcParams["axes.prop_cycle"].by_key()["color"]))
start = 0
for k in range(1, len(phases) + 1):
    if k == len(phases) or phases[k] != phases[start]:
        # overlap one point so consecutive segments join up
        left.plot(*blue[start:k + 1].T, color=colours[phases[start]], lw=2)
        start = k
for phase, colour in colours.items():
    left.plot([], [], color=colour, lw=2, label=f"blue {phase}")
left.plot(*red.T, "k--", lw=1, label="red")
left.set_aspect("equal")
left.set_xlabel("x east [m]")
left.set_ylabel("y north [m]")
left.legend(loc="upper center", bbox_to_anchor=(0.5, -0.3), ncol=2)
left.set_title("Ground tracks")

right.plot(aa, ata, "k-", lw=1)
right.plot(aa[0], ata[0], "go", label="start")
right.plot(aa[-1], ata[-1], "rs", label="end")
right.axhline(90, color="grey", lw=0.5)
right.axvline(90, color="grey", lw=0.5)
right.set_xlim(0, 180)
right.set_ylim(0, 180)
right.set_xlabel("|AA| [deg]")
right.set_ylabel("|ATA| [deg]")
right.legend()
right.set_title("Orientation space")

out = sys.argv[1] if len(sys.argv) > 1 else "stern_conversion.png"
fig.savefig(out, dpi=120, bbox_inches="tight")
print(f"final |AA| {aa[-1]:.1f} deg, |ATA| {ata[-1]:.1f} deg, range {res.summary.final_geometry.range:.0f} m")
print(f"wrote {out}")
