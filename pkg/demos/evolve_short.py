r"""
Evolving stern-conversion parameters
====================================

A short genetic-algorithm run over the seven stern-conversion parameters.
The baseline parameter set is individual zero, so the best-so-far curve
starts at the baseline fitness and never falls below it.
"""

import json
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from aerosim import bundled_scenario, load_scenario
from aerosim.discovery import GaConfig, evolve

cfg = load_scenario(bundled_scenario("stern_conversion"))
ga = GaConfig(population_size=12, generations=8, episodes_per_eval=3)
res = evolve(cfg, ga, master_seed=1,
             on_generation=lambda h: print(f"generation {h.generation}: best {h.best:.4f} mean {h.mean:.4f}"))

print(json.dumps(res.genome_fragment(), indent=2))

gens = [h.generation for h in res.history]
fig, ax = plt.subplots()
ax.plot(gens, [h.best for h in res.history], label="best so far")
ax.plot(gens, [h.mean for h in res.history], label="population mean")
ax.set_xlabel("generation")
ax.set_ylabel("mean S2")
ax.legend()
out = sys.argv[1] if len(sys.argv) > 1 else "evolve_short.png"
fig.savefig(out, dpi=120, bbox_inches="tight")
print(f"wrote {out}")
