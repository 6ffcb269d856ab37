"""
One scene, four drive strategies
================================

Loads the shipped reference scene (three receivers at d = 0.4 m, F = 15,
125 MHz, matched loads) and compares the drive strategies against the
brute-force search.
"""

from pathlib import Path

from mibeam import beamforming as bf
from mibeam.oracle import OracleConfig, brute_force_best
from mibeam.scenario import load_scenario

path = Path(__file__).resolve().parents[1] / "scenarios" / "reference_f15.json"
sc = load_scenario(path)
problem = bf.Problem(sc.constellation, sc.params)

# %%
# The network matrices are computed once and shared by every strategy.
for name in bf.METHODS:
    r = bf.run_method(name, problem, sc.params)
    print(f"{name:17s} efficiency {r.efficiency:.4f}  per receiver "
          f"{', '.join(f'{e:.3f}' for e in r.receiver_efficiencies)}")

# %%
# The iterative method reports its best-so-far trace.
r = bf.iterative_beamforming(problem, sc.params)
print("iterative trace:", " ".join(f"{e:.4f}" for e in r.efficiency_trace))

# %%
# Multi-start simplex search over the drive, warm-started from the methods.
best = brute_force_best(problem, sc.params, OracleConfig(restarts=5))
print(f"oracle            efficiency {best.efficiency:.4f}")
