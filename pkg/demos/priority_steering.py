"""
Steering power with priorities
==============================

Two receivers share the field. Raising the priority of receiver 1 from 1:1
to 2:1 shifts power towards it; maximum ratio combining towards receiver 1
is shown for comparison.
"""

from mibeam import experiments as ex

spec = ex.ExperimentSpec("priority", n_receivers=2, f_values=[0.1, 1.0, 10.0, 100.0],
                         constellations=100)
stats = ex.summarize(ex.run_priority(spec))

print(f"{'F':>6}  {'method':<16} {'Rx 1':>7} {'Rx 2':>7}")
for (F, method), s in sorted(stats.items()):
    rx1, rx2 = s["rx_mean"]
    print(f"{F:6g}  {method:<16} {rx1:7.4f} {rx2:7.4f}")
