"""More drive power, lower BER, at every horizontal offset.

The receive coil slides sideways under the pipe from 0 to 6 cm. Both drive
levels share the same noise and sample-loss draws trial by trial, so the
comparison isolates the effect of power.
"""

from dataclasses import replace

from throughmetal import config, harness

cfg = config.load()
ex = replace(harness.experiment_from(cfg), rates=((500, 10000),), trials=20, packets_per_trial=50)
rows = harness.run_experiment(ex)

table = {}
for r in rows:
    table.setdefault(r.horizontal_offset, {})[r.power_w] = r.mean_ber
print("offset   1.8 W    4.5 W")
for h, col in sorted(table.items()):
    lo, hi = (col[k] for k in sorted(col))
    print(f"{h * 100:4.0f} cm  {lo:.4f}   {hi:.4f}")
