"""Fitting the through-metal channel to an induced-voltage curve.

The shipped aluminium preset is the least-squares fit of the channel model
to ``presets/aluminum_points.csv``: induced peak-to-peak voltage for a
10 Vpp sine with the coils 1.7 cm apart. Those points are illustrative. They
have the reported band shape (strongest at 200-300 Hz, falling steeply above
500 Hz) but they are not digitized measurements.
"""

import io

import numpy as np

from throughmetal import config, harness
from throughmetal.channel import Geometry, calibrate, transfer_function

cfg = config.load()
start = harness.channel_from(cfg, "aluminum")
pts = np.loadtxt(io.StringIO(config.preset_text("aluminum_points.csv")), delimiter=",", skiprows=1)
geo = Geometry(0.0, 0.017)

fit = calibrate(pts, start, geo)
m = fit.model
print(f"coupling gain at 1.7 cm: {m.coupling_gain_ref:.5f}")
print(f"pole frequency:          {m.pole_frequency:.1f} Hz")
print(f"rms residual:            {fit.residual * 1000:.2f} mVpp")

print("\n  f (Hz)   measured   model  (mVpp)")
model = 10 * np.abs(transfer_function(m, geo, pts[:, 0]))
for (f, v), mv in zip(pts, model):
    print(f"  {f:6.0f}   {v * 1000:7.1f}  {mv * 1000:7.1f}")

f = np.linspace(50, 2000, 1951)
print(f"\nmodel response peaks at {f[np.argmax(np.abs(transfer_function(m, geo, f)))]:.0f} Hz")

# the same model at the 3.4 cm working distance, and in air
air = harness.channel_from(cfg, "air")
print("\n|H| at 250 Hz: through metal at 3.4 cm "
      f"{abs(transfer_function(m, Geometry(0.0294, 0.017), 250.0)):.4f}, "
      f"air at 10.5 cm {abs(transfer_function(air, Geometry.coplanar(0.105), 250.0)):.4f}")
