"""How high can the carrier go through 7 mm of aluminium?

The wall attenuates a field by exp(-d / delta), and the skin depth delta
shrinks as 1/sqrt(f). With 30 V on the transmit coil and 0.2 V needed at
the receiver, that caps the usable frequency at a few kHz.
"""

from throughmetal import config, harness
from throughmetal.physics import (
    COIL_AIR, SeriesCircuit, coil_in_pipe, resonant_frequency, series_impedance, skin_depth,
)

cfg = config.load()
wall = harness.material_from(cfg, "aluminum")
print(harness.plan(wall, harness.budget_from(cfg)).text())

print("\nskin depth")
for f in (50, 500, 5000):
    print(f"  {f:>5} Hz: {skin_depth(wall, f) * 1000:.2f} mm")

# A series capacitor tunes coil 1 to 500 Hz in air. Inside the pipe its
# inductance drops to 12 mH and its resistance rises, and the tuned circuit
# is pushed well off resonance.
cap = 6.75e-6
pipe = coil_in_pipe(COIL_AIR)
f0 = resonant_frequency(SeriesCircuit(COIL_AIR, cap))
print(f"\nresonance in air {f0:.1f} Hz, in pipe {resonant_frequency(SeriesCircuit(pipe, cap)):.1f} Hz")
for label, c in (("coil only", None), ("coil + 6.75 uF", cap)):
    za = abs(series_impedance(SeriesCircuit(COIL_AIR, c), f0))
    zp = abs(series_impedance(SeriesCircuit(pipe, c), f0))
    print(f"  |Z| at {f0:.0f} Hz, {label:>15}: air {za:6.2f} ohm, pipe {zp:6.2f} ohm")
