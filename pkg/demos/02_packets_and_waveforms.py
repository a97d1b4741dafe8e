"""Framing packets and driving the transmit coil.

Each packet is the "1111" preamble followed by a fixed 16-bit payload, and
packets are separated by 200 us of silence. The voltage-switching amplifier
turns the logic-level stream into 8 V or 15 V pulses.
"""

import tempfile
from pathlib import Path

import numpy as np

from throughmetal import formats
from throughmetal.modem import (
    PAYLOAD, ModemConfig, amplifier_output, frame_packet, packet_stream,
)

rz = ModemConfig(2500, 50000)
pkt = frame_packet(PAYLOAD, rz)
print("packet bits:", pkt.bits)
print("samples/symbol:", rz.samples_per_symbol, " gap samples:", rz.gap_samples)

w = packet_stream(3, rz)
first = w.samples[:8 * rz.samples_per_symbol].reshape(8, -1)
print("\nfirst 8 RZ symbols (one row per symbol, every other sample):")
for row in first:
    print("  " + "".join("#" if v else "." for v in row[::2]))

nrz = ModemConfig(500, 10000, line_code="NRZ")
for volts in (8.0, 15.0):
    out = amplifier_output(packet_stream(10, nrz), volts)
    print(f"\n{volts:.0f} V supply: peak {out.samples.max():.0f} V, "
          f"power {out.power:.2f} W, mean {np.mean(out.samples):.2f} V")

path = Path(tempfile.gettempdir()) / "throughmetal_tx.csv"
formats.write_text(path, formats.waveform_to_text(out))
print(f"\nwrote {len(out)} samples to {path}")
print(path.read_text().splitlines()[0])
