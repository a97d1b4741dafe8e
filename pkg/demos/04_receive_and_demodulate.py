"""One capture, end to end.

A 500 sym/s NRZ stream at 15 V crosses the pipe wall to a coil 3.4 cm
away. The receiver amplifies it, samples it with a 10-bit ADC at 10 kS/s and
loses 5 samples every time its 2500-sample buffer is flushed. The
demodulator finds each packet by its preamble and counts payload errors.
"""

from dataclasses import replace

from throughmetal import config, harness
from throughmetal.channel import Geometry, apply_channel
from throughmetal.demod import DemodConfig, demodulate_stream
from throughmetal.frontend import receive

cfg = config.load()
modem = harness.modem_from(cfg, 500, 10000)
ch = replace(harness.channel_from(cfg, "aluminum"), seed=7)
geo = Geometry(0.0294, 0.017)

drive = harness.transmit(modem, 100, 15.0)
rx = apply_channel(drive, ch, geo)
cap = receive(rx, harness.amp_from(cfg), harness.adc_from(cfg, 10000), seed=7)
print(f"{len(drive)} samples sent, {len(cap)} captured, flush gaps at {cap.gaps}")

dcfg = DemodConfig.from_modem(modem, line_code="NRZ")
print("all packets:        ", demodulate_stream(cap.volts(), dcfg).summary())
print("gap packets skipped:", demodulate_stream(cap.volts(), dcfg, gaps=cap.gaps).summary())

first = demodulate_stream(cap.volts(), dcfg).packets[:3]
for p in first:
    print(f"  preamble at {p.preamble_index:5d}  bits {p.bits}  distance {p.match_distance:.3g}")
