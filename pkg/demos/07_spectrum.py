"""Where the received power sits in frequency.

Through the wall, a 500 sym/s stream keeps almost all of its power below
500 Hz. A 5000 sym/s stream spreads most of it above, where the wall
attenuates hardest.
"""

from dataclasses import replace

import numpy as np

from throughmetal import config, harness
from throughmetal.channel import Geometry, apply_channel

cfg = config.load()
ch = replace(harness.channel_from(cfg, "aluminum"), noise_rms=0.0)
geo = Geometry(0.0294, 0.017)

for rs, rm in ((500, 10000), (5000, 50000)):
    rx = apply_channel(harness.transmit(harness.modem_from(cfg, rs, rm), 100, 15.0), ch, geo)
    f, p = harness.estimate_spectrum(rx)
    edges = [0, 250, 500, 1000, 2500, 5000]
    shares = [p[(f >= a) & (f < b)].sum() / p.sum() for a, b in zip(edges, edges[1:])]
    print(f"{rs} sym/s: below 500 Hz {harness.in_band_fraction(rx):.3f}")
    for (a, b), s in zip(zip(edges, edges[1:]), shares):
        print(f"  {a:>4}-{b:<4} Hz {'#' * int(round(40 * s)):<40} {s:.3f}")
    print(f"  peak bin {f[np.argmax(p)]:.1f} Hz")
