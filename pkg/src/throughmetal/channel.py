"""Magnetic-induction channel between the transmit and receive coils.

The channel is linear and time-invariant apart from additive noise::

    H(f) = G(geometry) * (j f/fp) / (1 + j f/fp) * exp(-(1 + j) d / delta(f))

``G`` falls off with coil separation as ``(r0 / r) ** n``. The bracketed
term is Faraday (derivative) coupling rolled off by a single pole at ``fp``;
it tends to 1 well above the pole. The exponential is the wall loss, whose
magnitude is ``exp(-d / delta)``, together with the matching phase lag; it
is dropped when no material sits between the coils.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import math

import numpy as np
from scipy import optimize

from .errors import ConfigError, FitError
from .modem import Waveform
from .physics import MaterialSpec, skin_depth


@dataclass(frozen=True)
class Geometry:
    """Coil placement.

    Either ``coplanar_distance`` (both coils in air, side by side) or the
    pair of ``horizontal_offset`` and ``vertical_offset`` (receive coil under
    the pipe, wall included in the vertical part).
    """

    horizontal_offset: float = 0.0
    vertical_offset: float = 0.0
    coplanar_distance: float | None = None

    def __post_init__(self):
        if self.horizontal_offset < 0 or self.vertical_offset < 0:
            raise ConfigError("offsets must be non-negative")
        if self.coplanar_distance is not None:
            if self.coplanar_distance < 0:
                raise ConfigError("coplanar_distance must be non-negative")
            if self.horizontal_offset or self.vertical_offset:
                raise ConfigError("use either coplanar_distance or offsets, not both")

    @classmethod
    def coplanar(cls, distance: float) -> "Geometry":
        return cls(coplanar_distance=distance)


@dataclass(frozen=True)
class ChannelModel:
    coupling_gain_ref: float
    reference_separation: float
    pole_frequency: float
    falloff_exponent: float = 3.0
    derivative_coupling: bool = True
    material: MaterialSpec | None = None
    noise_rms: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.coupling_gain_ref > 0:
            raise ConfigError("coupling_gain_ref must be > 0")
        if not self.reference_separation > 0:
            raise ConfigError("reference_separation must be > 0")
        if not self.falloff_exponent > 0:
            raise ConfigError("falloff_exponent must be > 0")
        if not self.pole_frequency > 0:
            raise ConfigError("pole_frequency must be > 0")
        if not self.noise_rms >= 0:
            raise ConfigError("noise_rms must be >= 0")


def separation(g: Geometry) -> float:
    """Straight-line distance between the coil centres, in meters."""
    if g.coplanar_distance is not None:
        return g.coplanar_distance
    return math.hypot(g.horizontal_offset, g.vertical_offset)


def coupling_gain(ch: ChannelModel, g: Geometry) -> float:
    r = separation(g)
    if r == 0:
        raise ConfigError("coil separation must be > 0")
    return ch.coupling_gain_ref * (ch.reference_separation / r) ** ch.falloff_exponent


def wall_factor(material: MaterialSpec, frequency) -> np.ndarray:
    """Complex field ratio across the wall, ``exp(-(1 + j) d / delta)``.

    Its magnitude is :func:`~throughmetal.physics.attenuation_factor`; the
    phase is the lag of a diffusive field crossing a good conductor. Zero
    at DC.
    """
    f = np.atleast_1d(np.asarray(frequency, dtype=float))
    out = np.zeros(f.shape, dtype=complex)
    pos = f > 0
    x = material.thickness / skin_depth(material, f[pos])
    out[pos] = np.exp(-(1 + 1j) * x)
    return out


def _shape(ch: ChannelModel, f: np.ndarray) -> np.ndarray:
    """Transfer function without the geometric gain."""
    out = np.ones(f.shape, dtype=complex)
    if ch.derivative_coupling:
        x = 1j * f / ch.pole_frequency
        out = x / (1 + x)
    if ch.material is not None:
        out = out * wall_factor(ch.material, f)
    return out


def transfer_function(ch: ChannelModel, g: Geometry, frequency):
    """Complex gain from transmit-coil voltage to induced receive voltage."""
    f = np.asarray(frequency, dtype=float)
    if np.any(f < 0):
        raise ConfigError("frequency must be >= 0")
    h = coupling_gain(ch, g) * _shape(ch, np.atleast_1d(f))
    return complex(h[0]) if f.ndim == 0 else h


def fft_size(n: int) -> int:
    """Smallest power of two that holds twice ``n`` samples."""
    return 1 << max(1, math.ceil(math.log2(2 * max(n, 1))))


def apply_channel(w: Waveform, ch: ChannelModel, g: Geometry) -> Waveform:
    """Filter ``w`` through the channel and add white Gaussian noise.

    Filtering is a zero-padded FFT multiply, so the result is the linear
    (not circular) convolution truncated to the input length. Noise is drawn
    from a generator seeded with ``ch.seed`` on every call.
    """
    n = len(w.samples)
    if n == 0:
        raise ConfigError("cannot filter an empty waveform")
    nfft = fft_size(n)
    freqs = np.fft.rfftfreq(nfft, d=1.0 / w.sample_rate)
    spectrum = np.fft.rfft(w.samples, nfft) * transfer_function(ch, g, freqs)
    out = np.fft.irfft(spectrum, nfft)[:n]
    if ch.noise_rms > 0:
        rng = np.random.default_rng(ch.seed)
        out = out + rng.normal(0.0, ch.noise_rms, n)
    return Waveform(out, w.sample_rate)


@dataclass(frozen=True)
class Calibration:
    model: ChannelModel
    residual: float  # rms misfit, volts peak-to-peak


def _best_gain(shape_mag, target):
    return float(shape_mag @ target / (shape_mag @ shape_mag))


def calibrate(points, ch: ChannelModel, geometry: Geometry, input_vpp: float = 10.0,
              pole_range=(1.0, 1e5), grid_size=400) -> Calibration:
    """Fit ``coupling_gain_ref`` and ``pole_frequency`` to induced-voltage points.

    ``points`` are ``(frequency_hz, vpp_volts)`` pairs measured with a sine
    of ``input_vpp`` volts peak-to-peak on the transmit coil at ``geometry``.
    For a fixed pole the best gain is linear least squares; the pole is found
    by a log-spaced grid search followed by bounded scalar refinement.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise FitError("need at least 3 (frequency, vpp) points")
    f, vpp = pts.T
    if np.any(f <= 0):
        raise FitError("frequencies must be > 0")
    if np.unique(f).size < 2:
        raise FitError("points must span more than one frequency")
    target = vpp / input_vpp
    geo = (ch.reference_separation / separation(geometry)) ** ch.falloff_exponent

    def cost(log_pole):
        trial = replace(ch, pole_frequency=math.exp(log_pole))
        s = np.abs(_shape(trial, f)) * geo
        k = _best_gain(s, target)
        return float(np.sum((k * s - target) ** 2)), k

    lo, hi = math.log(pole_range[0]), math.log(pole_range[1])
    grid = np.linspace(lo, hi, grid_size)
    costs = [cost(x)[0] for x in grid]
    i = int(np.argmin(costs))
    step = grid[1] - grid[0]
    res = optimize.minimize_scalar(
        lambda x: cost(x)[0], bounds=(max(lo, grid[i] - step), min(hi, grid[i] + step)),
        method="bounded", options={"xatol": 1e-10})
    best = res.x if res.fun <= costs[i] else grid[i]
    sse, gain = cost(best)
    if not gain > 0:
        raise FitError("fitted coupling gain is not positive")
    model = replace(ch, coupling_gain_ref=gain, pole_frequency=math.exp(best))
    residual = math.sqrt(sse / len(f)) * input_vpp
    return Calibration(model, residual)
