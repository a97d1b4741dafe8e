"""Receive amplifier and microcontroller ADC, including buffer-flush sample loss."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .modem import Waveform

JITTER = 10  # max shift of a flush point, samples


@dataclass(frozen=True)
class AmpConfig:
    gain: float = 20.0
    saturation: float = 2.5

    def __post_init__(self):
        if not self.gain > 0:
            raise ConfigError("gain must be > 0")
        if not self.saturation > 0:
            raise ConfigError("saturation must be > 0")


@dataclass(frozen=True)
class AdcConfig:
    """ADC and capture buffer.

    Every ``buffer_len`` samples the buffer is flushed over the serial port
    and ``loss_per_flush`` consecutive samples are missed.
    """

    sample_rate: int = 50_000
    resolution_bits: int = 10
    v_ref: float = 5.0
    buffer_len: int = 2500
    loss_per_flush: int = 5

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ConfigError("sample_rate must be > 0")
        if self.resolution_bits < 1:
            raise ConfigError("resolution_bits must be >= 1")
        if not self.v_ref > 0:
            raise ConfigError("v_ref must be > 0")
        if self.buffer_len < 1:
            raise ConfigError("buffer_len must be >= 1")
        if not 0 <= self.loss_per_flush < self.buffer_len:
            raise ConfigError("need 0 <= loss_per_flush < buffer_len")

    @property
    def lsb(self) -> float:
        return self.v_ref / 2 ** self.resolution_bits


@dataclass(eq=False)
class Capture:
    """Quantized ADC codes plus the positions where samples went missing.

    ``gaps`` holds output indices: samples were dropped immediately before
    ``codes[i]`` for each ``i`` in ``gaps``.
    """

    codes: np.ndarray
    sample_rate: float
    v_ref: float
    bits: int
    gaps: list = field(default_factory=list)

    @property
    def lsb(self) -> float:
        return self.v_ref / 2 ** self.bits

    def volts(self, centered: bool = True) -> np.ndarray:
        """Reconstructed voltages; ``centered`` removes the mid-scale bias."""
        v = self.codes * self.lsb
        return v - self.v_ref / 2 if centered else v

    def __len__(self):
        return len(self.codes)


def amplify(w: Waveform, a: AmpConfig) -> Waveform:
    return Waveform(np.clip(w.samples * a.gain, -a.saturation, a.saturation), w.sample_rate)


def adc_sample(w: Waveform, cfg: AdcConfig) -> Capture:
    """Decimate to the ADC rate and quantize to ``2**bits`` levels over ``[0, v_ref]``.

    Codes are ``round(v / lsb)`` clamped to ``[0, 2**bits - 1]`` with
    ``lsb = v_ref / 2**bits``.
    """
    stride = w.sample_rate / cfg.sample_rate
    if stride < 1 or abs(stride - round(stride)) > 1e-9:
        raise ConfigError(
            f"waveform rate {w.sample_rate} is not an integer multiple of ADC rate {cfg.sample_rate}")
    x = w.samples[::round(stride)]
    top = 2 ** cfg.resolution_bits - 1
    codes = np.clip(np.rint(x / cfg.lsb), 0, top).astype(np.int64)
    return Capture(codes, cfg.sample_rate, cfg.v_ref, cfg.resolution_bits)


def apply_sample_loss(capture: Capture, cfg: AdcConfig, seed: int = 0) -> Capture:
    """Drop ``loss_per_flush`` samples once per ``buffer_len`` input samples.

    The k-th flush nominally removes the last ``loss_per_flush`` samples of
    the k-th buffer; ``seed`` shifts each flush point by up to
    :data:`JITTER` samples either way.
    """
    loss = cfg.loss_per_flush
    n = len(capture.codes)
    if loss == 0 or n < cfg.buffer_len:
        return replace(capture, codes=capture.codes.copy(), gaps=list(capture.gaps))
    rng = np.random.default_rng(seed)
    n_flush = n // cfg.buffer_len
    jitter = rng.integers(-JITTER, JITTER + 1, size=n_flush)
    keep = np.ones(n, dtype=bool)
    gaps = []
    prev_end = 0
    for k in range(1, n_flush + 1):
        start = k * cfg.buffer_len - loss + int(jitter[k - 1])
        start = min(max(start, prev_end), n - loss)
        if start < prev_end:
            break
        keep[start:start + loss] = False
        gaps.append(start - len(gaps) * loss)  # output index after the hole
        prev_end = start + loss
    return replace(capture, codes=capture.codes[keep], gaps=gaps)


def receive(w: Waveform, amp: AmpConfig, adc: AdcConfig, seed: int = 0) -> Capture:
    """Amplify, bias to mid-scale, digitize and lose samples at each flush."""
    biased = amplify(w, amp)
    biased = Waveform(biased.samples + adc.v_ref / 2, biased.sample_rate)
    return apply_sample_loss(adc_sample(biased, adc), adc, seed)
