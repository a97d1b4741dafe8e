"""Packet framing and on-off keyed baseband waveform synthesis."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FramingError

PAYLOAD = "0101101011001100"

# Supply voltage -> measured amplifier drive current (A).
DRIVE_CURRENT = {8.0: 0.225, 15.0: 0.3}


def _bits(s, name="bits"):
    s = str(s)
    if not s or set(s) - {"0", "1"}:
        raise FramingError(f"{name} must be a non-empty string of 0/1, got {s!r}")
    return s


@dataclass(frozen=True)
class ModemConfig:
    """Symbol timing, line code and packet layout.

    ``duty`` is the fraction of an RZ "1" symbol spent high. ``gap`` is the
    silent interval between packets, in seconds.
    """

    symbol_rate: int
    sample_rate: int
    duty: float = 0.5
    amplitude: float = 1.0
    line_code: str = "RZ"
    preamble: str = "1111"
    payload_len: int = 16
    gap: float = 200e-6

    def __post_init__(self):
        rs, rm = self.symbol_rate, self.sample_rate
        if rs <= 0 or rm <= 0 or rm % rs or rm // rs < 2:
            raise ConfigError(
                f"sample_rate {rm} must be an integer multiple >= 2 of symbol_rate {rs}")
        if not 0 < self.duty < 1:
            raise ConfigError(f"duty must be in (0, 1), got {self.duty}")
        high = self.duty * self.samples_per_symbol
        if abs(high - round(high)) > 1e-9:
            raise ConfigError(
                f"duty {self.duty} x {self.samples_per_symbol} samples/symbol is not an integer")
        if not self.amplitude > 0:
            raise ConfigError(f"amplitude must be > 0, got {self.amplitude}")
        if self.line_code not in ("RZ", "NRZ"):
            raise ConfigError(f"line_code must be RZ or NRZ, got {self.line_code!r}")
        if not self.preamble or set(self.preamble) != {"1"}:
            raise ConfigError(f"preamble must be non-empty and all ones, got {self.preamble!r}")
        if self.payload_len < 1:
            raise ConfigError("payload_len must be >= 1")
        if self.gap < 0:
            raise ConfigError("gap must be >= 0")

    @property
    def samples_per_symbol(self) -> int:
        return self.sample_rate // self.symbol_rate

    @property
    def high_samples(self) -> int:
        """Samples held high for a "1" symbol."""
        if self.line_code == "NRZ":
            return self.samples_per_symbol
        return round(self.duty * self.samples_per_symbol)

    @property
    def gap_samples(self) -> int:
        return round(self.gap * self.sample_rate)

    @property
    def packet_len(self) -> int:
        return len(self.preamble) + self.payload_len


@dataclass(frozen=True)
class Packet:
    preamble: str
    payload: str

    @property
    def bits(self) -> str:
        return self.preamble + self.payload


@dataclass(eq=False)
class Waveform:
    """Uniformly sampled voltage sequence.

    ``power`` is optional metadata in watts, set by :func:`amplifier_output`.
    """

    samples: np.ndarray
    sample_rate: float
    power: float | None = field(default=None)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1:
            raise ConfigError("waveform samples must be one-dimensional")
        if not self.sample_rate > 0:
            raise ConfigError(f"sample_rate must be > 0, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ConfigError("waveform samples must be finite")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def frame_packet(payload: str, cfg: ModemConfig) -> Packet:
    payload = _bits(payload, "payload")
    if len(payload) != cfg.payload_len:
        raise FramingError(f"payload has {len(payload)} bits, expected {cfg.payload_len}")
    return Packet(cfg.preamble, payload)


def symbol_shape(cfg: ModemConfig) -> np.ndarray:
    """Samples of a single "1" symbol at unit amplitude."""
    shape = np.zeros(cfg.samples_per_symbol)
    shape[:cfg.high_samples] = 1.0
    return shape


def encode_bits(bits: str, cfg: ModemConfig) -> np.ndarray:
    """Line-code a bit string into samples (no gaps)."""
    b = np.frombuffer(_bits(bits).encode(), dtype=np.uint8) - ord("0")
    return cfg.amplitude * np.outer(b, symbol_shape(cfg)).ravel()


def modulate(packets, cfg: ModemConfig) -> Waveform:
    """Concatenate line-coded packets separated by ``cfg.gap`` of silence."""
    packets = list(packets)
    gap = np.zeros(cfg.gap_samples)
    chunks = []
    for i, p in enumerate(packets):
        if i:
            chunks.append(gap)
        chunks.append(encode_bits(p.bits, cfg))
    samples = np.concatenate(chunks) if chunks else np.zeros(0)
    return Waveform(samples, cfg.sample_rate)


def packet_stream(n_packets: int, cfg: ModemConfig, payload: str = PAYLOAD) -> Waveform:
    """``n_packets`` copies of the same framed payload."""
    pkt = frame_packet(payload, cfg)
    return modulate([pkt] * n_packets, cfg)


def drive_current(supply_volts: float, table=None) -> float:
    """Amplifier supply current, interpolated linearly in a measured table."""
    table = DRIVE_CURRENT if table is None else table
    v = sorted(table)
    return float(np.interp(supply_volts, v, [table[k] for k in v]))


def amplifier_output(w: Waveform, supply_volts: float, current: float | None = None,
                     logic_high: float = 1.0) -> Waveform:
    """Ideal voltage-switching amplifier.

    Samples at or above half of ``logic_high`` switch to ``supply_volts``,
    the rest to 0. The returned waveform carries ``supply_volts * current``
    as its power, with ``current`` looked up from :data:`DRIVE_CURRENT` when
    not given.
    """
    if not supply_volts > 0:
        raise ConfigError(f"supply_volts must be > 0, got {supply_volts}")
    if current is None:
        current = drive_current(supply_volts)
    out = np.where(w.samples >= logic_high / 2, float(supply_volts), 0.0)
    return Waveform(out, w.sample_rate, power=supply_volts * current)


def expected_length(n_packets: int, cfg: ModemConfig) -> int:
    """Sample count of :func:`modulate` for ``n_packets`` packets."""
    if n_packets == 0:
        return 0
    return n_packets * cfg.packet_len * cfg.samples_per_symbol + (n_packets - 1) * cfg.gap_samples


def rz_mean(bits: str, cfg: ModemConfig) -> float:
    """Mean level of one encoded packet: ``amplitude * duty * ones / length``."""
    ones = bits.count("1")
    duty = 1.0 if cfg.line_code == "NRZ" else cfg.duty
    return cfg.amplitude * duty * ones / len(bits)


__all__ = [
    "ModemConfig", "Packet", "Waveform", "PAYLOAD", "frame_packet", "modulate",
    "packet_stream", "encode_bits", "symbol_shape", "amplifier_output", "drive_current",
    "expected_length", "rz_mean",
]
