"""Offline demodulation of captured OOK packets and bit-error-rate accounting.

The receiver knows the packet layout and the repeated payload. It

1. removes a scaled moving average so that "1" levels sit above zero and
   "0" levels below,
2. slides a "1111" template over a search window and keeps the offset with
   the smallest squared Euclidean distance,
3. decides each payload symbol by comparing its mean with a threshold.

Every packet is re-acquired by its own preamble search, so samples lost
between buffer flushes cannot desynchronize later packets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ComparisonError, ConfigError, DecodeError
from .modem import PAYLOAD


@dataclass(frozen=True)
class DemodConfig:
    """Receiver timing and decision parameters.

    ``ones_fraction`` is the share of "1" bits in a packet (12 of 20 for the
    default preamble and payload). ``extra_samples`` widens the preamble
    search window beyond ``(packet_len + 4)`` symbols to cover the
    inter-packet gap. Preamble search is an unconditional argmin; set
    ``max_match_ratio`` to discard matches whose distance exceeds that
    multiple of the template energy.
    """

    symbol_rate: int
    sample_rate: int
    preamble: str = "1111"
    payload_len: int = 16
    line_code: str = "RZ"
    duty: float = 0.5
    movavg_window_symbols: int = 20
    ones_fraction: float = 0.6
    decision_threshold: float = 0.0
    extra_samples: int = 10
    centered: bool = True
    max_match_ratio: float | None = None

    def __post_init__(self):
        rs, rm = self.symbol_rate, self.sample_rate
        if rs <= 0 or rm <= 0 or rm % rs or rm // rs < 2:
            raise ConfigError(
                f"sample_rate {rm} must be an integer multiple >= 2 of symbol_rate {rs}")
        if not 0 < self.ones_fraction <= 1:
            raise ConfigError("ones_fraction must be in (0, 1]")
        if self.movavg_window_symbols < 1:
            raise ConfigError("movavg_window_symbols must be >= 1")
        if self.line_code not in ("RZ", "NRZ"):
            raise ConfigError(f"line_code must be RZ or NRZ, got {self.line_code!r}")
        if not 0 < self.duty < 1:
            raise ConfigError("duty must be in (0, 1)")
        if not self.preamble or set(self.preamble) != {"1"}:
            raise ConfigError("preamble must be non-empty and all ones")

    @property
    def samples_per_symbol(self) -> int:
        return self.sample_rate // self.symbol_rate

    @property
    def duty_effective(self) -> float:
        return 1.0 if self.line_code == "NRZ" else self.duty

    @property
    def decision_samples(self) -> int:
        """Leading samples of a symbol that enter its decision."""
        return max(1, round(self.duty_effective * self.samples_per_symbol))

    @property
    def packet_samples(self) -> int:
        return (len(self.preamble) + self.payload_len) * self.samples_per_symbol

    @property
    def search_window(self) -> int:
        """Samples searched for one preamble; 490 at 2500 sym/s and 50 kS/s."""
        return (len(self.preamble) + self.payload_len + 4) * self.samples_per_symbol \
            + self.extra_samples

    @classmethod
    def from_modem(cls, modem, **kwargs) -> "DemodConfig":
        """Receiver settings that match a :class:`~throughmetal.modem.ModemConfig`.

        ``extra_samples`` becomes the modem's gap length in samples (10 for
        200 us at 50 kS/s).
        """
        base = dict(symbol_rate=modem.symbol_rate, sample_rate=modem.sample_rate,
                    preamble=modem.preamble, payload_len=modem.payload_len,
                    line_code=modem.line_code, duty=modem.duty,
                    extra_samples=modem.gap_samples)
        base.update(kwargs)
        return cls(**base)


@dataclass(frozen=True)
class PacketDecode:
    preamble_index: int
    bits: str
    match_distance: float


@dataclass
class BerReport:
    """Error counts over all detected packets; preamble bits are never counted."""

    packets_found: int = 0
    bits_compared: int = 0
    bit_errors: int = 0
    packets: list = field(default_factory=list, repr=False)
    packets_skipped: int = 0

    @property
    def ber(self) -> float:
        """``bit_errors / bits_compared``, or NaN when nothing was compared."""
        if self.bits_compared == 0:
            return math.nan
        return self.bit_errors / self.bits_compared

    @property
    def defined(self) -> bool:
        return self.bits_compared > 0

    def summary(self) -> str:
        ber = f"{self.ber:.6g}" if self.defined else "undefined"
        text = (f"packets={self.packets_found} bits={self.bits_compared} "
                f"errors={self.bit_errors} ber={ber}")
        if self.packets_skipped:
            text += f" skipped={self.packets_skipped}"
        return text


def preprocess(samples, cfg: DemodConfig) -> np.ndarray:
    """Subtract the scaled moving average from ``samples``.

    The average runs over ``movavg_window_symbols`` symbols (see
    :func:`moving_average` for the ends) and is divided by
    ``2 * ones_fraction * duty`` (duty is 1 for NRZ) so that the subtracted
    level falls midway between the "0" and "1" levels of the known packet.
    """
    x = np.asarray(samples, dtype=float)
    w = cfg.movavg_window_symbols * cfg.samples_per_symbol
    if len(x) < w:
        raise DecodeError(f"need at least {w} samples to preprocess, got {len(x)}")
    mean = moving_average(x, w, cfg.centered)
    return x - mean / (2 * cfg.ones_fraction * cfg.duty_effective)


def moving_average(x, width: int, centered: bool = True) -> np.ndarray:
    """Mean over a ``width``-sample window kept inside ``x``.

    A centered window spans ``width // 2`` samples before the current one
    and the rest after; a trailing window ends at the current sample. Near
    either end the window slides inward rather than shrinking, so every
    output averages ``min(width, len(x))`` samples.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    width = min(width, n)
    before = width // 2 if centered else width - 1
    lo = np.clip(np.arange(n) - before, 0, n - width)
    csum = np.concatenate(([0.0], np.cumsum(x)))
    return (csum[lo + width] - csum[lo]) / width


def robust_peak(samples) -> float:
    """95th percentile of ``|samples|``."""
    return float(np.percentile(np.abs(samples), 95)) if len(samples) else 0.0


def preamble_template(cfg: DemodConfig, amplitude: float = 1.0) -> np.ndarray:
    """Preprocessed "1111" at ``+amplitude`` high and ``-amplitude`` low."""
    sym = -np.ones(cfg.samples_per_symbol)
    sym[:cfg.decision_samples] = 1.0
    return amplitude * np.tile(sym, len(cfg.preamble))


def _distances(x, template):
    windows = sliding_window_view(x, len(template))
    return np.sum((windows - template) ** 2, axis=1)


def match_preamble(samples, cfg: DemodConfig, amplitude: float | None = None,
                   max_offset: int | None = None):
    """Best template offset in ``samples`` and its squared distance.

    Only offsets ``0..max_offset`` are tried (all that fit by default).
    ``amplitude`` defaults to :func:`robust_peak` of ``samples``.
    """
    x = np.asarray(samples, dtype=float)
    if amplitude is None:
        amplitude = robust_peak(x)
    template = preamble_template(cfg, amplitude)
    if len(x) < len(template):
        raise DecodeError(
            f"search window of {len(x)} samples is shorter than the {len(template)}-sample template")
    d = _distances(x, template)
    if max_offset is not None:
        d = d[:max_offset + 1]
    k = int(np.argmin(d))
    return k, float(d[k])


def _earliest_match(d, head_room, energy):
    """Argmin of ``d``, moved to an earlier offset that matches about as well.

    Used for the first acquisition, where the window may hold the first
    preamble and, if samples were lost, part of the next one. ``head_room``
    is the least spacing between two genuine preambles.
    """
    k = int(np.argmin(d))
    if k >= head_room:
        j = int(np.argmin(d[:k - head_room + 1]))
        if d[j] <= 2 * d[k] + 0.1 * energy:
            return j
    return k


def detect_preamble(samples, cfg: DemodConfig, amplitude: float | None = None) -> int:
    """Offset of the preamble within the first ``cfg.search_window`` samples."""
    window = np.asarray(samples, dtype=float)[:cfg.search_window]
    return match_preamble(window, cfg, amplitude)[0]


def decide_symbols(samples, start: int, cfg: DemodConfig, n_symbols: int | None = None) -> str:
    """Threshold the mean of each symbol's decision window, starting at ``start``."""
    x = np.asarray(samples, dtype=float)
    n = cfg.payload_len if n_symbols is None else n_symbols
    sps, keep = cfg.samples_per_symbol, cfg.decision_samples
    avail = max(0, (len(x) - start) // sps)
    m = min(n, avail)
    block = x[start:start + m * sps].reshape(m, sps)[:, :keep]
    bits = "".join("1" if v > cfg.decision_threshold else "0" for v in block.mean(axis=1))
    if m < n:
        raise DecodeError(f"capture ends after {m} of {n} symbols", partial_bits=bits)
    return bits


def compute_ber(decoded: str, expected: str) -> BerReport:
    """Hamming distance between two equal-length bit strings, as a one-packet report."""
    if len(decoded) != len(expected):
        raise ComparisonError(f"length mismatch: {len(decoded)} vs {len(expected)}")
    errors = sum(a != b for a, b in zip(decoded, expected))
    return BerReport(packets_found=1, bits_compared=len(expected), bit_errors=errors)


def demodulate_stream(samples, cfg: DemodConfig, expected_payload: str = PAYLOAD,
                      gaps=None) -> BerReport:
    """Find and decode every packet in a capture, counting payload bit errors.

    ``gaps`` optionally lists capture indices where samples were dropped
    (:attr:`~throughmetal.frontend.Capture.gaps`). A packet that spans one
    is still acquired, so the search stays in step, but it is left out of
    the counts and tallied in ``packets_skipped`` instead.
    """
    if len(expected_payload) != cfg.payload_len:
        raise ComparisonError(
            f"expected payload has {len(expected_payload)} bits, config says {cfg.payload_len}")
    x = preprocess(samples, cfg)
    n = len(x)
    sps = cfg.samples_per_symbol
    head = len(cfg.preamble) * sps
    amplitude = robust_peak(x)
    template_energy = head * amplitude ** 2
    # resume one symbol early: a flush inside this packet pulls the next one forward
    backoff = sps
    period = cfg.packet_samples + cfg.extra_samples
    report = BerReport()
    holes = np.sort(np.asarray([] if gaps is None else list(gaps), dtype=np.int64))
    template = preamble_template(cfg, amplitude)
    pos = 0
    while pos + cfg.packet_samples <= n:
        window = x[pos:pos + cfg.search_window]
        if len(window) < len(template):
            raise DecodeError(f"search window of {len(window)} samples is shorter than the template")
        # at most one packet period of offsets, so a window rarely offers two preambles
        d = _distances(window, template)[:min(n - pos - cfg.packet_samples, period - 1) + 1]
        if report.packets_found or report.packets_skipped:
            k = int(np.argmin(d))
        else:
            k = _earliest_match(d, cfg.packet_samples // 2, template_energy)
        dist = float(d[k])
        gate = cfg.max_match_ratio
        if gate is not None and (not template_energy or dist > gate * template_energy):
            pos += cfg.packet_samples
            continue
        start = pos + k
        bits = decide_symbols(x, start + head, cfg)
        pos = start + cfg.packet_samples - backoff
        lo, hi = np.searchsorted(holes, [start + 1, start + cfg.packet_samples])
        if hi > lo:
            report.packets_skipped += 1
            continue
        errors = sum(a != b for a, b in zip(bits, expected_payload))
        report.packets.append(PacketDecode(start, bits, dist))
        report.packets_found += 1
        report.bits_compared += cfg.payload_len
        report.bit_errors += errors
    return report
