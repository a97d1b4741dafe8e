"""End-to-end simulation runs, Monte Carlo sweeps, spectra and link planning.

One trial is::

    packets -> amplifier -> channel (+noise) -> amplifier/ADC (+sample loss) -> demod

Each trial draws its noise and sample-loss seeds from
``SeedSequence([seed, trial])`` alone, so every sweep point sees the same
random numbers for a given trial index, and trials can run in any order or
in parallel without changing the aggregate.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
import math

import numpy as np

from . import config as cfgmod
from .channel import ChannelModel, Geometry, apply_channel, separation
from .demod import BerReport, DemodConfig, demodulate_stream
from .errors import ConfigError, ThroughMetalError
from .frontend import AdcConfig, AmpConfig, receive
from .modem import (PAYLOAD, ModemConfig, Waveform, amplifier_output, drive_current,
                    packet_stream)
from .physics import (LinkBudget, MaterialSpec, attenuation_factor, max_carrier_frequency,
                      skin_depth)


# ---------------------------------------------------------------- building blocks

def material_from(cfg: dict, name: str) -> MaterialSpec:
    return MaterialSpec(**cfgmod.section(cfg, f"material.{name}"))


def budget_from(cfg: dict) -> LinkBudget:
    return LinkBudget(**cfgmod.section(cfg, "budget"))


def channel_from(cfg: dict, name: str) -> ChannelModel:
    values = dict(cfgmod.section(cfg, f"channel.{name}"))
    mat = values.pop("material", None)
    material = material_from(cfg, mat) if mat else None
    try:
        return ChannelModel(material=material, **values)
    except TypeError as exc:
        raise ConfigError(f"[channel.{name}]: {exc}") from None


def drive_table_from(cfg: dict) -> dict:
    d = cfgmod.section(cfg, "drive")
    volts, amps = d["supply_volts"], d["current_amps"]
    if len(volts) != len(amps):
        raise ConfigError("[drive] supply_volts and current_amps differ in length")
    return dict(zip(volts, amps))


def modem_kwargs_from(cfg: dict) -> dict:
    m = dict(cfgmod.section(cfg, "modem"))
    payload = m.pop("payload", PAYLOAD)
    m["payload_len"] = len(payload)
    return m


def modem_from(cfg: dict, symbol_rate: int, sample_rate: int) -> ModemConfig:
    return ModemConfig(symbol_rate, sample_rate, **modem_kwargs_from(cfg))


def payload_from(cfg: dict) -> str:
    return cfg.get("modem", {}).get("payload", PAYLOAD)


def amp_from(cfg: dict) -> AmpConfig:
    return AmpConfig(**cfgmod.section(cfg, "rx_amp"))


def adc_from(cfg: dict, sample_rate: int) -> AdcConfig:
    return AdcConfig(sample_rate=sample_rate, **cfgmod.section(cfg, "adc"))


def demod_from(cfg: dict, modem: ModemConfig) -> DemodConfig:
    return DemodConfig.from_modem(modem, **cfg.get("demod", {}))


# ---------------------------------------------------------------- experiment

@dataclass(frozen=True)
class ExperimentConfig:
    """A full sweep: every rate x supply x geometry x noise level, ``trials`` times.

    ``rates`` pairs each symbol rate with its sample rate. ``modem`` holds
    the remaining :class:`ModemConfig` fields, ``demod`` any
    :class:`DemodConfig` overrides (for example ``line_code="NRZ"``).
    """

    channel: ChannelModel
    rates: tuple
    supplies: tuple
    geometries: tuple
    trials: int = 10
    seed: int = 0
    packets_per_trial: int = 100
    noise_levels: tuple | None = None
    modem: dict = field(default_factory=dict)
    demod: dict = field(default_factory=dict)
    amp: AmpConfig = AmpConfig()
    adc: dict = field(default_factory=dict)
    drive_table: dict | None = None
    payload: str = PAYLOAD
    lead_in_symbols: int = 2
    band_limit_hz: float = 500.0
    skip_gap_packets: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.packets_per_trial < 1:
            raise ConfigError("packets_per_trial must be >= 1")
        if self.lead_in_symbols < 0:
            raise ConfigError("lead_in_symbols must be >= 0")
        for name in ("rates", "supplies", "geometries"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
            if not getattr(self, name):
                raise ConfigError(f"{name} sweep must be non-empty")
        if self.noise_levels is not None:
            object.__setattr__(self, "noise_levels", tuple(self.noise_levels))
            if not self.noise_levels:
                raise ConfigError("noise_levels sweep must be non-empty")

    @property
    def noise_sweep(self) -> tuple:
        return self.noise_levels if self.noise_levels is not None else (self.channel.noise_rms,)


def experiment_from(cfg: dict) -> ExperimentConfig:
    """Build the ``[experiment]`` described in a loaded config."""
    e = cfgmod.section(cfg, "experiment")
    ch = channel_from(cfg, cfgmod.require(e, "channel", "experiment"))
    if "coplanar_distances" in e:
        geos = [Geometry.coplanar(d) for d in e["coplanar_distances"]]
    else:
        v = cfgmod.require(e, "vertical_offset", "experiment")
        geos = [Geometry(h, v) for h in cfgmod.require(e, "horizontal_offsets", "experiment")]
    m = modem_kwargs_from(cfg)
    return ExperimentConfig(
        channel=ch,
        rates=tuple(cfgmod.require(e, "rates", "experiment")),
        supplies=tuple(cfgmod.require(e, "supply_volts", "experiment")),
        geometries=tuple(geos),
        trials=e.get("trials", 10),
        seed=e.get("seed", 0),
        packets_per_trial=e.get("packets_per_trial", 100),
        noise_levels=e.get("noise_levels"),
        modem=m,
        demod=dict(cfg.get("demod", {})),
        amp=amp_from(cfg),
        adc=dict(cfgmod.section(cfg, "adc")),
        drive_table=drive_table_from(cfg),
        payload=payload_from(cfg),
        lead_in_symbols=e.get("lead_in_symbols", 2),
        band_limit_hz=e.get("band_limit_hz", 500.0),
        skip_gap_packets=e.get("skip_gap_packets", True),
    )


@dataclass(frozen=True)
class ResultRow:
    """Aggregate over the trials at one sweep point.

    ``mean_ber`` and ``ber_std`` (population) cover trials whose BER is
    defined; both are NaN when no trial found a packet. ``error`` is set,
    and the statistics left empty, when the point could not be simulated.
    """

    symbol_rate: int
    sample_rate: int
    supply_volts: float
    power_w: float | None
    noise_rms: float
    separation: float
    horizontal_offset: float | None
    vertical_offset: float | None
    coplanar_distance: float | None
    trials: int
    trials_defined: int = 0
    packets_sent: int = 0
    packets_found: int = 0
    packets_skipped: int = 0
    bits_compared: int = 0
    bit_errors: int = 0
    mean_ber: float | None = None
    ber_std: float | None = None
    in_band_fraction: float | None = None
    error: str = ""

    def sort_key(self):
        return (self.symbol_rate, self.sample_rate, self.supply_volts, self.noise_rms,
                self.separation, self.horizontal_offset or 0.0, self.vertical_offset or 0.0,
                self.coplanar_distance or 0.0)


COLUMNS = tuple(ResultRow.__dataclass_fields__)


def trial_seeds(seed: int, trial: int) -> tuple:
    """``(noise_seed, loss_seed)`` for one trial; independent of the sweep point."""
    a, b = np.random.SeedSequence([seed, trial]).generate_state(2)
    return int(a), int(b)


@dataclass(frozen=True)
class _Point:
    symbol_rate: int
    sample_rate: int
    supply: float
    noise: float
    geometry: Geometry


def transmit(modem: ModemConfig, n_packets: int, supply: float, payload: str = PAYLOAD,
             lead_in_symbols: int = 2, drive_table=None) -> Waveform:
    """Amplified packet stream with ``lead_in_symbols`` of silence at both ends.

    The silence stands for the receiver recording before the first packet
    and after the last one.
    """
    tx = packet_stream(n_packets, modem, payload)
    pad = np.zeros(lead_in_symbols * modem.samples_per_symbol)
    tx = Waveform(np.concatenate([pad, tx.samples, pad]), tx.sample_rate)
    return amplifier_output(tx, supply, drive_current(supply, drive_table))


def _modem(cfg: ExperimentConfig, p: _Point) -> ModemConfig:
    return ModemConfig(p.symbol_rate, p.sample_rate, **cfg.modem)


def run_trial(cfg: ExperimentConfig, p: _Point, trial: int) -> BerReport:
    modem = _modem(cfg, p)
    noise_seed, loss_seed = trial_seeds(cfg.seed, trial)
    drive = transmit(modem, cfg.packets_per_trial, p.supply, cfg.payload,
                     cfg.lead_in_symbols, cfg.drive_table)
    ch = replace(cfg.channel, noise_rms=p.noise, seed=noise_seed)
    rx = apply_channel(drive, ch, p.geometry)
    cap = receive(rx, cfg.amp, AdcConfig(sample_rate=p.sample_rate, **cfg.adc), loss_seed)
    dcfg = DemodConfig.from_modem(modem, **cfg.demod)
    gaps = cap.gaps if cfg.skip_gap_packets else None
    return demodulate_stream(cap.volts(), dcfg, cfg.payload, gaps)


def _trial_job(args):
    cfg, p, trial = args
    try:
        return run_trial(cfg, p, trial)
    except ThroughMetalError as exc:
        return exc


def received_in_band_fraction(cfg: ExperimentConfig, p: _Point) -> float:
    """In-band share of the noiseless received power at one sweep point."""
    modem = _modem(cfg, p)
    drive = transmit(modem, cfg.packets_per_trial, p.supply, cfg.payload,
                     cfg.lead_in_symbols, cfg.drive_table)
    rx = apply_channel(drive, replace(cfg.channel, noise_rms=0.0), p.geometry)
    return in_band_fraction(rx, cfg.band_limit_hz)


def _aggregate(cfg, p, results, base) -> ResultRow:
    errors = [r for r in results if isinstance(r, Exception)]
    if errors:
        return replace(base, error=f"{type(errors[0]).__name__}: {errors[0]}")
    bers = np.array([r.ber for r in results if r.defined])
    stats = dict(
        trials_defined=len(bers),
        packets_sent=cfg.trials * cfg.packets_per_trial,
        packets_found=sum(r.packets_found for r in results),
        packets_skipped=sum(r.packets_skipped for r in results),
        bits_compared=sum(r.bits_compared for r in results),
        bit_errors=sum(r.bit_errors for r in results),
        mean_ber=float(bers.mean()) if len(bers) else math.nan,
        ber_std=float(bers.std()) if len(bers) else math.nan,
        in_band_fraction=received_in_band_fraction(cfg, p),
    )
    return replace(base, **stats)


def _base_row(cfg, p) -> ResultRow:
    g = p.geometry
    coplanar = g.coplanar_distance is not None
    power = None
    if p.supply > 0:
        power = p.supply * drive_current(p.supply, cfg.drive_table)
    return ResultRow(
        symbol_rate=p.symbol_rate, sample_rate=p.sample_rate, supply_volts=float(p.supply),
        power_w=power, noise_rms=float(p.noise), separation=separation(g),
        horizontal_offset=None if coplanar else g.horizontal_offset,
        vertical_offset=None if coplanar else g.vertical_offset,
        coplanar_distance=g.coplanar_distance, trials=cfg.trials)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list:
    """Simulate every sweep point and return one :class:`ResultRow` each, sorted.

    A point whose settings are invalid (a sample rate that is not a multiple
    of the symbol rate, say) or whose capture cannot be demodulated gets a
    row with ``error`` set; the rest of the sweep still runs. ``workers > 1``
    spreads trials over processes without changing the result.
    """
    points = [_Point(rs, rm, v, s, g)
              for rs, rm in cfg.rates for v in cfg.supplies
              for s in cfg.noise_sweep for g in cfg.geometries]
    rows, jobs = [], []
    for p in points:
        try:
            _modem(cfg, p)
            DemodConfig.from_modem(_modem(cfg, p), **cfg.demod)
            AdcConfig(sample_rate=p.sample_rate, **cfg.adc)
            base = _base_row(cfg, p)
        except (ThroughMetalError, TypeError) as exc:
            rows.append(_error_row(cfg, p, exc))
            continue
        jobs.append((p, base))
    tasks = [(cfg, p, t) for p, _ in jobs for t in range(cfg.trials)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_job, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_trial_job(t) for t in tasks]
    for i, (p, base) in enumerate(jobs):
        chunk = results[i * cfg.trials:(i + 1) * cfg.trials]
        rows.append(_aggregate(cfg, p, chunk, base))
    return sorted(rows, key=ResultRow.sort_key)


def _error_row(cfg, p, exc) -> ResultRow:
    g = p.geometry
    coplanar = g.coplanar_distance is not None
    try:
        sep = separation(g)
    except ThroughMetalError:
        sep = math.nan
    return ResultRow(
        symbol_rate=p.symbol_rate, sample_rate=p.sample_rate, supply_volts=float(p.supply),
        power_w=None, noise_rms=float(p.noise), separation=sep,
        horizontal_offset=None if coplanar else g.horizontal_offset,
        vertical_offset=None if coplanar else g.vertical_offset,
        coplanar_distance=g.coplanar_distance, trials=cfg.trials,
        error=f"{type(exc).__name__}: {exc}")


def rows_as_dicts(rows) -> list:
    return [asdict(r) for r in rows]


# ---------------------------------------------------------------- spectrum

def estimate_spectrum(w: Waveform, nfft: int | None = None):
    """One-sided periodogram of ``w``, scaled so its bins sum to the signal energy.

    Parameters
    ----------
    w : Waveform
    nfft : int, optional
        DFT length; the waveform is zero-padded to it. Defaults to the
        waveform length and may not be shorter.

    Returns
    -------
    freqs, power : ndarray
        Bin frequencies in Hz and energy per bin (V^2 x samples). ``power.sum()``
        equals ``(w.samples ** 2).sum()``.
    """
    x = w.samples
    n = len(x)
    if n == 0:
        raise ConfigError("cannot estimate the spectrum of an empty waveform")
    nfft = n if nfft is None else int(nfft)
    if nfft < n:
        raise ConfigError(f"nfft {nfft} is shorter than the waveform ({n} samples)")
    psd = np.abs(np.fft.rfft(x, nfft)) ** 2 / nfft
    psd[1:(nfft + 1) // 2] *= 2  # fold negative frequencies; DC and Nyquist appear once
    return np.fft.rfftfreq(nfft, 1.0 / w.sample_rate), psd


def in_band_fraction(w: Waveform, limit_hz: float = 500.0, nfft: int | None = None) -> float:
    """Share of the energy of ``w`` in bins strictly below ``limit_hz``."""
    f, p = estimate_spectrum(w, nfft)
    total = p.sum()
    return float(p[f < limit_hz].sum() / total) if total > 0 else math.nan


# ---------------------------------------------------------------- link planning

@dataclass(frozen=True)
class PlanReport:
    carrier_limit_hz: float
    skin_depth_m: float
    attenuation: tuple  # (frequency_hz, factor) pairs

    def text(self) -> str:
        fc = self.carrier_limit_hz
        if math.isinf(fc):
            head = "f_c unbounded (no wall)"
        elif fc >= 1000:
            head = f"f_c <= {fc / 1000:.1f} kHz ({fc:.1f} Hz)"
        else:
            head = f"f_c <= {fc:.1f} Hz"
        lines = [head]
        if math.isfinite(self.skin_depth_m):
            lines.append(f"skin depth at f_c: {self.skin_depth_m * 1000:.3f} mm")
        lines.append("frequency_hz,attenuation")
        lines += [f"{f:g},{a:.6g}" for f, a in self.attenuation]
        return "\n".join(lines)


PLAN_FREQUENCIES = (100.0, 250.0, 500.0, 1000.0, 2000.0, 3700.0, 5000.0, 10000.0)


def plan(material: MaterialSpec, budget: LinkBudget, frequencies=PLAN_FREQUENCIES) -> PlanReport:
    """Carrier-frequency limit, skin depth there, and wall attenuation at ``frequencies``."""
    fc = max_carrier_frequency(material, budget)
    delta = skin_depth(material, fc) if 0 < fc < math.inf else math.nan
    table = tuple((float(f), float(attenuation_factor(material, f))) for f in frequencies)
    return PlanReport(fc, delta, table)
