"""Strict, typed INI configuration and the shipped presets.

A config is a set of ``[section]`` blocks of ``key = value`` lines. Section
names are either fixed (``[modem]``) or a kind plus a name
(``[channel.aluminum]``). Each kind has a schema; unknown sections or keys,
and values that do not parse, raise :class:`~throughmetal.errors.ConfigError`.
A user file is layered over the shipped presets key by key.
"""

from __future__ import annotations

import configparser
import hashlib
from importlib import resources
from pathlib import Path

from .errors import ConfigError

PRESET_FILES = ("default.ini", "aluminum_points.csv")


def _bool(s):
    v = s.strip().lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _bits(s):
    s = s.strip()
    if not s or set(s) - {"0", "1"}:
        raise ValueError(f"not a bit string: {s!r}")
    return s


def _optional_name(s):
    s = s.strip()
    return None if s.lower() == "none" else s


def _optional_float(s):
    s = s.strip()
    return None if s.lower() == "none" else float(s)


def _list(conv):
    def parse(s):
        items = [p.strip() for p in s.split(",") if p.strip()]
        if not items:
            raise ValueError("empty list")
        return [conv(p) for p in items]
    return parse


def _pairs(conv_a, conv_b):
    def parse(s):
        out = []
        for item in _list(str)(s):
            a, sep, b = item.partition(":")
            if not sep:
                raise ValueError(f"expected a:b, got {item!r}")
            out.append((conv_a(a), conv_b(b)))
        return out
    return parse


def _word(s):
    s = s.strip()
    if not s:
        raise ValueError("empty value")
    return s


SCHEMA = {
    "material": {"conductivity": float, "relative_permeability": float, "thickness": float},
    "budget": {"v_transmit": float, "v_receive_min": float},
    "coil": {"inductance": float, "resistance_table": _pairs(float, float), "diameter": float},
    "channel": {
        "coupling_gain_ref": float, "reference_separation": float, "pole_frequency": float,
        "falloff_exponent": float, "derivative_coupling": _bool, "material": _optional_name,
        "noise_rms": float, "seed": int,
    },
    "drive": {"supply_volts": _list(float), "current_amps": _list(float)},
    "modem": {
        "duty": float, "amplitude": float, "line_code": _word, "preamble": _bits,
        "payload": _bits, "gap": float,
    },
    "rx_amp": {"gain": float, "saturation": float},
    "adc": {"resolution_bits": int, "v_ref": float, "buffer_len": int, "loss_per_flush": int},
    "demod": {
        "line_code": _word, "movavg_window_symbols": int, "ones_fraction": float,
        "decision_threshold": float, "centered": _bool, "max_match_ratio": _optional_float,
    },
    "experiment": {
        "channel": _word, "rates": _pairs(int, int), "supply_volts": _list(float),
        "horizontal_offsets": _list(float), "vertical_offset": float,
        "coplanar_distances": _list(float), "noise_levels": _list(float),
        "trials": int, "packets_per_trial": int, "seed": int, "lead_in_symbols": int,
        "band_limit_hz": float, "skip_gap_packets": _bool,
    },
}
NAMED = {"material", "coil", "channel"}


def _kind(section):
    kind, dot, name = section.partition(".")
    if kind not in SCHEMA:
        raise ConfigError(f"unknown section [{section}]")
    if (kind in NAMED) != bool(dot and name):
        form = f"[{kind}.<name>]" if kind in NAMED else f"[{kind}]"
        raise ConfigError(f"section [{section}] must be written {form}")
    return kind


def parse_text(text: str, source: str = "<string>") -> dict:
    """Parse INI text into ``{section: {key: typed value}}``."""
    cp = configparser.ConfigParser(interpolation=None, strict=True,
                                   inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    out = {}
    for section in cp.sections():
        schema = SCHEMA[_kind(section)]
        values = {}
        for key, raw in cp.items(section):
            if key not in schema:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            try:
                values[key] = schema[key](raw)
            except ValueError as exc:
                raise ConfigError(f"{source}: [{section}] {key}: {exc}") from exc
        out[section] = values
    return out


def preset_text(name: str = "default.ini") -> str:
    return resources.files("throughmetal").joinpath("presets", name).read_text()


def preset_hashes() -> dict:
    """SHA-256 of every shipped preset file."""
    return {name: hashlib.sha256(preset_text(name).encode()).hexdigest()
            for name in PRESET_FILES}


def merge(base: dict, override: dict) -> dict:
    out = {s: dict(v) for s, v in base.items()}
    for section, values in override.items():
        out.setdefault(section, {}).update(values)
    return out


def load(path=None) -> dict:
    """Shipped presets, overlaid with the file at ``path`` if given."""
    cfg = parse_text(preset_text(), "presets/default.ini")
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        cfg = merge(cfg, parse_text(text, str(p)))
    return cfg


def section(cfg: dict, name: str) -> dict:
    try:
        return cfg[name]
    except KeyError:
        raise ConfigError(f"config has no [{name}] section") from None


def require(values: dict, key: str, where: str):
    try:
        return values[key]
    except KeyError:
        raise ConfigError(f"[{where}] is missing {key!r}") from None
