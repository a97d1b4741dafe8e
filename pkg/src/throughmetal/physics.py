"""Skin-depth attenuation, carrier-frequency limit and coil/LC impedance.

All functions are pure and accept scalars or numpy arrays for frequency.
Frequencies are in Hz, lengths in meters, conductivity in S/m.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import math

import numpy as np

from .errors import ConfigError, DomainError

MU0 = 4e-7 * math.pi

# Coil 1 resistance at 1 kHz, in air and centred in the 7 mm aluminium pipe.
R_AIR_1KHZ = 3.369
R_PIPE_1KHZ = 5.025


@dataclass(frozen=True)
class MaterialSpec:
    """Conductive wall between the two coils.

    ``thickness`` may be zero, which describes a wall that is not there.
    """

    conductivity: float
    relative_permeability: float = 1.0
    thickness: float = 7e-3

    def __post_init__(self):
        if not self.conductivity > 0:
            raise ConfigError(f"conductivity must be > 0, got {self.conductivity}")
        if not self.relative_permeability > 0:
            raise ConfigError(
                f"relative_permeability must be > 0, got {self.relative_permeability}")
        if not self.thickness >= 0:
            raise ConfigError(f"thickness must be >= 0, got {self.thickness}")

    @property
    def permeability(self) -> float:
        return MU0 * self.relative_permeability


@dataclass(frozen=True)
class LinkBudget:
    """Transmit coil voltage and the smallest usable receive voltage (peak volts)."""

    v_transmit: float
    v_receive_min: float

    def __post_init__(self):
        if not (self.v_receive_min > 0 and self.v_transmit >= self.v_receive_min):
            raise ConfigError(
                "need v_transmit >= v_receive_min > 0, got "
                f"{self.v_transmit}, {self.v_receive_min}")


@dataclass(frozen=True)
class CoilParams:
    """Lumped coil model: inductance plus a measured resistance-vs-frequency table.

    ``loop_area`` defaults to the area of a circle of ``diameter``.
    """

    inductance: float
    resistance_table: tuple = ((1000.0, R_AIR_1KHZ),)
    diameter: float = 0.095
    loop_area: float | None = None

    def __post_init__(self):
        if not self.inductance > 0:
            raise ConfigError(f"inductance must be > 0, got {self.inductance}")
        table = tuple((float(f), float(r)) for f, r in self.resistance_table)
        object.__setattr__(self, "resistance_table", table)
        freqs = [f for f, _ in table]
        if any(r <= 0 for _, r in table):
            raise ConfigError("resistances must be > 0")
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ConfigError("resistance_table frequencies must be strictly increasing")
        if not self.diameter > 0:
            raise ConfigError(f"diameter must be > 0, got {self.diameter}")
        circle = math.pi * self.diameter ** 2 / 4
        if self.loop_area is None:
            object.__setattr__(self, "loop_area", circle)
        elif abs(self.loop_area - circle) > 0.01 * circle:
            raise ConfigError(
                f"loop_area {self.loop_area} inconsistent with diameter {self.diameter}")

    def resistance(self, frequency):
        """Resistance at ``frequency``, linear in frequency and clamped at the table ends."""
        if not self.resistance_table:
            raise ConfigError("empty resistance_table")
        f, r = np.array(self.resistance_table).T
        out = np.interp(frequency, f, r)
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SeriesCircuit:
    coil: CoilParams
    capacitance: float | None = None

    def __post_init__(self):
        if self.capacitance is not None and not self.capacitance > 0:
            raise ConfigError(f"capacitance must be > 0, got {self.capacitance}")


def _check_frequency(frequency):
    f = np.asarray(frequency, dtype=float)
    if np.any(~(f > 0)):
        raise DomainError(f"frequency must be > 0, got {frequency}")
    return f


def _scalar(x):
    if np.ndim(x):
        return x
    return complex(x) if np.iscomplexobj(x) else float(x)


def skin_depth(material: MaterialSpec, frequency):
    """Depth at which the field in ``material`` decays by 1/e, in meters."""
    f = _check_frequency(frequency)
    omega = 2 * np.pi * f
    return _scalar(np.sqrt(2.0 / (material.conductivity * omega * material.permeability)))


def attenuation_factor(material: MaterialSpec, frequency):
    """Field ratio across the wall, ``exp(-thickness / skin_depth)``."""
    delta = skin_depth(material, frequency)
    return _scalar(np.exp(-material.thickness / np.asarray(delta)))


def max_carrier_frequency(material: MaterialSpec, budget: LinkBudget) -> float:
    """Highest frequency whose wall attenuation still leaves ``v_receive_min``.

    Solves ``exp(-d / delta(f)) = v_receive_min / v_transmit`` for ``f``. A
    wall of zero thickness imposes no limit and gives ``inf``.
    """
    log_ratio = math.log(budget.v_transmit) - math.log(budget.v_receive_min)
    d = material.thickness
    if d == 0:
        return math.inf
    return log_ratio ** 2 / (math.pi * d ** 2 * material.conductivity * material.permeability)


def series_impedance(circuit: SeriesCircuit, frequency):
    """Complex impedance of the coil, in series with the capacitor if one is fitted."""
    f = _check_frequency(frequency)
    omega = 2 * np.pi * f
    reactance = omega * circuit.coil.inductance
    if circuit.capacitance is not None:
        reactance = reactance - 1.0 / (omega * circuit.capacitance)
    return _scalar(circuit.coil.resistance(f) + 1j * reactance)


def resonant_frequency(circuit: SeriesCircuit) -> float:
    if circuit.capacitance is None:
        raise DomainError("a circuit without a capacitor has no resonance")
    return 1.0 / (2 * math.pi * math.sqrt(circuit.coil.inductance * circuit.capacitance))


def resistance_loading(frequency, ratio=R_PIPE_1KHZ / R_AIR_1KHZ, anchor=1000.0):
    """Multiplier on coil resistance caused by eddy currents in the pipe.

    Rises linearly from 1 at DC to ``ratio`` at ``anchor`` Hz and stays flat above.
    """
    f = np.asarray(frequency, dtype=float)
    return _scalar(1.0 + (ratio - 1.0) * np.clip(f / anchor, 0.0, 1.0))


def coil_in_pipe(coil_air: CoilParams, inductance_factor=12.0 / 15.0,
                 resistance_ratio=R_PIPE_1KHZ / R_AIR_1KHZ, anchor=1000.0) -> CoilParams:
    """Coil parameters once the coil sits inside the metal pipe.

    Inductance drops by ``inductance_factor``; each resistance entry is
    multiplied by :func:`resistance_loading` at its own frequency.
    """
    table = tuple(
        (f, r * resistance_loading(f, resistance_ratio, anchor))
        for f, r in coil_air.resistance_table
    )
    return replace(coil_air, inductance=coil_air.inductance * inductance_factor,
                   resistance_table=table)


ALUMINUM_PIPE = MaterialSpec(conductivity=3.5e7, relative_permeability=1.0, thickness=7e-3)
COIL_AIR = CoilParams(inductance=15e-3)
