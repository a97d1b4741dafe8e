"""Skin depth, carrier limit and coil impedance.

Frozen reference values were computed with mpmath at 30 digits.
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from throughmetal.errors import ConfigError, DomainError
from throughmetal.physics import (
    ALUMINUM_PIPE, COIL_AIR, MU0, CoilParams, LinkBudget, MaterialSpec, SeriesCircuit,
    attenuation_factor, coil_in_pipe, max_carrier_frequency, resistance_loading,
    resonant_frequency, series_impedance, skin_depth,
)

REF_BUDGET = LinkBudget(30.0, 0.2)

conductivity = st.floats(1e5, 1e8)
permeability = st.floats(1.0, 1e4)
thickness = st.floats(1e-4, 5e-2)
freq = st.floats(1.0, 1e6)


def test_skin_depth_oracle():
    # sqrt(2 / (sigma * 2 pi f * mu0)) for aluminium at 1 kHz
    assert skin_depth(ALUMINUM_PIPE, 1000.0) == pytest.approx(0.00269020954630380, rel=1e-12)
    assert attenuation_factor(ALUMINUM_PIPE, 1000.0) == pytest.approx(0.0741231196071446, rel=1e-12)


def test_scalar_in_scalar_out_and_arrays():
    assert isinstance(skin_depth(ALUMINUM_PIPE, 50.0), float)
    f = np.array([10.0, 100.0, 1000.0])
    d = skin_depth(ALUMINUM_PIPE, f)
    assert d.shape == (3,)
    np.testing.assert_allclose(d[:-1] / d[1:], math.sqrt(10))


@pytest.mark.parametrize("f", [0.0, -1.0, np.nan])
def test_nonpositive_frequency_rejected(f):
    with pytest.raises(DomainError):
        skin_depth(ALUMINUM_PIPE, f)
    with pytest.raises(DomainError):
        attenuation_factor(ALUMINUM_PIPE, f)


def test_carrier_limit_oracle():
    fc = max_carrier_frequency(ALUMINUM_PIPE, REF_BUDGET)
    assert fc == pytest.approx(3708.18783864003, rel=1e-12)
    assert skin_depth(ALUMINUM_PIPE, fc) == pytest.approx(0.00139702843833949, rel=1e-12)


def test_carrier_limit_edge_cases():
    assert max_carrier_frequency(ALUMINUM_PIPE, LinkBudget(1.0, 1.0)) == 0.0
    half = MaterialSpec(3.5e7, 1.0, 3.5e-3)
    assert max_carrier_frequency(half, REF_BUDGET) == pytest.approx(
        4 * max_carrier_frequency(ALUMINUM_PIPE, REF_BUDGET), rel=1e-12)
    assert max_carrier_frequency(MaterialSpec(3.5e7, 1.0, 0.0), REF_BUDGET) == math.inf


@given(conductivity, permeability, thickness, st.floats(1e-3, 1.0), st.floats(1.0, 1e3))
def test_carrier_limit_inverts_attenuation(sigma, mur, d, vr, ratio):
    m = MaterialSpec(sigma, mur, d)
    b = LinkBudget(vr * ratio, vr)
    fc = max_carrier_frequency(m, b)
    if fc > 0:
        assert attenuation_factor(m, fc) == pytest.approx(vr / (vr * ratio), rel=1e-9)


@given(conductivity, permeability, thickness, freq, st.floats(1.01, 100.0))
def test_attenuation_decreases_with_frequency(sigma, mur, d, f, k):
    m = MaterialSpec(sigma, mur, d)
    assert attenuation_factor(m, f * k) < attenuation_factor(m, f) or \
        attenuation_factor(m, f) == 0.0


@given(conductivity, permeability, thickness, freq)
def test_attenuation_in_unit_interval(sigma, mur, d, f):
    a = attenuation_factor(MaterialSpec(sigma, mur, d), f)
    assert 0.0 <= a <= 1.0


def test_material_validation():
    with pytest.raises(ConfigError):
        MaterialSpec(0.0)
    with pytest.raises(ConfigError):
        MaterialSpec(1e7, relative_permeability=0.0)
    with pytest.raises(ConfigError):
        MaterialSpec(1e7, thickness=-1e-3)
    assert MaterialSpec(1e7).permeability == MU0
    with pytest.raises(ConfigError):
        LinkBudget(0.1, 0.2)
    with pytest.raises(ConfigError):
        LinkBudget(1.0, 0.0)


def test_resonance_values():
    c = 6.75e-6
    assert resonant_frequency(SeriesCircuit(COIL_AIR, c)) == pytest.approx(500.175731198392, rel=1e-12)
    in_pipe = coil_in_pipe(COIL_AIR)
    assert in_pipe.inductance == pytest.approx(12e-3)
    assert resonant_frequency(SeriesCircuit(in_pipe, c)) == pytest.approx(559.213467827634, rel=1e-12)
    with pytest.raises(DomainError):
        resonant_frequency(SeriesCircuit(COIL_AIR))


def test_impedance_at_resonance_is_resistive():
    circ = SeriesCircuit(COIL_AIR, 6.75e-6)
    z = series_impedance(circ, resonant_frequency(circ))
    assert z.imag == pytest.approx(0.0, abs=1e-9)
    assert z.real == pytest.approx(3.369)


def test_impedance_without_capacitor():
    z = series_impedance(SeriesCircuit(COIL_AIR), 1000.0)
    assert z == pytest.approx(3.369 + 1j * 2 * math.pi * 1000 * 0.015)


def test_pipe_changes_tuned_circuit_far_more_than_bare_coil():
    # 15 mH -> 12 mH and 3.369 -> 5.025 ohm, compared at the air resonance
    c = 6.75e-6
    f0 = resonant_frequency(SeriesCircuit(COIL_AIR, c))
    pipe = coil_in_pipe(COIL_AIR)

    def change(cap):
        a = abs(series_impedance(SeriesCircuit(COIL_AIR, cap), f0))
        b = abs(series_impedance(SeriesCircuit(pipe, cap), f0))
        return max(a / b, b / a)

    # by hand: w L = 1/(w C) = 47.140 ohm in air; in the pipe X = -9.428 ohm,
    # |Z| = hypot(5.025, 9.428) = 10.684 against 3.369; bare coil 38.05 vs 47.26
    assert change(c) == pytest.approx(3.17115, rel=1e-4)
    assert change(None) == pytest.approx(1.24221, rel=1e-4)


def test_resistance_loading_taper():
    assert resistance_loading(0.0) == 1.0
    assert resistance_loading(1000.0) == pytest.approx(5.025 / 3.369)
    assert resistance_loading(5000.0) == pytest.approx(5.025 / 3.369)
    assert resistance_loading(500.0) == pytest.approx(1 + 0.5 * (5.025 / 3.369 - 1))
    assert coil_in_pipe(COIL_AIR).resistance(1000.0) == pytest.approx(5.025)


def test_coil_validation_and_table():
    coil = CoilParams(0.01, resistance_table=((100.0, 1.0), (1000.0, 2.0)))
    assert coil.resistance(550.0) == pytest.approx(1.5)
    assert coil.resistance(10.0) == 1.0 and coil.resistance(1e4) == 2.0
    assert coil.loop_area == pytest.approx(math.pi * 0.095 ** 2 / 4)
    with pytest.raises(ConfigError):
        CoilParams(0.0)
    with pytest.raises(ConfigError):
        CoilParams(0.01, resistance_table=((1000.0, 1.0), (100.0, 2.0)))
    with pytest.raises(ConfigError):
        CoilParams(0.01, diameter=0.1, loop_area=1.0)
    with pytest.raises(ConfigError):
        SeriesCircuit(COIL_AIR, 0.0)
