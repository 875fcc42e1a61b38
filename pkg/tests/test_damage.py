"""Thermal-dose tests.

Constant-temperature crossing times below were frozen from a separate
hand evaluation of (1/A) exp[E_a/(R T_K)]:

    blood @ 50 degC  344711.88864084805 s
    wall  @ 70 degC  51.193031903216692 s
    skin  @ 100 degC 2.6369971522921073e-11 s
"""

import math

import numpy as np
import pytest

from evla import damage
from evla.params import MATERIALS, Region

# two-digit published crossing times [s] for unit dose at constant T
PUBLISHED = {
    50.0: (3.4e5, 5.8e5, 5.8e5, 1.1e3),
    60.0: (2.3e3, 4.7e3, 4.7e3, 9.5e-1),
    70.0: (2.1e1, 5.1e1, 5.1e1, 1.3e-3),
    80.0: (2.4e-1, 7.2e-1, 7.2e-1, 2.5e-6),
    90.0: (3.6e-3, 1.3e-2, 1.3e-2, 6.9e-9),
    100.0: (6.8e-5, 2.8e-4, 2.8e-4, 2.6e-11),
}

_MAT_REGION = (Region.FIBER_COLUMN, Region.WALL, Region.PAD, Region.SKIN)


@pytest.fixture(scope="module")
def table(ps810):
    return dict(damage.crit_time_table(ps810))


@pytest.mark.parametrize("temp", sorted(PUBLISHED))
def test_crossing_times_match_published(table, temp):
    for mat, want in zip(MATERIALS, PUBLISHED[temp]):
        got = table[temp][mat]
        assert abs(got - want) / want < 0.05, (temp, mat, got)


def test_crossing_times_frozen(table):
    assert table[50.0]["blood"] == pytest.approx(344711.88864084805,
                                                 rel=1e-12)
    assert table[70.0]["wall"] == pytest.approx(51.193031903216692,
                                                rel=1e-12)
    assert table[100.0]["skin"] == pytest.approx(2.6369971522921073e-11,
                                                 rel=1e-12)
    assert table[70.0]["wall"] == table[70.0]["pad"]


def test_isothermal_closed_form_inverts(ps810):
    th = ps810.blood_thermal
    t_crit = damage.isothermal_crossing_time(65.0, th.A, th.E_a)
    times = np.linspace(0.0, t_crit, 129)
    got = damage.damage_integral(times, np.full(129, 65.0), th.A, th.E_a)
    assert got == pytest.approx(1.0, rel=1e-12)


def test_isothermal_overflow_and_floor(ps810):
    th = ps810.blood_thermal
    assert damage.isothermal_crossing_time(-250.0, th.A, th.E_a) == math.inf
    assert damage.isothermal_crossing_time(-300.0, th.A, th.E_a) == math.inf
    a = damage.isothermal_crossing_time(50.0, th.A, th.E_a)
    b = damage.isothermal_crossing_time(90.0, th.A, th.E_a)
    assert a > b                      # hotter fails sooner
    half = damage.isothermal_crossing_time(50.0, th.A, th.E_a, threshold=0.5)
    assert half == pytest.approx(0.5 * a, rel=1e-12)


def test_body_temperature_is_harmless(ps810):
    times = np.linspace(0.0, 10.0, 101)
    for reg in _MAT_REGION:
        th = ps810.thermal_of(reg)
        omega = damage.damage_integral(times, np.full(101, 37.0),
                                       th.A, th.E_a)
        assert omega < 1e-6, reg


def test_rate_clamps_below_absolute_zero():
    assert damage.arrhenius_rate(-273.15, 1e60, 4e5) == 0.0
    assert damage.arrhenius_rate(-1e12, 1e60, 4e5) == 0.0
    rates = damage.arrhenius_rate(np.array([-400.0, 60.0]), 1e60, 4e5)
    assert rates[0] == 0.0 and rates[1] > 0.0


def test_dose_is_additive_and_monotone(ps810):
    th = ps810.blood_thermal
    times = np.linspace(0.0, 10.0, 401)
    temps = 55.0 + 8.0 * np.sin(0.7 * times)
    whole = damage.damage_integral(times, temps, th.A, th.E_a)
    first = damage.damage_integral(times[:201], temps[:201], th.A, th.E_a)
    second = damage.damage_integral(times[200:], temps[200:], th.A, th.E_a)
    assert first + second == pytest.approx(whole, rel=1e-12)
    cum = damage.cumulative_damage(times, temps, th.A, th.E_a)
    assert cum[0] == 0.0
    assert np.all(np.diff(cum) >= 0.0)
    assert cum[-1] == pytest.approx(whole, rel=1e-4)


def test_riemann_sandwich_tightens(ps810):
    th = ps810.blood_thermal
    widths = []
    for n in (4, 16, 64):
        times = np.linspace(0.0, 6.0, n + 1)
        temps = 45.0 + 5.0 * times          # monotone rate
        lo, hi = damage.riemann_bounds(times, temps, th.A, th.E_a)
        simpson = damage.damage_integral(times, temps, th.A, th.E_a)
        assert lo <= simpson <= hi
        widths.append(hi - lo)
    assert widths[0] > widths[1] > widths[2]


def test_simpson_fourth_order(ps810):
    th = ps810.blood_thermal

    def integral(n):
        times = np.linspace(0.0, 10.0, n + 1)
        temps = 55.0 + 8.0 * np.sin(0.7 * times)
        return damage.damage_integral(times, temps, th.A, th.E_a)

    ref = integral(8192)
    e1 = abs(integral(128) - ref)
    e2 = abs(integral(256) - ref)
    assert 12.0 < e1 / e2 < 20.0       # measured ~15.8


def test_damage_integral_input_checks(ps810):
    th = ps810.blood_thermal
    with pytest.raises(ValueError):
        damage.damage_integral([0.0, 1.0], [50.0, 50.0], th.A, th.E_a)
    with pytest.raises(ValueError):
        damage.damage_integral([0.0, 1.0, 3.0], [50.0] * 3, th.A, th.E_a)
    with pytest.raises(ValueError):
        damage.damage_integral(np.linspace(0, 1, 5), [50.0] * 4,
                               th.A, th.E_a)


def test_damage_map_geometry(temp810):
    dm = damage.damage_map(temp810, np.array([0.5, 3.8, 16.0]),
                           np.array([-3.0, 1.0]), n_t=201)
    assert dm.omega.shape == (3, 2)
    # wall point near the start of the sweep: the runaway heating pushes
    # the dose across threshold well inside the protocol
    assert np.isfinite(dm.t_cross[1, 1])
    assert dm.omega[1, 1] >= 1.0
    # behind the start plane nothing happens until the tip arrives
    assert dm.t_cross[1, 0] >= 3.0
    # crossing flag and dose agree everywhere
    assert np.all(np.isfinite(dm.t_cross) == (dm.omega >= dm.threshold))
