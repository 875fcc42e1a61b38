"""Arrhenius thermal-dose accounting.

The dose is Omega(t) = A int_0^t exp[-E_a / (R T_K(tau))] dtau with T_K
the absolute temperature of the sample path.  Everything here works on
already-sampled histories; the temperature construction is free to
diverge, so the rate is clamped to zero at or below absolute zero rather
than letting the exponent change sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import MATERIAL_OF, R_GAS, ParameterSet, Region, region_of

_T_ABS_ZERO_C = -273.15


def arrhenius_rate(temp_c, A, E_a):
    """Damage rate A exp(-E_a/(R T)) [1/s] at temp_c [degC].

    Zero at or below absolute zero (the divergent temperature model can
    produce such samples; a vanishing rate is the only sane reading).
    """
    t_k = np.asarray(temp_c, dtype=float) - _T_ABS_ZERO_C
    ok = t_k > 0.0
    out = np.zeros_like(t_k)
    if np.any(ok):
        out[ok] = A * np.exp(-E_a / (R_GAS * t_k[ok]))
    if out.ndim == 0:
        return float(out)
    return out


def damage_integral(times, temps, A, E_a):
    """Composite-Simpson Omega over a uniformly sampled history.

    times must be uniform with an odd point count (even interval count);
    Simpson is exact for cubics, so splitting a history at any even
    sample index and summing the pieces reproduces the whole to rounding.
    """
    times = np.asarray(times, dtype=float)
    temps = np.asarray(temps, dtype=float)
    if times.ndim != 1 or times.size < 3 or times.size % 2 == 0:
        raise ValueError("need an odd number (>= 3) of samples")
    if temps.shape != times.shape:
        raise ValueError("times and temps must match")
    steps = np.diff(times)
    h = steps[0]
    if h <= 0 or not np.allclose(steps, h, rtol=1e-12, atol=0.0):
        raise ValueError("need uniform, increasing sample times")
    rate = arrhenius_rate(temps, A, E_a)
    w = np.ones_like(rate)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(h / 3.0 * np.sum(w * rate))


def cumulative_damage(times, temps, A, E_a):
    """Trapezoid running dose at each sample time (starts at zero)."""
    times = np.asarray(times, dtype=float)
    rate = arrhenius_rate(np.asarray(temps, dtype=float), A, E_a)
    out = np.zeros_like(rate)
    out[1:] = np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(times))
    return out


def riemann_bounds(times, temps, A, E_a):
    """(lower, upper) endpoint-Riemann sums.

    They bracket the true integral whenever the rate is monotone between
    consecutive samples, which makes them a cheap independent check on
    the quadrature.
    """
    times = np.asarray(times, dtype=float)
    rate = arrhenius_rate(np.asarray(temps, dtype=float), A, E_a)
    dt = np.diff(times)
    lower = float(np.sum(np.minimum(rate[:-1], rate[1:]) * dt))
    upper = float(np.sum(np.maximum(rate[:-1], rate[1:]) * dt))
    return lower, upper


def isothermal_crossing_time(temp_c, A, E_a, threshold=1.0):
    """Time for the dose to reach threshold at constant temperature:
    (threshold/A) exp[E_a/(R T_K)].

    Returns inf when the closed form overflows (cold enough that the
    answer exceeds the float range) and for temperatures at or below
    absolute zero.  Evaluated at the floor temperature of a heating
    trajectory this upper-bounds the true crossing time.
    """
    t_k = temp_c - _T_ABS_ZERO_C
    if t_k <= 0.0:
        return np.inf
    log_t = E_a / (R_GAS * t_k) + np.log(threshold) - np.log(A)
    if log_t > 709.0:                     # exp() ceiling for doubles
        return np.inf
    return float(np.exp(log_t))


def crit_time_table(ps: ParameterSet, temps=(50.0, 60.0, 70.0, 80.0, 90.0,
                                             100.0), threshold=1.0):
    """Constant-temperature crossing times, one row per temperature.

    Returns [(temp, {material: t_crit})] over blood/wall/pad/skin.
    """
    pairs = {}
    for reg in (Region.FIBER_COLUMN, Region.WALL, Region.PAD, Region.SKIN):
        th = ps.thermal_of(reg)
        pairs[MATERIAL_OF[reg]] = (th.A, th.E_a)
    rows = []
    for temp in temps:
        rows.append((temp, {mat: isothermal_crossing_time(temp, A, E_a,
                                                          threshold)
                            for mat, (A, E_a) in pairs.items()}))
    return rows


@dataclass(frozen=True)
class DamageMap:
    """Dose field on an (r, z) grid at the end of the protocol."""

    r: np.ndarray
    z: np.ndarray
    omega: np.ndarray       # (nr, nz) dose at t_end
    t_cross: np.ndarray     # (nr, nz) first crossing time [s], inf if none
    threshold: float


def damage_map(tsol, r_pts, z_pts, threshold=1.0, n_t=401) -> DamageMap:
    """Accumulate the dose along each (r, z) sample's history.

    Points the moving tip has not yet passed sit at blood temperature
    (their rate there is negligible but still booked); once z >= -v t the
    temperature construction takes over.  The crossing time interpolates
    the running trapezoid dose linearly between samples, so its
    resolution is set by n_t.
    """
    ps = tsol.ps
    proto = ps.protocol
    geo = ps.geometry
    r_pts = np.asarray(r_pts, dtype=float)
    z_pts = np.asarray(z_pts, dtype=float)
    omega = np.zeros((r_pts.size, z_pts.size))
    t_cross = np.full((r_pts.size, z_pts.size), np.inf)
    coeffs = [ps.thermal_of(region_of(min(rv, geo.r_s - 1e-12), geo))
              for rv in r_pts]

    for iz, zv in enumerate(z_pts):
        t0 = max(0.0, -zv / proto.v)
        if t0 >= proto.t_end:
            hist_t = np.array([proto.t_end])
            temps = np.full((r_pts.size, 1), proto.T_b)
        else:
            hist_t = np.linspace(t0, proto.t_end, n_t)
            temps = tsol.eval(r_pts[:, None], zv, hist_t[None, :])
        for ir in range(r_pts.size):
            th = coeffs[ir]
            base = arrhenius_rate(proto.T_b, th.A, th.E_a) * t0
            cum = base + cumulative_damage(hist_t, temps[ir], th.A, th.E_a)
            omega[ir, iz] = cum[-1]
            hit = np.nonzero(cum >= threshold)[0]
            if hit.size:
                k = hit[0]
                if k == 0:
                    t_cross[ir, iz] = hist_t[0]
                else:
                    frac = ((threshold - cum[k - 1])
                            / (cum[k] - cum[k - 1]))
                    t_cross[ir, iz] = (hist_t[k - 1]
                                       + frac * (hist_t[k] - hist_t[k - 1]))
    return DamageMap(r=r_pts, z=z_pts, omega=omega, t_cross=t_cross,
                     threshold=threshold)
