"""Closed-form temperature response to the moving light column.

The temperature is assembled from three ingredients:

1. forced terms: each radial profile of the fluence, multiplied by its
   absorption coefficient, drives one separable mode of the bioheat
   equation.  Starting from zero, Duhamel's integral gives every such
   mode the same bracket shape

       phi_g(a, b, t) = (e^{a t} - e^{b t}) / (a - b)

   with a the free growth rate of the spatial profile under the bioheat
   operator and b = -mu_fam * v the decay rate the moving source imprints;
   see growth_bracket.

2. a steady radial offset Theta(r) carrying the skin-to-air Robin data
   (ambient below blood temperature pulls the outer layers down even
   with the laser off);

3. a modal transient over the tissue annulus [r_i, r_s] that cancels
   Theta at t = 0 so the assembled field starts from uniform T_b.  Modes
   are zero at r_i, Robin-coupled to the air at r_s, continuous in value
   and conductive flux at the internal interfaces, and decay with their
   own eigenrates.

The lumen terms satisfy the blood heat equation exactly.  For the outer
regions three variants are provided (`mode`): "derived" (default) keeps
the construction an exact solution of the bioheat equation; "printed" and
"printed_sqrt" reproduce common shorthand forms that drop the absorption
amplitude and the pull-back shift in the denominator ("printed_sqrt"
additionally takes the square root of the growth rate).  They are kept
for comparison and are not PDE solutions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import specfn
from .fluence import DomainError, FluenceSolution, assemble_and_solve
from .params import ParameterSet, Region, derive_optics

OUTER = (Region.WALL, Region.PAD, Region.SKIN)


class ThermalError(RuntimeError):
    """Assembly failure in the temperature construction."""


class BracketExhausted(ThermalError):
    """The eigenvalue scan ran out of interval before finding all modes."""


class RankDeficient(ThermalError):
    """The modal projection system lost rank."""


def growth_bracket(a, b, t):
    """(e^{a t} - e^{b t})/(a - b), continuous through a == b.

    Evaluated as t * e^{(a+b)t/2} * sinhc((a-b)t/2) so nearby rates do
    not cancel catastrophically.  Overflows propagate as inf.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = np.asarray(t, dtype=float)
    half = 0.5 * (a - b) * t
    with np.errstate(over="ignore"):
        mid = np.exp(0.5 * (a + b) * t)
        core = np.where(np.abs(half) < 1e-6,
                        1.0 + half * half / 6.0,   # sinhc series
                        np.sinh(np.where(np.abs(half) < 1e-6, 0.0, half))
                        / np.where(half == 0.0, 1.0, half))
        out = t * mid * core
    if out.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# forcing rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForcingRates:
    """Free growth rates of the forced spatial profiles [1/s].

    zeta_col_eff / zeta_col_t: lumen profiles (flat in r), driven by the
    mu_eff and mu_t axial factors; blood flow u adds u*mu.
    zeta_ann_t: annulus oscillatory profile under the mu_t axial factor
    (its radial curvature shifts mu_t^2 down to mu_eff^2).
    zeta_outer[region]: both families in an outer region share one rate,
    (k mu_eff_j^2 - c_b omega_j) / (rho c_p)_j.
    """

    zeta_col_eff: float
    zeta_col_t: float
    zeta_ann_t: float
    zeta_outer: dict


def forcing_rates(ps: ParameterSet) -> ForcingRates:
    blood = derive_optics(ps.blood_optics)
    th_b = ps.blood_thermal
    alpha_b = th_b.k / th_b.rho_cp          # blood diffusivity [mm^2/s]
    u = ps.protocol.u
    c_b = th_b.c_p
    zeta_outer = {}
    for reg in OUTER:
        th = ps.thermal_of(reg)
        mu_eff_j = ps.derived_of(reg).mu_eff
        zeta_outer[reg] = (th.k * mu_eff_j ** 2 - c_b * th.omega) \
            / th.rho_cp
    return ForcingRates(
        zeta_col_eff=alpha_b * blood.mu_eff ** 2 + u * blood.mu_eff,
        zeta_col_t=alpha_b * blood.mu_t ** 2 + u * blood.mu_t,
        zeta_ann_t=alpha_b * blood.mu_eff ** 2 + u * blood.mu_t,
        zeta_outer=zeta_outer,
    )


_MODES = ("derived", "printed", "printed_sqrt")


# ---------------------------------------------------------------------------
# steady Robin offset
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OffsetProfile:
    """Steady rise Theta(r) over [r_i, r_s]; zero in the lumen.

    Solves k (Theta'' + Theta'/r) = c_b omega Theta with Theta(r_i) = 0,
    value/flux continuity at the interfaces, and the skin boundary row
    k_s Theta' + h (Theta - gamma) = 0 at r_s, gamma = T_air - T_b.
    """

    ps: ParameterSet
    q: dict          # Region -> sqrt(c_b omega / k) [1/mm]
    a1: dict
    a2: dict
    gamma: float

    def _dispatch(self, r, fn_pair):
        geo = self.ps.geometry
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for reg, lo, hi in ((Region.WALL, geo.r_i, geo.r_w),
                            (Region.PAD, geo.r_w, geo.r_p),
                            (Region.SKIN, geo.r_p, geo.r_s)):
            mask = (r >= lo) & ((r < hi) if reg is not Region.SKIN
                                else (r <= hi + 1e-12))
            if np.any(mask):
                out[mask] = fn_pair(reg, r[mask])
        if out.ndim == 0:
            return float(out)
        return out

    def eval(self, r):
        def val(reg, rr):
            q = self.q[reg]
            return (self.a1[reg] * specfn.i0(q * rr)
                    + self.a2[reg] * specfn.k0(q * rr))
        return self._dispatch(r, val)

    def eval_deriv(self, r):
        def der(reg, rr):
            q = self.q[reg]
            return q * (self.a1[reg] * specfn.i1(q * rr)
                        - self.a2[reg] * specfn.k1(q * rr))
        return self._dispatch(r, der)


def steady_robin_offset(ps: ParameterSet) -> OffsetProfile:
    geo = ps.geometry
    proto = ps.protocol
    gamma = proto.T_air - proto.T_b
    c_b = ps.blood_thermal.c_p
    q = {}
    k = {}
    for reg in OUTER:
        th = ps.thermal_of(reg)
        if th.omega <= 0.0:
            raise ThermalError(
                "steady offset needs perfused outer layers (omega = 0 in %s)"
                % reg.value)
        q[reg] = math.sqrt(c_b * th.omega / th.k)
        k[reg] = th.k

    def pair(reg, r):
        x = q[reg] * r
        return (specfn.i0(x), specfn.k0(x),
                q[reg] * specfn.i1(x), -q[reg] * specfn.k1(x))

    m = np.zeros((6, 6))
    rhs = np.zeros(6)
    iw, kw, diw, dkw = pair(Region.WALL, geo.r_i)
    m[0, 0], m[0, 1] = iw, kw                     # Theta(r_i) = 0
    iw, kw, diw, dkw = pair(Region.WALL, geo.r_w)
    ip, kp, dip, dkp = pair(Region.PAD, geo.r_w)
    m[1, 0], m[1, 1], m[1, 2], m[1, 3] = iw, kw, -ip, -kp
    m[2, 0], m[2, 1] = k[Region.WALL] * diw, k[Region.WALL] * dkw
    m[2, 2], m[2, 3] = -k[Region.PAD] * dip, -k[Region.PAD] * dkp
    ip, kp, dip, dkp = pair(Region.PAD, geo.r_p)
    isk, ksk, disk, dksk = pair(Region.SKIN, geo.r_p)
    m[3, 2], m[3, 3], m[3, 4], m[3, 5] = ip, kp, -isk, -ksk
    m[4, 2], m[4, 3] = k[Region.PAD] * dip, k[Region.PAD] * dkp
    m[4, 4], m[4, 5] = -k[Region.SKIN] * disk, -k[Region.SKIN] * dksk
    isk, ksk, disk, dksk = pair(Region.SKIN, geo.r_s)
    m[5, 4] = k[Region.SKIN] * disk + proto.h_air * isk
    m[5, 5] = k[Region.SKIN] * dksk + proto.h_air * ksk
    rhs[5] = proto.h_air * gamma

    scale = np.max(np.abs(m), axis=0)
    scale[scale == 0.0] = 1.0
    x = np.linalg.solve(m / scale, rhs) / scale
    a1 = {Region.WALL: x[0], Region.PAD: x[2], Region.SKIN: x[4]}
    a2 = {Region.WALL: x[1], Region.PAD: x[3], Region.SKIN: x[5]}
    return OffsetProfile(ps=ps, q=q, a1=a1, a2=a2, gamma=gamma)


# ---------------------------------------------------------------------------
# modal relaxation over [r_i, r_s]
# ---------------------------------------------------------------------------

def axial_mode(m, L, z):
    """Axial shape cos[m pi (L - z)/(2 L)]; insulated at both z = +-L."""
    z = np.asarray(z, dtype=float)
    out = np.cos(m * math.pi * (L - z) / (2.0 * L))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class RadialMode:
    """One eigenfunction of the tissue-annulus relaxation problem."""

    zeta: float          # decay rate [1/s], negative
    m_axial: int
    q: dict              # Region -> radial wavenumber
    oscillatory: dict    # Region -> bool
    coeff: dict          # Region -> (a, b) basis amplitudes
    ps: ParameterSet

    def _basis(self, reg, r):
        qq = self.q[reg]
        x = qq * r
        if self.oscillatory[reg]:
            return specfn.j0(x), specfn.y0(x)
        return specfn.i0(x), specfn.k0(x)

    def _basis_deriv(self, reg, r):
        qq = self.q[reg]
        x = qq * r
        if self.oscillatory[reg]:
            return -qq * specfn.j1(x), -qq * specfn.y1(x)
        return qq * specfn.i1(x), -qq * specfn.k1(x)

    def eval(self, r):
        geo = self.ps.geometry
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for reg, lo, hi in ((Region.WALL, geo.r_i, geo.r_w),
                            (Region.PAD, geo.r_w, geo.r_p),
                            (Region.SKIN, geo.r_p, geo.r_s)):
            mask = (r >= lo) & ((r < hi) if reg is not Region.SKIN
                                else (r <= hi + 1e-12))
            if np.any(mask):
                a, b = self.coeff[reg]
                f0, g0 = self._basis(reg, r[mask])
                out[mask] = a * f0 + b * g0
        if out.ndim == 0:
            return float(out)
        return out

    def eval_deriv(self, r):
        geo = self.ps.geometry
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for reg, lo, hi in ((Region.WALL, geo.r_i, geo.r_w),
                            (Region.PAD, geo.r_w, geo.r_p),
                            (Region.SKIN, geo.r_p, geo.r_s)):
            mask = (r >= lo) & ((r < hi) if reg is not Region.SKIN
                                else (r <= hi + 1e-12))
            if np.any(mask):
                a, b = self.coeff[reg]
                f1, g1 = self._basis_deriv(reg, r[mask])
                out[mask] = a * f1 + b * g1
        if out.ndim == 0:
            return float(out)
        return out


def _mode_wavenumbers(ps, u, m_axial):
    """Per-region (q, oscillatory) for trial rate zeta = -u^2."""
    c_b = ps.blood_thermal.c_p
    eta2 = (m_axial * math.pi / (2.0 * ps.geometry.L)) ** 2
    out = {}
    for reg in OUTER:
        th = ps.thermal_of(reg)
        chi = (th.rho_cp * u * u - c_b * th.omega) / th.k - eta2
        out[reg] = (math.sqrt(abs(chi)), chi > 0.0)
    return out


def _mode_matrix(ps, u, m_axial):
    """5x5 interface/boundary system for the trial rate zeta = -u^2.

    Unknowns: wall amplitude (its two-function combination already
    vanishes at r_i), then (a, b) for pad and skin.
    """
    geo = ps.geometry
    h = ps.protocol.h_air
    wn = _mode_wavenumbers(ps, u, m_axial)

    def basis(reg, r):
        q, osc = wn[reg]
        x = q * r
        if osc:
            return (specfn.j0(x), specfn.y0(x),
                    -q * specfn.j1(x), -q * specfn.y1(x))
        return (specfn.i0(x), specfn.k0(x),
                q * specfn.i1(x), -q * specfn.k1(x))

    # wall combination vanishing at r_i
    f_i, g_i, _, _ = basis(Region.WALL, geo.r_i)
    cw = (g_i, -f_i)

    def wall_at(r):
        f, g, df, dg = basis(Region.WALL, r)
        return cw[0] * f + cw[1] * g, cw[0] * df + cw[1] * dg

    k_w = ps.thermal_of(Region.WALL).k
    k_p = ps.thermal_of(Region.PAD).k
    k_s = ps.thermal_of(Region.SKIN).k

    m = np.zeros((5, 5))
    wv, wd = wall_at(geo.r_w)
    fp, gp, dfp, dgp = basis(Region.PAD, geo.r_w)
    m[0] = (wv, -fp, -gp, 0.0, 0.0)
    m[1] = (k_w * wd, -k_p * dfp, -k_p * dgp, 0.0, 0.0)
    fp, gp, dfp, dgp = basis(Region.PAD, geo.r_p)
    fs, gs, dfs, dgs = basis(Region.SKIN, geo.r_p)
    m[2] = (0.0, fp, gp, -fs, -gs)
    m[3] = (0.0, k_p * dfp, k_p * dgp, -k_s * dfs, -k_s * dgs)
    fs, gs, dfs, dgs = basis(Region.SKIN, geo.r_s)
    m[4] = (0.0, 0.0, 0.0, k_s * dfs + h * fs, k_s * dgs + h * gs)
    return m, wn, cw


def _det(ps, u, m_axial):
    m, _, _ = _mode_matrix(ps, u, m_axial)
    scale = np.max(np.abs(m), axis=0)
    scale[scale == 0.0] = 1.0
    return float(np.linalg.det(m / scale))


def modal_eigenvalues(ps: ParameterSet, n_modes=20, m_axial=0,
                      u_max=3.0, du=0.002) -> list:
    """First n_modes radial relaxation modes, slowest first.

    The determinant of the interface system is scanned along
    u = sqrt(-zeta) and bracketed sign changes are bisected.  Scan
    intervals split where a region's radial character flips between
    oscillatory and evanescent (the basis switch makes the determinant
    discontinuous there).
    """
    c_b = ps.blood_thermal.c_p
    eta2 = (m_axial * math.pi / (2.0 * ps.geometry.L)) ** 2
    switches = []
    for reg in OUTER:
        th = ps.thermal_of(reg)
        # chi = 0 when rho_cp u^2 = c_b omega + k eta2
        switches.append(math.sqrt((c_b * th.omega + th.k * eta2)
                                  / th.rho_cp))
    pts = sorted(s for s in switches if 0.0 < s < u_max)
    segments = []
    lo = 0.005
    margin = 1e-6
    for s in pts + [u_max]:
        hi = min(s - margin, u_max)
        if hi > lo:
            segments.append((lo, hi))
        lo = s + margin
    modes = []
    for (a, b) in segments:
        n = max(8, int(round((b - a) / du)))
        us = np.linspace(a, b, n + 1)
        ds = [_det(ps, float(uu), m_axial) for uu in us]
        for i in range(n):
            if len(modes) >= n_modes:
                break
            if ds[i] == 0.0:
                root = float(us[i])
            elif ds[i] * ds[i + 1] < 0.0:
                root = brentq(lambda uu: _det(ps, uu, m_axial),
                              float(us[i]), float(us[i + 1]),
                              xtol=1e-12, rtol=1e-14)
            else:
                continue
            modes.append(_build_mode(ps, root, m_axial))
        if len(modes) >= n_modes:
            break
    if len(modes) < n_modes:
        raise BracketExhausted(
            "found %d of %d modes by u = %.3f; widen the scan"
            % (len(modes), n_modes, u_max))
    return modes


def _build_mode(ps, u, m_axial) -> RadialMode:
    m, wn, cw = _mode_matrix(ps, u, m_axial)
    scale = np.max(np.abs(m), axis=0)
    scale[scale == 0.0] = 1.0
    _, s, vt = np.linalg.svd(m / scale)
    null = vt[-1] / scale
    if s[-2] < 1e-8 * s[0]:
        warnings.warn("near-degenerate mode at u = %.6f" % u)
    amp_w = null[0]
    coeff = {Region.WALL: (amp_w * cw[0], amp_w * cw[1]),
             Region.PAD: (null[1], null[2]),
             Region.SKIN: (null[3], null[4])}
    q = {reg: wn[reg][0] for reg in OUTER}
    osc = {reg: wn[reg][1] for reg in OUTER}
    mode = RadialMode(zeta=-u * u, m_axial=m_axial, q=q, oscillatory=osc,
                      coeff=coeff, ps=ps)
    # normalize: peak magnitude 1 over the annulus, first lobe positive
    geo = ps.geometry
    rr = np.linspace(geo.r_i, geo.r_s, 800)
    vals = mode.eval(rr)
    peak = float(np.max(np.abs(vals)))
    sgn = 1.0 if mode.eval_deriv(geo.r_i) > 0 else -1.0
    fac = sgn / peak
    coeff = {reg: (a * fac, b * fac) for reg, (a, b) in coeff.items()}
    return RadialMode(zeta=-u * u, m_axial=m_axial, q=q, oscillatory=osc,
                      coeff=coeff, ps=ps)


def project_initial(ps: ParameterSet, modes, offset: OffsetProfile,
                    n_per_region=512):
    """Amplitudes c_m with sum c_m R_m ~ -Theta over [r_i, r_s].

    Weighted least squares in the relaxation problem's natural inner
    product (weight rho c_p r); composite-Simpson quadrature with
    n_per_region intervals per material.  Returns (c, residual_max,
    residual_l2).
    """
    geo = ps.geometry
    spans = ((Region.WALL, geo.r_i, geo.r_w),
             (Region.PAD, geo.r_w, geo.r_p),
             (Region.SKIN, geo.r_p, geo.r_s))
    rs, ws = [], []
    for reg, lo, hi in spans:
        n = n_per_region
        r = np.linspace(lo, hi, n + 1)
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= (hi - lo) / n / 3.0
        w *= ps.thermal_of(reg).rho_cp * r
        rs.append(r)
        ws.append(w)
    r = np.concatenate(rs)
    w = np.concatenate(ws)
    basis = np.array([m.eval(r) for m in modes])      # (M, N)
    target = -offset.eval(r)
    gram = (basis * w) @ basis.T
    rhs = (basis * w) @ target
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > 1e10:
        raise RankDeficient("projection Gram matrix cond ~ %.3e" % cond)
    c = np.linalg.solve(gram, rhs)
    resid = basis.T @ c - target
    res_max = float(np.max(np.abs(resid)))
    res_l2 = float(np.sqrt(np.sum(w * resid ** 2)
                           / max(np.sum(w * target ** 2), 1e-300)))
    return c, res_max, res_l2


# ---------------------------------------------------------------------------
# assembled temperature field
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TemperatureSolution:
    """T(r, z, t) over the cylinder for t in [0, t_end], z >= -v t."""

    ps: ParameterSet
    sol: FluenceSolution
    mode: str
    rates: ForcingRates
    offset: OffsetProfile
    modal: tuple              # RadialMode list
    amplitudes: np.ndarray
    projection_residual_max: float
    projection_residual_l2: float

    def _forced_profile_pair(self, reg, r, t):
        """Radial amplitude of both forced families with their brackets
        folded in; returns (amp_eff(r, t), amp_t(r, t))."""
        ps = self.ps
        proto = ps.protocol
        blood = derive_optics(ps.blood_optics)
        rates = self.rates
        v = proto.v
        if reg in (Region.FIBER_COLUMN, Region.BLOOD_ANNULUS):
            th = ps.blood_thermal
            mu_a = ps.blood_optics.mu_a
            br_eff = growth_bracket(rates.zeta_col_eff, -blood.mu_eff * v, t)
            if reg is Region.FIBER_COLUMN:
                br_t = growth_bracket(rates.zeta_col_t, -blood.mu_t * v, t)
            else:
                br_t = growth_bracket(rates.zeta_ann_t, -blood.mu_t * v, t)
            amp = mu_a / th.rho_cp
            return (amp * self.sol.profile_eff(reg, r) * br_eff,
                    amp * self.sol.profile_t(reg, r) * br_t)
        th = ps.thermal_of(reg)
        zeta = rates.zeta_outer[reg]
        p_eff = self.sol.profile_eff(reg, r)
        p_t = self.sol.profile_t(reg, r)
        if self.mode == "derived":
            amp = ps.optics_of(reg).mu_a / th.rho_cp
            return (amp * p_eff * growth_bracket(zeta, -blood.mu_eff * v, t),
                    amp * p_t * growth_bracket(zeta, -blood.mu_t * v, t))
        rate = zeta
        if self.mode == "printed_sqrt":
            if zeta < 0.0:
                raise ThermalError(
                    "printed_sqrt mode undefined for negative growth rate "
                    "%g in %s" % (zeta, reg.value))
            rate = math.sqrt(zeta)
        denom = th.rho_cp * zeta
        with np.errstate(over="ignore"):
            br_eff = (np.exp(rate * t)
                      - np.exp(-blood.mu_eff * v * t)) / denom
            br_t = (np.exp(rate * t)
                    - np.exp(-blood.mu_t * v * t)) / denom
        return (p_eff * br_eff, p_t * br_t)

    def eval(self, r, z, t):
        """Temperature [degC]; arrays broadcast; domain z >= -v t."""
        r, z, t = np.broadcast_arrays(
            np.asarray(r, dtype=float), np.asarray(z, dtype=float),
            np.asarray(t, dtype=float))
        self.sol._check_domain(z, t)
        ps = self.ps
        geo = ps.geometry
        if np.any(r < 0) or np.any(r > geo.r_s + 1e-12):
            raise DomainError("r outside [0, r_s]")
        blood = derive_optics(ps.blood_optics)
        out = np.full_like(r, float(ps.protocol.T_b))
        e_eff = np.exp(-blood.mu_eff * z)
        e_t = np.exp(-blood.mu_t * z)
        edges = [geo.r_f, geo.r_i, geo.r_w, geo.r_p, geo.r_s]
        lo = 0.0
        for reg, hi in zip(Region, edges):
            mask = (r >= lo) & ((r < hi) if reg is not Region.SKIN
                                else (r <= hi + 1e-12))
            if np.any(mask):
                amp_eff, amp_t = self._forced_profile_pair(
                    reg, r[mask], t[mask])
                out[mask] += amp_eff * e_eff[mask] + amp_t * e_t[mask]
            lo = hi
        tissue = r >= geo.r_i
        if np.any(tissue):
            rt = r[tissue]
            tt = t[tissue]
            add = self.offset.eval(rt)
            for c, m in zip(self.amplitudes, self.modal):
                add = add + c * m.eval(rt) * np.exp(m.zeta * tt)
            out[tissue] += add
        if out.ndim == 0:
            return float(out)
        return out

    def mode_table(self):
        """(index, zeta, q_wall, q_pad, q_skin, amplitude) rows."""
        rows = []
        for i, (c, m) in enumerate(zip(self.amplitudes, self.modal)):
            rows.append((i, m.zeta, m.q[Region.WALL], m.q[Region.PAD],
                         m.q[Region.SKIN], c))
        return rows


def build_temperature(ps: ParameterSet, sol: FluenceSolution = None,
                      mode="derived", n_modes=20) -> TemperatureSolution:
    """Assemble the full temperature construction for one parameter set."""
    if mode not in _MODES:
        raise ThermalError("unknown mode %r (one of %s)" % (mode, _MODES))
    if sol is None:
        sol = assemble_and_solve(ps)
    rates = forcing_rates(ps)
    offset = steady_robin_offset(ps)
    modal = modal_eigenvalues(ps, n_modes=n_modes)
    c, res_max, res_l2 = project_initial(ps, modal, offset)
    return TemperatureSolution(
        ps=ps, sol=sol, mode=mode, rates=rates, offset=offset,
        modal=tuple(modal), amplitudes=c,
        projection_residual_max=res_max, projection_residual_l2=res_l2)
