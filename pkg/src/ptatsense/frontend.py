"""Temperature-to-current converter and native-NMOS line regulator.

The regulator output (the virtual rail) is the crossing of a falling
regulator characteristic and a rising load characteristic. The two PTAT
bias currents come from diode stacks of three and two PMOS devices powered
from that rail, so the devices see ``V/3`` and ``V/2`` respectively.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .device import (
    K_BOLTZMANN,
    Q_ELECTRON,
    DeviceParams,
    DomainError,
    ExpIVCoeffs,
    subthreshold_current,
    thermal_voltage,
    to_kelvin,
)

VDD_RANGE = (0.6, 1.8)
BISECTION_TOL = 1e-9
BISECTION_MAXITER = 200


class ConfigurationError(ValueError):
    """A parameter set that cannot describe a working sensor."""


class HeadroomWarning(UserWarning):
    """The regulator/load crossing falls outside (0, V_DD)."""


@dataclass(frozen=True)
class TccParams:
    """Mirror devices of the two diode stacks.

    ``m1`` sits in the three-device stack and sets I_H, ``m2`` in the
    two-device stack and sets I_L. I_H > I_L needs a sizing ratio well
    above one because m1 sees the smaller gate drive.
    """

    m1: DeviceParams
    m2: DeviceParams

    @property
    def sizing_ratio(self) -> float:
        return self.m1.w_over_l / self.m2.w_over_l

    @property
    def matched(self) -> bool:
        a, b = self.m1, self.m2
        return a.i0 == b.i0 and a.vth == b.vth and a.n == b.n


@dataclass(frozen=True)
class RegulatorParams:
    """Regulator and load characteristics.

    ``headroom`` couples the external supply into the regulator exponent,
    ``I_R = alpha_R exp(-(V - headroom * (V_DD - v_ref)) / (beta_R kT/q))``.
    Zero means the stacked long-channel devices screen V_DD perfectly.
    """

    reg: ExpIVCoeffs
    load: ExpIVCoeffs
    headroom: float = 0.0
    v_ref: float = 0.6

    def __post_init__(self):
        if self.reg.sign != "regulator" or self.load.sign != "load":
            raise ValueError("reg must have sign='regulator' and load sign='load'")


@dataclass(frozen=True)
class FrontEndState:
    v_vdd: object
    i_h: object
    i_l: object
    i_supply: object
    temp: object
    v_dd: object


def _check_vdd(v_dd):
    v = np.asarray(v_dd, dtype=float)
    if np.any(v <= 0):
        raise DomainError(f"supply must be positive, got {v_dd}")
    if np.any(v < VDD_RANGE[0] - 1e-12) or np.any(v > VDD_RANGE[1] + 1e-12):
        warnings.warn(f"V_DD={v_dd} outside the characterised 0.6-1.8 V range", RuntimeWarning, stacklevel=3)


def _balance_coeffs(rp: RegulatorParams, v_dd, temp_c):
    """``(a, b)`` with log(I_reg) - log(I_load) = a + b v; ``b < 0``."""
    a_r, b_r = rp.reg.log_coeffs(temp_c)
    a_l, b_l = rp.load.log_coeffs(temp_c)
    shift = rp.headroom * (np.asarray(v_dd) - rp.v_ref)
    return a_r - b_r * shift - a_l, b_r - b_l


def _log_balance(rp: RegulatorParams, v, v_dd, temp_c):
    """log(I_reg) - log(I_load); strictly decreasing in v."""
    a, b = _balance_coeffs(rp, v_dd, temp_c)
    return a + b * np.asarray(v)


def solve_vvdd(rp: RegulatorParams, v_dd, temp_c):
    """Virtual-rail voltage from bisection on the log-current balance.

    Broadcasts over ``v_dd`` and ``temp_c``. When the crossing lies outside
    ``(0, v_dd)`` the result is clamped to the nearer bracket end and a
    :class:`HeadroomWarning` is raised.
    """
    _check_vdd(v_dd)
    v_dd_b, t_b = np.broadcast_arrays(np.asarray(v_dd, dtype=float), np.asarray(temp_c, dtype=float))
    lo = np.zeros_like(v_dd_b)
    hi = v_dd_b.copy()
    a, b = _balance_coeffs(rp, v_dd_b, t_b)
    f_lo = a + b * lo
    f_hi = a + b * hi
    below = f_lo <= 0
    above = f_hi >= 0
    if np.any(below | above):
        warnings.warn("regulator/load crossing outside (0, V_DD); rail clamped", HeadroomWarning, stacklevel=2)
    for _ in range(BISECTION_MAXITER):
        if np.all(hi - lo <= BISECTION_TOL):
            break
        mid = 0.5 * (lo + hi)
        f_mid = a + b * mid
        pos = f_mid > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    v = 0.5 * (lo + hi)
    v = np.where(below, 0.0, np.where(above, v_dd_b, v))
    return float(v) if v.ndim == 0 else v


def vvdd_closed_form(rp: RegulatorParams, temp_c, v_dd=None):
    """Analytic crossing ``beta_eq kT/q log(alpha_R/alpha_L)``.

    ``beta_eq = beta_L beta_R / (beta_L + beta_R)``. With a nonzero headroom
    term the supply shift adds ``beta_eq * headroom * (v_dd - v_ref) / beta_R``.
    """
    vt = thermal_voltage(to_kelvin(temp_c))
    b_r, b_l = rp.reg.beta(temp_c), rp.load.beta(temp_c)
    beta_eq = b_l * b_r / (b_l + b_r)
    v = beta_eq * vt * np.log(rp.reg.alpha(temp_c) / rp.load.alpha(temp_c))
    if rp.headroom != 0.0:
        if v_dd is None:
            raise ValueError("v_dd is required when the headroom term is nonzero")
        v = v + beta_eq * rp.headroom * (np.asarray(v_dd) - rp.v_ref) / b_r
    return float(v) if np.ndim(v) == 0 else v


def tcc_currents(tp: TccParams, v_vdd, temp_c, check: bool = True):
    """Return ``(i_h, i_l)`` for the two mirror devices.

    Raises :class:`ConfigurationError` when ``check`` is set and I_H does
    not exceed I_L.
    """
    if np.any(np.asarray(v_vdd) <= 0):
        raise DomainError("virtual rail must be positive")
    t_k = to_kelvin(temp_c)
    v = np.asarray(v_vdd, dtype=float)
    i_h = subthreshold_current(tp.m1, v / 3.0, None, t_k)
    i_l = subthreshold_current(tp.m2, v / 2.0, None, t_k)
    if check and np.any(np.asarray(i_h) <= np.asarray(i_l)):
        raise ConfigurationError("I_H <= I_L: mirror sizing ratio too small for the V/3 vs V/2 drive")
    return i_h, i_l


def current_ratio_model(tp: TccParams, v_vdd, temp_c):
    """Closed-form I_H/I_L for matched devices: ``W1/W2 * exp(-qV / (6 n k T))``."""
    if not tp.matched:
        raise ConfigurationError("closed-form ratio assumes m1 and m2 share i0, vth and n")
    t_k = to_kelvin(temp_c)
    out = tp.sizing_ratio * np.exp(-Q_ELECTRON * np.asarray(v_vdd) / (6.0 * tp.m1.n * K_BOLTZMANN * t_k))
    return float(out) if np.ndim(out) == 0 else out


def fit_linear_ratio(temps_c, values):
    """Ordinary least-squares line through ``(temp, value)`` samples.

    Returns ``(slope, intercept, adjusted_r2)`` with one predictor, i.e.
    ``1 - (1 - R^2)(N - 1)/(N - 2)``.
    """
    x = np.asarray(temps_c, dtype=float).ravel()
    y = np.asarray(values, dtype=float).ravel()
    if x.size != y.size:
        raise ValueError("temps and values differ in length")
    if x.size < 3:
        raise ValueError("need at least 3 samples for an adjusted R^2")
    if np.unique(x).size < 2:
        raise ValueError("singular design: all temperatures identical")
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    ss_res = np.sum(resid**2)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    n = x.size
    adj = 1.0 - (1.0 - r2) * (n - 1) / (n - 2)
    return float(slope), float(intercept), float(adj)


def frontend_state(cfg, v_dd, temp_c) -> FrontEndState:
    """Operating point of the regulated front end at ``(v_dd, temp_c)``."""
    v = solve_vvdd(cfg.regulator, v_dd, temp_c)
    i_h, i_l = tcc_currents(cfg.tcc, v, temp_c)
    i_supply = np.exp(cfg.regulator.load.log_current(v, temp_c))
    if np.ndim(i_supply) == 0:
        i_supply = float(i_supply)
    return FrontEndState(v_vdd=v, i_h=i_h, i_l=i_l, i_supply=i_supply, temp=temp_c, v_dd=v_dd)
