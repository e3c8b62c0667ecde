"""Subthreshold device equations.

Two current forms are used throughout the package:

* the classic weak-inversion drain current of a diode-connected PMOS,
  ``I = W/L * I0 * exp((|Vgs| - |Vth|) / (n * kT/q))``;
* a generic exponential I(V, T) characteristic whose prefactor and slope
  factor are temperature tables, used to describe the native-NMOS regulator
  and the aggregate load it drives.

Temperatures are Kelvin for the device-level functions and Celsius for
anything that looks up a table.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

K_BOLTZMANN = 1.380649e-23  # J/K
Q_ELECTRON = 1.602176634e-19  # C
ZERO_CELSIUS = 273.15


class DomainError(ValueError):
    """An argument lies outside the domain where the model is defined."""


class SaturationWarning(UserWarning):
    """Drain-source voltage below four thermal voltages."""


def to_kelvin(temp_c):
    return np.asarray(temp_c, dtype=float) + ZERO_CELSIUS


def thermal_voltage(temp_k):
    """Return kT/q in volt for an absolute temperature in kelvin."""
    t = np.asarray(temp_k, dtype=float)
    if np.any(t <= 0):
        raise DomainError(f"absolute temperature must be positive, got {temp_k}")
    vt = K_BOLTZMANN * t / Q_ELECTRON
    return float(vt) if vt.ndim == 0 else vt


@dataclass(frozen=True)
class DeviceParams:
    """Weak-inversion transistor description (magnitudes only)."""

    w_over_l: float
    i0: float
    vth: float
    n: float = 1.3

    def __post_init__(self):
        if not self.w_over_l > 0:
            raise ValueError(f"w_over_l must be > 0, got {self.w_over_l}")
        if not self.i0 > 0:
            raise ValueError(f"i0 must be > 0, got {self.i0}")
        if not self.n >= 1:
            raise ValueError(f"subthreshold factor n must be >= 1, got {self.n}")
        if not self.vth >= 0:
            raise ValueError(f"vth is a magnitude and must be >= 0, got {self.vth}")


def subthreshold_current(p: DeviceParams, v_gs_mag, v_ds_mag, temp_k):
    """Weak-inversion source current in ampere.

    ``v_ds_mag`` is only used for the saturation check: when it is below
    ``4 kT/q`` a :class:`SaturationWarning` is emitted and the current is
    still returned. Pass ``None`` to skip the check.
    """
    vt = thermal_voltage(temp_k)
    if v_ds_mag is not None and np.any(np.asarray(v_ds_mag) < 4.0 * np.asarray(vt)):
        warnings.warn(
            "v_ds below 4 thermal voltages; weak-inversion saturation assumption violated",
            SaturationWarning,
            stacklevel=2,
        )
    exponent = (np.asarray(v_gs_mag, dtype=float) - p.vth) / (p.n * np.asarray(vt))
    current = p.w_over_l * p.i0 * np.exp(exponent)
    return float(current) if np.ndim(current) == 0 else current


@dataclass(frozen=True)
class KnotTable:
    """Piecewise-linear function of temperature (Celsius), no extrapolation."""

    temps_c: tuple
    values: tuple

    def __post_init__(self):
        t = np.asarray(self.temps_c, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise ValueError("knot table needs matching 1-D temps/values with >= 2 knots")
        if np.any(np.diff(t) <= 0):
            raise ValueError("knot temperatures must be strictly increasing")
        object.__setattr__(self, "temps_c", tuple(float(x) for x in t))
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @classmethod
    def from_function(cls, func, temps_c: Sequence[float]) -> "KnotTable":
        temps = np.asarray(temps_c, dtype=float)
        return cls(tuple(temps), tuple(np.asarray(func(temps), dtype=float)))

    @property
    def domain(self) -> tuple[float, float]:
        return self.temps_c[0], self.temps_c[-1]

    def __call__(self, temp_c):
        t = np.asarray(temp_c, dtype=float)
        lo, hi = self.domain
        # small slack absorbs round-off from unit conversions
        if np.any(t < lo - 1e-9) or np.any(t > hi + 1e-9):
            raise DomainError(f"temperature {temp_c} outside table domain [{lo}, {hi}] degC")
        out = np.interp(t, self.temps_c, self.values)
        return float(out) if out.ndim == 0 else out

    def scaled(self, factor: float) -> "KnotTable":
        return KnotTable(self.temps_c, tuple(factor * v for v in self.values))

    def to_dict(self) -> dict:
        return {"temps_c": list(self.temps_c), "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> "KnotTable":
        return cls(tuple(d["temps_c"]), tuple(d["values"]))


@dataclass(frozen=True)
class ExpIVCoeffs:
    """Exponential I(V, T) characteristic ``alpha(T) * exp(+-V / (beta(T) kT/q))``.

    ``sign="regulator"`` gives a current that falls with the output voltage
    (source follower pulled up by the rail); ``sign="load"`` a current that
    rises with its supply voltage.
    """

    alpha: KnotTable
    beta: KnotTable
    sign: Literal["regulator", "load"]

    def __post_init__(self):
        if self.sign not in ("regulator", "load"):
            raise ValueError(f"sign must be 'regulator' or 'load', got {self.sign!r}")
        if min(self.alpha.values) <= 0 or min(self.beta.values) <= 0:
            raise ValueError("alpha and beta tables must be strictly positive")

    @property
    def direction(self) -> float:
        return -1.0 if self.sign == "regulator" else 1.0

    def log_coeffs(self, temp_c):
        """``(log alpha, +-1/(beta kT/q))`` so that ``log I = a + b v``."""
        vt = thermal_voltage(to_kelvin(temp_c))
        return np.log(self.alpha(temp_c)), self.direction / (self.beta(temp_c) * vt)

    def log_current(self, v, temp_c):
        """Natural log of the current; avoids overflow in the solvers."""
        a, b = self.log_coeffs(temp_c)
        return a + b * np.asarray(v)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha.to_dict(), "beta": self.beta.to_dict(), "sign": self.sign}

    @classmethod
    def from_dict(cls, d: dict) -> "ExpIVCoeffs":
        return cls(KnotTable.from_dict(d["alpha"]), KnotTable.from_dict(d["beta"]), d["sign"])


def exp_iv_current(c: ExpIVCoeffs, v, temp_c):
    """Current in ampere of an exponential I(V, T) branch at ``v`` volt."""
    if np.any(np.asarray(v) < 0):
        raise DomainError("voltage must be non-negative")
    out = np.exp(c.log_current(v, temp_c))
    return float(out) if np.ndim(out) == 0 else out
