"""Calibration and accuracy statistics for temperature-sensor codes."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .frontend import VDD_RANGE, fit_linear_ratio


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class AffineMap:
    """``T = t0 + (code - code0) * slope`` with ``slope`` in degC per LSB."""

    code0: float
    t0: float
    slope: float

    def __call__(self, code):
        return self.t0 + (np.asarray(code, dtype=float) - self.code0) * self.slope


def two_point_calibrate(code_low, code_high, t_low: float = 10.0, t_high: float = 90.0) -> AffineMap:
    if not code_high > code_low:
        raise CalibrationError(f"calibration codes must increase with temperature ({code_low} -> {code_high})")
    # (code - code0) * span / dcode keeps both reference points exact in floating point
    span = t_high - t_low
    dcode = float(code_high) - float(code_low)
    return _TwoPointMap(float(code_low), float(t_low), span / dcode, span, dcode)


@dataclass(frozen=True)
class _TwoPointMap(AffineMap):
    span: float = 0.0
    dcode: float = 1.0

    def __call__(self, code):
        return self.t0 + (np.asarray(code, dtype=float) - self.code0) * self.span / self.dcode


def one_point_calibrate(code_ref, t_ref: float, slope: float) -> AffineMap:
    """Offset-only calibration with a slope (degC/LSB) taken from the nominal design."""
    if not slope > 0:
        raise CalibrationError("slope must be positive")
    return AffineMap(float(code_ref), float(t_ref), float(slope))


class TwoPointCalibrator(RegressorMixin, BaseEstimator):
    """Code -> temperature regressor fitted at reference temperatures.

    ``fit`` takes codes ``X`` and true temperatures ``y`` and averages all
    rows measured at each reference, so repeated noisy reads at the
    calibration points are handled by passing them in.

    Parameters
    ----------
    t_low, t_high : float
        Reference temperatures (two-point mode).
    mode : {"two_point", "one_point"}
        One-point mode uses only ``t_low`` and needs ``slope``.
    slope : float, optional
        degC per LSB for one-point mode.
    """

    def __init__(self, t_low=10.0, t_high=90.0, mode="two_point", slope=None):
        self.t_low = t_low
        self.t_high = t_high
        self.mode = mode
        self.slope = slope

    def _mean_at(self, codes, temps, t):
        sel = np.isclose(temps, t, rtol=0, atol=1e-9)
        if not sel.any():
            raise CalibrationError(f"no reading at reference temperature {t} degC")
        return float(np.mean(codes[sel]))

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_2d=False, y_numeric=True)
        codes = np.asarray(X, dtype=float).reshape(len(y), -1)[:, 0]
        temps = np.asarray(y, dtype=float)
        if self.mode == "two_point":
            self.map_ = two_point_calibrate(
                self._mean_at(codes, temps, self.t_low), self._mean_at(codes, temps, self.t_high), self.t_low, self.t_high
            )
        elif self.mode == "one_point":
            if self.slope is None:
                raise CalibrationError("one-point calibration needs a slope")
            self.map_ = one_point_calibrate(self._mean_at(codes, temps, self.t_low), self.t_low, self.slope)
        else:
            raise ValueError(f"unknown mode {self.mode!r}")
        self.n_features_in_ = 1
        return self

    @property
    def resolution_(self) -> float:
        """Counter resolution in degC per LSB."""
        check_is_fitted(self, "map_")
        return self.map_.slope

    def predict(self, X):
        check_is_fitted(self, "map_")
        codes = check_array(X, ensure_2d=False).reshape(-1)
        return self.map_(codes)


@dataclass
class MetricsReport:
    min_inacc: float
    max_inacc: float
    rms_inacc: float
    three_sigma: Optional[float]
    relative_inacc: float
    counter_resolution: float
    noise_resolution: float
    line_sensitivity: float
    energy_per_conv: float
    conv_time: float
    r_fom: float
    adj_r2: float

    @property
    def peak_inacc(self) -> float:
        return max(abs(self.min_inacc), abs(self.max_inacc))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["peak_inacc"] = self.peak_inacc
        return d


def inaccuracy_stats(true_c, est_c, temp_range: Optional[float] = None) -> dict:
    """Min/max/RMS of ``est - true`` and relative inaccuracy in percent.

    ``temp_range`` defaults to the span of ``true_c``.
    """
    t = np.asarray(true_c, dtype=float).ravel()
    e = np.asarray(est_c, dtype=float).ravel() - t
    if t.size == 0:
        raise ValueError("no readings")
    rng = float(np.ptp(t)) if temp_range is None else float(temp_range)
    if t.size < 2 or rng <= 0:
        raise ValueError("readings must span a nonzero temperature range")
    lo, hi = float(e.min()), float(e.max())
    return {
        "min_inacc": lo,
        "max_inacc": hi,
        "rms_inacc": float(np.sqrt(np.mean(e**2))),
        "relative_inacc": relative_inaccuracy(lo, hi, rng),
    }


def relative_inaccuracy(min_inacc: float, max_inacc: float, temp_range: float) -> float:
    if temp_range <= 0:
        raise ValueError("temperature range must be positive")
    return (max_inacc - min_inacc) / temp_range * 100.0


def population_three_sigma(errors) -> float:
    """Worst |3 sigma| over temperature of errors shaped ``(dies, temps)``."""
    e = np.asarray(errors, dtype=float)
    if e.ndim != 2 or e.shape[0] < 2:
        raise ValueError("need a (dies, temps) array with at least two dies")
    return float(np.max(3.0 * np.std(e, axis=0, ddof=1)))


def r_fom(energy_j: float, resolution_c: float) -> float:
    """Resolution figure of merit in nJ*K^2."""
    if energy_j <= 0 or resolution_c <= 0:
        raise ValueError("energy and resolution must be positive")
    return energy_j * 1e9 * resolution_c**2


def calibration_map(cfg, v_dd: float, t_low: float = 10.0, t_high: float = 90.0) -> AffineMap:
    """Noise-free two-point calibration of one configuration at one supply."""
    from .sensor import noiseless_codes

    c_lo, c_hi = noiseless_codes(cfg, v_dd, np.array([t_low, t_high]))
    return two_point_calibrate(int(c_lo), int(c_hi), t_low, t_high)


def noise_resolution(cfg, die=None, temp_c: float = 25.0, v_dd: float = 0.6, repeats: int = 200, seed=0):
    """Spread of repeated jittered conversions at one temperature.

    Returns ``(sigma_degC, sigma_lsb, codes)``; the degC figure uses the
    die's noise-free two-point slope.
    """
    from .sensor import sensor_config, simulate_conversion

    if repeats < 2:
        raise ValueError("repeats must be >= 2")
    c = sensor_config(cfg, die)
    slope = calibration_map(c, v_dd).slope
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    codes = np.array([simulate_conversion(c, v_dd, temp_c, s).code for s in root.spawn(repeats)])
    sigma_lsb = float(np.std(codes, ddof=1))
    return sigma_lsb * slope, sigma_lsb, codes


def line_sensitivity(
    cfg,
    die=None,
    temp_c: float = 30.0,
    cal_vdd: float = 0.9,
    sweep: Iterable[float] = None,
    per_vdd: bool = False,
    signed: bool = False,
) -> float:
    """Least-squares slope (degC/V) of the reading error versus supply.

    Default mode calibrates once at ``cal_vdd`` and reads across ``sweep``;
    ``per_vdd`` recalibrates at every supply, as with pre-stored per-V_DD
    calibration tables. Returns the magnitude unless ``signed``.
    """
    from .sensor import noiseless_codes, sensor_config

    c = sensor_config(cfg, die)
    vdds = np.round(np.arange(cal_vdd - 0.2, cal_vdd + 0.2 + 1e-9, 0.01), 6) if sweep is None else np.asarray(sweep, float)
    if vdds.min() < VDD_RANGE[0] - 1e-9 or vdds.max() > VDD_RANGE[1] + 1e-9:
        raise ValueError(f"sweep {vdds.min()}-{vdds.max()} V outside the supported supply range")
    errors = []
    fixed = None if per_vdd else calibration_map(c, cal_vdd)
    for v in vdds:
        cal = calibration_map(c, float(v)) if per_vdd else fixed
        code = noiseless_codes(c, float(v), temp_c)
        errors.append(float(cal(code)) - temp_c)
    # centred sums: a supply-independent error gives exactly zero
    x = vdds - vdds.mean()
    e = np.asarray(errors) - np.mean(errors)
    slope = float(np.dot(x, e) / np.dot(x, x))
    return slope if signed else abs(slope)


def code_linearity(cfg, v_dd: float = 0.6, temps=None) -> float:
    """Adjusted R^2 of the noise-free code against temperature."""
    from .sensor import noiseless_codes

    t = np.arange(0.0, 101.0, 1.0) if temps is None else np.asarray(temps, float)
    return fit_linear_ratio(t, noiseless_codes(cfg, v_dd, t))[2]


COMPARISON_FIELDS = ("name", "energy_nj", "resolution_c", "t_min_c", "t_max_c", "min_inacc_c", "max_inacc_c")


def comparison_table(rows, tolerance: float = 0.05) -> list:
    """Recompute relative inaccuracy and R-FoM for published sensor rows.

    Each row is a mapping with the keys in ``COMPARISON_FIELDS`` and may
    carry ``relative_inacc_pct`` and ``r_fom`` as published; those are
    flagged when they differ from the recomputation by more than
    ``tolerance`` (relative).
    """
    out = []
    for i, row in enumerate(rows):
        missing = [k for k in COMPARISON_FIELDS if row.get(k) in (None, "")]
        if missing:
            raise ValueError(f"row {i}: missing {', '.join(missing)}")
        t_range = float(row["t_max_c"]) - float(row["t_min_c"])
        if t_range <= 0:
            raise ValueError(f"row {i} ({row['name']}): zero or negative temperature range")
        rel = relative_inaccuracy(float(row["min_inacc_c"]), float(row["max_inacc_c"]), t_range)
        fom = r_fom(float(row["energy_nj"]) * 1e-9, float(row["resolution_c"]))
        flags = []
        for key, value in (("relative_inacc_pct", rel), ("r_fom", fom)):
            given = row.get(key)
            if given not in (None, "") and not math.isclose(float(given), value, rel_tol=tolerance):
                flags.append(key)
        out.append({"name": row["name"], "relative_inacc_pct": rel, "r_fom": fom, "flags": flags})
    return out


def read_comparison_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def format_comparison(table: list) -> str:
    lines = [f"{'sensor':<16}{'rel.inacc[%]':>14}{'R-FoM[nJ K^2]':>16}  flags"]
    for r in table:
        lines.append(f"{r['name']:<16}{r['relative_inacc_pct']:>14.3f}{r['r_fom']:>16.4f}  {','.join(r['flags'])}")
    return "\n".join(lines)
