"""Behavioural model of a voltage-scalable subthreshold PTAT temperature sensor.

The signal chain runs from a regulated virtual rail through a two-branch
PMOS current ratio, two current-starved ring oscillators and a
frequency-to-digital counter, with calibration and population statistics
on top.
"""

__version__ = "0.1.0"

from .config import SensorConfig, default_config, load_config
from .device import DeviceParams, DomainError, ExpIVCoeffs, KnotTable
from .fdc import EventDrivenFdc, FdcConfig, code_closed_form, run_conversion
from .frontend import solve_vvdd, tcc_currents, vvdd_closed_form
from .metrology import MetricsReport, TwoPointCalibrator, two_point_calibrate
from .sensor import TemperatureSensor, noiseless_codes, simulate_conversion
from .variation import Corner, VariationSpec, apply_corner, sample_die

__all__ = [
    "Corner",
    "DeviceParams",
    "DomainError",
    "EventDrivenFdc",
    "ExpIVCoeffs",
    "FdcConfig",
    "KnotTable",
    "MetricsReport",
    "SensorConfig",
    "TemperatureSensor",
    "TwoPointCalibrator",
    "VariationSpec",
    "apply_corner",
    "code_closed_form",
    "default_config",
    "load_config",
    "noiseless_codes",
    "run_conversion",
    "sample_die",
    "simulate_conversion",
    "solve_vvdd",
    "tcc_currents",
    "two_point_calibrate",
    "vvdd_closed_form",
]
