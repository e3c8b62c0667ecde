"""Sensor parameter set, (de)serialisation and schema validation."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from .device import DeviceParams, ExpIVCoeffs
from .fdc import BackendPower, FdcConfig
from .frontend import RegulatorParams, TccParams
from .oscillator import OscPair, OscParams

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration document; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class SensorConfig:
    tcc: TccParams
    regulator: RegulatorParams
    osc: OscPair
    backend: BackendPower
    fdc: FdcConfig = field(default_factory=FdcConfig)

    def with_headroom(self, headroom: float) -> "SensorConfig":
        return replace(self, regulator=replace(self.regulator, headroom=float(headroom)))

    def with_jitter(self, sigma_rel: float) -> "SensorConfig":
        return replace(self, osc=replace(self.osc, jitter_rel_sigma=float(sigma_rel)))

    def to_dict(self) -> dict:
        def dev(d: DeviceParams):
            return {"w_over_l": d.w_over_l, "i0": d.i0, "vth": d.vth, "n": d.n}

        def osc(o: OscParams):
            return {"n_stages": o.n_stages, "c_load": o.c_load, "delta_v": o.delta_v, "t_edge": o.t_edge}

        return {
            "schema_version": SCHEMA_VERSION,
            "tcc": {"m1": dev(self.tcc.m1), "m2": dev(self.tcc.m2)},
            "regulator": {
                "reg": self.regulator.reg.to_dict(),
                "load": self.regulator.load.to_dict(),
                "headroom": self.regulator.headroom,
                "v_ref": self.regulator.v_ref,
            },
            "osc": {
                "slow": osc(self.osc.slow),
                "fast": osc(self.osc.fast),
                "jitter_rel_sigma": self.osc.jitter_rel_sigma,
            },
            "backend": {"p0": self.backend.p0, "p1": self.backend.p1},
            "fdc": {
                "ref_bits": self.fdc.ref_bits,
                "code_bits": self.fdc.code_bits,
                "window_cycles": self.fdc.window_cycles,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SensorConfig":
        validate_config_dict(d)
        try:
            reg = d["regulator"]
            return cls(
                tcc=TccParams(DeviceParams(**d["tcc"]["m1"]), DeviceParams(**d["tcc"]["m2"])),
                regulator=RegulatorParams(
                    ExpIVCoeffs.from_dict(reg["reg"]),
                    ExpIVCoeffs.from_dict(reg["load"]),
                    headroom=reg.get("headroom", 0.0),
                    v_ref=reg.get("v_ref", 0.6),
                ),
                osc=OscPair(
                    OscParams(**d["osc"]["slow"]),
                    OscParams(**d["osc"]["fast"]),
                    d["osc"].get("jitter_rel_sigma", 0.0),
                ),
                backend=BackendPower(**d["backend"]),
                fdc=FdcConfig(**d.get("fdc", {})),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def config_hash(self) -> str:
        return hash_document(self.to_dict())


def hash_document(doc) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


_POS = {"type": "number", "exclusiveMinimum": 0}
_TABLE = {
    "type": "object",
    "required": ["temps_c", "values"],
    "properties": {
        "temps_c": {"type": "array", "items": {"type": "number"}, "minItems": 2},
        "values": {"type": "array", "items": _POS, "minItems": 2},
    },
}
_EXPIV = {
    "type": "object",
    "required": ["alpha", "beta", "sign"],
    "properties": {"alpha": _TABLE, "beta": _TABLE, "sign": {"enum": ["regulator", "load"]}},
}
_DEVICE = {
    "type": "object",
    "required": ["w_over_l", "i0", "vth"],
    "additionalProperties": False,
    "properties": {
        "w_over_l": _POS,
        "i0": _POS,
        "vth": {"type": "number", "minimum": 0},
        "n": {"type": "number", "minimum": 1},
    },
}
_OSC = {
    "type": "object",
    "required": ["n_stages", "c_load", "delta_v"],
    "additionalProperties": False,
    "properties": {
        "n_stages": {"type": "integer", "minimum": 3},
        "c_load": _POS,
        "delta_v": _POS,
        "t_edge": {"type": "number", "minimum": 0},
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "SensorConfig",
    "type": "object",
    "required": ["tcc", "regulator", "osc", "backend"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tcc": {
            "type": "object",
            "required": ["m1", "m2"],
            "properties": {"m1": _DEVICE, "m2": _DEVICE},
        },
        "regulator": {
            "type": "object",
            "required": ["reg", "load"],
            "properties": {
                "reg": _EXPIV,
                "load": _EXPIV,
                "headroom": {"type": "number"},
                "v_ref": _POS,
            },
        },
        "osc": {
            "type": "object",
            "required": ["slow", "fast"],
            "properties": {
                "slow": _OSC,
                "fast": _OSC,
                "jitter_rel_sigma": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.2},
            },
        },
        "backend": {
            "type": "object",
            "required": ["p0", "p1"],
            "properties": {"p0": {"type": "number"}, "p1": {"type": "number"}},
        },
        "fdc": {
            "type": "object",
            "properties": {
                "ref_bits": {"type": "integer", "minimum": 2},
                "code_bits": {"type": "integer", "minimum": 1},
                "window_cycles": {"type": "integer", "minimum": 1},
            },
        },
    },
}


def _json_path(err: jsonschema.ValidationError) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def validate_against(doc, schema):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        raise ConfigError(first.message, _json_path(first))


def validate_config_dict(d: dict):
    validate_against(d, CONFIG_SCHEMA)


def load_yaml(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a mapping")
    return doc


def load_config(path) -> SensorConfig:
    return SensorConfig.from_dict(load_yaml(path))


def dump_config(cfg: SensorConfig, path):
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))


def _data_text(name: str) -> str:
    return resources.files("ptatsense").joinpath("data", name).read_text()


@lru_cache(maxsize=None)
def _default_parsed() -> dict:
    return yaml.safe_load(_data_text("defaults.yaml"))


def default_document() -> dict:
    """The committed fitted defaults: sensor config plus fitted study constants.

    Returns a fresh copy, so callers may modify it.
    """
    return copy.deepcopy(_default_parsed())


def default_config() -> SensorConfig:
    return SensorConfig.from_dict(default_document()["sensor"])
