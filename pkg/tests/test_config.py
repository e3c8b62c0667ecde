import copy

import pytest
import yaml

from ptatsense.config import (
    ConfigError,
    SensorConfig,
    default_config,
    default_document,
    dump_config,
    load_config,
    load_yaml,
)


def test_roundtrip_is_exact(cfg):
    again = SensorConfig.from_dict(cfg.to_dict())
    assert again == cfg
    assert again.config_hash() == cfg.config_hash()


def test_yaml_file_roundtrip(cfg, tmp_path):
    path = tmp_path / "sensor.yaml"
    dump_config(cfg, path)
    assert load_config(path) == cfg


def test_hash_changes_with_parameters(cfg):
    assert cfg.with_headroom(0.01).config_hash() != cfg.config_hash()
    assert cfg.with_jitter(1e-3).config_hash() != cfg.config_hash()
    assert len(cfg.config_hash()) == 16


def test_default_document_is_a_private_copy():
    doc = default_document()
    doc["sensor"]["backend"]["p0"] = 123.0
    assert default_document()["sensor"]["backend"]["p0"] != 123.0


def test_default_sections():
    doc = default_document()
    assert {"sensor", "study", "variation", "anchors", "residuals", "scenario"} <= set(doc)
    assert doc["sensor"]["regulator"]["headroom"] == 0.0
    assert default_config().osc.jitter_rel_sigma == 0.0


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d["tcc"]["m1"].update(w_over_l=-1.0), "$.tcc.m1.w_over_l"),
        (lambda d: d["osc"]["slow"].pop("c_load"), "$.osc.slow"),
        (lambda d: d["osc"].update(jitter_rel_sigma=0.5), "$.osc.jitter_rel_sigma"),
        (lambda d: d.pop("backend"), "$"),
        (lambda d: d["regulator"]["reg"]["alpha"].update(values="x"), "$.regulator.reg.alpha.values"),
    ],
)
def test_schema_errors_carry_json_path(cfg, mutate, path):
    d = copy.deepcopy(cfg.to_dict())
    mutate(d)
    with pytest.raises(ConfigError) as exc:
        SensorConfig.from_dict(d)
    assert exc.value.path == path
    assert str(exc.value).startswith(path)


def test_semantic_errors_become_config_errors(cfg):
    d = copy.deepcopy(cfg.to_dict())
    d["fdc"]["window_cycles"] = 8
    with pytest.raises(ConfigError):
        SensorConfig.from_dict(d)


def test_load_yaml_errors(tmp_path):
    with pytest.raises(OSError):
        load_yaml(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("a: [1, 2\n")
    with pytest.raises(ConfigError):
        load_yaml(bad)
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text(yaml.safe_dump([1, 2]))
    with pytest.raises(ConfigError):
        load_yaml(scalar)
