import numpy as np
import pytest

from ptatsense.config import default_document
from ptatsense.fitting import (
    FitAnchors,
    _profile_adj_r2,
    anchor_report,
    build_defaults,
    fit_all,
    fit_end_residual,
    fit_jitter,
    fit_rail_profile,
)


@pytest.fixture(scope="module")
def result():
    return fit_all()


def test_anchors_hit(result):
    r = result.residuals
    assert r["f_l_hz"] == pytest.approx([17e3, 31.8e3], rel=1e-6)
    assert r["f_h_hz"] == pytest.approx([4.3e6, 9.6e6], rel=1e-6)
    assert r["v_vdd_25_v"] == pytest.approx(0.44, abs=1e-4)  # knot interpolation
    assert r["i_supply_a"] == pytest.approx([0.6e-6, 4.1e-6], rel=1e-6)
    assert r["power_25_w"] == pytest.approx([1.57e-6, 5.61e-6], rel=1e-6)


def test_fitted_study_constants(result):
    assert result.jitter_rel_sigma == pytest.approx(1.68683e-3, rel=1e-4)
    assert result.corner_shift == pytest.approx(0.118865, rel=1e-4)
    assert result.line_headroom == pytest.approx(0.029968, rel=1e-4)
    assert result.config.tcc.m1.n == pytest.approx(4.26, abs=0.01)


def test_shipped_defaults_reproducible(result):
    fresh = build_defaults(result)
    shipped = default_document()
    assert fresh["study"] == pytest.approx(shipped["study"], rel=1e-9)
    for key in ("variation", "anchors", "scenario"):
        assert fresh[key] == shipped[key]
    a, b = fresh["sensor"], shipped["sensor"]
    for dev in ("m1", "m2"):
        for k, v in a["tcc"][dev].items():
            assert v == pytest.approx(b["tcc"][dev][k], rel=1e-9)
    for side in ("reg", "load"):
        for tab in ("alpha", "beta"):
            assert np.allclose(a["regulator"][side][tab]["values"], b["regulator"][side][tab]["values"], rtol=1e-9)


def test_ratio_linearity_anchor():
    a = FitAnchors()
    e = fit_end_residual(a)
    assert e == pytest.approx(0.4779, abs=1e-3)
    assert _profile_adj_r2(a, e) == pytest.approx(a.ratio_adj_r2, abs=1e-9)


def test_rail_profile_rise():
    a = FitAnchors()
    v, c, big_l = fit_rail_profile(a)
    assert v(25.0) == pytest.approx(0.44, abs=1e-5)
    assert v(100.0) / v(0.0) - 1 == pytest.approx(0.03, abs=1e-5)
    assert np.exp(big_l - c * v(0.0) / 273.15) == pytest.approx(4.3e6 / 17e3, rel=1e-5)


def test_jitter_closed_form_is_consistent(result):
    # the analytic variance model inverts exactly
    cfg = result.config
    j = fit_jitter(cfg, 1.84)
    from ptatsense.sensor import noiseless_codes

    x = float(noiseless_codes(cfg, 0.6, 25.0, quantize=False))
    assert np.sqrt(x**2 * j**2 / 16 + x * j**2 + 1 / 6) == pytest.approx(1.84, rel=1e-12)
    with pytest.raises(ValueError):
        fit_jitter(cfg, 0.3)


def test_anchor_report_shape(cfg):
    rep = anchor_report(cfg)
    assert set(rep) == {"f_l_hz", "f_h_hz", "v_vdd_25_v", "i_supply_a", "power_25_w"}
