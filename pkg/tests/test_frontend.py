import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptatsense.device import DeviceParams, ExpIVCoeffs, KnotTable, subthreshold_current, to_kelvin
from ptatsense.frontend import (
    ConfigurationError,
    HeadroomWarning,
    RegulatorParams,
    TccParams,
    current_ratio_model,
    fit_linear_ratio,
    frontend_state,
    solve_vvdd,
    tcc_currents,
    vvdd_closed_form,
)

T11 = tuple(float(t) for t in range(0, 101, 10))


def _reg(alpha_r=3e-3, alpha_l=1e-6, beta_r=3.0, beta_l=1.5):
    const = lambda x: KnotTable(T11, (x,) * len(T11))
    return RegulatorParams(
        ExpIVCoeffs(const(alpha_r), const(beta_r), "regulator"),
        ExpIVCoeffs(const(alpha_l), const(beta_l), "load"),
    )


def test_bisection_matches_closed_form_exact_tables():
    rp = _reg()
    t = np.repeat(np.linspace(0, 100, 11), 13)
    v = np.tile(np.linspace(0.6, 1.8, 13), 11)
    assert np.max(np.abs(solve_vvdd(rp, v, t) - vvdd_closed_form(rp, t))) <= 1e-9


def test_equal_alphas_give_zero_rail_and_warning():
    rp = _reg(alpha_r=1e-6, alpha_l=1e-6)
    assert vvdd_closed_form(rp, 25.0) == 0.0
    with pytest.warns(HeadroomWarning):
        assert solve_vvdd(rp, 0.6, 25.0) == 0.0


def test_crossing_above_supply_clamps():
    rp = _reg(alpha_r=1e6)
    with pytest.warns(HeadroomWarning):
        assert solve_vvdd(rp, 0.6, 25.0) == 0.6


def test_closed_form_beta_load_limit():
    # beta_L -> infinity leaves beta_R V_T log(alpha_R / alpha_L)
    rp = _reg(beta_l=1e9)
    from ptatsense.device import thermal_voltage

    expect = 3.0 * thermal_voltage(to_kelvin(25.0)) * np.log(3e-3 / 1e-6)
    assert vvdd_closed_form(rp, 25.0) == pytest.approx(expect, rel=1e-8)


def test_headroom_closed_form_needs_vdd():
    rp = RegulatorParams(_reg().reg, _reg().load, headroom=0.05)
    with pytest.raises(ValueError):
        vvdd_closed_form(rp, 25.0)
    assert solve_vvdd(rp, 1.2, 25.0) == pytest.approx(vvdd_closed_form(rp, 25.0, 1.2), abs=1e-9)


def test_fitted_rail_level_and_drift(cfg):
    # published rail level about 440 mV; rise under 5 % over 0-100 degC
    assert solve_vvdd(cfg.regulator, 0.6, 25.0) == pytest.approx(0.440, abs=0.010)
    v = solve_vvdd(cfg.regulator, 0.6, np.array([0.0, 100.0]))
    assert abs(v[1] / v[0] - 1.0) <= 0.05


def test_fitted_rail_matches_closed_form(cfg):
    t = np.linspace(0, 100, 11)
    assert np.allclose(solve_vvdd(cfg.regulator, 0.6, t), vvdd_closed_form(cfg.regulator, t), atol=1e-9, rtol=0)


def test_degenerate_sizing_is_rejected():
    d = DeviceParams(1.0, 1e-9, 0.45, 1.3)
    with pytest.raises(ConfigurationError):
        tcc_currents(TccParams(d, d), 0.44, 25.0)


def test_currents_rise_with_temperature(cfg, temps):
    st_ = frontend_state(cfg, 0.6, temps)
    assert np.all(np.diff(st_.i_h) > 0) and np.all(np.diff(st_.i_l) > 0)
    assert np.all(st_.i_h > st_.i_l)


def test_ratio_model_against_two_device_evaluations():
    # oracle: two independent weak-inversion evaluations at V/3 and V/2
    m1 = DeviceParams(40.0, 2e-7, 0.45, 1.4)
    m2 = DeviceParams(1.0, 2e-7, 0.45, 1.4)
    tp = TccParams(m1, m2)
    t = np.arange(0.0, 101.0)
    tk = to_kelvin(t)
    oracle = subthreshold_current(m1, 0.44 / 3, None, tk) / subthreshold_current(m2, 0.44 / 2, None, tk)
    assert np.max(np.abs(current_ratio_model(tp, 0.44, t) / oracle - 1)) <= 1e-12


def test_ratio_model_limits():
    tp = TccParams(DeviceParams(40.0, 1e-9, 0.4, 1.3), DeviceParams(1.0, 1e-9, 0.4, 1.3))
    assert np.allclose(current_ratio_model(tp, 0.0, np.array([0.0, 50.0, 100.0])), 40.0, rtol=1e-15)
    # T -> infinity: exponent vanishes (evaluated far outside the physical range)
    assert current_ratio_model(tp, 0.44, 1e12) == pytest.approx(40.0, rel=1e-9)


def test_ratio_model_requires_matched_devices():
    tp = TccParams(DeviceParams(40.0, 1e-9, 0.4, 1.3), DeviceParams(1.0, 1e-9, 0.41, 1.3))
    with pytest.raises(ConfigurationError):
        current_ratio_model(tp, 0.44, 25.0)


def test_fitted_ratio_linear_constants(cfg, temps):
    # intercept anchored to the published p = 2.55; the slope is reported, not enforced
    st_ = frontend_state(cfg, 0.6, temps)
    m, p, adj = fit_linear_ratio(temps, st_.i_h / st_.i_l)
    assert p == pytest.approx(2.55, abs=0.01)
    assert m == pytest.approx(4.8869e-3, rel=1e-3)  # frozen fit output
    assert adj >= 0.999


def test_fit_linear_exact_line():
    x = np.arange(10.0)
    m, p, adj = fit_linear_ratio(x, 3 * x - 2)
    assert (m, p, adj) == (pytest.approx(3.0), pytest.approx(-2.0), 1.0)


def test_fit_linear_errors():
    with pytest.raises(ValueError):
        fit_linear_ratio([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        fit_linear_ratio([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def test_supply_outside_range_warns(cfg):
    with pytest.warns(RuntimeWarning):
        frontend_state(cfg, 2.0, 25.0)


def test_headroom_zero_rail_is_supply_independent(cfg):
    v = solve_vvdd(cfg.regulator, np.linspace(0.6, 1.8, 13), 25.0)
    assert np.ptp(v) <= 1e-9


@pytest.mark.xfail(strict=True, reason="fitted headroom moves the rail by about 2.7 % across 0.6-1.8 V, above 2 %")
def test_fitted_headroom_rail_spread_within_two_percent(cfg):
    from ptatsense.config import default_document

    h = default_document()["study"]["line_headroom"]
    v = solve_vvdd(cfg.with_headroom(h).regulator, np.linspace(0.6, 1.8, 13), 25.0)
    assert v.max() / v.min() - 1 <= 0.02


@settings(max_examples=60, deadline=None)
@given(
    ar=st.floats(1e-4, 1e-1),
    al=st.floats(1e-9, 1e-6),
    br=st.floats(1.0, 4.0),
    bl=st.floats(0.5, 3.0),
    t=st.floats(0.0, 100.0),
)
def test_bisection_property(ar, al, br, bl, t):
    rp = _reg(ar, al, br, bl)
    v_cf = vvdd_closed_form(rp, t)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HeadroomWarning)
        v = solve_vvdd(rp, 1.8, t)
    if 0 < v_cf < 1.8:
        assert abs(v - v_cf) <= 1e-9
