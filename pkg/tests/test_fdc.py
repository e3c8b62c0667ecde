import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptatsense.fdc import (
    BackendPower,
    ConversionInputError,
    EventDrivenFdc,
    FdcConfig,
    code_closed_form,
    conversion_energy,
    mux_conversion,
    run_conversion,
)
from ptatsense.frontend import ConfigurationError, FrontEndState


def _const(f_h, f_l, n_hi=None):
    n_hi = n_hi or int(16 * f_h / f_l) + 4
    return np.full(n_hi, 1 / f_h), np.full(16, 1 / f_l)


def test_equal_frequencies_give_sixteen():
    hi, lo = _const(1e5, 1e5)
    assert run_conversion(hi, lo).code == 16
    assert EventDrivenFdc().convert(hi, lo).code == 16
    assert code_closed_form(1e5, 1e5) == 16


def test_published_endpoint_codes():
    # floor(16 * 4.3e6 / 17e3) and floor(16 * 9.6e6 / 31.8e3)
    assert code_closed_form(4.3e6, 17e3) == 4047
    assert code_closed_form(9.6e6, 31.8e3) == 4830
    hi, lo = _const(4.3e6, 17e3)
    assert run_conversion(hi, lo).code == 4047
    lsb = 100.0 / (4830 - 4047)
    assert lsb == pytest.approx(0.128, abs=1e-3)


def test_codes_in_window_of_closed_form():
    rng = np.random.default_rng(11)
    for _ in range(10):
        f_h, f_l = rng.uniform(1e6, 5e6), rng.uniform(1e4, 4e4)
        hi, lo = _const(f_h, f_l)
        ref = code_closed_form(f_h, f_l)
        codes = {run_conversion(hi, lo, ph).code for ph in np.linspace(0, 1, 200, endpoint=False)}
        assert codes <= {ref, ref + 1}


def test_event_driven_matches_vectorised():
    rng = np.random.default_rng(5)
    for _ in range(40):
        f_h, f_l = rng.uniform(2e5, 2e6), rng.uniform(1e4, 4e4)
        hi = (1 / f_h) * (1 + 0.01 * rng.standard_normal(int(16 * f_h / f_l) + 50))
        lo = (1 / f_l) * (1 + 0.01 * rng.standard_normal(16))
        ph = float(rng.random())
        a, b = run_conversion(hi, lo, ph), EventDrivenFdc().convert(hi, lo, ph)
        assert (a.code, a.overflow) == (b.code, b.overflow)
        assert a.t_conv == pytest.approx(b.t_conv, rel=1e-12)


def test_window_is_sixteen_slow_periods():
    hi, lo = _const(1e6, 2e4)
    r = run_conversion(hi, lo)
    assert r.t_conv == pytest.approx(16 / 2e4, rel=1e-12)


def test_saturation_at_code_max():
    hi, lo = _const(1e9, 1e6, n_hi=20000)  # 16000 edges in the window
    r = run_conversion(hi, lo)
    assert (r.code, r.overflow) == (8191, True)
    e = EventDrivenFdc().convert(hi, lo)
    assert (e.code, e.overflow) == (8191, True)


def test_small_counter_saturates_in_both_models():
    cfg = FdcConfig(code_bits=4)
    hi, lo = _const(1e6, 5e4, n_hi=400)
    assert run_conversion(hi, lo, cfg=cfg).code == 15
    assert EventDrivenFdc(cfg).convert(hi, lo).code == 15


def test_exhausted_streams():
    with pytest.raises(ConversionInputError):
        run_conversion(np.full(10, 1e-6), np.full(16, 1e-4))
    with pytest.raises(ConversionInputError):
        run_conversion(np.full(10, 1e-6), np.full(15, 1e-4))
    with pytest.raises(ConversionInputError):
        EventDrivenFdc().convert(np.full(10, 1e-6), np.full(16, 1e-4))


def test_phase_range():
    hi, lo = _const(1e6, 2e4)
    with pytest.raises(ValueError):
        run_conversion(hi, lo, phase=1.0)


def test_window_must_match_reference_counter():
    with pytest.raises(ConfigurationError):
        FdcConfig(ref_bits=5, window_cycles=8)


def test_mux_routes_selected_frontend():
    calls = []

    def fe(k, f_h):
        def f():
            calls.append(k)
            return _const(f_h, 2e4)

        return f

    fes = [fe(k, 1e6 * (1 + 0.1 * k)) for k in range(4)]
    for k in range(4):
        calls.clear()
        r = mux_conversion(fes, k)
        assert calls == [k]
        assert r.code == run_conversion(*_const(1e6 * (1 + 0.1 * k), 2e4)).code
    with pytest.raises(IndexError):
        mux_conversion(fes, 4)


def test_mux_monte_carlo_dies_match_standalone(cfg):
    from ptatsense.sensor import operating_point
    from ptatsense.variation import VariationSpec, apply_die, sample_die

    spec = VariationSpec(vth_mismatch_sigma=2e-3, i0_lot_sigma=0.1, cap_sigma=0.02)
    streams = []
    for i in range(4):
        c = apply_die(cfg, sample_die(spec, i))
        op = operating_point(c, 0.6, 40.0)
        streams.append(_const(op.f_h, op.f_l))
    for k, s in enumerate(streams):
        assert mux_conversion([lambda s=s: s for s in streams], k).code == run_conversion(*s).code


def test_energy_arithmetic():
    class Cfg:
        backend = BackendPower(0.0, 0.0)

    st_ = FrontEndState(0.44, 0, 0, 1e-6, 25.0, 1.0)
    assert conversion_energy(Cfg, st_, 1e-3) == pytest.approx(1e-9, rel=1e-15)
    with pytest.raises(ValueError):
        conversion_energy(Cfg, st_, 0.0)


@settings(max_examples=50, deadline=None)
@given(ratio=st.floats(1.0, 400.0), phase=st.floats(0.0, 0.999999), f_l=st.floats(1e4, 5e4))
def test_code_property(ratio, phase, f_l):
    f_h = ratio * f_l
    hi, lo = _const(f_h, f_l)
    code = run_conversion(hi, lo, phase).code
    assert abs(code - code_closed_form(f_h, f_l)) <= 1
    assert EventDrivenFdc().convert(hi, lo, phase).code == code
