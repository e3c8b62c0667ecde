import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptatsense.fitting import corner_errors_50c
from ptatsense.sensor import noiseless_codes
from ptatsense.variation import (
    Corner,
    VariationSpec,
    apply_corner,
    apply_die,
    derive_seed,
    nominal_die,
    sample_die,
    standard_corners,
)


def test_tt_is_identity(cfg):
    assert apply_corner(cfg, Corner("TT")) is cfg


def test_corner_validation():
    with pytest.raises(ValueError):
        Corner("XY")
    with pytest.raises(ValueError):
        Corner("TT", 0.01, 0.0)


def test_standard_corner_signs():
    c = standard_corners(0.05)
    assert (c["FS"].dvth_p, c["FS"].dvth_n) == (-0.05, 0.05)
    assert (c["SF"].dvth_p, c["SF"].dvth_n) == (0.05, -0.05)
    assert (c["FF"].dvth_p, c["SS"].dvth_p) == (-0.05, 0.05)


def test_zero_sigmas_give_nominal_die(cfg):
    for seed in (0, 1, 12345):
        d = sample_die(VariationSpec(), seed)
        assert apply_die(cfg, d) == apply_die(cfg, nominal_die())
    assert apply_die(cfg, nominal_die()) == cfg


def test_same_seed_same_die():
    spec = VariationSpec(0.0, 1e-3, 0.1, 0.02, 1e-3)
    assert sample_die(spec, derive_seed(7, 3)) == sample_die(spec, derive_seed(7, 3))
    assert sample_die(spec, derive_seed(7, 3)) != sample_die(spec, derive_seed(7, 4))


def test_stack_offset_on_m1_only():
    d = sample_die(VariationSpec(vth_stack_offset=-0.02), 1)
    assert d.vth_offsets == {"m1": -0.02, "m2": 0.0}


def test_negative_sigma_rejected():
    with pytest.raises(ValueError):
        VariationSpec(cap_sigma=-0.1)


@pytest.mark.parametrize("name", ["TT", "FF", "SS", "FS", "SF"])
def test_corners_keep_codes_monotone_and_bounded(cfg, temps, name):
    from ptatsense.config import default_document

    shift = default_document()["study"]["corner_shift"]
    c = apply_corner(cfg, standard_corners(shift)[name])
    for v_dd in (0.6, 1.2, 1.8):
        codes = noiseless_codes(c, v_dd, temps)
        assert np.all(np.diff(codes) >= 0)
        assert codes.max() <= 8191


def test_fs_corner_error_matches_target(cfg):
    from ptatsense.config import default_document

    shift = default_document()["study"]["corner_shift"]
    fs, sf = corner_errors_50c(cfg, shift)
    assert fs == pytest.approx(-1.14, abs=1e-4)  # fitted target
    assert sf == pytest.approx(0.3824, abs=2e-3)  # frozen model output


@pytest.mark.xfail(strict=True, reason="SF error saturates near +0.47 degC for any symmetric threshold shift")
def test_sf_corner_error_reaches_published_value(cfg):
    from ptatsense.config import default_document

    shift = default_document()["study"]["corner_shift"]
    assert corner_errors_50c(cfg, shift)[1] == pytest.approx(1.16, abs=0.3)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_sampled_dies_stay_physical(cfg, seed):
    from ptatsense.config import default_document
    from ptatsense.sensor import operating_point

    spec = VariationSpec(**default_document()["variation"])
    c = apply_die(cfg, sample_die(spec, seed))
    op = operating_point(c, 0.6, np.array([0.0, 50.0, 100.0]))
    assert np.all(op.f_h > op.f_l)
    assert np.all(np.diff(noiseless_codes(c, 0.6, np.arange(0.0, 101.0, 5.0))) >= 0)
