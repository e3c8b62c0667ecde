"""End-to-end sensor: temperature -> front end -> ring frequencies -> code.

:class:`TemperatureSensor` wraps the chain as a scikit-learn transformer so
it composes with :class:`~ptatsense.metrology.TwoPointCalibrator` in a
:class:`~sklearn.pipeline.Pipeline`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .fdc import ConversionInputError, ConversionResult, code_closed_form, conversion_energy, run_conversion, with_energy
from .frontend import FrontEndState, frontend_state
from .oscillator import JitteredPeriodStream, frequencies, osc_period
from .variation import apply_corner, apply_die


@dataclass(frozen=True)
class Operating:
    """Noise-free operating point: front-end state plus ring frequencies."""

    state: FrontEndState
    f_h: object
    f_l: object

    @property
    def ratio(self):
        return np.asarray(self.f_h) / np.asarray(self.f_l)

    def at(self, i: int) -> "Operating":
        """Scalar operating point ``i`` of a vectorised one."""
        pick = lambda x: float(np.asarray(x)[i]) if np.ndim(x) else x
        st = self.state
        state = FrontEndState(*(pick(getattr(st, k)) for k in ("v_vdd", "i_h", "i_l", "i_supply", "temp", "v_dd")))
        return Operating(state, pick(self.f_h), pick(self.f_l))


def operating_point(cfg, v_dd, temp_c) -> Operating:
    state = frontend_state(cfg, v_dd, temp_c)
    f_h, f_l = frequencies(cfg.osc, state.i_h, state.i_l)
    return Operating(state, f_h, f_l)


def noiseless_codes(cfg, v_dd, temp_c, quantize: bool = True):
    """Jitter-free codes; ``quantize=False`` returns the unfloored ``16 f_H / f_L``."""
    op = operating_point(cfg, v_dd, temp_c)
    if quantize:
        return code_closed_form(op.f_h, op.f_l, cfg.fdc.window_cycles)
    return cfg.fdc.window_cycles * op.ratio


def total_power(cfg, state: FrontEndState):
    return np.asarray(state.v_dd) * np.asarray(state.i_supply) + cfg.backend(state.v_dd)


def _stream_seeds(seed):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return ss.spawn(3)


def simulate_conversion(cfg, v_dd: float, temp_c: float, seed=None, phase=None, op: Operating = None) -> ConversionResult:
    """One conversion with period jitter and a random START phase.

    With zero jitter and ``phase=None`` the phase is 0 and the result is the
    closed-form code. ``seed`` may be an int or a SeedSequence. A scalar
    ``op`` for the same ``(cfg, v_dd, temp_c)`` skips the rail solve.
    """
    if op is None:
        op = operating_point(cfg, v_dd, temp_c)
    sigma = cfg.osc.jitter_rel_sigma
    s_hi, s_lo, s_phase = _stream_seeds(seed)
    if phase is None:
        phase = float(np.random.default_rng(s_phase).random()) if sigma > 0 else 0.0
    p_hi = osc_period(cfg.osc.fast, op.state.i_h)
    p_lo = osc_period(cfg.osc.slow, op.state.i_l)
    hi_stream = JitteredPeriodStream(p_hi, sigma, s_hi)
    lo = JitteredPeriodStream(p_lo, sigma, s_lo).take(cfg.fdc.window_cycles)
    expected = cfg.fdc.window_cycles * p_lo / p_hi
    chunk = int(expected * (1.0 + 8.0 * sigma)) + 32
    hi = hi_stream.take(chunk)
    while True:
        try:
            result = run_conversion(hi, lo, phase, cfg.fdc)
            break
        except ConversionInputError:
            hi = np.concatenate([hi, hi_stream.take(chunk)])
    return with_energy(result, conversion_energy(cfg, op.state, result.t_conv))


def sensor_config(cfg, die=None, corner=None):
    if corner is not None:
        cfg = apply_corner(cfg, corner)
    if die is not None:
        cfg = apply_die(cfg, die)
    return cfg


class TemperatureSensor(TransformerMixin, BaseEstimator):
    """Maps true temperatures (degC) to output codes.

    Parameters
    ----------
    config : SensorConfig or None
        Parameter set; ``None`` uses the committed fitted defaults.
    v_dd : float
        External supply in volt.
    die, corner : optional
        Monte Carlo draw and process corner applied on top of ``config``.
    noise : bool
        Simulate jittered conversions instead of the closed-form code.
    reads : int
        Conversions averaged per temperature when ``noise`` is set.
    seed : int
        Master seed; the k-th transformed row uses child seed k.
    """

    def __init__(self, config=None, v_dd=0.6, die=None, corner=None, noise=False, reads=1, seed=0):
        self.config = config
        self.v_dd = v_dd
        self.die = die
        self.corner = corner
        self.noise = noise
        self.reads = reads
        self.seed = seed

    def fit(self, X, y=None):
        from .config import default_config

        check_array(X, ensure_2d=False)
        if self.reads < 1:
            raise ValueError("reads must be >= 1")
        base = self.config if self.config is not None else default_config()
        self.config_ = sensor_config(base, self.die, self.corner)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        temps = check_array(X, ensure_2d=False).reshape(-1)
        if not self.noise or self.config_.osc.jitter_rel_sigma == 0:
            codes = noiseless_codes(self.config_, self.v_dd, temps).astype(float)
            return codes.reshape(-1, 1)
        root = np.random.SeedSequence(self.seed)
        out = np.empty(temps.size)
        for i, (t, ss) in enumerate(zip(temps, root.spawn(temps.size))):
            reads = [simulate_conversion(self.config_, self.v_dd, float(t), s).code for s in ss.spawn(self.reads)]
            out[i] = np.mean(reads)
        return out.reshape(-1, 1)
