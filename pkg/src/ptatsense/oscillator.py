"""Current-starved ring oscillators.

Period model: ``N * (C_L * dV / I_bias + t_edge)``. The slow ring (13
stages) is biased by I_L, the fast ring (7 stages) by I_H.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .device import DomainError
from .frontend import ConfigurationError

TRUNCATION_SIGMAS = 5.0


@dataclass(frozen=True)
class OscParams:
    n_stages: int
    c_load: float
    delta_v: float
    t_edge: float = 0.0

    def __post_init__(self):
        if self.n_stages < 3 or self.n_stages % 2 == 0:
            raise ValueError(f"ring needs an odd stage count >= 3, got {self.n_stages}")
        if self.c_load <= 0 or self.delta_v <= 0:
            raise ValueError("c_load and delta_v must be positive")
        if self.t_edge < 0:
            raise ValueError("t_edge must be non-negative")

    @property
    def charge(self) -> float:
        """Switched charge per stage, C_L * dV."""
        return self.c_load * self.delta_v


@dataclass(frozen=True)
class OscPair:
    slow: OscParams
    fast: OscParams
    jitter_rel_sigma: float = 0.0

    def __post_init__(self):
        if self.jitter_rel_sigma < 0:
            raise ValueError("jitter_rel_sigma must be >= 0")


def osc_period(p: OscParams, i_bias):
    i = np.asarray(i_bias, dtype=float)
    if np.any(i <= 0):
        raise DomainError(f"bias current must be positive, got {i_bias}")
    out = p.n_stages * (p.charge / i + p.t_edge)
    return float(out) if out.ndim == 0 else out


def frequencies(pair: OscPair, i_h, i_l):
    """Return ``(f_h, f_l)``; a fast ring not faster than the slow one is a configuration error."""
    f_h = 1.0 / np.asarray(osc_period(pair.fast, i_h))
    f_l = 1.0 / np.asarray(osc_period(pair.slow, i_l))
    if np.any(f_h <= f_l):
        raise ConfigurationError("f_H <= f_L: code counter would not resolve temperature")
    if f_h.ndim == 0:
        return float(f_h), float(f_l)
    return f_h, f_l


class JitteredPeriodStream:
    """Endless stream of oscillator periods with white relative jitter.

    Each period is ``nominal * (1 + g)``, ``g ~ N(0, sigma_rel)`` truncated
    to +-5 sigma by redrawing. Deterministic for a given seed; a stream owns
    its generator and is meant for a single consumer.
    """

    def __init__(self, nominal: float, sigma_rel: float, seed=None):
        if nominal <= 0:
            raise DomainError("nominal period must be positive")
        if sigma_rel < 0:
            raise ValueError("sigma_rel must be >= 0")
        if sigma_rel * TRUNCATION_SIGMAS >= 1.0:
            raise ConfigurationError("5 sigma of jitter would allow non-positive periods")
        self.nominal = float(nominal)
        self.sigma_rel = float(sigma_rel)
        self._rng = np.random.default_rng(seed)

    def take(self, count: int) -> np.ndarray:
        if self.sigma_rel == 0.0:
            return np.full(count, self.nominal)
        g = self._rng.standard_normal(count)
        bad = np.abs(g) > TRUNCATION_SIGMAS
        while np.any(bad):
            g[bad] = self._rng.standard_normal(int(bad.sum()))
            bad = np.abs(g) > TRUNCATION_SIGMAS
        return self.nominal * (1.0 + self.sigma_rel * g)

    def __iter__(self):
        while True:
            yield from self.take(1024)


def jittered_period_stream(p: OscParams, i_bias: float, sigma_rel: float, seed=None) -> JitteredPeriodStream:
    return JitteredPeriodStream(osc_period(p, i_bias), sigma_rel, seed)
