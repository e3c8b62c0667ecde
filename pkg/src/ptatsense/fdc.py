"""Frequency-to-digital back end.

A 5-bit ripple counter clocked by the slow ring sets the window: its MSB
rises on the 16th slow edge after START and freezes a 13-bit counter
clocked by the fast ring. The frozen value is the temperature code.

Edge convention: a fast edge coincident with START is not counted (the
counters are just leaving reset), one coincident with DONE is counted
(DONE is the MSB of a ripple counter and settles after that edge). For
constant periods and zero phase this makes the code exactly
``floor(16 f_H / f_L)``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .frontend import ConfigurationError


class ConversionInputError(ValueError):
    """Period sequences too short to cover the conversion window."""


@dataclass(frozen=True)
class FdcConfig:
    ref_bits: int = 5
    code_bits: int = 13
    window_cycles: int = 16

    def __post_init__(self):
        if self.window_cycles != 2 ** (self.ref_bits - 1):
            raise ConfigurationError("window must equal 2**(ref_bits-1): the reference MSB ends the window")
        if self.code_bits < 1:
            raise ConfigurationError("code counter needs at least one bit")

    @property
    def code_max(self) -> int:
        return 2**self.code_bits - 1


@dataclass(frozen=True)
class ConversionResult:
    code: int
    window: float
    t_conv: float
    energy: float = float("nan")
    overflow: bool = False


@dataclass(frozen=True)
class BackendPower:
    """Back-end (counters + level shifters) power, affine in V_DD."""

    p0: float
    p1: float

    def __call__(self, v_dd):
        return self.p0 + self.p1 * np.asarray(v_dd)


def run_conversion(hi_periods, lo_periods, phase: float = 0.0, cfg: FdcConfig = FdcConfig()) -> ConversionResult:
    """Count fast-ring edges inside one reference window.

    START coincides with a slow-ring rising edge at t = 0; the slow edges
    follow at the cumulative sums of ``lo_periods`` and DONE is the
    ``window_cycles``-th of them. The first fast edge after START arrives
    at ``(1 - phase) * hi_periods[0]``, the rest follow at the remaining
    periods.
    """
    if not 0.0 <= phase < 1.0:
        raise ValueError(f"phase must lie in [0, 1), got {phase}")
    lo = np.asarray(lo_periods, dtype=float)
    hi = np.asarray(hi_periods, dtype=float)
    if lo.size < cfg.window_cycles:
        raise ConversionInputError(f"need {cfg.window_cycles} slow periods, got {lo.size}")
    if hi.size == 0:
        raise ConversionInputError("no fast periods supplied")
    done = float(np.cumsum(lo[: cfg.window_cycles])[-1])
    steps = hi.copy()
    steps[0] *= 1.0 - phase
    edges = np.cumsum(steps)
    count = int(np.searchsorted(edges, done, side="right"))
    if count == edges.size and count <= cfg.code_max:
        raise ConversionInputError("fast period stream exhausted before DONE")
    overflow = count > cfg.code_max
    return ConversionResult(code=min(count, cfg.code_max), window=done, t_conv=done, overflow=overflow)


def code_closed_form(f_h, f_l, window_cycles: int = 16):
    """Noise-free code ``floor(window_cycles * f_h / f_l)``."""
    out = np.floor(window_cycles * np.asarray(f_h, dtype=float) / np.asarray(f_l, dtype=float)).astype(np.int64)
    return int(out) if out.ndim == 0 else out


class EventDrivenFdc:
    """Bit-level reference model of the two ripple counters.

    Processes slow and fast rising edges from a time-ordered event queue and
    updates the counter registers bit by bit. Slow and much simpler than
    :func:`run_conversion`, which it exists to cross-check.
    """

    HI, LO = 0, 1  # tie order: the fast edge at DONE is seen first

    def __init__(self, cfg: FdcConfig = FdcConfig()):
        self.cfg = cfg
        self.ref_bits = [0] * cfg.ref_bits
        self.code_bits = [0] * cfg.code_bits
        self.overflow = False

    def reset(self):
        self.ref_bits = [0] * self.cfg.ref_bits
        self.code_bits = [0] * self.cfg.code_bits
        self.overflow = False

    @staticmethod
    def _ripple(bits):
        """Toggle bit 0 and propagate the carry; returns True on wrap-around."""
        for i in range(len(bits)):
            bits[i] ^= 1
            if bits[i] == 1:
                return False
        return True

    @staticmethod
    def _value(bits) -> int:
        return sum(b << i for i, b in enumerate(bits))

    def convert(self, hi_periods: Sequence[float], lo_periods: Sequence[float], phase: float = 0.0) -> ConversionResult:
        self.reset()
        hi = iter(hi_periods)
        lo = iter(lo_periods)
        queue = []
        try:
            heapq.heappush(queue, ((1.0 - phase) * next(hi), self.HI))
            heapq.heappush(queue, (next(lo), self.LO))
        except StopIteration:
            raise ConversionInputError("empty period stream") from None
        msb = self.cfg.ref_bits - 1
        while True:
            if not queue:
                raise ConversionInputError("period stream exhausted before DONE")
            t, kind = heapq.heappop(queue)
            try:
                if kind == self.HI:
                    if not self.overflow and self._ripple(self.code_bits):
                        # saturate instead of wrapping
                        self.code_bits = [1] * self.cfg.code_bits
                        self.overflow = True
                    heapq.heappush(queue, (t + next(hi), self.HI))
                else:
                    self._ripple(self.ref_bits)
                    if self.ref_bits[msb]:
                        code = self._value(self.code_bits)
                        return ConversionResult(code=code, window=t, t_conv=t, overflow=self.overflow)
                    heapq.heappush(queue, (t + next(lo), self.LO))
            except StopIteration:
                raise ConversionInputError("period stream exhausted before DONE") from None


def mux_conversion(
    frontends: Sequence[Callable[[], tuple]],
    select: int,
    phase: float = 0.0,
    cfg: FdcConfig = FdcConfig(),
) -> ConversionResult:
    """Route one of several front ends to the shared back end.

    Each entry of ``frontends`` is a zero-argument callable returning that
    sensor's ``(hi_periods, lo_periods)``; only the selected one is called.
    """
    if not 0 <= select < len(frontends):
        raise IndexError(f"select={select} out of range for {len(frontends)} front ends")
    hi, lo = frontends[select]()
    return run_conversion(hi, lo, phase, cfg)


def conversion_energy(cfg, state, t_conv):
    """Energy of one conversion: ``(V_DD * I_supply + P_backend(V_DD)) * t_conv``."""
    t = np.asarray(t_conv, dtype=float)
    if np.any(t <= 0):
        raise ValueError("conversion time must be positive")
    power = np.asarray(state.v_dd) * np.asarray(state.i_supply) + cfg.backend(state.v_dd)
    out = power * t
    return float(out) if np.ndim(out) == 0 else out


def with_energy(result: ConversionResult, energy: float) -> ConversionResult:
    return replace(result, energy=float(energy))
