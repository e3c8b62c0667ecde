"""Process corners and die-to-die Monte Carlo perturbations."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .device import KnotTable, thermal_voltage, to_kelvin

CORNER_NAMES = ("TT", "FF", "SS", "FS", "SF")


@dataclass(frozen=True)
class Corner:
    """Global threshold shifts; negative means a faster (lower |Vth|) device.

    ``dvth_p`` moves the PMOS sensing devices and the PMOS-dominated load;
    ``dvth_n`` moves the native NMOS regulator stack.
    """

    name: str
    dvth_p: float = 0.0
    dvth_n: float = 0.0

    def __post_init__(self):
        if self.name not in CORNER_NAMES:
            raise ValueError(f"unknown corner {self.name!r}")
        if self.name == "TT" and (self.dvth_p or self.dvth_n):
            raise ValueError("TT corner carries no shift")


def standard_corners(shift: float) -> dict:
    """The five corners with symmetric ``+-shift`` (FS = fast PMOS, slow NMOS)."""
    s = float(shift)
    return {
        "TT": Corner("TT"),
        "FF": Corner("FF", -s, -s),
        "SS": Corner("SS", s, s),
        "FS": Corner("FS", -s, s),
        "SF": Corner("SF", s, -s),
    }


def _scale_alpha(table: KnotTable, beta: KnotTable, dvth: float) -> KnotTable:
    # a threshold shift dvth scales a weak-inversion prefactor by exp(-dvth / (beta kT/q))
    temps = np.asarray(table.temps_c)
    vt = thermal_voltage(to_kelvin(temps))
    factor = np.exp(-dvth / (beta(temps) * vt))
    return KnotTable(table.temps_c, tuple(np.asarray(table.values) * factor))


def apply_corner(cfg, corner: Corner):
    """Return ``cfg`` moved to ``corner``; TT is the identity."""
    if corner.dvth_p == 0.0 and corner.dvth_n == 0.0:
        return cfg
    tcc = replace(
        cfg.tcc,
        m1=replace(cfg.tcc.m1, vth=cfg.tcc.m1.vth + corner.dvth_p),
        m2=replace(cfg.tcc.m2, vth=cfg.tcc.m2.vth + corner.dvth_p),
    )
    rp = cfg.regulator
    reg = replace(rp.reg, alpha=_scale_alpha(rp.reg.alpha, rp.reg.beta, corner.dvth_n))
    load = replace(rp.load, alpha=_scale_alpha(rp.load.alpha, rp.load.beta, corner.dvth_p))
    return replace(cfg, tcc=tcc, regulator=replace(rp, reg=reg, load=load))


@dataclass(frozen=True)
class VariationSpec:
    """Die-to-die magnitudes. ``i0_lot_sigma`` and ``cap_sigma`` are log-normal.

    ``vth_stack_offset`` is a systematic ``Vth(M1) - Vth(M2)`` present on
    every die, carried by M1 so the slow ring (and conversion time) keeps its
    nominal bias; the mismatch sigma is drawn independently per device.
    """

    vth_stack_offset: float = 0.0
    vth_mismatch_sigma: float = 0.0
    i0_lot_sigma: float = 0.0
    cap_sigma: float = 0.0
    jitter_rel_sigma: float = 0.0

    def __post_init__(self):
        for name in ("vth_mismatch_sigma", "i0_lot_sigma", "cap_sigma", "jitter_rel_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class DieSample:
    seed: int
    vth_offsets: dict = field(default_factory=lambda: {"m1": 0.0, "m2": 0.0})
    i0_scales: dict = field(default_factory=lambda: {"m1": 1.0, "m2": 1.0})
    cap_scales: dict = field(default_factory=lambda: {"slow": 1.0, "fast": 1.0})
    jitter_rel_sigma: float = 0.0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "vth_offsets": dict(self.vth_offsets),
            "i0_scales": dict(self.i0_scales),
            "cap_scales": dict(self.cap_scales),
            "jitter_rel_sigma": self.jitter_rel_sigma,
        }


def derive_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Per-item seed: a function of (master, index) only, never of scheduling order."""
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))


def sample_die(spec: VariationSpec, seed) -> DieSample:
    """Draw one die. ``seed`` is an int or a :class:`numpy.random.SeedSequence`."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(5)
    lot = float(np.exp(spec.i0_lot_sigma * z[2]))
    seed_id = seed if isinstance(seed, (int, np.integer)) else int(seed.generate_state(1)[0])
    return DieSample(
        seed=int(seed_id),
        vth_offsets={
            "m1": float(spec.vth_stack_offset + spec.vth_mismatch_sigma * z[0]),
            "m2": float(spec.vth_mismatch_sigma * z[1]),
        },
        i0_scales={"m1": lot, "m2": lot},
        cap_scales={"slow": float(np.exp(spec.cap_sigma * z[3])), "fast": float(np.exp(spec.cap_sigma * z[4]))},
        jitter_rel_sigma=spec.jitter_rel_sigma,
    )


def nominal_die(jitter_rel_sigma: float = 0.0) -> DieSample:
    return DieSample(seed=0, jitter_rel_sigma=jitter_rel_sigma)


def apply_die(cfg, die: DieSample):
    """Return ``cfg`` with the die's offsets and scales applied."""
    m1, m2 = cfg.tcc.m1, cfg.tcc.m2
    tcc = replace(
        cfg.tcc,
        m1=replace(m1, vth=m1.vth + die.vth_offsets["m1"], i0=m1.i0 * die.i0_scales["m1"]),
        m2=replace(m2, vth=m2.vth + die.vth_offsets["m2"], i0=m2.i0 * die.i0_scales["m2"]),
    )
    osc = replace(
        cfg.osc,
        slow=replace(cfg.osc.slow, c_load=cfg.osc.slow.c_load * die.cap_scales["slow"]),
        fast=replace(cfg.osc.fast, c_load=cfg.osc.fast.c_load * die.cap_scales["fast"]),
        jitter_rel_sigma=die.jitter_rel_sigma,
    )
    return replace(cfg, tcc=tcc, osc=osc)
