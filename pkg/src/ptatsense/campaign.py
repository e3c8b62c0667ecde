"""Scenario-driven sweeps, Monte Carlo populations and noise studies.

Every random quantity is drawn from a :class:`numpy.random.SeedSequence`
whose ``spawn_key`` names the item it belongs to (die, stream, supply
index, temperature index), so results never depend on how work is split
across processes. Workers return plain data and the parent writes files
in die order.
"""

from __future__ import annotations

import csv
import io
import json
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import ConfigError, SensorConfig, default_document, hash_document, load_yaml, validate_against
from .fdc import conversion_energy
from .frontend import fit_linear_ratio
from .metrology import (
    MetricsReport,
    inaccuracy_stats,
    line_sensitivity,
    population_three_sigma,
    relative_inaccuracy,
    two_point_calibrate,
)
from .sensor import noiseless_codes, operating_point, simulate_conversion, total_power
from .variation import CORNER_NAMES, VariationSpec, apply_corner, apply_die, sample_die, standard_corners

CSV_COLUMNS = (
    "temp_C",
    "vdd_V",
    "die_id",
    "v_vdd_V",
    "i_supply_A",
    "f_h_Hz",
    "f_l_Hz",
    "code",
    "t_est_C",
    "inaccuracy_C",
    "power_W",
    "energy_J",
)
CSV_VERSION = 1
CAL_TEMPS = (10.0, 90.0)
REPORT_VDD = 0.6
REPORT_TEMP = 30.0

# spawn_key streams under (die_id, stream, ...)
STREAM_DIE, STREAM_READ, STREAM_CAL, STREAM_RESOLUTION = range(4)

_NUM = {"type": "number"}
SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Scenario",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "sensor": {"oneOf": [{"type": "string"}, {"type": "object"}]},
        "overrides": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "headroom": {"oneOf": [_NUM, {"const": "fitted"}]},
                "jitter_rel_sigma": {"oneOf": [{"type": "number", "minimum": 0}, {"const": "fitted"}]},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "temp_start": _NUM,
                "temp_stop": _NUM,
                "temp_step": {"type": "number", "exclusiveMinimum": 0},
                "vdd_list": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
            },
        },
        "campaign": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_dies": {"type": "integer", "minimum": 1},
                "master_seed": {"type": "integer", "minimum": 0},
                "corners": {"type": "array", "items": {"enum": list(CORNER_NAMES)}},
            },
        },
        "variation": {
            "oneOf": [
                {"const": "fitted"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        k: {"type": "number", "minimum": 0}
                        for k in ("vth_mismatch_sigma", "i0_lot_sigma", "cap_sigma", "jitter_rel_sigma")
                    }
                    | {"vth_stack_offset": _NUM},
                },
            ]
        },
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "enable": {"type": "boolean"},
                "repeats": {"type": "integer", "minimum": 2},
                "reads": {"type": "integer", "minimum": 1},
                "cal_reads": {"type": "integer", "minimum": 1},
                "temp_c": _NUM,
                "vdd": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["csv", "json"]}, "minItems": 1},
            },
        },
    },
}


@dataclass(frozen=True)
class Scenario:
    """A resolved scenario: everything a run needs, nothing left to defaults."""

    sensor: SensorConfig
    variation: VariationSpec
    temps_c: tuple
    vdd_list: tuple
    n_dies: int = 1
    master_seed: int = 0
    corners: tuple = ()
    noise: bool = False
    repeats: int = 200
    reads: int = 1
    cal_reads: int = 8
    noise_temp_c: float = 25.0
    noise_vdd: float = 0.6
    corner_shift: float = 0.0
    directory: str = "out"
    formats: tuple = ("csv", "json")

    def __post_init__(self):
        if len(self.temps_c) < 1 or len(self.vdd_list) < 1:
            raise ConfigError("sweep needs at least one temperature and one supply", "$.sweep")
        lo, hi = min(self.temps_c), max(self.temps_c)
        if lo < 0.0 - 1e-9 or hi > 100.0 + 1e-9:
            raise ConfigError(f"temperatures {lo}..{hi} degC outside the model domain 0..100", "$.sweep")

    @property
    def config_hash(self) -> str:
        return self.sensor.config_hash()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sensor"] = self.sensor.to_dict()
        d["temps_c"] = list(self.temps_c)
        d["vdd_list"] = list(self.vdd_list)
        d["corners"] = list(self.corners)
        d["formats"] = list(self.formats)
        return d

    def scenario_hash(self) -> str:
        d = self.to_dict()
        d.pop("directory")
        d.pop("formats")
        return hash_document(d)

    def with_seed(self, seed: Optional[int]) -> "Scenario":
        return self if seed is None else replace(self, master_seed=int(seed))

    def with_directory(self, directory) -> "Scenario":
        return self if directory is None else replace(self, directory=str(directory))

    def die_variation(self) -> VariationSpec:
        """Variation actually drawn: jitter is zeroed when noise is off."""
        return self.variation if self.noise else replace(self.variation, jitter_rel_sigma=0.0)


def _temp_grid(start: float, stop: float, step: float) -> tuple:
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise ConfigError("temp_stop must not be below temp_start", "$.sweep")
    return tuple(float(np.round(start + i * step, 9)) for i in range(n))


def scenario_from_dict(doc: dict, base_dir: Optional[Path] = None) -> Scenario:
    """Validate and resolve a scenario document.

    ``sensor`` may be ``"default"``, a path (relative to ``base_dir``) to a
    sensor config, or an inline mapping. ``"fitted"`` pulls study constants
    from the shipped defaults.
    """
    validate_against(doc, SCENARIO_SCHEMA)
    defaults = default_document()
    study = defaults["study"]

    src = doc.get("sensor", "default")
    if isinstance(src, str) and src == "default":
        sensor = SensorConfig.from_dict(defaults["sensor"])
    elif isinstance(src, str):
        path = Path(src) if base_dir is None else Path(base_dir) / src
        sensor = SensorConfig.from_dict(load_yaml(path))
    else:
        try:
            sensor = SensorConfig.from_dict(src)
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[-1], "$.sensor" + exc.path.lstrip("$")) from exc

    ov = doc.get("overrides", {})
    if "headroom" in ov:
        sensor = sensor.with_headroom(study["line_headroom"] if ov["headroom"] == "fitted" else ov["headroom"])

    var_doc = doc.get("variation", "fitted")
    variation = VariationSpec(**(defaults["variation"] if var_doc == "fitted" else var_doc))
    if "jitter_rel_sigma" in ov:
        j = study["jitter_rel_sigma"] if ov["jitter_rel_sigma"] == "fitted" else ov["jitter_rel_sigma"]
        variation = replace(variation, jitter_rel_sigma=float(j))

    sw = doc.get("sweep", {})
    temps = _temp_grid(sw.get("temp_start", 0.0), sw.get("temp_stop", 100.0), sw.get("temp_step", 10.0))
    camp = doc.get("campaign", {})
    noise = doc.get("noise", {})
    out = doc.get("outputs", {})
    return Scenario(
        sensor=sensor,
        variation=variation,
        temps_c=temps,
        vdd_list=tuple(float(v) for v in sw.get("vdd_list", [0.6])),
        n_dies=camp.get("n_dies", 1),
        master_seed=camp.get("master_seed", 0),
        corners=tuple(camp.get("corners", [])),
        noise=noise.get("enable", False),
        repeats=noise.get("repeats", 200),
        reads=noise.get("reads", 1),
        cal_reads=noise.get("cal_reads", 8),
        noise_temp_c=float(noise.get("temp_c", 25.0)),
        noise_vdd=float(noise.get("vdd", 0.6)),
        corner_shift=float(study["corner_shift"]),
        directory=out.get("directory", "out"),
        formats=tuple(out.get("formats", ["csv", "json"])),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    return scenario_from_dict(load_yaml(path), base_dir=path.parent)


def default_scenario() -> Scenario:
    """The 20-die, four-supply population campaign shipped with the package."""
    return scenario_from_dict(default_document()["scenario"])


def item_seed(master_seed: int, *path: int) -> np.random.SeedSequence:
    """Seed for one work item, fixed by ``(master_seed, path)`` alone."""
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))


def die_config(sc: Scenario, die_id: int) -> tuple:
    die = sample_die(sc.die_variation(), item_seed(sc.master_seed, die_id, STREAM_DIE))
    return apply_die(sc.sensor, die), die


@dataclass
class DieOutcome:
    die_id: int
    die: dict
    rows: list
    errors: np.ndarray  # (vdd, temp)
    per_vdd: list
    report: MetricsReport
    codes: Optional[list] = None
    extra: dict = field(default_factory=dict)


def _calibration(sc: Scenario, cfg, die_id: int, iv: int, v_dd: float):
    """Two-point map at one supply; noisy calibration averages ``cal_reads`` conversions."""
    if not sc.noise or cfg.osc.jitter_rel_sigma == 0:
        c_lo, c_hi = noiseless_codes(cfg, v_dd, np.array(CAL_TEMPS))
        return two_point_calibrate(int(c_lo), int(c_hi), *CAL_TEMPS)
    means = []
    for k, t in enumerate(CAL_TEMPS):
        op = operating_point(cfg, v_dd, t)
        seeds = item_seed(sc.master_seed, die_id, STREAM_CAL, iv, k).spawn(sc.cal_reads)
        means.append(np.mean([simulate_conversion(cfg, v_dd, t, s, op=op).code for s in seeds]))
    return two_point_calibrate(means[0], means[1], *CAL_TEMPS)


def _noisy_readings(sc: Scenario, cfg, die_id: int, iv: int, v_dd: float, temps):
    """Per-temperature code (mean of ``reads`` conversions) and mean energy."""
    codes, energy = [], []
    ops = operating_point(cfg, v_dd, np.asarray(temps, dtype=float))
    for it, t in enumerate(temps):
        op = ops.at(it)
        root = item_seed(sc.master_seed, die_id, STREAM_READ, iv, it)
        seeds = [root] if sc.reads == 1 else root.spawn(sc.reads)
        res = [simulate_conversion(cfg, v_dd, float(t), s, op=op) for s in seeds]
        codes.append(res[0].code if sc.reads == 1 else float(np.mean([r.code for r in res])))
        energy.append(float(np.mean([r.energy for r in res])))
    return np.array(codes), np.array(energy)


def run_die(sc: Scenario, die_id: int) -> DieOutcome:
    """Sweep one die over the scenario grid and summarise it."""
    cfg, die = die_config(sc, die_id)
    temps = np.asarray(sc.temps_c)
    rows, errors, per_vdd = [], [], []
    for iv, v_dd in enumerate(sc.vdd_list):
        cal = _calibration(sc, cfg, die_id, iv, v_dd)
        op = operating_point(cfg, v_dd, temps)
        st = op.state
        power = total_power(cfg, st)
        if sc.noise and cfg.osc.jitter_rel_sigma > 0:
            codes, energy = _noisy_readings(sc, cfg, die_id, iv, v_dd, temps)
        else:
            codes = noiseless_codes(cfg, v_dd, temps)
            t_conv = cfg.fdc.window_cycles / np.asarray(op.f_l)
            energy = conversion_energy(cfg, st, t_conv)
        t_est = cal(codes)
        err = t_est - temps
        errors.append(err)
        per_vdd.append(
            {
                "vdd_V": v_dd,
                "peak_inacc": float(np.max(np.abs(err))),
                "rms_inacc": float(np.sqrt(np.mean(err**2))),
                "min_inacc": float(err.min()),
                "max_inacc": float(err.max()),
                "counter_resolution": float(cal.slope),
            }
        )
        for it, t in enumerate(temps):
            rows.append(
                (
                    float(t),
                    v_dd,
                    die_id,
                    float(np.atleast_1d(st.v_vdd)[it]),
                    float(np.atleast_1d(st.i_supply)[it]),
                    float(np.atleast_1d(op.f_h)[it]),
                    float(np.atleast_1d(op.f_l)[it]),
                    codes[it].item() if hasattr(codes[it], "item") else codes[it],
                    float(t_est[it]),
                    float(err[it]),
                    float(np.atleast_1d(power)[it]),
                    float(np.atleast_1d(energy)[it]),
                )
            )
    errors = np.array(errors)
    report = _die_report(sc, cfg, die_id, temps, errors, per_vdd)
    return DieOutcome(die_id, die.to_dict(), rows, errors, per_vdd, report)


def _die_report(sc: Scenario, cfg, die_id: int, temps, errors, per_vdd) -> MetricsReport:
    t_all = np.broadcast_to(temps, errors.shape)
    span = float(np.ptp(temps)) if temps.size > 1 else 100.0
    stats = inaccuracy_stats(t_all, t_all + errors, span) if t_all.size > 1 else None
    if stats is None:
        e = float(errors.ravel()[0])
        stats = {"min_inacc": e, "max_inacc": e, "rms_inacc": abs(e), "relative_inacc": 0.0}

    op = operating_point(cfg, REPORT_VDD, REPORT_TEMP)
    t_conv = float(cfg.fdc.window_cycles / op.f_l)
    energy = float(conversion_energy(cfg, op.state, t_conv))
    noise_res = 0.0
    if sc.noise and cfg.osc.jitter_rel_sigma > 0:
        noise_res = noise_sigma(sc, cfg, die_id)[0]
    adj = float("nan")
    if temps.size >= 3:
        adj = fit_linear_ratio(temps, noiseless_codes(cfg, sc.vdd_list[0], temps))[2]
    return MetricsReport(
        min_inacc=stats["min_inacc"],
        max_inacc=stats["max_inacc"],
        rms_inacc=stats["rms_inacc"],
        three_sigma=None,
        relative_inacc=stats["relative_inacc"],
        counter_resolution=per_vdd[0]["counter_resolution"],
        noise_resolution=noise_res,
        line_sensitivity=line_sensitivity(cfg),
        energy_per_conv=energy,
        conv_time=t_conv,
        r_fom=energy * 1e9 * noise_res**2,
        adj_r2=adj,
    )


def noise_sigma(sc: Scenario, cfg, die_id: int):
    """``(sigma_degC, sigma_lsb, codes)`` of ``repeats`` conversions at the noise point."""
    c_lo, c_hi = noiseless_codes(cfg, sc.noise_vdd, np.array(CAL_TEMPS))
    slope = two_point_calibrate(int(c_lo), int(c_hi), *CAL_TEMPS).slope
    op = operating_point(cfg, sc.noise_vdd, sc.noise_temp_c)
    seeds = item_seed(sc.master_seed, die_id, STREAM_RESOLUTION).spawn(sc.repeats)
    codes = np.array([simulate_conversion(cfg, sc.noise_vdd, sc.noise_temp_c, s, op=op).code for s in seeds])
    sigma_lsb = float(np.std(codes, ddof=1))
    return sigma_lsb * slope, sigma_lsb, codes


def _run_die_task(args):
    sc, die_id = args
    return run_die(sc, die_id)


def map_dies(sc: Scenario, jobs: int = 1) -> list:
    """Run every die, in parallel when ``jobs > 1``; output is in die order."""
    tasks = [(sc, i) for i in range(sc.n_dies)]
    if jobs <= 1 or sc.n_dies == 1:
        return [_run_die_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        out = list(pool.map(_run_die_task, tasks))
    return sorted(out, key=lambda o: o.die_id)


def corner_study(sc: Scenario) -> dict:
    """Noise-free two-point errors per requested corner at the first supply."""
    out = {}
    corners = standard_corners(sc.corner_shift)
    temps = np.asarray(sc.temps_c)
    v_dd = sc.vdd_list[0]
    for name in sc.corners:
        cfg = apply_corner(sc.sensor, corners[name])
        c_lo, c_hi = noiseless_codes(cfg, v_dd, np.array(CAL_TEMPS))
        cal = two_point_calibrate(int(c_lo), int(c_hi), *CAL_TEMPS)
        codes_u = noiseless_codes(cfg, v_dd, np.array(CAL_TEMPS + (50.0,)), quantize=False)
        cal_u = two_point_calibrate(codes_u[0], codes_u[1], *CAL_TEMPS)
        out[name] = {
            "dvth_p": corners[name].dvth_p,
            "dvth_n": corners[name].dvth_n,
            "inaccuracy_C": [float(x) for x in cal(noiseless_codes(cfg, v_dd, temps)) - temps],
            "inaccuracy_50C": float(cal_u(codes_u[2]) - 50.0),
        }
    return out


def population_summary(outcomes: list, sc: Scenario) -> dict:
    """Median and envelopes over dies; per-supply peaks follow the measured box plots."""
    errs = np.array([o.errors.ravel() for o in outcomes])
    peaks = np.array([[p["peak_inacc"] for p in o.per_vdd] for o in outcomes])
    rmss = np.array([[p["rms_inacc"] for p in o.per_vdd] for o in outcomes])
    reps = [o.report for o in outcomes]
    lo, hi = float(errs.min()), float(errs.max())
    span = float(np.ptp(sc.temps_c)) if len(sc.temps_c) > 1 else 100.0

    def mean(key):
        return float(np.mean([getattr(r, key) for r in reps]))

    energy, noise_res = mean("energy_per_conv"), mean("noise_resolution")
    pop = MetricsReport(
        min_inacc=lo,
        max_inacc=hi,
        rms_inacc=float(np.sqrt(np.mean(errs**2))),
        three_sigma=population_three_sigma(errs) if len(outcomes) > 1 else None,
        relative_inacc=relative_inaccuracy(lo, hi, span),
        counter_resolution=mean("counter_resolution"),
        noise_resolution=noise_res,
        line_sensitivity=mean("line_sensitivity"),
        energy_per_conv=energy,
        conv_time=mean("conv_time"),
        r_fom=energy * 1e9 * noise_res**2,
        adj_r2=mean("adj_r2"),
    )

    def spread(a):
        return {"median": float(np.median(a)), "min": float(np.min(a)), "max": float(np.max(a))}

    ddof = 1 if len(reps) > 1 else 0
    return {
        "n_dies": len(outcomes),
        "report": pop.to_dict(),
        "peak_inacc": spread(peaks),
        "rms_inacc": spread(rmss),
        # alternative reading: RMS over dies and supplies at each temperature
        "rms_inacc_by_temp": {
            f"{t:g}": float(np.sqrt(np.mean(np.array([o.errors[:, i] for o in outcomes]) ** 2))) for i, t in enumerate(sc.temps_c)
        },
        "peak_inacc_by_vdd": {f"{v:g}": spread(peaks[:, i]) for i, v in enumerate(sc.vdd_list)},
        "counter_resolution_by_vdd": {
            f"{v:g}": float(np.mean([o.per_vdd[i]["counter_resolution"] for o in outcomes])) for i, v in enumerate(sc.vdd_list)
        },
        "energy_per_conv": {"mean": energy, "std": float(np.std([r.energy_per_conv for r in reps], ddof=ddof))},
        "conv_time": {"mean": pop.conv_time, "std": float(np.std([r.conv_time for r in reps], ddof=ddof))},
        "adj_r2_min": float(np.min([r.adj_r2 for r in reps])),
        "corners": corner_study(sc),
    }


# ---------------------------------------------------------------- output


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9e}"


def rows_to_csv(rows, header_comment: str) -> str:
    buf = io.StringIO()
    buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _stamp(sc: Scenario, kind: str) -> dict:
    return {"kind": kind, "config_hash": sc.config_hash, "scenario_hash": sc.scenario_hash(), "master_seed": sc.master_seed}


def _manifest(sc: Scenario, kind: str, files: list) -> dict:
    # the output location is not part of the result, so reruns elsewhere compare byte for byte
    scenario = sc.to_dict()
    scenario.pop("directory")
    return _stamp(sc, kind) | {
        "csv_version": CSV_VERSION,
        "files": sorted(files),
        "versions": {"ptatsense": __version__, "numpy": np.__version__, "python": platform.python_version()},
        "scenario": scenario,
    }


def _write(out: Path, name: str, text: str, files: list):
    (out / name).write_text(text)
    files.append(name)


def _prepare(sc: Scenario) -> Path:
    out = Path(sc.directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _emit_rows(sc: Scenario, out: Path, stem: str, rows: list, kind: str, files: list):
    if "csv" in sc.formats:
        comment = f"ptatsense {kind} csv_version={CSV_VERSION} config_hash={sc.config_hash} scenario_hash={sc.scenario_hash()}"
        _write(out, f"{stem}.csv", rows_to_csv(rows, comment), files)
    if "json" in sc.formats:
        doc = _stamp(sc, kind) | {"columns": list(CSV_COLUMNS), "rows": [list(r) for r in rows]}
        _write(out, f"{stem}.json", _json_text(doc), files)


def run_sweep(sc: Scenario, jobs: int = 1) -> list:
    """Grid sweep of every die; writes the per-point table and a manifest."""
    out = _prepare(sc)
    outcomes = map_dies(sc, jobs)
    files = []
    _emit_rows(sc, out, "sweep", [r for o in outcomes for r in o.rows], "sweep", files)
    _write(out, "manifest.json", _json_text(_manifest(sc, "sweep", files)), files)
    return files


def run_montecarlo(sc: Scenario, jobs: int = 1) -> dict:
    """Population campaign: per-die reports, a population summary and the raw table."""
    out = _prepare(sc)
    outcomes = map_dies(sc, jobs)
    files = []
    dies = [
        {"die_id": o.die_id, "die": o.die, "report": o.report.to_dict(), "per_vdd": o.per_vdd} for o in outcomes
    ]
    summary = population_summary(outcomes, sc)
    _write(out, "dies.json", _json_text(_stamp(sc, "dies") | {"dies": dies}), files)
    _write(out, "summary.json", _json_text(_stamp(sc, "summary") | summary), files)
    _emit_rows(sc, out, "montecarlo", [r for o in outcomes for r in o.rows], "montecarlo", files)
    _write(out, "manifest.json", _json_text(_manifest(sc, "montecarlo", files)), files)
    return summary


def resolution_study(sc: Scenario, die_id: int = 0) -> dict:
    """Repeated conversions of the typical (nominal) sample at the noise point.

    Only the jitter is taken from the variation spec; ``die_id`` selects the
    seed stream.
    """
    cfg = sc.sensor.with_jitter(sc.variation.jitter_rel_sigma)
    sigma_c, sigma_lsb, codes = noise_sigma(sc, cfg, die_id)
    edges = np.arange(codes.min(), codes.max() + 2) - 0.5
    counts, _ = np.histogram(codes, bins=edges)
    return {
        "temp_C": sc.noise_temp_c,
        "vdd_V": sc.noise_vdd,
        "repeats": sc.repeats,
        "codes": [int(c) for c in codes],
        "histogram": {"code": [int(e + 0.5) for e in edges[:-1]], "count": [int(c) for c in counts]},
        "sigma_lsb": sigma_lsb,
        "sigma_C": sigma_c,
        "mean_code": float(np.mean(codes)),
    }


def run_resolution(sc: Scenario) -> dict:
    out = _prepare(sc)
    res = resolution_study(sc)
    files = []
    _write(out, "resolution.json", _json_text(_stamp(sc, "resolution") | res), files)
    if "csv" in sc.formats:
        text = "# ptatsense resolution config_hash=" + sc.config_hash + "\ncode,count\n"
        text += "".join(f"{c},{n}\n" for c, n in zip(res["histogram"]["code"], res["histogram"]["count"]))
        _write(out, "histogram.csv", text, files)
    _write(out, "manifest.json", _json_text(_manifest(sc, "resolution", files)), files)
    return res


# ---------------------------------------------------------------- report


class MixedRunError(ConfigError):
    """Files produced under different sensor configurations."""


def file_config_hash(path) -> str:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".csv":
        first = text.split("\n", 1)[0]
        for tok in first.lstrip("# ").split():
            if tok.startswith("config_hash="):
                return tok.split("=", 1)[1]
        raise ConfigError(f"{path}: no config_hash in header comment")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "config_hash" not in doc:
        raise ConfigError(f"{path}: no config_hash field")
    return doc["config_hash"]


def collect_report(paths) -> dict:
    """Merge output files of one configuration; reject mixed hashes."""
    files = []
    for p in map(Path, paths):
        files.extend(sorted(q for q in p.iterdir() if q.suffix in (".csv", ".json")) if p.is_dir() else [p])
    if not files:
        raise ConfigError("no result files given")
    hashes = {str(f): file_config_hash(f) for f in files}
    distinct = sorted(set(hashes.values()))
    if len(distinct) > 1:
        raise MixedRunError("files come from different configurations: " + ", ".join(distinct))
    report = {"config_hash": distinct[0], "files": sorted(str(f) for f in files)}
    for f in files:
        if f.name == "summary.json":
            s = json.loads(f.read_text())
            report["population"] = {k: s[k] for k in ("n_dies", "peak_inacc", "rms_inacc", "report")}
        elif f.name == "resolution.json":
            r = json.loads(f.read_text())
            report["resolution"] = {k: r[k] for k in ("sigma_lsb", "sigma_C", "repeats")}
    return report
