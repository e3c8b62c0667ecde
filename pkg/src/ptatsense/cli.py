"""Command-line entry point: ``ptatsense <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 model-domain error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import yaml

from .config import ConfigError, SensorConfig, load_yaml
from .device import DomainError
from .frontend import ConfigurationError, HeadroomWarning
from .metrology import CalibrationError, comparison_table, format_comparison, read_comparison_csv

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("ptatsense")


def _scenario(args):
    from .campaign import default_scenario, load_scenario

    sc = default_scenario() if args.config is None else load_scenario(args.config)
    return sc.with_seed(args.seed).with_directory(args.out)


def _formats(sc, args):
    from dataclasses import replace

    return sc if args.format is None else replace(sc, formats=(args.format,))


def cmd_validate(args) -> int:
    from .campaign import scenario_from_dict

    if args.config is None:
        raise ConfigError("validate needs --config")
    doc = load_yaml(args.config)
    if "tcc" in doc:
        cfg = SensorConfig.from_dict(doc)
        print(f"sensor config OK  config_hash={cfg.config_hash()}")
    else:
        sc = scenario_from_dict(doc, base_dir=Path(args.config).parent)
        print(f"scenario OK  config_hash={sc.config_hash}  scenario_hash={sc.scenario_hash()}")
    return EXIT_OK


def cmd_fit(args) -> int:
    from .fitting import build_defaults

    doc = build_defaults()
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    target = out / ("fitted.json" if args.format == "json" else "fitted.yaml")
    if args.format == "json":
        target.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        target.write_text(yaml.safe_dump(doc, sort_keys=False))
    print(json.dumps({"written": str(target), "study": doc["study"], "anchors_hit": doc["residuals"]}, indent=2))
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .campaign import run_sweep

    sc = _formats(_scenario(args), args)
    files = run_sweep(sc, jobs=args.jobs)
    print("\n".join(str(Path(sc.directory) / f) for f in files))
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    from .campaign import run_montecarlo

    sc = _formats(_scenario(args), args)
    summary = run_montecarlo(sc, jobs=args.jobs)
    peak = summary["peak_inacc"]
    print(
        f"{summary['n_dies']} dies  peak inaccuracy median {peak['median']:.3f} degC "
        f"[{peak['min']:.3f}, {peak['max']:.3f}]  -> {sc.directory}"
    )
    return EXIT_OK


def cmd_resolution(args) -> int:
    from .campaign import run_resolution

    sc = _formats(_scenario(args), args)
    res = run_resolution(sc)
    print(f"sigma = {res['sigma_lsb']:.3f} LSB = {res['sigma_C']:.4f} degC over {res['repeats']} conversions")
    return EXIT_OK


def cmd_compare(args) -> int:
    from importlib import resources

    if args.config is None:
        with resources.as_file(resources.files("ptatsense").joinpath("data", "table1.csv")) as p:
            rows = read_comparison_csv(p)
    else:
        rows = read_comparison_csv(args.config)
    try:
        table = comparison_table(rows, tolerance=args.tolerance)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(json.dumps(table, indent=2) if args.format == "json" else format_comparison(table))
    return EXIT_OK


def cmd_report(args) -> int:
    from .campaign import collect_report

    paths = args.paths or ([args.out] if args.out else [])
    report = collect_report(paths)
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "validate": (cmd_validate, "check a sensor config or scenario file against its schema"),
    "fit": (cmd_fit, "rerun the parameter fit against the published anchors"),
    "sweep": (cmd_sweep, "temperature x supply grid per die, written as CSV/JSON"),
    "montecarlo": (cmd_montecarlo, "die population campaign with per-die and population reports"),
    "resolution": (cmd_resolution, "repeated conversions at one temperature: histogram and sigma"),
    "compare": (cmd_compare, "recompute relative inaccuracy and R-FoM for comparison rows"),
    "report": (cmd_report, "merge result files of one configuration"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="scenario, sensor config or comparison CSV")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides the scenario)")
    common.add_argument("--seed", type=int, metavar="N", help="master seed (overrides the scenario)")
    common.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes (default 1)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ptatsense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "compare":
            p.add_argument("--tolerance", type=float, default=0.05, help="relative mismatch that flags a row")
        if name == "report":
            p.add_argument("paths", nargs="*", help="result files or directories")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    func = COMMANDS[args.command][0]
    try:
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore", HeadroomWarning)
            return func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ConfigurationError, CalibrationError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
