"""``spherclt <experiment> [flags]`` entry point.

Exit codes: 0 all tests passed, 1 some test failed, 2 invalid
configuration, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import InvalidInputError, SpherCLTError
from .experiments import EXPERIMENTS, ExperimentConfig, run
from .report import config_hash, write_json, write_matrix_csv

log = logging.getLogger("spherclt")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

# flag dest -> ExperimentConfig field
FIELDS = {
    "n": "n",
    "theta0": "theta0",
    "lambda": "lambda_",
    "K": "K",
    "dt": "dt",
    "t_max": "t_max",
    "eval_times": "eval_times",
    "seed": "seed",
    "out_dir": "out_dir",
    "threads": "threads",
    "radius": "radius",
    "scheme": "scheme",
    "normalize_theta0": "normalize_theta0",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spherclt",
        description="Run a CLT experiment for Brownian motions on the unit sphere.",
        argument_default=argparse.SUPPRESS,
    )
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="flat JSON file of settings (a manifest.json also works)")
    p.add_argument("--n", type=int, help="ambient dimension (default 3)")
    p.add_argument("--theta0", help="start point: token e1..en or comma-separated coordinates")
    p.add_argument("--normalize-theta0", action="store_true", dest="normalize_theta0", help="rescale theta0 onto the sphere")
    p.add_argument("--lambda", type=float, dest="lambda", help="OU mean reversion (default 0)")
    p.add_argument("--K", type=int, help="ensemble size (default 10000)")
    p.add_argument("--dt", type=float, help="time step (default 1e-3)")
    p.add_argument("--t-max", type=float, dest="t_max", help="simulation horizon (default max eval time)")
    p.add_argument("--eval-times", dest="eval_times", help="comma-separated evaluation times")
    p.add_argument("--t", type=float, dest="t", action="append", help="evaluation time (repeatable)")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed (default 0)")
    p.add_argument("--out-dir", dest="out_dir", help="output directory")
    p.add_argument("--threads", help="worker threads or 'auto'")
    p.add_argument("--radius", type=float, help="initial OU radius |z0| (default 1)")
    p.add_argument("--scheme", help="projected-euler | tangent-euler")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config_file(path: str) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    if isinstance(data.get("config"), dict):
        data = data["config"]
    out = {}
    for key, value in data.items():
        k = key.replace("-", "_")
        if k == "experiment":
            continue
        if k not in FIELDS:
            raise ValueError(f"unknown config key {key!r}")
        out[FIELDS[k]] = value
    return out


def parse_config(argv=None) -> ExperimentConfig:
    """Defaults < config file < command-line flags."""
    ns = vars(build_parser().parse_args(argv))
    settings = {}
    if "config" in ns:
        settings.update(load_config_file(ns.pop("config")))
    ts = ns.pop("t", None)
    if ts is not None:
        settings["eval_times"] = ts
    ns.pop("verbose", None)
    for dest, value in ns.items():
        if dest in FIELDS:
            settings[FIELDS[dest]] = value
    return ExperimentConfig(experiment=ns["experiment"], **settings)


def run_experiment(cfg: ExperimentConfig) -> int:
    chash = config_hash(cfg.semantic())
    log.info("running %s (config %s)", cfg.experiment, chash[:12])
    result = run(cfg)
    tests = []
    for r in result.reports:
        d = r.to_dict()
        d.update(seed=cfg.seed, config_hash=chash)
        tests.append(d)
        print(r.line())
    report = {
        "artifact_version": __version__,
        "config_hash": chash,
        "experiment": cfg.experiment,
        "passed": result.passed,
        "seed": cfg.seed,
        "tests": tests,
    }
    manifest = {
        "artifact": "spherclt",
        "version": __version__,
        "config": cfg.resolved(),
        "config_hash": chash,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "outputs": ["report.json", *sorted(result.matrices)],
    }
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", report)
    write_json(out / "manifest.json", manifest)
    for name, mats in result.matrices.items():
        write_matrix_csv(out / name, mats)
    return EXIT_OK if result.passed else EXIT_FAILED


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    logging.basicConfig(level=logging.INFO if "-v" in argv or "--verbose" in argv else logging.WARNING, format="%(message)s")
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:  # argparse already printed usage
        return int(exc.code) if isinstance(exc.code, int) else EXIT_CONFIG
    except (SpherCLTError, ValueError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"spherclt: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run_experiment(cfg)
    except OSError as exc:
        print(f"spherclt: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvalidInputError as exc:
        parser.print_usage(sys.stderr)
        print(f"spherclt: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpherCLTError as exc:
        print(f"spherclt: {cfg.experiment} failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
