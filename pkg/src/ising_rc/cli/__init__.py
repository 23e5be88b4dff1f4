"""Command-line entry point: ``ising-rc verify | scan | tilt | fit | selftest``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import (
    ConfigError, ExperimentConfig, ScheduleConfig, config_from_dict, dump_config, load_config,
    preset,
)
from .fitcmd import FIT_COLUMNS, run_fit
from .output import ResultRecord, write_csv, write_json
from .scan import run_scan
from .tilt import TILT_COLUMNS, run_tilt_experiment
from .verify import PROFILES, exit_code, run_verify

log = logging.getLogger("ising_rc")

__all__ = [
    "ConfigError", "ExperimentConfig", "ResultRecord", "ScheduleConfig", "config_from_dict", "dump_config",
    "load_config", "main", "run_fit", "run_scan", "run_tilt_experiment", "run_verify",
]


def _config(args) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = preset(args.command, args.profile or "quick")
    return cfg.with_overrides(seed=args.seed, out=args.out, threads=args.threads)


def _out_dir(args, cfg: ExperimentConfig | None = None) -> Path:
    out = args.out or (cfg.out if cfg else None) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_verify(args) -> int:
    report = run_verify(args.profile or "quick")
    path = write_json(report, _out_dir(args) / "verify.json")
    log.info("verify: %s, %d checks, %d failed, %d skipped -> %s", report["status"],
             report["n_checks"], report["n_failed"], report["n_skipped"], path)
    return exit_code(report)


def _write_result(res: ResultRecord, out: Path, cfg: ExperimentConfig, name: str) -> None:
    write_csv(res.rows, out / "results.csv")
    payload = res.to_dict()
    payload["config"] = cfg.semantic_dict()
    write_json(payload, out / f"{name}.json")


def cmd_scan(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    res = run_scan(cfg, cfg.threads)
    _write_result(res, out, cfg, "scan")
    log.info("scan %s (hash %s): %d rows in %.1fs%s", cfg.experiment_id, res.config_hash,
             len(res.rows), res.wall_clock, " [partial]" if res.partial else "")
    return 3 if res.partial else 0


def cmd_tilt(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    res = run_tilt_experiment(cfg)
    _write_result(res, out, cfg, "tilt")
    write_csv(res.report["comparison"], out / "tilt.csv", TILT_COLUMNS)
    if res.report["ess_collapse"]:
        log.warning("effective sample size fell below the floor for some reweighted estimates")
    return 0


def cmd_fit(args) -> int:
    window = None
    if args.n_min is not None or args.n_max is not None:
        window = (args.n_min, args.n_max)
    try:
        rep = run_fit(args.results, args.observable, window)
    except ValueError as exc:
        log.error("fit: %s", exc)
        return 2
    out = _out_dir(args)
    write_csv(rep["table"], out / "fit.csv", FIT_COLUMNS)
    write_json({k: v for k, v in rep.items() if k != "table"}, out / "fit.json")
    log.info("fit %s: exponent %.4f +- %.4f (chi2/dof %.2f)", rep["observable"], rep["exponent"],
             rep["exponent_error"], rep["chi2_dof"])
    return 0


def cmd_selftest(args) -> int:
    """Quick identity suite plus a tiny scan run twice for reproducibility."""
    report = run_verify("quick")
    cfg = ExperimentConfig(d=2, radii=(1, 2, 3), beta=0.3, sampler="sw",
                           schedule=ScheduleConfig(n_sweeps=200, burn_in=20), seed=args.seed or 0)
    a = run_scan(cfg).rows
    b = run_scan(cfg).rows
    ok = exit_code(report) == 0 and a == b
    print(json.dumps({"verify": report["status"], "scan_reproducible": a == b, "ok": ok}))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML experiment configuration")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help="replica worker threads")
    common.add_argument("--profile", choices=sorted(PROFILES),
                        help="budget profile (quick or full); picks the built-in experiment "
                             "when no --config is given")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="ising-rc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="exact identity suite").set_defaults(fn=cmd_verify)
    sub.add_parser("scan", parents=[common], help="two-point / susceptibility scan").set_defaults(fn=cmd_scan)
    sub.add_parser("tilt", parents=[common], help="tilting comparison").set_defaults(fn=cmd_tilt)
    f = sub.add_parser("fit", parents=[common], help="power-law fit of scan results")
    f.add_argument("results", nargs="+", help="results.csv files")
    f.add_argument("--observable")
    f.add_argument("--n-min", type=float)
    f.add_argument("--n-max", type=float)
    f.set_defaults(fn=cmd_fit)
    sub.add_parser("selftest", parents=[common], help="quick end-to-end check").set_defaults(fn=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except ConfigError as exc:
        log.error("config: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
