"""Command-line front end: run, sweep, calibrate, selftest.

All state lives in the config file and flags; a fixed master seed makes every
command byte-reproducible, including under ``--threads > 1``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .collapse import CollapseModel, CollapseParams, calibrate_gamma, simulate_diffusion_ensemble
from .config import (
    config_to_json_dict,
    expand_sweep,
    parse_config,
    read_raw_config,
    set_config_field,
)
from .errors import ModelMisuseError, QscError
from .protocol import run_experiment
from .report import render_csv, render_human_summary, summary_csv_row, summary_to_json_dict
from .selftest import run_selftest
from .stats import Z95


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qscsim",
        description="Collapse-timing discrimination experiments: run, sweep, calibrate, selftest.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, config_required: bool = True) -> None:
        p.add_argument("--config", required=config_required, help="path to a JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config master_seed")
        p.add_argument("--out", default=None, help="write results as CSV to this path")
        p.add_argument("--threads", type=int, default=1, help="worker threads (results are thread-count invariant)")
        p.add_argument("--json", action="store_true", help="emit a JSON summary on stdout")

    p_run = sub.add_parser("run", help="run one experiment")
    common(p_run)
    p_run.add_argument("--device-baseline", action="store_true", help="also run the projective-device baseline")

    p_sweep = sub.add_parser("sweep", help="run the sweep defined in the config")
    common(p_sweep)
    p_sweep.add_argument("--device-baseline", action="store_true", help="also run the projective-device baseline")

    p_cal = sub.add_parser("calibrate", help="calibrate the diffusion strength to the target mean collapse time")
    common(p_cal, config_required=True)
    p_cal.add_argument("--tolerance", type=float, default=0.02, help="relative tolerance on the mean first-passage time")
    p_cal.add_argument("--runs", type=int, default=8192, help="walkers per calibration evaluation")
    p_cal.add_argument("--save-config", default=None, help="write the config with the calibrated gamma to this path")

    p_self = sub.add_parser("selftest", help="run the reduced-size invariant suite")
    p_self.add_argument("--seed", type=int, default=None, help="override the selftest master seed")
    return parser


def _load_raw(args: argparse.Namespace) -> dict:
    raw = read_raw_config(args.config)
    if args.seed is not None:
        raw["master_seed"] = args.seed
    if getattr(args, "device_baseline", False):
        raw["device_baseline"] = True
    return raw


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text)


def _cmd_run(args: argparse.Namespace) -> int:
    raw = _load_raw(args)
    config = parse_config(raw)
    summary = run_experiment(config, threads=args.threads)
    if args.out:
        _write_text(args.out, render_csv([summary_csv_row(summary)]))
    if args.json:
        print(json.dumps(
            {"resolved_config": config_to_json_dict(config), "summary": summary_to_json_dict(summary)},
            indent=2,
        ))
    else:
        print(render_human_summary(summary))
        if args.out:
            print(f"csv written to {args.out}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    raw = _load_raw(args)
    points = expand_sweep(raw)
    base = parse_config(raw)
    rows = []
    json_points = []
    for value, config in points:
        summary = run_experiment(config, threads=args.threads)
        rows.append(summary_csv_row(summary, sweep_param=base.sweep.param, sweep_value=value))
        if args.json:
            json_points.append({
                "sweep_value": value,
                "resolved_config": config_to_json_dict(config),
                "summary": summary_to_json_dict(summary),
            })
    text = render_csv(rows)
    if args.out:
        _write_text(args.out, text)
    if args.json:
        print(json.dumps({"sweep_param": base.sweep.param, "points": json_points}, indent=2))
    elif args.out:
        print(f"csv written to {args.out} ({len(rows)} rows)")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    raw = _load_raw(args)
    # A diffusion config may omit gamma until calibration supplies it.
    raw_for_parse = raw
    collapse_raw = raw.get("collapse") or {}
    if isinstance(collapse_raw, dict) and collapse_raw.get("model") == "diffusion" and "gamma" not in collapse_raw:
        raw_for_parse = set_config_field(raw, "collapse.gamma", 1.0)
    config = parse_config(raw_for_parse)
    if config.collapse.model is not CollapseModel.DIFFUSION:
        raise ModelMisuseError(
            f"calibrate applies to the diffusion model; config selects {config.collapse.model.value}"
        )
    target = config.collapse.t_c_mean
    rng = np.random.default_rng(config.master_seed)
    gamma = calibrate_gamma(
        target,
        config.input_p1,
        config.collapse.epsilon,
        args.tolerance,
        rng,
        n_runs=args.runs,
    )
    params = CollapseParams(
        model=CollapseModel.DIFFUSION,
        t_c_mean=target,
        gamma=gamma,
        epsilon=config.collapse.epsilon,
        dt=target * 1e-4,
    )
    times, _ = simulate_diffusion_ensemble(
        config.input_p1, params, np.random.default_rng(int(rng.integers(2**63))), args.runs
    )
    mean = float(times.mean())
    half = Z95 * float(times.std(ddof=1)) / args.runs**0.5
    if args.json:
        print(json.dumps({
            "gamma": gamma,
            "t_c_target": target,
            "achieved_mean": mean,
            "achieved_mean_ci95": [mean - half, mean + half],
            "n_runs": args.runs,
            "tolerance": args.tolerance,
            "master_seed": config.master_seed,
        }, indent=2))
    else:
        print(f"calibrated gamma            {gamma!r}")
        print(f"target mean collapse time   {target!r} s")
        print(f"achieved mean (n={args.runs})   {mean:.6g} s  [95% CI {mean - half:.6g}, {mean + half:.6g}]")
    if args.save_config:
        updated = set_config_field(raw, "collapse.gamma", gamma)
        _write_text(args.save_config, json.dumps(updated, indent=2) + "\n")
        if not args.json:
            print(f"config with calibrated gamma written to {args.save_config}")
    return 0


def _cmd_selftest(args: argparse.Namespace) -> int:
    kwargs = {} if args.seed is None else {"seed": args.seed}
    return 0 if run_selftest(**kwargs) else 1


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "calibrate": _cmd_calibrate,
        "selftest": _cmd_selftest,
    }
    try:
        return handlers[args.command](args)
    except QscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
