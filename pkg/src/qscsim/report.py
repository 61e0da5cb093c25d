"""Result rendering: the canonical CSV row layout and JSON summaries.

The CSV column set and order are fixed; every row echoes the master seed so
result files stay auditable on their own.  Floats are written with ``repr``
(shortest round-trip form), which keeps reruns byte-identical.
"""

from __future__ import annotations

import csv
import io
from typing import Any

from .protocol import ExperimentSummary
from .stats import RateEstimate

CSV_COLUMNS = [
    "sweep_param",
    "sweep_value",
    "n_trials",
    "acc_definite",
    "acc_definite_lo",
    "acc_definite_hi",
    "acc_superposition",
    "acc_superposition_lo",
    "acc_superposition_hi",
    "acc_overall",
    "acc_overall_lo",
    "acc_overall_hi",
    "device_success",
    "device_bound",
    "mean_report_time_definite",
    "mean_report_time_superposition",
    "master_seed",
]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def summary_csv_row(summary: ExperimentSummary, sweep_param: str = "", sweep_value: Any = None) -> list[str]:
    device = summary.device_success
    return [
        sweep_param,
        _cell(sweep_value),
        _cell(summary.n_trials),
        _cell(summary.definite.estimate),
        _cell(summary.definite.lo),
        _cell(summary.definite.hi),
        _cell(summary.superposition.estimate),
        _cell(summary.superposition.lo),
        _cell(summary.superposition.hi),
        _cell(summary.overall.estimate),
        _cell(summary.overall.lo),
        _cell(summary.overall.hi),
        _cell(device.estimate if device is not None else None),
        _cell(summary.device_bound),
        _cell(summary.mean_report_time_definite),
        _cell(summary.mean_report_time_superposition),
        _cell(summary.master_seed),
    ]


def render_csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def _rate_dict(rate: RateEstimate | None) -> dict[str, Any] | None:
    if rate is None:
        return None
    return {
        "successes": rate.successes,
        "trials": rate.trials,
        "estimate": rate.estimate,
        "lo": rate.lo,
        "hi": rate.hi,
    }


def summary_to_json_dict(summary: ExperimentSummary) -> dict[str, Any]:
    return {
        "n_trials": summary.n_trials,
        "accuracy_definite": _rate_dict(summary.definite),
        "accuracy_superposition": _rate_dict(summary.superposition),
        "accuracy_overall": _rate_dict(summary.overall),
        "mean_report_time_definite": summary.mean_report_time_definite,
        "mean_report_time_superposition": summary.mean_report_time_superposition,
        "device_success": _rate_dict(summary.device_success),
        "device_bound": summary.device_bound,
        "master_seed": summary.master_seed,
    }


def _fmt_rate(label: str, rate: RateEstimate) -> str:
    if rate.estimate is None:
        return f"{label:<28}n/a (no trials)"
    return (
        f"{label:<28}{rate.estimate:.6f}  "
        f"[{rate.lo:.6f}, {rate.hi:.6f}]  ({rate.successes}/{rate.trials})"
    )


def render_human_summary(summary: ExperimentSummary) -> str:
    lines = [
        f"{'n_trials':<28}{summary.n_trials}",
        _fmt_rate("accuracy (definite)", summary.definite),
        _fmt_rate("accuracy (superposition)", summary.superposition),
        _fmt_rate("accuracy (overall)", summary.overall),
    ]
    if summary.mean_report_time_definite is not None:
        lines.append(f"{'mean report time (def)':<28}{summary.mean_report_time_definite:.6g} s")
    if summary.mean_report_time_superposition is not None:
        lines.append(f"{'mean report time (sup)':<28}{summary.mean_report_time_superposition:.6g} s")
    if summary.device_success is not None:
        lines.append(_fmt_rate("device success", summary.device_success))
        lines.append(f"{'optimal device bound':<28}{summary.device_bound:.6f}")
    lines.append(f"{'master_seed':<28}{summary.master_seed}")
    return "\n".join(lines)
