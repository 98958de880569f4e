"""Report serialization: machine-readable JSON plus an aligned text table."""

import json
from pathlib import Path

from magpilot.evaluation.metrics import MetricReport

REPORT_VERSION = 1

_ROWS = (
    ("RMSE (overall)", "rmse_overall", "{:.2f}"),
    ("RMSE (approach)", "rmse_approach", "{:.2f}"),
    ("RMSE (transport)", "rmse_transport", "{:.2f}"),
    ("Endpoint mean", "endpoint_mean", "{:.2f}"),
    ("Endpoint median", "endpoint_median", "{:.2f}"),
    ("RMSE (x_L)", ("rmse_per_axis", 0), "{:.2f}"),
    ("RMSE (y_L)", ("rmse_per_axis", 1), "{:.2f}"),
    ("RMSE (x_R)", ("rmse_per_axis", 2), "{:.2f}"),
    ("RMSE (y_R)", ("rmse_per_axis", 3), "{:.2f}"),
    ("Direction accuracy", "direction_accuracy", "{:.2%}"),
    ("Mean cosine similarity", "mean_cosine", "{:.4f}"),
    ("Phase Acc. (overall)", "phase_acc_overall", "{:.2%}"),
    ("Phase Acc. (approach)", "phase_acc_approach", "{:.2%}"),
    ("Phase Acc. (transport)", "phase_acc_transport", "{:.2%}"),
)

ABSENT = "—"  # em dash placeholder for empty phase subsets


def format_text_table(report: MetricReport, success_table: dict | None = None) -> str:
    d = report.to_dict()
    lines = ["Offline action-prediction metrics (ticks)",
             "-" * 42]
    for label, key, fmt in _ROWS:
        if isinstance(key, tuple):
            value = d[key[0]][key[1]] if d[key[0]] is not None else None
        else:
            value = d[key]
        text = ABSENT if value is None else fmt.format(value)
        lines.append(f"{label:<26}{text:>14}")
    if success_table:
        lines += ["", "Closed-loop success rates", "-" * 42,
                  f"{'Task':<8}{'Approach':>12}{'Transport':>12}{'Trials':>8}"]
        for task in sorted(success_table):
            row = success_table[task]
            lines.append(f"{task:<8}{row['approach_rate']:>12.0%}"
                         f"{row['transport_rate']:>12.0%}{row['n_trials']:>8}")
    return "\n".join(lines) + "\n"


def write_report(report: MetricReport, success_table: dict | None, path) -> None:
    """JSON to `path`, aligned text table beside it (.txt)."""
    path = Path(path)
    payload = {
        "format_version": REPORT_VERSION,
        "offline": report.to_dict(),
        "closed_loop": success_table,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(path.with_suffix(".txt"), "w") as fh:
        fh.write(format_text_table(report, success_table))


def read_report(path) -> dict:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format_version") != REPORT_VERSION:
        raise ValueError(f"unsupported report version {payload.get('format_version')}")
    return payload
