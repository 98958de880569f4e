from magpilot.evaluation.closed_loop import closed_loop_eval, expert_rollout
from magpilot.evaluation.metrics import (
    MetricReport,
    build_metric_report,
    direction_metrics,
    endpoint_error,
    phase_accuracy,
    rmse_report,
)
from magpilot.evaluation.offline import eval_offline
from magpilot.evaluation.report import (
    format_text_table,
    read_report,
    write_report,
)

__all__ = ["MetricReport", "build_metric_report", "closed_loop_eval",
           "direction_metrics", "endpoint_error", "eval_offline",
           "expert_rollout", "format_text_table", "phase_accuracy",
           "read_report", "rmse_report", "write_report"]
