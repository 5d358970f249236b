"""Dataset handling, batch runs, metric evaluation, and report emission."""

from .dataset import (
    DatasetError,
    DatasetRecord,
    FAILURE_LABELS,
    REVIEW_STATUSES,
    STATUS_APPROVED,
    STATUS_DRAFT,
    load_dataset,
    record_from_dict,
    record_to_dict,
    save_dataset,
)
from .evaluate import (
    DraftGateError,
    EvalTable,
    EvaluationError,
    LatencyRow,
    bench_latency,
    evaluate_run,
)
from .reports import (
    FORMATS,
    emit_report,
    render_csv,
    render_json,
    render_markdown,
    table_from_dict,
    table_to_dict,
)
from .run import (
    EmbeddingSpec,
    JudgeSpec,
    ModelSpec,
    RunConfig,
    RunError,
    RunResult,
    bootstrap_ground_truth,
    build_run_providers,
    load_results,
    run_fingerprint,
    run_models,
    save_results,
)

__all__ = [
    "DatasetError",
    "DatasetRecord",
    "DraftGateError",
    "EmbeddingSpec",
    "EvalTable",
    "EvaluationError",
    "FAILURE_LABELS",
    "FORMATS",
    "JudgeSpec",
    "LatencyRow",
    "ModelSpec",
    "REVIEW_STATUSES",
    "RunConfig",
    "RunError",
    "RunResult",
    "STATUS_APPROVED",
    "STATUS_DRAFT",
    "bench_latency",
    "bootstrap_ground_truth",
    "build_run_providers",
    "emit_report",
    "evaluate_run",
    "load_dataset",
    "load_results",
    "record_from_dict",
    "record_to_dict",
    "render_csv",
    "render_json",
    "render_markdown",
    "run_fingerprint",
    "run_models",
    "save_dataset",
    "save_results",
    "table_from_dict",
    "table_to_dict",
]
