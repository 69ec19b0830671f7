from .data import DatasetRecord, DatasetSchema, load_dataset, records_from_pairs
from .export import export_adversarial, load_adversarial
from .metrics import RunMetrics, aggregate, compute_metrics, format_table, to_csv
from .runner import (
    SWEEP_AXES,
    RunReport,
    SampleOutcome,
    run_attacks,
    save_run,
    save_sweep,
    select_samples,
    sweep,
)

__all__ = [
    "DatasetRecord",
    "DatasetSchema",
    "RunMetrics",
    "RunReport",
    "SWEEP_AXES",
    "SampleOutcome",
    "aggregate",
    "compute_metrics",
    "export_adversarial",
    "format_table",
    "load_adversarial",
    "load_dataset",
    "records_from_pairs",
    "run_attacks",
    "save_run",
    "save_sweep",
    "select_samples",
    "sweep",
    "to_csv",
]
