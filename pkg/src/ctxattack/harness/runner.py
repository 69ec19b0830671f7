"""Batch execution, ablation sweeps and run directories."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ..backends.base import BackendSuite, serialize_suite
from ..backends.pairs import PairTarget
from ..exceptions import ConfigError
from ..search import attack, build_result
from ..text import tokenize
from ..types import AttackConfig, AttackResult, AttackStatus, HEURISTICS
from .data import DatasetRecord
from .metrics import RunMetrics, aggregate, compute_metrics, format_table, to_csv

log = logging.getLogger(__name__)

#: sweep axis name -> AttackConfig field
SWEEP_AXES = {
    "K": "K",
    "window": "window_half",
    "M": "M",
    "N": "N",
    "lambda": "lam",
    "heuristic": "heuristic",
}


@dataclass(frozen=True)
class SampleOutcome:
    record: DatasetRecord
    repetition: int
    result: AttackResult

    def to_dict(self) -> dict:
        out = {"id": self.record.id, "repetition": self.repetition, "attack_field": self.record.attack_field}
        out.update(self.result.to_dict())
        if self.record.is_pair:
            out["context"] = self.record.context_text
        return out


@dataclass
class RunReport:
    config: AttackConfig
    outcomes: list[SampleOutcome]
    per_repetition: list[RunMetrics]
    metrics: RunMetrics
    settings: dict = field(default_factory=dict)

    def results(self) -> list[AttackResult]:
        return [o.result for o in self.outcomes]


def select_samples(n_records: int, sample_size: int | None, seed: int, repetition: int) -> list[int]:
    """Indices of one repetition's random subset (sorted); the whole set if no size given."""
    if sample_size is None or sample_size == n_records:
        return list(range(n_records))
    if not 1 <= sample_size <= n_records:
        raise ConfigError(f"sample_size {sample_size} must be in [1, {n_records}]", key="sample_size")
    rng = np.random.default_rng([seed, repetition])
    return sorted(int(i) for i in rng.choice(n_records, size=sample_size, replace=False))


def attack_record(record: DatasetRecord, cfg: AttackConfig, backends: BackendSuite) -> AttackResult:
    suite = backends
    if record.is_pair:
        suite = backends.with_target(PairTarget(backends.target, record.context_text, record.attack_field))
    try:
        return attack(record.attacked_text, record.label, cfg, suite)
    except Exception as exc:  # a broken backend must not take the whole run down
        log.exception("sample %s errored", record.id)
        original = tokenize(record.attacked_text)
        return build_result(AttackStatus.ERROR, original, record.label, original, 0, 0, suite, f"{type(exc).__name__}: {exc}")


def run_attacks(
    dataset: Sequence[DatasetRecord],
    cfg: AttackConfig,
    backends: BackendSuite,
    sample_size: int | None = None,
    seed: int = 0,
    repetitions: int = 1,
    workers: int = 1,
) -> RunReport:
    """Attack a random subset per repetition and aggregate the metrics."""
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1", key="repetitions")
    if not dataset:
        raise ConfigError("dataset is empty", key="dataset")
    tasks = [
        (rep, dataset[i])
        for rep in range(repetitions)
        for i in select_samples(len(dataset), sample_size, seed, rep)
    ]
    if workers > 1:
        suite = serialize_suite(backends)
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda t: attack_record(t[1], cfg, suite), tasks))
    else:
        results = [attack_record(record, cfg, backends) for _, record in tasks]
    outcomes = [SampleOutcome(record, rep, res) for (rep, record), res in zip(tasks, results)]
    errored = [o for o in outcomes if o.result.status == AttackStatus.ERROR]
    if errored:
        log.warning("%d sample(s) errored and are excluded from the metrics", len(errored))
    per_rep = [compute_metrics([o.result for o in outcomes if o.repetition == rep]) for rep in range(repetitions)]
    settings = {"sample_size": sample_size, "seed": seed, "repetitions": repetitions}
    return RunReport(cfg, outcomes, per_rep, aggregate(per_rep), settings)


def parse_axis_value(axis: str, raw: Any):
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}", key="axis")
    if axis == "heuristic":
        if raw not in HEURISTICS:
            raise ConfigError(f"unknown heuristic {raw!r}", key="values")
        return raw
    try:
        return float(raw) if axis == "lambda" else int(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value {raw!r} for axis {axis}", key="values") from None


def sweep(
    dataset: Sequence[DatasetRecord],
    cfg: AttackConfig,
    axis: str,
    values: Sequence[Any],
    backends: BackendSuite,
    **run_kwargs,
) -> list[tuple[Any, RunReport]]:
    """One run per value of ``axis``; every run uses the same seeds, so rows are paired."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}", key="axis")
    values = [parse_axis_value(axis, v) for v in values]
    configs = [cfg.replace(**{SWEEP_AXES[axis]: v}) for v in values]
    return [(v, run_attacks(dataset, c, backends, **run_kwargs)) for v, c in zip(values, configs)]


def _clean(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _dump(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, ensure_ascii=False, allow_nan=False)


def save_run(report: RunReport, out_dir, name: str = "run", extra_settings: dict | None = None) -> Path:
    """Write config.json, results.jsonl, metrics.json, report.txt and report.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    snapshot = {"attack": report.config.to_dict(), "run": {**report.settings, **(extra_settings or {})}}
    (out / "config.json").write_text(_dump(snapshot) + "\n", encoding="utf-8")
    with (out / "results.jsonl").open("w", encoding="utf-8") as fh:
        for outcome in report.outcomes:
            fh.write(_dump(outcome.to_dict()) + "\n")
    metrics = {"aggregate": report.metrics.to_dict(), "per_repetition": [m.to_dict() for m in report.per_repetition]}
    (out / "metrics.json").write_text(_dump(metrics) + "\n", encoding="utf-8")
    rows = [(name, report.metrics)]
    (out / "report.txt").write_text(format_table(rows), encoding="utf-8")
    (out / "report.csv").write_text(to_csv(rows), encoding="utf-8")
    return out


def save_sweep(axis: str, runs: Sequence[tuple[Any, RunReport]], out_dir, extra_settings: dict | None = None) -> str:
    """One sub-directory per value plus a combined comparison table; returns the table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for value, report in runs:
        label = f"{axis}={value}"
        save_run(report, out / label, name=label, extra_settings=extra_settings)
        rows.append((label, report.metrics))
    table = format_table(rows, row_header=axis)
    (out / "comparison.txt").write_text(table, encoding="utf-8")
    (out / "comparison.csv").write_text(to_csv(rows, row_header=axis), encoding="utf-8")
    return table
