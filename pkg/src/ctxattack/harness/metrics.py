"""Run-level metrics and the report table.

Per repetition, over samples that did not error:

* original accuracy - share the target classified correctly;
* after-attack accuracy - share still correct after the attack
  (originally correct and not successfully attacked);
* ASP - successful attacks / originally correct samples (a fraction);
* perturbation % and semantic similarity - averaged over successes;
* queries - averaged over every attacked (not skipped) sample and include
  the importance-ranking queries.

Repetitions are combined as mean and population standard deviation.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from ..types import AttackResult, AttackStatus

METRIC_NAMES = ("original_acc", "after_attack_acc", "avg_perturb_pct", "avg_queries", "avg_semantic_sim", "asp")

COLUMNS = (
    ("Original Acc", "original_acc", 1, 1.0),
    ("Attacked Acc", "after_attack_acc", 1, 1.0),
    ("Perturb %", "avg_perturb_pct", 1, 1.0),
    ("Query #", "avg_queries", 1, 1.0),
    ("Semantic Sim", "avg_semantic_sim", 2, 1.0),
    ("ASP %", "asp", 1, 100.0),
)

QUERY_NOTE = "Query # counts every target call, including importance ranking."


@dataclass(frozen=True)
class RunMetrics:
    original_acc: float
    after_attack_acc: float
    avg_perturb_pct: float
    avg_queries: float
    avg_semantic_sim: float
    asp: float
    counts: dict = field(default_factory=dict)
    std: dict = field(default_factory=dict)
    repetitions: int = 1

    def to_dict(self) -> dict:
        out = {name: _json_number(getattr(self, name)) for name in METRIC_NAMES}
        out["std"] = {k: _json_number(v) for k, v in sorted(self.std.items())}
        out["counts"] = dict(sorted(self.counts.items()))
        out["repetitions"] = self.repetitions
        return out


def _json_number(x):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else x


def _mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values) if values else math.nan


def compute_metrics(results: Sequence[AttackResult]) -> RunMetrics:
    """Metrics of one repetition."""
    counts = Counter(r.status.value for r in results)
    valid = [r for r in results if r.status != AttackStatus.ERROR]
    n = len(valid)
    skipped = sum(r.status == AttackStatus.SKIPPED_MISCLASSIFIED for r in valid)
    correct = n - skipped
    wins = [r for r in valid if r.status == AttackStatus.SUCCESS]
    attacked = [r for r in valid if r.status != AttackStatus.SKIPPED_MISCLASSIFIED]
    return RunMetrics(
        original_acc=100.0 * correct / n if n else math.nan,
        after_attack_acc=100.0 * (correct - len(wins)) / n if n else math.nan,
        avg_perturb_pct=_mean(r.perturbation_pct for r in wins),
        avg_queries=_mean(r.queries for r in attacked),
        avg_semantic_sim=_mean(r.semantic_similarity for r in wins),
        asp=len(wins) / correct if correct else 0.0,
        counts={s.value: counts.get(s.value, 0) for s in AttackStatus},
        std={name: 0.0 for name in METRIC_NAMES},
        repetitions=1,
    )


def aggregate(per_repetition: Sequence[RunMetrics]) -> RunMetrics:
    """Mean and population std of each metric across repetitions (NaNs ignored)."""
    if not per_repetition:
        raise ValueError("nothing to aggregate")
    means, stds = {}, {}
    for name in METRIC_NAMES:
        values = [getattr(m, name) for m in per_repetition if not math.isnan(getattr(m, name))]
        mu = _mean(values)
        means[name] = mu
        stds[name] = math.sqrt(_mean((v - mu) ** 2 for v in values)) if values else math.nan
    counts = Counter()
    for m in per_repetition:
        counts.update(m.counts)
    return RunMetrics(**means, counts=dict(counts), std=stds, repetitions=len(per_repetition))


def _cell(metrics: RunMetrics, key: str, digits: int, scale: float) -> str:
    mean = getattr(metrics, key)
    if math.isnan(mean):
        return "-"
    std = metrics.std.get(key, 0.0)
    std_text = "-" if std is None or math.isnan(std) else f"{std * scale:.{digits}f}"
    return f"{mean * scale:.{digits}f} ({std_text})"


def format_table(rows: Sequence[tuple[str, RunMetrics]], row_header: str = "Run") -> str:
    """Plain-text table with ``mean (std)`` cells in the usual column order."""
    header = [row_header] + [c[0] for c in COLUMNS]
    body = [[name] + [_cell(m, key, d, s) for _, key, d, s in COLUMNS] for name, m in rows]
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]

    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    rule = "-" * len(line(header))
    return "\n".join([line(header), rule] + [line(r) for r in body] + [rule, QUERY_NOTE]) + "\n"


def to_csv(rows: Sequence[tuple[str, RunMetrics]], row_header: str = "run") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([row_header] + [k for name in METRIC_NAMES for k in (name, f"{name}_std")])
    for name, m in rows:
        cells = [name]
        for metric in METRIC_NAMES:
            for v in (getattr(m, metric), m.std.get(metric)):
                cells.append("" if v is None or math.isnan(v) else repr(float(v)))
        writer.writerow(cells)
    return buf.getvalue()
