"""Export of successful adversarial examples, e.g. for data augmentation."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from ..exceptions import DatasetError
from ..types import AttackResult
from .runner import SampleOutcome


def export_adversarial(items: Iterable[AttackResult | SampleOutcome], path) -> int:
    """Write one JSON line per successful attack; returns the number written.

    Each line holds ``original``, ``adversarial``, ``label`` (the truth
    label of the original) and ``substitutions`` as ``[index, old, new]``.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written = 0
    with path.open("w", encoding="utf-8") as fh:
        for item in items:
            result = item.result if isinstance(item, SampleOutcome) else item
            if not result.succeeded:
                continue
            row = {
                "original": result.original.text,
                "adversarial": result.adversarial.text,
                "label": result.truth.id,
                "substitutions": [list(s) for s in result.substitutions],
            }
            if isinstance(item, SampleOutcome):
                row["id"] = item.record.id
                if item.record.is_pair:
                    row["attack_field"] = item.record.attack_field
                    row["context"] = item.record.context_text
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
            written += 1
    return written


def load_adversarial(path) -> list[dict]:
    """Read an export back, checking every line against the export schema."""
    rows = []
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"line {line_no}: invalid JSON ({exc.msg})") from None
            for key, kind in (("original", str), ("adversarial", str), ("label", int), ("substitutions", list)):
                if not isinstance(row.get(key), kind):
                    raise DatasetError(f"line {line_no}: field {key!r} missing or not {kind.__name__}")
            for sub in row["substitutions"]:
                if not (isinstance(sub, list) and len(sub) == 3 and isinstance(sub[0], int)):
                    raise DatasetError(f"line {line_no}: malformed substitution {sub!r}")
            rows.append(row)
    return rows
