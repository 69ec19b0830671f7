"""Dataset ingestion (JSONL and CSV).

A row is either a classification sample (one text column) or a sentence
pair (premise and hypothesis columns).  For pairs, ``attack_field`` says
which side is perturbed; the other side is handed to the target unchanged.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

from ..exceptions import DatasetError
from ..types import Label

log = logging.getLogger(__name__)

FORMATS = ("jsonl", "csv")


@dataclass(frozen=True)
class DatasetSchema:
    text_field: str = "text"
    label_field: str = "label"
    premise_field: str = "premise"
    hypothesis_field: str = "hypothesis"
    id_field: str = "id"
    attack_field: str | None = None
    label_names: tuple[str, ...] | None = None


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    label: Label
    text: str | None = None
    premise: str | None = None
    hypothesis: str | None = None
    attack_field: str = "text"

    def __post_init__(self):
        value = getattr(self, self.attack_field, None) if self.attack_field in ("text", "premise", "hypothesis") else None
        if not value or not value.strip():
            raise ValueError(f"record {self.id}: attack field {self.attack_field!r} is missing or empty")
        if self.is_pair and not (self.premise and self.hypothesis):
            raise ValueError(f"record {self.id}: sentence pairs need both premise and hypothesis")

    @property
    def is_pair(self) -> bool:
        return self.attack_field in ("premise", "hypothesis")

    @property
    def attacked_text(self) -> str:
        return getattr(self, self.attack_field)

    @property
    def context_text(self) -> str | None:
        if not self.is_pair:
            return None
        return self.hypothesis if self.attack_field == "premise" else self.premise

    def to_dict(self) -> dict:
        out = {"id": self.id, "label": self.label.id, "attack_field": self.attack_field}
        for key in ("text", "premise", "hypothesis"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out


def infer_format(path: Path) -> str:
    suffix = path.suffix.lower().lstrip(".")
    if suffix in ("jsonl", "ndjson"):
        return "jsonl"
    if suffix in ("csv", "tsv"):
        return "csv"
    raise DatasetError(f"cannot infer dataset format from {path.name!r}; pass one of {FORMATS}")


def parse_row(row: Mapping[str, Any], line: int, schema: DatasetSchema) -> DatasetRecord:
    """Validate one raw row; errors name the line."""
    if not isinstance(row, Mapping):
        raise DatasetError(f"line {line}: expected an object")
    raw_label = row.get(schema.label_field)
    if raw_label is None or raw_label == "":
        raise DatasetError(f"line {line}: missing label field {schema.label_field!r}")
    label = _parse_label(raw_label, line, schema)
    rid = row.get(schema.id_field)
    rid = str(line) if rid is None or rid == "" else str(rid)

    premise, hypothesis = row.get(schema.premise_field), row.get(schema.hypothesis_field)
    if premise not in (None, "") or hypothesis not in (None, ""):
        field = schema.attack_field or "premise"
        if field not in ("premise", "hypothesis"):
            raise DatasetError(f"line {line}: attack field for pairs must be premise or hypothesis")
        kwargs = dict(premise=_text(premise), hypothesis=_text(hypothesis), attack_field=field)
    else:
        text = row.get(schema.text_field)
        if schema.attack_field not in (None, "text"):
            raise DatasetError(f"line {line}: attack field {schema.attack_field!r} needs a sentence pair")
        kwargs = dict(text=_text(text), attack_field="text")
    try:
        return DatasetRecord(id=rid, label=label, **kwargs)
    except ValueError as exc:
        raise DatasetError(f"line {line}: {exc}") from exc


def _text(value):
    return None if value is None else str(value)


def _parse_label(raw, line: int, schema: DatasetSchema) -> Label:
    names = schema.label_names
    if isinstance(raw, str) and names and raw in names:
        return Label(names.index(raw), raw)
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise DatasetError(f"line {line}: label {raw!r} is not a class index") from None
    if not value.is_integer() or value < 0:
        raise DatasetError(f"line {line}: label {raw!r} is not a class index")
    idx = int(value)
    if names and idx >= len(names):
        raise DatasetError(f"line {line}: label {idx} outside the {len(names)} declared classes")
    return Label(idx, names[idx] if names else None)


def _rows(path: Path, fmt: str):
    if fmt == "jsonl":
        with path.open(encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    yield line_no, json.loads(line)
                except json.JSONDecodeError as exc:
                    yield line_no, DatasetError(f"line {line_no}: invalid JSON ({exc.msg})")
    else:
        delimiter = "\t" if path.suffix.lower() == ".tsv" else ","
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh, delimiter=delimiter)
            for row in reader:
                # header is line 1
                yield reader.line_num, row


def load_dataset(
    path,
    fmt: str | None = None,
    schema: DatasetSchema | None = None,
    lenient: bool = False,
) -> list[DatasetRecord]:
    """Read and validate a dataset file.

    Malformed rows are fatal unless ``lenient``, in which case they are
    logged with their line numbers and skipped.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset {path} does not exist")
    fmt = fmt or infer_format(path)
    if fmt not in FORMATS:
        raise DatasetError(f"unknown dataset format {fmt!r}; expected one of {FORMATS}")
    schema = schema or DatasetSchema()
    records, problems = [], []
    for line, row in _rows(path, fmt):
        try:
            if isinstance(row, DatasetError):
                raise row
            records.append(parse_row(row, line, schema))
        except DatasetError as exc:
            if not lenient:
                raise
            problems.append(str(exc))
            log.warning("skipping %s: %s", path.name, exc)
    if not records:
        raise DatasetError(f"dataset {path} has no valid records")
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise DatasetError(f"dataset {path} has duplicate record ids")
    return records


def records_from_pairs(texts: Sequence[str], labels: Sequence[int]) -> list[DatasetRecord]:
    return [DatasetRecord(id=str(i), label=Label(int(y)), text=t) for i, (t, y) in enumerate(zip(texts, labels))]
