"""Value objects shared across the attack pipeline."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping, Sequence

from .exceptions import ConfigError
from .text import TokenizedText

HEURISTICS = ("average", "median", "top_n", "top_maxes_distance", "constant")

#: Absolute slack used when validating target confidence scores.
SCORE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Label:
    """A class index; ``name`` is display-only and ignored by comparisons."""

    id: int
    name: str | None = None

    def __post_init__(self):
        if int(self.id) != self.id or self.id < 0:
            raise ValueError(f"label id must be a non-negative integer, got {self.id!r}")
        object.__setattr__(self, "id", int(self.id))

    def __int__(self) -> int:
        return self.id

    def __eq__(self, other) -> bool:
        if isinstance(other, Label):
            return self.id == other.id
        if isinstance(other, int) and not isinstance(other, bool):
            return self.id == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.id)


def as_label(value) -> Label:
    if isinstance(value, Label):
        return value
    return Label(int(value))


def argmax(values: Sequence[float]) -> int:
    """Index of the largest value; the lowest index wins ties."""
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


@dataclass(frozen=True)
class Prediction:
    scores: tuple[float, ...]
    predicted: Label

    @classmethod
    def from_scores(cls, scores: Sequence[float], names: Sequence[str] | None = None) -> "Prediction":
        scores = tuple(float(s) for s in scores)
        if not scores:
            raise ValueError("a prediction needs at least one class score")
        for s in scores:
            if not (-SCORE_TOL <= s <= 1 + SCORE_TOL) or math.isnan(s):
                raise ValueError(f"confidence score {s!r} outside [0, 1]")
        if abs(math.fsum(scores) - 1.0) > SCORE_TOL:
            raise ValueError(f"confidence scores sum to {math.fsum(scores)!r}, expected 1")
        idx = argmax(scores)
        name = names[idx] if names else None
        return cls(scores, Label(idx, name))

    @property
    def num_classes(self) -> int:
        return len(self.scores)

    def prob(self, label) -> float:
        return self.scores[int(as_label(label).id)]

    def to_dict(self) -> dict:
        return {"scores": list(self.scores), "label": self.predicted.id}

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "Prediction":
        pred = cls.from_scores(payload["scores"])
        if "label" in payload and int(payload["label"]) != pred.predicted.id:
            raise ValueError(
                f"label {payload['label']!r} disagrees with argmax of scores ({pred.predicted.id})"
            )
        return pred


@dataclass(frozen=True)
class ImportanceRecord:
    word_index: int
    delta: float


@dataclass(frozen=True)
class AttackConfig:
    """Hyperparameters of one attack.

    ``N`` is the number of refined substitutions kept per word for the
    product search, while ``topn_rank`` is the rank used by the ``top_n``
    and ``top_maxes_distance`` threshold heuristics.  ``lam`` is the
    coefficient of the max-distance heuristic (``lambda`` in config files).
    """

    K: int = 60
    window_half: int = 2
    M: int = 3
    N: int = 4
    lam: float = 1.0
    topn_rank: int = 3
    heuristic: str = "top_maxes_distance"
    semantic_floor: float = 0.7
    syntactic_floor: float = 0.0
    max_rounds: int = 4
    query_budget: int | None = None
    rerank_each_round: bool = True
    skip_stopwords: bool = False
    semantic_window: int | None = None

    def __post_init__(self):
        def bad(key, msg):
            raise ConfigError(f"{key}: {msg}", key=key)

        for key in ("K", "window_half", "topn_rank", "max_rounds"):
            value = getattr(self, key)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                bad(key, f"must be an integer >= 1, got {value!r}")
        for key in ("M", "N"):
            value = getattr(self, key)
            if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 4:
                bad(key, f"must be an integer in [1, 4], got {value!r}")
        if self.heuristic not in HEURISTICS:
            bad("heuristic", f"must be one of {', '.join(HEURISTICS)}, got {self.heuristic!r}")
        for key in ("lam", "semantic_floor", "syntactic_floor"):
            value = getattr(self, key)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or math.isnan(value):
                bad(key, f"must be a number, got {value!r}")
        if self.query_budget is not None and (
            not isinstance(self.query_budget, int) or self.query_budget < 1
        ):
            bad("query_budget", f"must be a positive integer or null, got {self.query_budget!r}")
        if self.semantic_window is not None and (
            not isinstance(self.semantic_window, int) or self.semantic_window < 1
        ):
            bad("semantic_window", f"must be a positive integer or null, got {self.semantic_window!r}")

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "AttackConfig":
        known = set(cls.field_names())
        kwargs = {}
        for key, value in values.items():
            name = "lam" if key == "lambda" else key
            if name not in known:
                raise ConfigError(f"unknown config key {key!r}", key=key)
            kwargs[name] = value
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def replace(self, **changes) -> "AttackConfig":
        return replace(self, **changes)


class PosVerdict(str, enum.Enum):
    ACCEPT = "accept"
    INFLECTED = "inflected"
    REJECT = "reject"


@dataclass(frozen=True)
class ScoredCandidate:
    text: str
    semantic: float
    syntactic: float
    pos_verdict: PosVerdict = PosVerdict.ACCEPT
    inflected_form: str | None = None

    def __post_init__(self):
        if self.pos_verdict == PosVerdict.INFLECTED and not self.inflected_form:
            raise ValueError("an inflected candidate needs its inflected form")

    @property
    def surface(self) -> str:
        """The word actually written into the text."""
        return self.inflected_form if self.inflected_form else self.text


@dataclass(frozen=True)
class GapRecord:
    """Confidence drop on the truth label caused by ``candidate_assignment``.

    The assignment is stored as sorted ``(word_index, word)`` pairs.
    """

    candidate_assignment: tuple[tuple[int, str], ...]
    gap: float

    @classmethod
    def single(cls, index: int, word: str, gap: float) -> "GapRecord":
        return cls(((index, word),), gap)

    @property
    def assignment(self) -> dict[int, str]:
        return dict(self.candidate_assignment)


class AttackStatus(str, enum.Enum):
    SUCCESS = "success"
    FAILED = "failed"
    SKIPPED_MISCLASSIFIED = "skipped_misclassified"
    BUDGET_EXHAUSTED = "budget_exhausted"
    ERROR = "error"


def perturbation_percentage(original: TokenizedText, substitutions) -> float:
    """Share of words changed, in percent; repeated indices count once."""
    indices = {int(s[0]) for s in substitutions}
    for i in indices:
        if not 0 <= i < len(original):
            raise IndexError(f"substitution index {i} outside text of {len(original)} words")
    return 100.0 * len(indices) / len(original)


def diff_substitutions(original: TokenizedText, adversarial: TokenizedText):
    """(index, original word, replacement) for every position that changed."""
    return tuple(
        (i, a, b)
        for i, (a, b) in enumerate(zip(original.words, adversarial.words))
        if a.lower() != b.lower()
    )


@dataclass(frozen=True)
class AttackResult:
    status: AttackStatus
    original: TokenizedText
    truth: Label
    adversarial: TokenizedText
    substitutions: tuple[tuple[int, str, str], ...]
    queries: int
    semantic_similarity: float
    perturbation_pct: float
    rounds: int
    error: str | None = field(default=None)

    @property
    def succeeded(self) -> bool:
        return self.status == AttackStatus.SUCCESS

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "original": self.original.text,
            "adversarial": self.adversarial.text,
            "label": self.truth.id,
            "substitutions": [list(s) for s in self.substitutions],
            "queries": self.queries,
            "semantic_similarity": self.semantic_similarity,
            "perturbation_pct": self.perturbation_pct,
            "rounds": self.rounds,
            "error": self.error,
        }
