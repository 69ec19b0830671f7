"""Interfaces the attack consumes, plus query accounting.

Only calls to the target model count as queries.  The masked language
model, sentence embedder, fluency scorer and POS tagger belong to the
attacker and are free.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from ..exceptions import QueryBudgetExhausted
from ..text import TokenizedText
from ..types import Prediction


@runtime_checkable
class TargetModel(Protocol):
    def predict(self, text: TokenizedText) -> Prediction: ...


@runtime_checkable
class MaskedLMProvider(Protocol):
    def top_k(
        self, text: TokenizedText, mask_index: int, k: int, anchor: int | None = None
    ) -> list[str]:
        """Most probable fills for ``mask_index``, best first.

        ``anchor`` names the neighbour position a window probe is taken
        from; backends that always read the full context may ignore it.
        """


@runtime_checkable
class SentenceEmbedder(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


@runtime_checkable
class FluencyScorer(Protocol):
    def word_probability(self, text: TokenizedText, word_index: int, word: str) -> float:
        """P(word | words before ``word_index``)."""


@dataclass(frozen=True)
class PosTag:
    """Coarse part of speech plus the morphology the filter needs.

    ``number`` is "sing" or "plur" for nouns and ``lemma`` is the
    dictionary form (used to spot same-root verbs).
    """

    pos: str
    number: str | None = None
    lemma: str | None = None
    tag: str | None = None


@runtime_checkable
class PosTagger(Protocol):
    def tag_in_context(self, text: TokenizedText, word_index: int) -> PosTag: ...

    def inflect(self, word: str, tag: PosTag, number: str) -> str | None:
        """``word`` (tagged ``tag``) rewritten to grammatical ``number``, or None."""


def is_reentrant(backend) -> bool:
    return bool(getattr(backend, "reentrant", False))


@dataclass(frozen=True)
class BackendSuite:
    target: TargetModel
    masked_lm: MaskedLMProvider
    embedder: SentenceEmbedder
    fluency: FluencyScorer
    pos_tagger: PosTagger

    def members(self):
        return (self.target, self.masked_lm, self.embedder, self.fluency, self.pos_tagger)

    def with_target(self, target: TargetModel) -> "BackendSuite":
        return replace(self, target=target)

    @property
    def reentrant(self) -> bool:
        return all(is_reentrant(m) for m in self.members())


class CountingTarget:
    """Wraps a target model and counts every ``predict`` call.

    One counter belongs to one attack.  When ``budget`` is set, the call
    that would exceed it raises :class:`QueryBudgetExhausted` instead of
    reaching the model.
    """

    def __init__(self, target: TargetModel, budget: int | None = None):
        self.target = target
        self.budget = budget
        self._queries = 0
        self._lock = threading.Lock()

    @property
    def reentrant(self) -> bool:
        return is_reentrant(self.target)

    @property
    def queries(self) -> int:
        return self._queries

    def predict(self, text: TokenizedText) -> Prediction:
        with self._lock:
            if self.budget is not None and self._queries >= self.budget:
                raise QueryBudgetExhausted(f"query budget of {self.budget} spent")
            self._queries += 1
        return self.target.predict(text)


class Serialized:
    """Proxy that funnels every method call of a backend through one lock."""

    def __init__(self, backend, lock: threading.Lock | None = None):
        self._backend = backend
        self._lock = lock or threading.Lock()
        self.reentrant = True

    def __getattr__(self, name):
        attr = getattr(self._backend, name)
        if not callable(attr):
            return attr

        def locked(*args, **kwargs):
            with self._lock:
                return attr(*args, **kwargs)

        return locked


def serialize_suite(suite: BackendSuite) -> BackendSuite:
    """Wrap every non-reentrant member so concurrent attacks can share the suite."""

    def wrap(backend):
        return backend if is_reentrant(backend) else Serialized(backend)

    return BackendSuite(*(wrap(m) for m in suite.members()))


def normalize_scores(raw: Sequence[float]) -> list[float]:
    clipped = [max(0.0, float(r)) for r in raw]
    total = sum(clipped)
    if total <= 0:
        return [1.0 / len(clipped)] * len(clipped)
    return [c / total for c in clipped]
