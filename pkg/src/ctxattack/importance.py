"""Leave-one-out word importance.

Each attackable word is replaced by :data:`MASK_TOKEN` in turn; its
importance is the drop in truth-label confidence that causes.  Words are
returned most important first, lowest index first on ties.  Negative
drops (masking helps the truth label) are kept and land at the end.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable

from .backends.base import TargetModel, is_reentrant
from .text import TokenizedText
from .types import ImportanceRecord, Label, Prediction, as_label

MASK_TOKEN = "[MASK-SLOT]"

STOPWORDS = frozenset(
    """a an the and or but if of at by for with about to from in on is are was were be been
    being am it its this that these those i me my we our you your he him his she her they them
    their as so than too very can will just do does did not no nor s t don""".split()
)


def masked(text: TokenizedText, index: int) -> TokenizedText:
    return text.substitute(index, MASK_TOKEN, match_case=False)


def candidate_positions(text: TokenizedText, stopwords: Iterable[str] | None = None) -> list[int]:
    """Attackable word indices, optionally minus stopwords."""
    stop = frozenset(w.lower() for w in stopwords) if stopwords else frozenset()
    return [i for i in text.attackable_indices() if text.words[i].lower() not in stop]


def rank_word_importance(
    text: TokenizedText,
    truth: Label | int,
    target: TargetModel,
    *,
    baseline: Prediction | None = None,
    stopwords: Iterable[str] | None = None,
    max_workers: int = 1,
) -> list[ImportanceRecord]:
    """Rank attackable words of ``text`` by confidence drop on ``truth``.

    Costs one query per attackable word, plus one for the unmasked text
    unless its prediction is passed as ``baseline``.
    """
    truth = as_label(truth)
    if baseline is None:
        baseline = target.predict(text)
    p_full = baseline.prob(truth)
    positions = candidate_positions(text, stopwords)

    def probe(i):
        return target.predict(masked(text, i)).prob(truth)

    if max_workers > 1 and is_reentrant(target):
        with ThreadPoolExecutor(max_workers) as pool:
            p_masked = list(pool.map(probe, positions))
    else:
        p_masked = [probe(i) for i in positions]

    records = [ImportanceRecord(i, p_full - p) for i, p in zip(positions, p_masked)]
    records.sort(key=lambda r: (-r.delta, r.word_index))
    return records
