"""Local greedy search and the round loop of the attack.

One round works on the current base text:

1. rank words by importance;
2. walk the ranking, and for each word build candidates, refine them and
   try every purified candidate alone - any label flip ends the attack;
   the ``N`` candidates with the largest positive confidence gaps are kept,
   until ``M`` words have contributed;
3. try every combination of the kept candidates (at most ``N ** M``), most
   promising first, again stopping on a flip;
4. otherwise the probed text with the largest gap becomes the next base.

Every call to the target model is a query, including importance masks.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .backends.base import BackendSuite, CountingTarget, TargetModel
from .candidates import Probe, generate_candidates, mask_probe
from .exceptions import BackendError, EmptySearchSpace, QueryBudgetExhausted, ZeroVector
from .importance import STOPWORDS, rank_word_importance
from .refinement import cosine, refine
from .text import TokenizedText, tokenize
from .types import (
    AttackConfig,
    AttackResult,
    AttackStatus,
    GapRecord,
    Label,
    Prediction,
    ScoredCandidate,
    as_label,
    diff_substitutions,
    perturbation_percentage,
)

log = logging.getLogger(__name__)


@dataclass
class SearchState:
    """Bookkeeping for the round in progress."""

    base: TokenizedText
    base_prediction: Prediction
    counter: CountingTarget | None = None
    round: int = 0
    selected_words: list[int] = field(default_factory=list)
    per_word_tops: dict[int, list[GapRecord]] = field(default_factory=dict)
    best_gap_sample: GapRecord | None = None
    best_text: TokenizedText | None = None
    best_prediction: Prediction | None = None

    @property
    def queries(self) -> int:
        return self.counter.queries if self.counter is not None else 0

    def base_score(self, truth: Label) -> float:
        return self.base_prediction.prob(truth)

    def start_round(self, number: int):
        self.round = number
        self.selected_words = []
        self.per_word_tops = {}
        self.best_gap_sample = None
        self.best_text = None
        self.best_prediction = None

    def consider(self, record: GapRecord, text: TokenizedText, prediction: Prediction):
        if self.best_gap_sample is None or record.gap > self.best_gap_sample.gap:
            self.best_gap_sample = record
            self.best_text = text
            self.best_prediction = prediction

    def adopt_best(self):
        self.base = self.best_text
        self.base_prediction = self.best_prediction


@dataclass(frozen=True)
class ProbeOutcome:
    flipped: TokenizedText | None
    tops: list[GapRecord]


def confidence_gap(
    target: TargetModel,
    base: TokenizedText,
    variant: TokenizedText,
    truth: Label | int,
    base_score: float | None = None,
) -> float:
    """Truth-label confidence of ``base`` minus that of ``variant``.

    Pass ``base_score`` to reuse an already-paid-for base prediction.
    """
    truth = as_label(truth)
    if base_score is None:
        base_score = target.predict(base).prob(truth)
    return base_score - target.predict(variant).prob(truth)


def probe_candidates(
    state: SearchState,
    word_index: int,
    pc: Sequence[ScoredCandidate],
    truth: Label | int,
    target: TargetModel,
    n: int,
) -> ProbeOutcome:
    """Query each purified candidate on its own; return a flip or the top-``n`` gaps."""
    truth = as_label(truth)
    base_score = state.base_score(truth)
    records = []
    for cand in pc:
        variant = state.base.substitute(word_index, cand.surface)
        pred = target.predict(variant)
        record = GapRecord.single(word_index, cand.surface, base_score - pred.prob(truth))
        state.consider(record, variant, pred)
        if pred.predicted != truth:
            return ProbeOutcome(variant, [])
        records.append(record)
    positive = [r for r in records if r.gap > 0]
    positive.sort(key=lambda r: -r.gap)
    return ProbeOutcome(None, positive[:n])


def enumerate_products(per_word_tops: Mapping[int, Sequence[GapRecord]]) -> Iterator[tuple[tuple[int, str], ...]]:
    """All joint assignments over the non-empty per-word lists.

    Ordered by the sum of the member gaps, largest first; ties keep the
    natural product order.  Yields sorted ``(word_index, word)`` tuples.
    """
    lists = [(i, list(recs)) for i, recs in sorted(per_word_tops.items()) if recs]
    if not lists:
        raise EmptySearchSpace("no word has a candidate to combine")
    combos = []
    for choice in itertools.product(*(recs for _, recs in lists)):
        assignment = tuple((i, rec.assignment[i]) for (i, _), rec in zip(lists, choice))
        combos.append((math.fsum(rec.gap for rec in choice), assignment))
    combos.sort(key=lambda c: -c[0])
    for _, assignment in combos:
        yield assignment


def _run_round(state, ranking, truth, cfg, backends, target, probe) -> TokenizedText | None:
    for record in ranking:
        if len(state.selected_words) >= cfg.M:
            break
        i = record.word_index
        sc = generate_candidates(state.base, i, cfg, backends.masked_lm, probe)
        if not sc:
            continue
        pc = refine(state.base, i, sc, cfg, backends)
        if not pc:
            continue
        outcome = probe_candidates(state, i, pc, truth, target, cfg.N)
        if outcome.flipped is not None:
            return outcome.flipped
        if outcome.tops:
            state.selected_words.append(i)
            state.per_word_tops[i] = outcome.tops

    # a single contributing word has had all its options probed already
    if len(state.per_word_tops) < 2:
        return None
    base_score = state.base_score(truth)
    for assignment in enumerate_products(state.per_word_tops):
        variant = state.base.substitute_many(assignment)
        pred = target.predict(variant)
        state.consider(GapRecord(assignment, base_score - pred.prob(truth)), variant, pred)
        if pred.predicted != truth:
            return variant
    return None


def attack(
    sample: str | TokenizedText,
    truth: Label | int,
    cfg: AttackConfig | None,
    backends: BackendSuite,
    *,
    probe: Probe = mask_probe,
) -> AttackResult:
    """Attack one sample and report the outcome with exact query accounting."""
    cfg = cfg or AttackConfig()
    original = sample if isinstance(sample, TokenizedText) else tokenize(sample)
    truth = as_label(truth)
    counter = CountingTarget(backends.target, cfg.query_budget)
    stopwords = STOPWORDS if cfg.skip_stopwords else None
    state: SearchState | None = None
    rounds = 0

    def finish(status, text, error=None):
        return build_result(status, original, truth, text, counter.queries, rounds, backends, error)

    try:
        first = counter.predict(original)
        if first.predicted != truth:
            return finish(AttackStatus.SKIPPED_MISCLASSIFIED, original)
        state = SearchState(original, first, counter)
        ranking = None
        for rounds in range(1, cfg.max_rounds + 1):
            state.start_round(rounds)
            if ranking is None or cfg.rerank_each_round:
                ranking = rank_word_importance(
                    state.base, truth, counter, baseline=state.base_prediction, stopwords=stopwords
                )
            flipped = _run_round(state, ranking, truth, cfg, backends, counter, probe)
            if flipped is not None:
                return finish(AttackStatus.SUCCESS, flipped)
            if state.best_text is None or state.best_gap_sample.gap <= 0:
                log.debug("round %d found nothing that lowers the truth confidence", rounds)
                break
            state.adopt_best()
        return finish(AttackStatus.FAILED, state.base)
    except QueryBudgetExhausted:
        text = original
        if state is not None:
            text = state.base
            if state.best_gap_sample is not None and state.best_gap_sample.gap > 0:
                text = state.best_text
        return finish(AttackStatus.BUDGET_EXHAUSTED, text)
    except BackendError as exc:
        log.warning("attack aborted: %s", exc)
        return finish(AttackStatus.ERROR, state.base if state is not None else original, str(exc))


def build_result(status, original, truth, adversarial, queries, rounds, backends, error=None) -> AttackResult:
    subs = diff_substitutions(original, adversarial)
    if not subs:
        similarity = 1.0
    else:
        try:
            similarity = cosine(backends.embedder.embed(original.text), backends.embedder.embed(adversarial.text))
        except ZeroVector:
            similarity = math.nan
    return AttackResult(
        status=status,
        original=original,
        truth=truth,
        adversarial=adversarial,
        substitutions=subs,
        queries=queries,
        semantic_similarity=similarity,
        perturbation_pct=perturbation_percentage(original, subs),
        rounds=rounds,
        error=error,
    )
