"""Semantic, syntactic and part-of-speech filtering of candidates.

Every candidate of one word gets two scores: the cosine similarity of
sentence embeddings with and without the substitution, and the change
in left-context word probability (candidate minus original).  A cut-off
for each score is derived from that word's own score distribution and
raised to a static floor when it falls below it.  A candidate must reach
each dynamic cut-off, lie strictly above each floor, and then pass the
POS check.
"""

from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .backends.base import BackendSuite, FluencyScorer, PosTagger, SentenceEmbedder
from .exceptions import EmptyScores, ZeroVector
from .text import TokenizedText
from .types import AttackConfig, PosVerdict, ScoredCandidate

log = logging.getLogger(__name__)


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroVector("cannot take the cosine of a zero-norm embedding")
    return float(np.dot(u, v) / (nu * nv))


def _view(text: TokenizedText, word_index: int, window: int | None) -> str:
    return (text if window is None else text.window(word_index, window)).text


def semantic_score(
    original: TokenizedText,
    word_index: int,
    candidate: str,
    embedder: SentenceEmbedder,
    window: int | None = None,
) -> float:
    """Cosine between embeddings of the text before and after substituting ``candidate``."""
    v_in = embedder.embed(_view(original, word_index, window))
    v_sub = embedder.embed(_view(original.substitute(word_index, candidate), word_index, window))
    return cosine(v_in, v_sub)


def syntactic_score(original: TokenizedText, word_index: int, candidate: str, fluency: FluencyScorer) -> float:
    p_sub = fluency.word_probability(original, word_index, candidate)
    p_orig = fluency.word_probability(original, word_index, original.words[word_index])
    return p_sub - p_orig


def dynamic_threshold(scores: Sequence[float], heuristic: str, lam: float = 1.0, topn_rank: int = 3) -> float:
    """Cut-off computed from one word's candidate scores.

    ``top_n`` takes the ``topn_rank``-th best score (the last one when the
    list is shorter); ``top_maxes_distance`` lowers that score by ``lam``
    times its distance to the best score.  ``constant`` returns -inf so
    only the static floors apply.
    """
    if len(scores) == 0:
        raise EmptyScores("no scores to threshold")
    if topn_rank < 1:
        raise ValueError("topn_rank must be >= 1")
    if heuristic == "average":
        return math.fsum(scores) / len(scores)
    if heuristic == "median":
        return float(statistics.median(scores))
    if heuristic == "constant":
        return -math.inf
    ranked = sorted(scores, reverse=True)
    s_n = ranked[min(topn_rank, len(ranked)) - 1]
    if heuristic == "top_n":
        return s_n
    if heuristic == "top_maxes_distance":
        return s_n - lam * (ranked[0] - s_n)
    raise ValueError(f"unknown threshold heuristic {heuristic!r}")


@dataclass(frozen=True)
class ThresholdOutcome:
    heuristic: str
    dt_semantic: float
    dt_syntactic: float
    effective_semantic: float
    effective_syntactic: float


def compute_thresholds(semantic: Sequence[float], syntactic: Sequence[float], cfg: AttackConfig) -> ThresholdOutcome:
    dt_sem = dynamic_threshold(semantic, cfg.heuristic, cfg.lam, cfg.topn_rank)
    dt_syn = dynamic_threshold(syntactic, cfg.heuristic, cfg.lam, cfg.topn_rank)
    return ThresholdOutcome(
        cfg.heuristic, dt_sem, dt_syn, max(dt_sem, cfg.semantic_floor), max(dt_syn, cfg.syntactic_floor)
    )


def passes(score: float, dynamic: float, floor: float) -> bool:
    # inclusive at the dynamic cut-off so ties at the N-th score survive
    return score >= dynamic and score > floor


def pos_compatible(
    original: TokenizedText, word_index: int, candidate: str, tagger: PosTagger
) -> tuple[PosVerdict, str | None]:
    """POS check with the candidate already placed in the sentence.

    Nouns of the other grammatical number are re-inflected rather than
    dropped; verbs sharing the original's lemma are dropped.
    """
    want = tagger.tag_in_context(original, word_index)
    got = tagger.tag_in_context(original.substitute(word_index, candidate), word_index)
    if got.pos != want.pos:
        return PosVerdict.REJECT, None
    if want.pos == "VERB" and want.lemma and got.lemma and want.lemma.lower() == got.lemma.lower():
        return PosVerdict.REJECT, None
    if want.pos == "NOUN" and want.number and got.number and want.number != got.number:
        form = tagger.inflect(candidate, got, want.number)
        if not form or form.lower() == original.words[word_index].lower():
            return PosVerdict.REJECT, None
        return PosVerdict.INFLECTED, form
    return PosVerdict.ACCEPT, None


def score_candidates(
    original: TokenizedText, word_index: int, sc: Sequence[str], cfg: AttackConfig, backends: BackendSuite
) -> list[tuple[str, float, float]]:
    """(candidate, semantic, syntactic) triples.

    Candidates whose embedding (or the original's) has zero norm cannot be
    scored and are left out.
    """
    v_in = backends.embedder.embed(_view(original, word_index, cfg.semantic_window))
    p_orig = backends.fluency.word_probability(original, word_index, original.words[word_index])
    out = []
    for cand in sc:
        variant = original.substitute(word_index, cand)
        try:
            sem = cosine(v_in, backends.embedder.embed(_view(variant, word_index, cfg.semantic_window)))
        except ZeroVector:
            log.debug("dropping %r: zero-norm embedding", cand)
            continue
        syn = backends.fluency.word_probability(original, word_index, cand) - p_orig
        out.append((cand, sem, syn))
    return out


def refine(
    original: TokenizedText, word_index: int, sc: Sequence[str], cfg: AttackConfig, backends: BackendSuite
) -> list[ScoredCandidate]:
    """Purified candidates for one word, best semantic score first."""
    if not sc:
        return []
    scored = score_candidates(original, word_index, sc, cfg, backends)
    if not scored:
        return []
    th = compute_thresholds([s[1] for s in scored], [s[2] for s in scored], cfg)
    kept: list[ScoredCandidate] = []
    for cand, sem, syn in scored:
        if not passes(sem, th.dt_semantic, cfg.semantic_floor):
            continue
        if not passes(syn, th.dt_syntactic, cfg.syntactic_floor):
            continue
        verdict, form = pos_compatible(original, word_index, cand, backends.pos_tagger)
        if verdict == PosVerdict.REJECT:
            continue
        kept.append(ScoredCandidate(cand, sem, syn, verdict, form))
    # sort is stable, so equal semantic scores keep masked-LM order
    kept.sort(key=lambda c: -c.semantic)
    out, seen = [], set()
    for c in kept:
        key = c.surface.lower()
        if key not in seen:
            seen.add(key)
            out.append(c)
    return out
