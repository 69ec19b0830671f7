"""Context-aware substitution candidates from a masked language model.

For a word at position ``i`` the masked LM is probed once per neighbour
inside ``i - window_half .. i + window_half`` and the per-probe top-K
lists are unioned.  By default every probe masks the word itself and
passes the neighbour as the probe's anchor (see
:meth:`MaskedLMProvider.top_k`); :func:`neighbor_probe` masks the
neighbour instead and can be passed as ``probe``.
"""

from __future__ import annotations

from typing import Callable

from .backends.base import MaskedLMProvider
from .text import TokenizedText, is_single_word
from .types import AttackConfig

Probe = Callable[[MaskedLMProvider, TokenizedText, int, "int | None", int], list]


def mask_probe(mlm: MaskedLMProvider, text: TokenizedText, word_index: int, neighbor: int | None, k: int):
    return mlm.top_k(text, word_index, k, anchor=neighbor)


def neighbor_probe(mlm: MaskedLMProvider, text: TokenizedText, word_index: int, neighbor: int | None, k: int):
    return mlm.top_k(text, word_index if neighbor is None else neighbor, k)


def neighbor_positions(n_words: int, word_index: int, window_half: int) -> list[int]:
    lo = max(0, word_index - window_half)
    hi = min(n_words - 1, word_index + window_half)
    return [j for j in range(lo, hi + 1) if j != word_index]


def generate_candidates(
    text: TokenizedText,
    word_index: int,
    cfg: AttackConfig,
    mlm: MaskedLMProvider,
    probe: Probe = mask_probe,
) -> list[str]:
    """Union of top-``cfg.K`` fills over the window, in first-seen order.

    The original word (any casing) and anything that is not a single
    alphabetic word are left out.  A text with no neighbours at all gets a
    single unanchored probe.
    """
    original = text.words[word_index].lower()
    anchors = neighbor_positions(len(text), word_index, cfg.window_half) or [None]
    seen: set[str] = set()
    out: list[str] = []
    for anchor in anchors:
        for word in probe(mlm, text, word_index, anchor, cfg.K)[: cfg.K]:
            key = word.lower()
            if key == original or key in seen or not is_single_word(word):
                continue
            seen.add(key)
            out.append(word)
    return out
