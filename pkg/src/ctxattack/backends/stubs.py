"""Small deterministic backends, each simple enough to verify by hand.

* :class:`KeywordTarget` - keyword-weight classifier.  Every class starts
  at ``1 / num_classes``; each word adds its weight vector; negative
  totals are clipped to zero and the result renormalised.  A plain float
  weight ``w`` in a binary model means ``(-w, +w)``, so ``{"great": 0.4}``
  scores "great food" as ``(0.1, 0.9)``.
* :class:`TableMaskedLM` - lookup table keyed by the masked word.
* :class:`BagOfWordsEmbedder` - sum of per-word vectors (explicit table,
  else a hashed one-hot), hence order-insensitive.
* :class:`BigramFluency` - bigram table with a unigram table for the
  first word and a fixed floor for anything unseen.
* :class:`LexiconTagger` - context-free dictionary tagger.
"""

from __future__ import annotations

import hashlib
from typing import Mapping, Sequence

import inflect
import numpy as np

from ..text import TokenizedText, is_attackable_token, is_single_word, tokenize
from ..types import Prediction
from .base import BackendSuite, PosTag, normalize_scores

FLOOR_PROBABILITY = 1e-8


class KeywordTarget:
    reentrant = True

    def __init__(
        self,
        weights: Mapping[str, float | Sequence[float]],
        num_classes: int = 2,
        class_names: Sequence[str] | None = None,
    ):
        self.num_classes = num_classes
        self.class_names = tuple(class_names) if class_names else None
        self.weights = {}
        for word, w in weights.items():
            if isinstance(w, (int, float)):
                if num_classes != 2:
                    raise ValueError("scalar keyword weights need a binary model")
                vec = (-float(w), float(w))
            else:
                vec = tuple(float(x) for x in w)
                if len(vec) != num_classes:
                    raise ValueError(f"weight for {word!r} has {len(vec)} entries, expected {num_classes}")
            self.weights[word.lower()] = vec

    def raw_scores(self, words: Sequence[str]) -> list[float]:
        raw = [1.0 / self.num_classes] * self.num_classes
        for word in words:
            vec = self.weights.get(word.lower())
            if vec:
                raw = [r + v for r, v in zip(raw, vec)]
        return raw

    def predict(self, text: TokenizedText) -> Prediction:
        return Prediction.from_scores(normalize_scores(self.raw_scores(text.words)), self.class_names)

    def predict_pair(self, premise: str, hypothesis: str) -> Prediction:
        words = tokenize(premise).words + tokenize(hypothesis).words
        return Prediction.from_scores(normalize_scores(self.raw_scores(words)), self.class_names)


class UniformTarget:
    reentrant = True

    def __init__(self, num_classes: int = 2):
        self.num_classes = num_classes

    def predict(self, text: TokenizedText) -> Prediction:
        return Prediction.from_scores([1.0 / self.num_classes] * self.num_classes)


class TableMaskedLM:
    """Fills for a masked word looked up by that word (lowercased).

    ``anchored`` entries keyed by ``(masked_word, anchor_word)`` take
    precedence, which lets a test give every window probe its own list.
    Entries that are not single alphabetic words are dropped on return.
    """

    reentrant = True

    def __init__(
        self,
        table: Mapping[str, Sequence[str]],
        anchored: Mapping[tuple[str, str], Sequence[str]] | None = None,
    ):
        self.table = {k.lower(): list(v) for k, v in table.items()}
        self.anchored = {(a.lower(), b.lower()): list(v) for (a, b), v in (anchored or {}).items()}

    def top_k(self, text: TokenizedText, mask_index: int, k: int, anchor: int | None = None) -> list[str]:
        if not 0 <= mask_index < len(text):
            raise IndexError(mask_index)
        key = text.words[mask_index].lower()
        fills = None
        if anchor is not None:
            fills = self.anchored.get((key, text.words[anchor].lower()))
        if fills is None:
            fills = self.table.get(key, [])
        out = []
        for word in fills:
            if is_single_word(word) and word not in out:
                out.append(word)
            if len(out) >= k:
                break
        return out


class BagOfWordsEmbedder:
    reentrant = True

    def __init__(self, vectors: Mapping[str, Sequence[float]] | None = None, dim: int = 64):
        self.vectors = {k.lower(): np.asarray(v, dtype=float) for k, v in (vectors or {}).items()}
        if self.vectors:
            dims = {v.shape[0] for v in self.vectors.values()}
            if len(dims) != 1:
                raise ValueError("all embedding vectors must share one dimension")
            dim = dims.pop()
        self.dim = dim

    def _word_vector(self, word: str) -> np.ndarray:
        vec = self.vectors.get(word)
        if vec is not None:
            return vec
        out = np.zeros(self.dim)
        digest = hashlib.blake2b(word.encode("utf-8"), digest_size=8).digest()
        out[int.from_bytes(digest, "big") % self.dim] = 1.0
        return out

    def embed(self, text: str) -> np.ndarray:
        total = np.zeros(self.dim)
        for word in tokenize(text).words:
            if is_attackable_token(word):
                total = total + self._word_vector(word.lower())
        return total


class BigramFluency:
    reentrant = True

    def __init__(
        self,
        bigrams: Mapping[tuple[str, str], float] | None = None,
        unigrams: Mapping[str, float] | None = None,
        floor: float = FLOOR_PROBABILITY,
    ):
        self.bigrams = {(a.lower(), b.lower()): float(p) for (a, b), p in (bigrams or {}).items()}
        self.unigrams = {w.lower(): float(p) for w, p in (unigrams or {}).items()}
        self.floor = floor

    def word_probability(self, text: TokenizedText, word_index: int, word: str) -> float:
        word = word.lower()
        if word_index == 0:
            return self.unigrams.get(word, self.floor)
        prev = text.words[word_index - 1].lower()
        return self.bigrams.get((prev, word), self.floor)


_ENGINE = inflect.engine()


def inflect_noun(word: str, number: str) -> str | None:
    """English noun number inflection (``inflect`` package), None when unknown."""
    if number == "plur":
        return _ENGINE.plural_noun(word) or None
    if number == "sing":
        singular = _ENGINE.singular_noun(word)
        return singular if singular else word
    return None


class LexiconTagger:
    """Tags words from a fixed lexicon, ignoring context.

    Lexicon values are :class:`PosTag` objects or ``"POS[:number[:lemma]]"``
    strings such as ``"NOUN:plur:shop"``.  Unknown words get ``default_pos``
    with themselves as lemma.
    """

    reentrant = True

    def __init__(self, lexicon: Mapping[str, PosTag | str], default_pos: str = "X"):
        self.lexicon = {w.lower(): _as_tag(t) for w, t in lexicon.items()}
        self.default_pos = default_pos

    def tag_word(self, word: str) -> PosTag:
        word = word.lower()
        return self.lexicon.get(word) or PosTag(self.default_pos, lemma=word)

    def tag_in_context(self, text: TokenizedText, word_index: int) -> PosTag:
        return self.tag_word(text.words[word_index])

    def inflect(self, word: str, tag: PosTag, number: str) -> str | None:
        lemma = tag.lemma or word.lower()
        for form, entry in self.lexicon.items():
            if entry.pos == tag.pos and entry.lemma == lemma and entry.number == number:
                return form
        if tag.pos == "NOUN":
            return inflect_noun(word, number)
        return None


def _as_tag(value: PosTag | str) -> PosTag:
    if isinstance(value, PosTag):
        return value
    parts = value.split(":")
    pos = parts[0]
    number = parts[1] if len(parts) > 1 and parts[1] else None
    lemma = parts[2] if len(parts) > 2 and parts[2] else None
    return PosTag(pos, number=number, lemma=lemma)


def build_stub_suite(spec: Mapping) -> BackendSuite:
    """Assemble a stub suite from a JSON-style mapping.

    Keys: ``target`` (``weights``, ``num_classes``, ``class_names``),
    ``masked_lm`` (``table``), ``embedder`` (``vectors``, ``dim``),
    ``fluency`` (``bigrams`` as ``"prev word"`` keys, ``unigrams``, ``floor``)
    and ``pos`` (``lexicon``, ``default_pos``).
    """
    t = spec.get("target", {})
    target = KeywordTarget(t.get("weights", {}), t.get("num_classes", 2), t.get("class_names"))
    mlm = TableMaskedLM(spec.get("masked_lm", {}).get("table", {}))
    e = spec.get("embedder", {})
    embedder = BagOfWordsEmbedder(e.get("vectors"), e.get("dim", 64))
    f = spec.get("fluency", {})
    bigrams = {tuple(k.split(" ", 1)): p for k, p in f.get("bigrams", {}).items()}
    fluency = BigramFluency(bigrams, f.get("unigrams"), f.get("floor", FLOOR_PROBABILITY))
    p = spec.get("pos", {})
    tagger = LexiconTagger(p.get("lexicon", {}), p.get("default_pos", "X"))
    return BackendSuite(target, mlm, embedder, fluency, tagger)


# A tiny sentiment world used by the CLI's "stub" suite and the README demo.
DEMO_SUITE_SPEC = {
    "target": {
        "class_names": ["negative", "positive"],
        "weights": {
            "great": 0.3, "nice": 0.25, "good": 0.2, "fine": 0.05, "decent": 0.05,
            "friendly": 0.15, "tasty": 0.15, "love": 0.25, "loved": 0.25,
            "bad": -0.3, "awful": -0.35, "rude": -0.2, "bland": -0.15, "hate": -0.3,
            "okay": -0.05, "fantastic": -0.1, "ordinary": -0.1, "cold": -0.1,
        },
    },
    "masked_lm": {
        "table": {
            "great": ["fantastic", "good", "nice", "okay", "great"],
            "nice": ["fantastic", "good", "decent", "fine"],
            "good": ["decent", "fine", "okay", "ordinary"],
            "friendly": ["polite", "warm", "cold"],
            "tasty": ["fresh", "decent", "ordinary", "bland"],
            "love": ["like", "enjoy", "hate"],
            "loved": ["liked", "enjoyed", "hated"],
            "bad": ["poor", "awful", "weak"],
            "awful": ["bad", "poor", "terrible"],
            "rude": ["busy", "slow", "friendly"],
            "bland": ["plain", "simple", "tasty"],
            "place": ["spot", "restaurant", "cafe"],
            "food": ["meal", "dish", "cuisine"],
            "staff": ["waiters", "crew", "people"],
        }
    },
    "embedder": {"dim": 32},
    "fluency": {
        "unigrams": {"the": 0.05, "a": 0.05, "fantastic": 0.002, "great": 0.001},
        "bigrams": {
            "very fantastic": 0.01, "very good": 0.02, "very decent": 0.03, "very fine": 0.025,
            "very okay": 0.022, "very polite": 0.02, "very warm": 0.02,
            "a fantastic": 0.01, "a nice": 0.008, "a decent": 0.009, "a fine": 0.009, "a good": 0.007,
            "a okay": 0.0001, "a great": 0.006, "is fantastic": 0.01, "is okay": 0.012,
            "is great": 0.006, "is good": 0.011, "is decent": 0.0105, "is ordinary": 0.009,
            "the meal": 0.01, "the dish": 0.008, "the food": 0.007,
            "was fantastic": 0.01, "was good": 0.008, "was nice": 0.006, "was okay": 0.005, "was great": 0.004,
            "were cold": 0.01, "were polite": 0.008, "were warm": 0.006, "were friendly": 0.004,
        },
    },
    "pos": {
        "lexicon": {
            "great": "ADJ", "nice": "ADJ", "good": "ADJ", "fine": "ADJ", "decent": "ADJ",
            "okay": "ADJ", "fantastic": "ADJ", "ordinary": "ADJ", "friendly": "ADJ",
            "polite": "ADJ", "warm": "ADJ", "cold": "ADJ", "tasty": "ADJ", "fresh": "ADJ",
            "bland": "ADJ", "plain": "ADJ", "simple": "ADJ", "bad": "ADJ", "poor": "ADJ",
            "awful": "ADJ", "weak": "ADJ", "terrible": "ADJ", "rude": "ADJ", "busy": "ADJ",
            "slow": "ADJ",
            "love": "VERB::love", "like": "VERB::like", "enjoy": "VERB::enjoy", "hate": "VERB::hate",
            "loved": "VERB::love", "liked": "VERB::like", "enjoyed": "VERB::enjoy", "hated": "VERB::hate",
            "place": "NOUN:sing:place", "spot": "NOUN:sing:spot", "restaurant": "NOUN:sing:restaurant",
            "cafe": "NOUN:sing:cafe", "food": "NOUN:sing:food", "meal": "NOUN:sing:meal",
            "dish": "NOUN:sing:dish", "cuisine": "NOUN:sing:cuisine", "staff": "NOUN:sing:staff",
            "waiters": "NOUN:plur:waiter", "crew": "NOUN:sing:crew", "people": "NOUN:plur:person",
        }
    },
}


def demo_suite() -> BackendSuite:
    return build_stub_suite(DEMO_SUITE_SPEC)
