"""Adapters for pretrained models (transformers / sentence-transformers / spaCy).

Nothing here is imported by the rest of the package; model libraries are
loaded lazily so the core works without them.  Weights are fetched by
the underlying libraries on first use.
"""

from __future__ import annotations

import math

import numpy as np

from ..text import TokenizedText, detokenize, is_single_word
from ..types import Prediction
from .base import PosTag
from .stubs import inflect_noun

DEFAULT_MLM = "bert-base-uncased"
DEFAULT_CAUSAL_LM = "gpt2"
# 512-dimensional multilingual distillation of the Universal Sentence Encoder
DEFAULT_SENTENCE_ENCODER = "sentence-transformers/distiluse-base-multilingual-cased-v2"


def _torch():
    import torch

    return torch


class HFSequenceClassifier:
    """Target model wrapping a ``transformers`` sequence classifier."""

    reentrant = False

    def __init__(self, model_name: str, device: str = "cpu", max_length: int = 512):
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForSequenceClassification.from_pretrained(model_name).to(device).eval()
        self.device = device
        self.max_length = max_length

    def _run(self, *texts) -> Prediction:
        torch = _torch()
        enc = self.tokenizer(*texts, return_tensors="pt", truncation=True, max_length=self.max_length)
        with torch.no_grad():
            logits = self.model(**enc.to(self.device)).logits[0]
        probs = torch.softmax(logits.double(), dim=-1).tolist()
        return Prediction.from_scores(probs)

    def predict(self, text: TokenizedText) -> Prediction:
        return self._run(detokenize(text))

    def predict_pair(self, first: str, second: str) -> Prediction:
        return self._run(first, second)


class HFMaskedLM:
    reentrant = False

    def __init__(self, model_name: str = DEFAULT_MLM, device: str = "cpu", max_length: int = 512):
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForMaskedLM.from_pretrained(model_name).to(device).eval()
        self.device = device
        self.max_length = max_length

    def top_k(self, text: TokenizedText, mask_index: int, k: int, anchor: int | None = None) -> list[str]:
        torch = _torch()
        masked = text.substitute(mask_index, self.tokenizer.mask_token, match_case=False)
        enc = self.tokenizer(detokenize(masked), return_tensors="pt", truncation=True, max_length=self.max_length)
        ids = enc["input_ids"][0].tolist()
        if self.tokenizer.mask_token_id not in ids:
            return []
        pos = ids.index(self.tokenizer.mask_token_id)
        with torch.no_grad():
            logits = self.model(**enc.to(self.device)).logits[0, pos]
        out = []
        for token_id in torch.argsort(logits, descending=True).tolist():
            word = self.tokenizer.convert_ids_to_tokens(token_id)
            if is_single_word(word) and word not in out:
                out.append(word)
                if len(out) >= k:
                    break
        return out


class GPT2Fluency:
    """P(word | left context) under a causal LM; multi-token words multiply."""

    reentrant = False

    def __init__(self, model_name: str = DEFAULT_CAUSAL_LM, device: str = "cpu"):
        from transformers import AutoModelForCausalLM, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForCausalLM.from_pretrained(model_name).to(device).eval()
        self.device = device

    def word_probability(self, text: TokenizedText, word_index: int, word: str) -> float:
        torch = _torch()
        prefix_ids = [self.tokenizer.bos_token_id]
        if word_index > 0:
            prefix_ids += self.tokenizer.encode(" ".join(text.words[:word_index]))
        word_ids = self.tokenizer.encode((" " if word_index > 0 else "") + word)
        ids = torch.tensor([prefix_ids + word_ids], device=self.device)
        with torch.no_grad():
            logprobs = torch.log_softmax(self.model(ids).logits[0].double(), dim=-1)
        total = 0.0
        for offset, tok in enumerate(word_ids):
            total += logprobs[len(prefix_ids) + offset - 1, tok].item()
        return math.exp(total)


class SentenceTransformerEmbedder:
    reentrant = False

    def __init__(self, model_name: str = DEFAULT_SENTENCE_ENCODER, device: str = "cpu"):
        from sentence_transformers import SentenceTransformer

        self.model = SentenceTransformer(model_name, device=device)
        self.dim = self.model.get_sentence_embedding_dimension()

    def embed(self, text: str) -> np.ndarray:
        return np.asarray(self.model.encode(text), dtype=float)


class SpacyTagger:
    """POS tags from a spaCy pipeline, read off the full sentence."""

    reentrant = False
    _COARSE = {"PROPN": "NOUN", "AUX": "VERB"}

    def __init__(self, model_name: str = "en_core_web_sm"):
        import spacy

        self.nlp = spacy.load(model_name)

    def tag_in_context(self, text: TokenizedText, word_index: int) -> PosTag:
        from spacy.tokens import Doc

        doc = self.nlp(Doc(self.nlp.vocab, words=list(text.words), spaces=list(text.space_after)))
        tok = doc[word_index]
        number = tok.morph.get("Number")
        number = {"Sing": "sing", "Plur": "plur"}.get(number[0]) if number else None
        return PosTag(self._COARSE.get(tok.pos_, tok.pos_), number=number, lemma=tok.lemma_.lower(), tag=tok.tag_)

    def inflect(self, word: str, tag: PosTag, number: str) -> str | None:
        return inflect_noun(word, number) if tag.pos == "NOUN" else None
