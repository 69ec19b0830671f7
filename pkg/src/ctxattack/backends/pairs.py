from __future__ import annotations

from ..text import TokenizedText
from ..types import Prediction


class PairTarget:
    """Presents a sentence-pair model as a single-text target.

    The attacked field arrives as a :class:`TokenizedText`; the other field
    is fixed.  The inner model must offer ``predict_pair(premise, hypothesis)``.
    """

    def __init__(self, inner, fixed_text: str, attack_field: str = "premise"):
        if attack_field not in ("premise", "hypothesis"):
            raise ValueError(f"attack_field must be premise or hypothesis, got {attack_field!r}")
        if not hasattr(inner, "predict_pair"):
            raise TypeError(f"{type(inner).__name__} cannot score sentence pairs")
        self.inner = inner
        self.fixed_text = fixed_text
        self.attack_field = attack_field

    @property
    def reentrant(self) -> bool:
        return bool(getattr(self.inner, "reentrant", False))

    def predict(self, text: TokenizedText) -> Prediction:
        if self.attack_field == "premise":
            return self.inner.predict_pair(text.text, self.fixed_text)
        return self.inner.predict_pair(self.fixed_text, text.text)
