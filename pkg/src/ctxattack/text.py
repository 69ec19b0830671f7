"""Word-level text representation.

Tokenization is deliberately simple: runs of word characters (keeping
contractions and possessives such as ``You'd`` or ``Verhoeven's`` whole) and
single punctuation marks.  Punctuation tokens are kept so the text can be
rebuilt, but they are never attacked.  Whitespace between tokens is
normalised to at most one space, so ``detokenize(tokenize(x))`` equals ``x``
with whitespace runs collapsed and the ends trimmed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .exceptions import EmptyText

_TOKEN_RE = re.compile(r"\w+(?:['’]\w+)*|[^\w\s]")
_WS_RE = re.compile(r"\s+")

Tokenizer = Callable[[str], Sequence[str]]


def normalize_whitespace(raw: str) -> str:
    return _WS_RE.sub(" ", raw).strip()


def case_of(word: str) -> str:
    """Classify the casing of ``word`` as upper, title, lower or mixed."""
    letters = [c for c in word if c.isalpha()]
    if not letters:
        return "mixed"
    if len(letters) > 1 and all(c.isupper() for c in letters):
        return "upper"
    if letters[0].isupper() and all(c.islower() for c in letters[1:]):
        return "title"
    if all(c.islower() for c in letters):
        return "lower"
    return "mixed"


def apply_case(word: str, kind: str) -> str:
    if kind == "upper":
        return word.upper()
    if kind == "title":
        return word[:1].upper() + word[1:]
    # lower/mixed: keep whatever the substitution source produced
    return word


def is_attackable_token(token: str) -> bool:
    return any(c.isalpha() for c in token)


def is_single_word(token: str) -> bool:
    """True for a plain alphabetic word (no sub-word marks, digits or punctuation)."""
    return token.isalpha()


@dataclass(frozen=True)
class TokenizedText:
    """An immutable word sequence with enough layout to rebuild the string.

    ``space_after[i]`` records whether a space follows word ``i``;
    ``case_map[i]`` keeps the casing of the word originally at position ``i``
    so that substitutions can be re-cased consistently.
    """

    words: tuple[str, ...]
    original_raw: str
    case_map: tuple[str, ...]
    space_after: tuple[bool, ...]
    attackable: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        n = len(self.words)
        if not self.attackable:
            object.__setattr__(
                self, "attackable", tuple(is_attackable_token(w) for w in self.words)
            )
        if not (len(self.case_map) == len(self.space_after) == len(self.attackable) == n):
            raise ValueError("TokenizedText fields must have one entry per word")

    def __len__(self) -> int:
        return len(self.words)

    def __getitem__(self, index: int) -> str:
        return self.words[index]

    @property
    def text(self) -> str:
        return detokenize(self)

    def attackable_indices(self) -> list[int]:
        return [i for i, ok in enumerate(self.attackable) if ok]

    def substitute(self, index: int, word: str, match_case: bool = True) -> "TokenizedText":
        """Return a copy with ``word`` at ``index``, re-cased to the original word."""
        if not 0 <= index < len(self.words):
            raise IndexError(f"word index {index} out of range for {len(self.words)} words")
        if match_case:
            word = apply_case(word, self.case_map[index])
        words = list(self.words)
        words[index] = word
        return TokenizedText(
            tuple(words), self.original_raw, self.case_map, self.space_after, self.attackable
        )

    def substitute_many(self, assignment, match_case: bool = True) -> "TokenizedText":
        out = self
        for index, word in sorted(dict(assignment).items()):
            out = out.substitute(index, word, match_case=match_case)
        return out

    def window(self, index: int, half: int) -> "TokenizedText":
        lo, hi = max(0, index - half), min(len(self.words), index + half + 1)
        return TokenizedText(
            self.words[lo:hi],
            self.original_raw,
            self.case_map[lo:hi],
            self.space_after[lo:hi],
            self.attackable[lo:hi],
        )


def tokenize(raw: str, tokenizer: Tokenizer | None = None) -> TokenizedText:
    """Split ``raw`` into words and punctuation.

    ``tokenizer`` may replace the built-in splitter; it must return tokens
    that occur in order in ``raw``.
    """
    if raw is None or not raw.strip():
        raise EmptyText("cannot tokenize empty text")
    norm = normalize_whitespace(raw)
    if tokenizer is None:
        spans = [(m.start(), m.end()) for m in _TOKEN_RE.finditer(norm)]
    else:
        spans = _locate(norm, tokenizer(norm))
    if not spans:
        raise EmptyText("text contains no tokens")
    words = tuple(norm[a:b] for a, b in spans)
    space_after = tuple(b < len(norm) and norm[b] == " " for _, b in spans)
    return TokenizedText(words, raw, tuple(case_of(w) for w in words), space_after)


def _locate(norm: str, tokens: Iterable[str]) -> list[tuple[int, int]]:
    spans, pos = [], 0
    for tok in tokens:
        start = norm.find(tok, pos)
        if start < 0:
            raise ValueError(f"tokenizer produced {tok!r} which is not in the text")
        spans.append((start, start + len(tok)))
        pos = start + len(tok)
    return spans


def detokenize(text: TokenizedText) -> str:
    parts = []
    for word, space in zip(text.words, text.space_after):
        parts.append(word)
        if space:
            parts.append(" ")
    return "".join(parts).rstrip(" ")
