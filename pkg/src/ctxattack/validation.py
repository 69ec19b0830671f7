"""Input checks for the estimator API."""

from __future__ import annotations

import numpy as np

from .text import TokenizedText
from .types import Label


def check_texts(X) -> list:
    """Return ``X`` as a list of strings / TokenizedText, rejecting a bare string."""
    if isinstance(X, (str, bytes, TokenizedText)):
        raise TypeError("expected a collection of texts, got a single text; wrap it in a list")
    if isinstance(X, np.ndarray):
        if X.ndim == 2 and X.shape[1] == 1:
            X = X[:, 0]
        elif X.ndim != 1:
            raise ValueError(f"expected a 1-d array of texts, got shape {X.shape}")
    texts = list(X)
    for i, t in enumerate(texts):
        if not isinstance(t, (str, TokenizedText)):
            raise TypeError(f"sample {i} is {type(t).__name__}, expected str")
        if isinstance(t, str) and not t.strip():
            raise ValueError(f"sample {i} is empty")
    if not texts:
        raise ValueError("no samples given")
    return texts


def check_labels(y, n_samples: int, num_classes: int | None = None) -> list[int]:
    if y is None:
        raise ValueError("truth labels are required to attack")
    if not isinstance(y, np.ndarray):
        y = [v.id if isinstance(v, Label) else v for v in y]
    labels = np.asarray(y).ravel()
    if labels.shape[0] != n_samples:
        raise ValueError(f"got {labels.shape[0]} labels for {n_samples} samples")
    out = []
    for i, v in enumerate(labels):
        if not float(v).is_integer() or v < 0:
            raise ValueError(f"label {i} ({v!r}) is not a class index")
        if num_classes is not None and v >= num_classes:
            raise ValueError(f"label {i} ({v!r}) outside [0, {num_classes})")
        out.append(int(v))
    return out
