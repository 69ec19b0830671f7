"""scikit-learn style front end.

:class:`SubstitutionAttack` is a transformer whose ``transform(X, y)``
maps texts to adversarial texts.  Hyperparameters live in ``__init__`` so
``get_params``/``set_params``/``clone`` work, which is what the harness
sweeps rely on.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .backends.base import BackendSuite
from .exceptions import ConfigError
from .search import attack
from .types import AttackConfig, AttackStatus
from .validation import check_labels, check_texts


class SubstitutionAttack(TransformerMixin, BaseEstimator):
    """Black-box word-substitution attack against ``backends.target``.

    Parameters mirror :class:`~ctxattack.types.AttackConfig`; ``backends``
    holds the five model interfaces.

    Attributes set by ``fit``: ``config_``.  Set by ``transform``:
    ``results_`` (one :class:`AttackResult` per sample).
    """

    def __init__(
        self,
        backends: BackendSuite | None = None,
        K=60,
        window_half=2,
        M=3,
        N=4,
        lam=1.0,
        topn_rank=3,
        heuristic="top_maxes_distance",
        semantic_floor=0.7,
        syntactic_floor=0.0,
        max_rounds=4,
        query_budget=None,
        rerank_each_round=True,
        skip_stopwords=False,
        semantic_window=None,
    ):
        self.backends = backends
        self.K = K
        self.window_half = window_half
        self.M = M
        self.N = N
        self.lam = lam
        self.topn_rank = topn_rank
        self.heuristic = heuristic
        self.semantic_floor = semantic_floor
        self.syntactic_floor = syntactic_floor
        self.max_rounds = max_rounds
        self.query_budget = query_budget
        self.rerank_each_round = rerank_each_round
        self.skip_stopwords = skip_stopwords
        self.semantic_window = semantic_window

    @classmethod
    def from_config(cls, cfg: AttackConfig, backends: BackendSuite) -> "SubstitutionAttack":
        return cls(backends=backends, **cfg.to_dict())

    def get_config(self) -> AttackConfig:
        params = self.get_params(deep=False)
        params.pop("backends")
        return AttackConfig(**params)

    def fit(self, X=None, y=None):
        """Validate hyperparameters and backends; the attack itself learns nothing."""
        if not isinstance(self.backends, BackendSuite):
            raise ConfigError("backends must be a BackendSuite", key="backends")
        self.config_ = self.get_config()
        if X is not None:
            texts = check_texts(X)
            if y is not None:
                check_labels(y, len(texts))
        return self

    def attack_one(self, text, label):
        check_is_fitted(self, "config_")
        return attack(text, label, self.config_, self.backends)

    def transform(self, X, y=None):
        check_is_fitted(self, "config_")
        texts = check_texts(X)
        labels = check_labels(y, len(texts))
        self.results_ = [attack(t, lab, self.config_, self.backends) for t, lab in zip(texts, labels)]
        return np.array([r.adversarial.text for r in self.results_], dtype=object)

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y).transform(X, y)

    def score(self, X, y):
        """Attack success rate over the samples the target got right."""
        self.transform(X, y)
        skip = (AttackStatus.SKIPPED_MISCLASSIFIED, AttackStatus.ERROR)
        attacked = [r for r in self.results_ if r.status not in skip]
        if not attacked:
            return 0.0
        return sum(r.succeeded for r in attacked) / len(attacked)
