"""Black-box word-substitution attacks on text classifiers.

Words are ranked by leave-one-out importance, masked-LM substitutions are
gathered over a window of neighbours, filtered by semantic similarity,
fluency and part of speech against per-word dynamic thresholds, and
combined by a local greedy search over the most important words.
"""

from .backends import BackendSuite
from .estimator import SubstitutionAttack
from .exceptions import (
    AttackError,
    BackendError,
    EmptyScores,
    EmptySearchSpace,
    EmptyText,
    ProtocolError,
    QueryBudgetExhausted,
    TargetUnavailable,
    ZeroVector,
)
from .search import attack
from .text import TokenizedText, detokenize, tokenize
from .types import (
    AttackConfig,
    AttackResult,
    AttackStatus,
    GapRecord,
    ImportanceRecord,
    Label,
    Prediction,
    ScoredCandidate,
    perturbation_percentage,
)

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackError",
    "AttackResult",
    "AttackStatus",
    "BackendError",
    "BackendSuite",
    "EmptyScores",
    "EmptySearchSpace",
    "EmptyText",
    "GapRecord",
    "ImportanceRecord",
    "Label",
    "Prediction",
    "ProtocolError",
    "QueryBudgetExhausted",
    "ScoredCandidate",
    "SubstitutionAttack",
    "TargetUnavailable",
    "TokenizedText",
    "ZeroVector",
    "attack",
    "detokenize",
    "perturbation_percentage",
    "tokenize",
]
