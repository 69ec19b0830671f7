"""Exception hierarchy."""


class AttackError(Exception):
    """Base class for all errors raised by ctxattack."""


class EmptyText(AttackError, ValueError):
    """Input text has no tokens after trimming."""


class EmptyScores(AttackError, ValueError):
    """A threshold was requested over an empty score list."""


class ZeroVector(AttackError, ArithmeticError):
    """Cosine similarity requested for a zero-norm embedding."""


class EmptySearchSpace(AttackError, ValueError):
    """Every per-word candidate list handed to the product search was empty."""


class BackendError(AttackError):
    """A model backend failed to answer."""


class TargetUnavailable(BackendError):
    """The target model could not be reached (after retries, for remote targets)."""


class ProtocolError(BackendError):
    """The target model answered with a malformed response."""


class QueryBudgetExhausted(AttackError):
    """The per-attack query budget was spent."""


class DatasetError(AttackError, ValueError):
    """A dataset file could not be parsed or validated."""


class ConfigError(AttackError, ValueError):
    """Invalid attack or run configuration; ``key`` names the offending field."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
