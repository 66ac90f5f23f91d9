"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`PromptNerError`
and carries an ``exit_code`` the CLI uses directly.
"""

from __future__ import annotations


class PromptNerError(Exception):
    exit_code = 2


class DataError(PromptNerError):
    exit_code = 2


class GatewayError(PromptNerError):
    exit_code = 3


# corpus
class InsufficientCorpus(DataError):
    pass


class TestLeakage(DataError):
    __test__ = False  # keep pytest from collecting this


class OverlappingSpans(DataError):
    pass


# prompts
class BudgetUnsatisfiable(DataError):
    pass


# gateway
class CacheMiss(GatewayError):
    pass


class TransportFailure(GatewayError):
    pass


class TokenLimitExceeded(GatewayError):
    pass


class CredentialsMissing(GatewayError):
    pass


# embedding
class EmptyText(DataError):
    pass


class ProviderUnavailable(GatewayError):
    pass


class DimensionMismatch(DataError):
    pass


class ZeroVector(DataError):
    pass


# evaluation / pipeline
class ZeroGold(DataError):
    pass


class EmptyMatchSet(DataError):
    pass


class MissingRuns(DataError):
    pass


class RunMismatch(DataError):
    """Artifacts from different runs were combined."""
