"""Shared exception and warning types."""


class ConfigurationError(ValueError):
    """Invalid simulation or run configuration."""


class GridCoverageError(ValueError):
    """A recursion lookup fell off the evaluation grid."""


class CacheInvalidError(RuntimeError):
    """A persisted table file does not match the requesting context."""


class InconsistencyError(RuntimeError):
    """A numerical identity was violated beyond tolerance."""


class TruncationWarning(UserWarning):
    """Censored probability mass is large enough to bias truncated sums."""
