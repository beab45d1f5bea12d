"""Exception types shared across the toolkit."""


class CloseReadError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(CloseReadError):
    """Unknown scheme / bad configuration value."""


class ArgumentError(CloseReadError, ValueError):
    """Invalid argument to an operation (empty query, bad threshold, ...)."""


class ValidationError(CloseReadError):
    """A record violates a validity rule.

    Carries an optional machine-readable ``field`` naming the offending
    input, used by the service layer's error bodies.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NotFoundError(CloseReadError):
    """Referenced entity does not exist."""


class AuthError(CloseReadError):
    """Missing, malformed or expired session token."""


class ForbiddenError(CloseReadError):
    """Authenticated but not allowed (e.g. passage outside assigned batches)."""


class StoreError(CloseReadError):
    """Persistence-layer failure or integrity violation."""


class FormatError(CloseReadError):
    """Corrupt or unsupported on-disk artifact (bad magic, version, ...)."""


class IncompleteError(CloseReadError):
    """An aggregate operation ran against incomplete data.

    ``missing`` holds the (annotator_id, expr_id) pairs still outstanding.
    """

    def __init__(self, message, missing):
        super().__init__(message)
        self.missing = list(missing)


class FitError(CloseReadError):
    """Model fitting could not proceed (degenerate data, singular covariance)."""
