class CRLKitException(Exception):
    """Base class for every error crlkit raises on purpose."""
    def __init__(self, message):
        super().__init__(message)
        self.message = message


class ConfigurationError(CRLKitException):
    """Shapes, dimensions or config values don't line up."""


class InvalidArgumentError(CRLKitException):
    """A caller handed us something we can't compute with."""


class InsufficientDataError(CRLKitException):
    """The replay buffer doesn't hold enough transitions yet."""
    def __init__(self, requested, available):
        super().__init__(
            f"Requested {requested} transitions but only {available} are stored",
        )
        self.requested = requested
        self.available = available


class DivergenceError(CRLKitException):
    """A gradient, loss or multiplier went non-finite.

    ``rows`` is filled in by the experiment runner with the last metric
    rows so the post-mortem has something to look at.
    """
    def __init__(self, message, where=None, rows=None):
        super().__init__(message)
        self.where = where
        self.rows = list(rows or [])
