"""Exception types shared across the package."""


class NoBracketError(RuntimeError):
    """The supplied amplitude bracket does not straddle a ground state."""


class NonconvergenceError(RuntimeError):
    """An iterative solve ran out of iterations.

    The last iterate is attached so callers can widen settings or warm-start
    a retry.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class NotInClassError(ValueError):
    """A test function fails a hypothesis of the inequality being checked."""


class SchemaVersionError(ValueError):
    """A persisted record carries a schema version we do not understand."""


class ConfigError(ValueError):
    """A run configuration failed parsing or validation."""
