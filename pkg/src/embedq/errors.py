"""Exception types shared across the package."""


class EmbedqError(Exception):
    """Base class for all errors raised by embedq."""


class InvalidParameterError(EmbedqError, ValueError):
    pass


class OutOfSupportError(EmbedqError, ValueError):
    """An energy falls where the relevant density of states vanishes."""


class InconsistentInputError(EmbedqError, ValueError):
    pass


class DegeneracyError(EmbedqError):
    """The dressed spectrum has (numerically) degenerate levels."""


class NumericalFailureError(EmbedqError, RuntimeError):
    def __init__(self, message, spec=None):
        super().__init__(message)
        self.spec = spec


class ConfigError(EmbedqError, ValueError):
    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path
