"""Exception taxonomy shared across the package."""


class ParameterError(ValueError):
    """An operation received an out-of-range or malformed parameter."""


class DomainError(ValueError):
    """An economic quantity left its mathematical domain."""


class StateError(RuntimeError):
    """An operation was called on an object in the wrong lifecycle state."""


class InvariantViolation(RuntimeError):
    """Internal bookkeeping broke; results of the run cannot be trusted."""


class OptimizerError(ValueError):
    """The optimizer was configured or started in an unusable way."""


class ConfigError(ValueError):
    """A config file or CLI override is invalid; the message names the key."""


class UndefinedStatisticError(ValueError):
    """A statistic was requested on data for which it is not defined."""
