"""Exception and warning types raised by evoflow."""


class EvoflowError(Exception):
    """Base class for all evoflow errors."""


class ParameterError(EvoflowError, ValueError):
    """A model or query parameter is outside its admissible range."""


class UsageError(EvoflowError, RuntimeError):
    """An API was driven in an order or state it does not support."""


class ConfigurationError(EvoflowError, ValueError):
    """Two objects with incompatible configurations were combined."""


class ResourceError(EvoflowError, RuntimeError):
    """A request would exceed the compute or memory budget of an operation."""


class TheoremNotApplicableWarning(UserWarning):
    """An estimate was requested outside the regime where the limit theorem holds."""
