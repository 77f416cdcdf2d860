"""Exception hierarchy shared by the library and the command line."""


class InflowWalkError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(InflowWalkError, ValueError):
    """Invalid model or run parameters."""


class HorizonError(InflowWalkError, RuntimeError):
    """A truncated-tail simulation was stepped past its causal horizon."""


class NumericError(InflowWalkError, ArithmeticError):
    """A computation could not be carried out reliably."""


class DegenerateSpectrumError(NumericError):
    """Eigenvalues of the reduced matrix collide or are ill conditioned."""


class FitError(NumericError):
    """A perturbation-series fit was requested on unusable data."""
