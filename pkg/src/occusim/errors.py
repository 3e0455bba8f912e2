"""Exception types shared across the simulation pipeline."""


class OccusimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(OccusimError):
    """Invalid or missing configuration value."""


class GridMismatchError(OccusimError):
    """Two series that must share a TimeGrid do not."""


class EmptyInputError(OccusimError):
    """An operation received no rows / no traces."""


class MalformedRowError(OccusimError):
    """An input row failed validation (bad timestamp, non-binary value, ...)."""


class TemperatureRangeError(OccusimError):
    """A weather value is outside the plausible range."""


class InfeasibleTargetError(OccusimError):
    """Requested mean occupancy cannot be reached with the given presence probabilities."""


class TraceTooShortError(OccusimError):
    """A trace does not span at least one full day."""


class LookaheadTooLongError(OccusimError):
    """Look-ahead is as long as (or longer than) the trace itself."""


class QuotaInfeasibleError(OccusimError):
    """Target error rate demands more error steps than there are eligible steps."""


class DegenerateClassError(OccusimError):
    """Nonzero target error rate for a class with zero eligible steps."""


class MissingPredictionError(OccusimError):
    """Predictive strategy requested without a prediction trace."""


class UnstableStepError(OccusimError):
    """Explicit integration step is too large for the room time constant."""


class ZeroBaselineError(OccusimError):
    """Percent savings requested against a non-positive baseline."""


class InsufficientGridError(OccusimError):
    """Sensitivity analysis needs at least two levels of the varied rate."""
