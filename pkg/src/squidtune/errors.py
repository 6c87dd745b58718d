"""Exception hierarchy shared by all squidtune modules."""


class SquidError(Exception):
    """Base class for every error raised by squidtune."""


class InvalidParameterError(SquidError, ValueError):
    pass


class DegenerateMeasurementError(SquidError, ValueError):
    """An I-V measurement that cannot determine the junction capacitance."""


class WellIndexError(SquidError, IndexError):
    pass


class IntegrationDivergedError(SquidError, ArithmeticError):
    """The RCSJ integration produced a non-finite state."""


class FitUndefinedError(SquidError, ValueError):
    """Too few supra-threshold points to fit a transition law."""


class WrongDampingError(SquidError, ValueError):
    """A planning strategy was requested outside its damping regime."""


class PlanningError(SquidError, RuntimeError):
    pass


class UncalibratedError(PlanningError):
    """The underdamped planner needs a calibrated basic transition."""


class OutOfModelError(SquidError, ValueError):
    pass


class ConfigError(SquidError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
