"""Exception types raised by the nvspin library."""


class NvspinError(Exception):
    """Base class for all nvspin errors."""


class DegenerateNullspace(NvspinError):
    """The Liouvillian has more than one (near-)zero singular value, i.e.
    the steady state is not unique (disconnected level graph)."""


class NotTracePreserving(NvspinError):
    """The identity is not a left null vector of the superoperator."""


class SingularAtFrequency(NvspinError):
    """The deflated resolvent (L - i*omega) is rank deficient."""


class InsufficientDecay(NvspinError):
    """The signal decays by less than a factor e over the supplied grid."""


class UnknownKind(NvspinError):
    """Unrecognized electron model kind."""


class PerturbationInvalid(NvspinError):
    """The transverse Zeeman energy is too large for first-order level mixing."""


class StepTooCoarse(NvspinError):
    """Density-matrix positivity drifted below tolerance during propagation."""


class StatisticsTooPoor(NvspinError):
    """Monte Carlo rate estimate has relative standard error above 20%."""


class ParseError(NvspinError):
    """Malformed configuration text."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(NvspinError):
    """Structurally valid configuration with an invalid or unknown field."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class MissingColumn(NvspinError):
    """A required CSV column is absent."""


class IoError(NvspinError):
    """Output location is not writable."""
