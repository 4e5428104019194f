__all__ = '''
GibbsError
DomainError
RangeError
ContractViolation
FieldError
MissingField
InvalidFieldValue
ValidationError
ConvergenceError
DegenerateSampler
RateBoundViolation
StateSpaceTooLarge
OracleMismatch
InsufficientSamples
UnsupportedStatistic
WindowError
StatisticalTestFailure
'''.split()


class GibbsError(Exception):
    """Base class for all gibbsbd errors"""


class DomainError(GibbsError, ValueError):
    """Raised when an index or parameter lies outside its domain"""


class RangeError(DomainError):
    """Raised when a trajectory is queried outside [0, end_time]"""


class ContractViolation(GibbsError):
    """
    Raised when the caller breaks a precondition, e.g. a configuration
    that is not supported in the region or an infeasible starting state
    """


class FieldError(GibbsError):
    """Raised when your config field definitions are not kosher"""


class MissingField(FieldError):
    """
    Raised when a config block has a required field,
    but it is not provided on construction
    """


class InvalidFieldValue(FieldError):
    """
    Raised when data assigned to a field is the wrong type or
    outside of the allowed values
    """


class ValidationError(FieldError):
    """
    Raised when a config fails validation. ``errors`` lists every
    violated field as ``(path, message)`` pairs.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super(ValidationError, self).__init__(
            '; '.join('%s: %s' % (path, msg) for path, msg in self.errors))


class ConvergenceError(GibbsError):
    """Raised when a series tail bound is not met at the requested order"""


class DegenerateSampler(GibbsError):
    """Raised when a rejection sampler would practically never accept"""


class RateBoundViolation(GibbsError):
    """
    Raised when a birth acceptance probability exceeds one, which means
    the asserted local stability constant does not hold
    """


class StateSpaceTooLarge(GibbsError):
    """Raised when a discretized instance exceeds the state-space cap"""


class OracleMismatch(GibbsError):
    """
    Raised when the solved stationary law disagrees with the Gibbs weights
    or the generator has no unique stationary law
    """


class InsufficientSamples(GibbsError):
    """Raised when an estimator has too little data to be meaningful"""


class UnsupportedStatistic(GibbsError):
    """Raised for GNZ statistics outside of the built-in set"""


class WindowError(GibbsError):
    """
    Raised when the admissible time window of an experiment is empty.
    ``minimal_n`` holds the smallest feasible size found, if any.
    """

    def __init__(self, message, minimal_n=None):
        self.minimal_n = minimal_n
        super(WindowError, self).__init__(message)


class StatisticalTestFailure(GibbsError):
    """
    Raised when an experiment's acceptance check fails. ``failures`` names
    the failed checks.
    """

    def __init__(self, message, failures=()):
        self.failures = list(failures)
        super(StatisticalTestFailure, self).__init__(message)
