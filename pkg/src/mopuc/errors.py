"""Exception hierarchy.

Usage errors (bad shapes, bad arguments) derive from ``ValueError``;
numerical breakdowns derive from :class:`NumericalError`. The CLI maps the
first family to exit code 2 and the second to exit code 3.
"""


class MopucError(Exception):
    pass


class NumericalError(MopucError):
    pass


class DimensionMismatch(MopucError, ValueError):
    pass


class DegreeExceedsFormal(MopucError, ValueError):
    pass


class InsufficientMoments(MopucError, ValueError):
    pass


class EmptyGrid(MopucError, ValueError):
    pass


class ConfigError(MopucError, ValueError):
    pass


class SingularMatrix(NumericalError):
    pass


class NotHermitian(NumericalError):
    pass


class NotPSD(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class QuadratureUnderResolved(NumericalError):
    pass


class DegenerateMeasure(NumericalError):
    def __init__(self, msg, degree=None):
        super().__init__(msg)
        self.degree = degree


class ReflectionTooLarge(NumericalError):
    pass


class IncompatiblePair(NumericalError):
    pass


class VerificationFailed(NumericalError):
    pass
