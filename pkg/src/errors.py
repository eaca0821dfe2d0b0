"""
Error types shared by the simulation, analysis and command-line layers.
Every error carries the exit code the CLI reports for it.
"""


class QOscError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class UsageError(QOscError):
    """Bad command-line usage (empty grids, unusable arguments)."""

    exit_code = 1


class DomainError(QOscError, ValueError):
    """An argument lies outside the domain of a q-deformed quantity."""

    exit_code = 1


class AdmissibilityError(DomainError):
    """The amplitude violates |alpha|^2 <= 1/(1-q)."""

    exit_code = 2

    def __init__(self, q, alpha):
        self.q = q
        self.alpha = alpha
        self.bound = float('inf') if q == 1.0 else 1.0 / (1.0 - q)
        super().__init__(
            f"inadmissible amplitude: |alpha|^2 = {abs(alpha) ** 2:.6g} but "
            f"|alpha|^2 <= 1/(1-q) = {self.bound:.6g} is required for q = {q:.6g}"
        )


class ConvergenceError(QOscError, ArithmeticError):
    """A Fock-space series cannot be summed to the requested tolerance."""


class TruncationError(QOscError):
    """The Fock-space dimension is too small for the requested tolerance."""

    def __init__(self, dim, required_dim):
        self.dim = dim
        self.required_dim = required_dim
        super().__init__(
            f"truncation insufficient: dim = {dim} but at least {required_dim} "
            f"Fock states are needed"
        )


class ConsistencyError(QOscError):
    """An internal numerical consistency check failed."""


class AnalysisError(QOscError, ValueError):
    """A time-series analysis cannot be carried out on its input."""


class LengthError(AnalysisError):
    """The series is too short for the requested analysis."""


class NoMinimumError(AnalysisError):
    """No delay could be chosen (no AMI minimum and no autocorrelation zero)."""


class InsufficientVisitsError(AnalysisError):
    """The first-return cell was entered too few times."""


class NoNeighborError(AnalysisError):
    """No admissible nearest neighbour exists outside the Theiler window."""


class IndeterminateRegimeError(QOscError):
    """A regime label was requested for an incomplete feature vector."""


class InputFormatError(QOscError):
    """A series file could not be parsed."""

    exit_code = 3

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SamplingError(QOscError):
    """A series file is not uniformly sampled."""

    exit_code = 4


class OracleMismatchError(QOscError):
    """The series evaluation disagrees with the matrix oracle."""

    exit_code = 5
