"""Exception hierarchy shared by all modules.

Each class carries the process exit code the command-line front end maps it to.
"""


class BurgersError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class ValidationError(BurgersError, ValueError):
    """An argument is outside its admissible set."""

    exit_code = 2


class PreconditionError(BurgersError, ValueError):
    """Input is well formed but violates a mathematical precondition."""

    exit_code = 3


class ResolutionError(PreconditionError):
    """The grid is too coarse for the requested field or the run lost resolution."""

    exit_code = 3


class DomainError(PreconditionError):
    """An evaluator was queried outside the region where it is defined."""

    exit_code = 3


class NumericalError(BurgersError, ArithmeticError):
    """A numerical procedure failed: non-finite values, no bracket, no convergence."""

    exit_code = 4


class QuadratureError(NumericalError):
    """Adaptive quadrature did not reach its tolerance within the evaluation budget."""


class PeakNotFoundError(NumericalError):
    """The enstrophy maximum is not inside the integration window."""


class ResolutionWarning(UserWarning):
    """The top third of the spectrum carries a non-negligible share of energy."""


class FormulaDiscrepancyWarning(UserWarning):
    """A closed-form expression disagrees with its quadrature oracle."""
