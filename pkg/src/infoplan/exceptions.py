"""Exception types raised across the package."""


class InfoplanError(Exception):
    """Base class for all package errors."""


class NoFeasiblePath(InfoplanError):
    """No path ``[0, j, N+1]`` fits inside the flight budget."""


class InstanceTooLarge(InfoplanError):
    """The exact solver refused an instance past its size guard."""


class NumericalError(InfoplanError):
    """A matrix that must be invertible or symmetric was not."""


class Infeasible(InfoplanError):
    """A linear program has an empty feasible set.

    Attributes
    ----------
    row : int or None
        Index of a constraint row whose phase-1 artificial variable could
        not be driven to zero. Rows are numbered inequalities first, then
        equalities, in the order given to the program.
    """

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ScenarioError(InfoplanError):
    """A scenario file failed to parse or validate.

    ``section`` and ``key`` name the offending entry when there is one.
    """

    def __init__(self, message, section=None, key=None):
        super().__init__(message)
        self.section = section
        self.key = key
