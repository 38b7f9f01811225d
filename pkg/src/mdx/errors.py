"""Exception hierarchy shared by all modules.

Each error carries an ``exit_code`` used by the command line front end.
"""


class MdxError(Exception):
    exit_code = 4


class ValidationError(MdxError, ValueError):
    """Malformed input (bad marginals, requirement above 1, ...)."""

    exit_code = 2


class InfeasibleMarginals(MdxError):
    """The marginals violate the covering condition for some member."""

    exit_code = 3

    def __init__(self, message, member=None, gap=None):
        super().__init__(message)
        self.member = member
        self.gap = gap


class NotInYStar(InfeasibleMarginals):
    pass


class OracleFailure(MdxError):
    pass


class OracleInconsistent(OracleFailure):
    pass


class IterationOverflow(MdxError):
    pass


class ScaleExceeded(MdxError):
    pass


class FamilyNotEnumerable(MdxError):
    pass


class EmptySupport(MdxError, ValueError):
    pass


class DeficitNegative(MdxError, ValueError):
    pass


class DimensionMismatch(MdxError, ValueError):
    pass


class BalanceMismatch(MdxError, ValueError):
    pass


class NoPath(MdxError):
    pass


class NotBalanced(MdxError):
    """Raised when no perfect decomposition could be produced.

    ``farkas`` holds the infeasibility certificate of the transversal LP when
    the failure came from the LP (as opposed to a cap).
    """

    def __init__(self, message, farkas=None, cycle=None):
        super().__init__(message)
        self.farkas = farkas
        self.cycle = cycle


class CardinalityMismatch(MdxError, ValueError):
    exit_code = 5


class TooManyGroups(MdxError, ValueError):
    exit_code = 5


class NotDeterable(MdxError):
    exit_code = 3
