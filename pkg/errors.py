class AlgebraError(Exception):
    """Base class for every error raised by the algebra engine"""


class AlphabetMismatchError(AlgebraError):
    pass


class NegativeExponentError(AlgebraError):
    pass


class LaurentBoundError(AlgebraError):
    pass


class NonInvertibleError(AlgebraError):
    pass


class ConstantTermError(AlgebraError):
    pass


class ResidualError(AlgebraError):
    """Functional equation has no solution at the configured cap"""


class CapMismatchError(AlgebraError):
    pass


class CapExceededError(AlgebraError):
    """A coefficient was requested beyond the known precision of a series"""


class UnregisteredElementError(AlgebraError):
    pass


class MembershipError(AlgebraError):
    """Polynomial does not lie in the Lazard subring"""


class ActionNotClosedError(AlgebraError):
    pass


class InvariantViolation(AlgebraError):
    pass


class CapTooLargeError(AlgebraError):
    pass


class UsageError(ValueError):
    """Bad command-line input found after argument parsing"""
