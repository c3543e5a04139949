"""Exception hierarchy.

Every error carries the process exit code the command-line front end maps it to.
"""


class BeeIDError(Exception):
    exit_code = 1


class InputSemanticError(BeeIDError):
    """Well-formed input that violates a mathematical precondition."""

    exit_code = 3


class MalformedInput(BeeIDError, ValueError):
    """Input that cannot be parsed or has inconsistent shapes."""

    exit_code = 4


class GuardError(BeeIDError):
    """A configured size or enumeration guard was exceeded."""

    exit_code = 5


class RankDeficient(InputSemanticError):
    pass


class ParamRange(InputSemanticError, ValueError):
    pass


class DomainError(InputSemanticError, ValueError):
    pass


class PreconditionBreach(InputSemanticError):
    pass


class NotAMatching(InputSemanticError, ValueError):
    pass


class LengthMismatch(MalformedInput):
    pass


class LengthNotPowerOfTwo(MalformedInput):
    pass


class SizeGuard(GuardError):
    pass


class EnumerationCap(GuardError):
    pass
