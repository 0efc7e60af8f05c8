"""Exception hierarchy shared by every kstab module."""


class KStabError(Exception):
    """Base class for all library errors."""


class ArithmeticLimitError(KStabError, OverflowError):
    pass


class ParseError(KStabError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnresolvedRelationError(KStabError, KeyError):
    pass


class NonInvertibleSubstitutionError(KStabError, ValueError):
    pass


class EnumerationLimitError(KStabError, OverflowError):
    pass


class InvalidDecorationError(KStabError, ValueError):
    pass


class ArityError(KStabError, ValueError):
    pass


class PreconditionError(KStabError, ValueError):
    pass


class DomainError(KStabError, ValueError):
    pass


class InfeasibleError(KStabError, ValueError):
    pass


class GroupClosureError(KStabError, ValueError):
    pass


class InternalInvariantError(KStabError, AssertionError):
    """Raised when an identity that must hold by construction fails."""
