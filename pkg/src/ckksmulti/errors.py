"""Exception hierarchy shared by all modules."""


class CkksError(Exception):
    pass


class ParameterError(CkksError, ValueError):
    pass


class NoPrimeFound(CkksError):
    pass


class NotInvertible(CkksError, ZeroDivisionError):
    pass


class DomainMismatch(CkksError):
    pass


class ModulusMismatch(CkksError):
    pass


class LevelMismatch(CkksError):
    pass


class LevelOutOfRange(CkksError, IndexError):
    pass


class LevelTooLow(CkksError):
    pass


class MuOutOfRange(CkksError, ValueError):
    pass


class EmptyOperands(CkksError, ValueError):
    pass


class MissingEvalKey(CkksError, KeyError):
    def __init__(self, t):
        super().__init__(t)
        self.t = t

    def __str__(self):
        return f"no evaluation key for s^{self.t}"


class MessageTooLarge(CkksError, ValueError):
    pass


class ParseError(CkksError, ValueError):
    pass


class RefinementMismatch(ParseError):
    pass


class PlanArityMismatch(CkksError, ValueError):
    pass


class DepthBudgetExceeded(CkksError):
    pass


class SearchSpaceExhausted(CkksError):
    pass


class FormatError(CkksError, ValueError):
    """Raised for malformed or unsupported binary/JSON files."""
