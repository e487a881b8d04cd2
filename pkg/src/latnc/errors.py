"""Exception types raised across the package."""


class LatncError(Exception):
    """Base class for all package errors."""


class RankDeficient(LatncError, ValueError):
    pass


class NonFinite(LatncError, ValueError):
    pass


class DimensionMismatch(LatncError, ValueError):
    pass


class NegativeSnr(LatncError, ValueError):
    pass


class NonPositiveInput(LatncError, ValueError):
    pass


class IndexOutOfRange(LatncError, IndexError):
    pass


class CodewordNotInCodebook(LatncError, ValueError):
    pass


class OddL(LatncError, ValueError):
    pass


class ConstructionFailed(LatncError, RuntimeError):
    pass


class ConstellationViolation(LatncError, ValueError):
    pass


class SingularTriangle(LatncError, ValueError):
    pass


class NonDivisible(LatncError, ValueError):
    """A received residue is not a multiple of the user's spacing.

    Only possible after a decoding error upstream; callers count it as a
    symbol error.
    """


class LengthMismatch(LatncError, ValueError):
    pass


class LengthNotMultiple(LatncError, ValueError):
    pass


class CodedLengthMismatch(LatncError, ValueError):
    pass


class TrialFailed(LatncError, RuntimeError):
    def __init__(self, trial_index: int, cause: BaseException):
        super().__init__(f"trial {trial_index} failed: {cause!r}")
        self.trial_index = trial_index
        self.cause = cause


class ParseError(LatncError, ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ValidationError(LatncError, ValueError):
    def __init__(self, field: str, message: str = ""):
        super().__init__(f"{field}: {message}" if message else field)
        self.field = field
