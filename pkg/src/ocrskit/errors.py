"""Exception types shared across the package."""


class OcrskitError(Exception):
    """Base class for all library errors."""


class OutOfRangeProbability(OcrskitError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"x[{index}] = {value!r} is outside [0, 1]")


class BudgetExceeded(OcrskitError):
    def __init__(self, total, limit):
        self.total = total
        self.limit = limit
        super().__init__(f"sum(x) = {total!r} exceeds b*k = {limit!r}")


class BadPartition(OcrskitError):
    pass


class MissingPartition(OcrskitError):
    pass


class LengthMismatch(OcrskitError):
    pass


class IndexOutOfRange(OcrskitError):
    pass


class SchemeMismatch(OcrskitError):
    pass


class UnsupportedScheme(OcrskitError):
    pass


class UnsupportedOrder(OcrskitError):
    pass


class TooLarge(OcrskitError):
    pass


class BadParameters(OcrskitError):
    pass


class RangeViolation(OcrskitError):
    pass


class BadK(OcrskitError):
    pass


class InfeasibleK(OcrskitError):
    pass


class DegenerateProphet(OcrskitError):
    pass
