"""Exception hierarchy shared by every module of the toolkit."""


class RngVerifyError(ValueError):
    """Base class for all precondition and input errors raised here."""


class DegenerateSeries(RngVerifyError):
    """A series has zero range (or zero variance) where spread is required."""


class IndexOutOfRange(RngVerifyError, IndexError):
    pass


class WrongDirection(RngVerifyError):
    pass


class OddLength(RngVerifyError):
    pass


class LengthMismatch(RngVerifyError):
    pass


class TooShort(RngVerifyError):
    pass


class DegenerateInput(RngVerifyError):
    """All abscissae of a fit are equal, so no width can be estimated."""


class NotNormalized(RngVerifyError):
    pass


class NotCentered(RngVerifyError):
    pass


class UnconvergedFit(RngVerifyError):
    pass


class TooFewBits(RngVerifyError):
    """The bit stream is shorter than a test's minimum length.

    The battery catches this and reports the test as skipped.
    """


class InvalidRho(RngVerifyError):
    pass


class InvalidPeriod(RngVerifyError):
    pass


class InvalidBitDepth(RngVerifyError):
    pass


class InvalidParameter(RngVerifyError):
    pass


class IngestError(RngVerifyError):
    """Raised when an input file cannot be turned into a series."""


class ParseError(IngestError):
    def __init__(self, message: str, location: int, unit: str = "line"):
        super().__init__(f"{unit} {location}: {message}")
        self.location = location
        self.unit = unit


class NonFiniteValue(IngestError):
    def __init__(self, offset: int, unit: str = "byte offset"):
        super().__init__(f"non-finite value at {unit} {offset}")
        self.offset = offset
