"""Exception hierarchy shared by all modules."""


class ItermixError(Exception):
    """Base class for every error raised by this package."""


class InvalidConfig(ItermixError, ValueError):
    pass


class MissingFile(ItermixError, FileNotFoundError):
    pass


class ParseError(ItermixError, ValueError):
    """Non-numeric feature cell. ``row`` and ``column`` are 1-based data coordinates."""

    def __init__(self, row: int, column: int, value: str = ""):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column}: cannot parse {value!r} as a real number")


class LabelError(ItermixError, ValueError):
    pass


class InsufficientClassSamples(ItermixError, ValueError):
    pass


class DimensionMismatch(ItermixError, ValueError):
    pass


class DimensionError(DimensionMismatch):
    """Operation needs a specific dimensionality (e.g. 2-D plots)."""


class ShapeMismatch(ItermixError, ValueError):
    pass


class EmptyIndex(ItermixError, ValueError):
    pass


class NoSuchLabel(ItermixError, LookupError):
    pass


class NoOppositeLabel(NoSuchLabel):
    pass


class SingleClassData(ItermixError, ValueError):
    pass


class TooFewMinority(ItermixError, ValueError):
    pass


class LengthMismatch(ItermixError, ValueError):
    pass


class EmptyMatrix(ItermixError, ValueError):
    pass


class AlphaOutOfRange(ItermixError, ValueError):
    pass


class EmptyNeighborhood(ItermixError, ValueError):
    pass


class EmptyBatch(ItermixError, ValueError):
    pass


class BufferTooSmall(ItermixError, ValueError):
    pass


class VersionMismatch(ItermixError, ValueError):
    pass
