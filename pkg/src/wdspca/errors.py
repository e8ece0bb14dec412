"""Exception hierarchy.

Every error raised on bad input derives from :class:`WdsError` so callers (and
the CLI) can separate data errors from programming errors.
"""


class WdsError(Exception):
    """Base class for all toolkit errors."""


class NonFinite(WdsError, ValueError):
    """Input contains NaN or infinite values."""


class DegenerateData(WdsError, ValueError):
    """Data has zero total variance, so no component can be fitted."""


class DimensionMismatch(WdsError, ValueError):
    pass


class RangeError(WdsError, ValueError):
    """A count or index argument lies outside its admissible range."""


class IndexOutOfRange(RangeError):
    pass


class ScaleError(WdsError, ValueError):
    """Tensor is on the wrong amplitude scale for the requested operation."""


class AlreadyLogScale(ScaleError):
    pass


class NegativeMagnitude(WdsError, ValueError):
    pass


class FormatError(WdsError, ValueError):
    """Binary container is malformed (magic, version or size mismatch)."""


class ParseError(WdsError, ValueError):
    """Text input could not be parsed; carries the 1-based row and column."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.row = row
        self.column = column


class IoError(WdsError, OSError):
    pass
