"""Exception hierarchy shared by every module."""


class PrevBoundsError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PrevBoundsError, ValueError):
    """An input violates a domain invariant."""


class ParseError(ValidationError):
    """Malformed input text. Carries the row and column when known."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class InfeasibleAccuracy(ValidationError):
    """sigma + pi - 1 is not strictly positive over the whole accuracy band."""


class EmptyScenarioSet(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class NoFeasibleDistribution(PrevBoundsError):
    """No joint distribution is consistent with a reference study."""
