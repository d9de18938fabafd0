"""Exception types of the figure renderer."""


class FigureError(Exception):
    """Base class for renderer failures."""


class MissingColumn(FigureError):
    """The CSV lacks a column required by the contract."""

    def __init__(self, column):
        self.column = column
        super().__init__(f"missing required CSV column: {column!r}")


class EmptySeries(FigureError):
    """No usable data points remain for a series that the figure needs."""
