"""Exception types shared across the toolkit."""


class BoxworldError(Exception):
    """Base class for all toolkit-specific errors."""


class TableStructureError(BoxworldError):
    """A raw table is indexed outside the layout's index space.

    Distinct from constraint violations (normalization / no-signalling),
    which are reported, not raised.
    """


class InvalidStateError(BoxworldError):
    """A probability table violates normalization or no-signalling."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class LayoutMismatchError(BoxworldError):
    """Two objects that must share a layout do not."""


class UnsupportedLayoutError(BoxworldError):
    """The operation is undefined for layouts containing 1-output boxes."""


class BudgetExceededError(BoxworldError):
    """An enumeration or LP exceeded its configured resource budget."""


class NotAMeasurementError(BoxworldError):
    """A list of effects does not sum to the unit effect."""
