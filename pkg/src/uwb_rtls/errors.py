"""Exception hierarchy.

Everything raised on bad input or infeasible requests derives from
:class:`UwbError`, so callers (notably the CLI) can map library errors to a
single validation exit code while real I/O failures surface as ``OSError``.
"""


class UwbError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(UwbError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class DegenerateGeometryError(UwbError):
    """Anchor geometry does not admit a position solution (e.g. collinear)."""


class InsufficientDataError(UwbError):
    """Fewer usable range measurements than the solver needs."""


class CapacityExceededError(UwbError):
    """Slot demand exceeds what the superframe can carry."""

    def __init__(self, message: str, demand_slots: float, capacity_slots: int):
        super().__init__(message)
        self.demand_slots = demand_slots
        self.capacity_slots = capacity_slots


class NoOverlapError(UwbError):
    """Estimated fixes and ground truth share no usable time overlap."""


class DegenerateInputError(UwbError):
    """Input is structurally valid but degenerate (e.g. zero path length)."""


class SchemaError(UwbError):
    """A CSV/JSON document does not match the expected schema."""


class ConfigError(UwbError):
    """A run-configuration document failed validation.

    ``key`` is the dotted path of the offending entry.
    """

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
