"""Exception hierarchy shared by all modules."""


class Teleport3Error(Exception):
    """Base class for package errors."""


class ShapeError(Teleport3Error, ValueError):
    """Operand dimensions are incompatible with the requested operation."""


class LabelError(Teleport3Error, KeyError):
    """A subsystem label is unknown, duplicated or otherwise misused."""

    def __str__(self):
        # KeyError quotes its argument; keep the plain message
        return str(self.args[0]) if self.args else ""


class InvalidStateError(Teleport3Error, ValueError):
    """A matrix violates the density-operator invariants."""


class ConfigurationError(Teleport3Error, ValueError):
    """Bad protocol parameters, correction tables or formula identifiers."""


class SamplingError(Teleport3Error, RuntimeError):
    """No outcome can be drawn from a branch set."""
