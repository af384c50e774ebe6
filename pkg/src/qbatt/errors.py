"""Exception hierarchy shared by the library and the CLI."""


class QBattError(Exception):
    """Base class for all errors raised by qbatt."""


class DimensionError(QBattError, ValueError):
    """Operator dimensions do not fit together."""


class ValidationError(QBattError, ValueError):
    """An operator fails a Hermiticity / positivity / normalization check."""


class NumericalError(QBattError, ArithmeticError):
    """A numerical routine failed or produced an inconsistent result."""


class PhysicsError(QBattError):
    """A physical precondition does not hold (e.g. charging report on a NESS map)."""


class DegenerateFixedPointError(PhysicsError):
    """The collision map has more than one invariant state."""

    def __init__(self, dimension: int, message: str | None = None):
        self.dimension = dimension
        super().__init__(
            message or f"fixed-point subspace is degenerate (dimension {dimension})"
        )


class ConfigError(QBattError, ValueError):
    """Scenario or sweep configuration is malformed."""
