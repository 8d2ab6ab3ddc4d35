"""Package-wide exception types."""


class ShapeError(ValueError):
    """Operands have incompatible shapes."""


class ContractError(ValueError):
    """A call violated an operation's contract (bad state, missing data)."""


class ScheduleError(ValueError):
    """Frame schedule parameters are inconsistent."""


class DivergenceError(ArithmeticError):
    """A numerical computation produced non-finite values."""
