"""Exception hierarchy shared by every module of the package."""


class QHMHDError(Exception):
    """Base class for all package errors."""


class GridMismatchError(QHMHDError, ValueError):
    """Two fields live on different torus grids."""


class MeanViolationError(QHMHDError, ValueError):
    """An operation defined on mean-free fields received a field with a mean."""


class ResolutionError(QHMHDError, ValueError):
    """A dyadic block index exceeds what the grid resolves."""


class DegenerateInputError(QHMHDError, ValueError):
    """Input makes a ratio undefined (zero denominator, empty spectrum)."""


class VacuumError(QHMHDError, ArithmeticError):
    """Density reached zero or below somewhere on the grid."""


class EllipticSolverError(QHMHDError, ArithmeticError):
    """The variable-density pressure solve did not converge."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (final relative residual {residual:.3e})")
        self.residual = residual


class NumericalBlowUpError(QHMHDError, ArithmeticError):
    """Non-finite values appeared during time integration."""

    def __init__(self, message: str, t_last: float):
        super().__init__(f"{message} (last valid time t={t_last:.6g})")
        self.t_last = t_last


class ConfigError(QHMHDError, ValueError):
    """Invalid or inconsistent experiment configuration."""


class TraceAlignmentError(QHMHDError, ValueError):
    """Two run traces do not share their sample times."""
