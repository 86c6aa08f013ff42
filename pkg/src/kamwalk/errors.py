"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, numerical non-convergence with 3, and structurally unsupported
inputs (e.g. weak KAM machinery on a potential with several maximizers)
with 4.
"""


class KamwalkError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(KamwalkError):
    """Malformed or inconsistent run configuration (exit code 2)."""


class InvalidLatticeError(KamwalkError, ValueError):
    """Lattice size below the minimum of two sites."""


class InvalidResolutionError(KamwalkError, ValueError):
    """Fine-grid resolution smaller than the source lattice."""


class IterationLimitError(KamwalkError):
    """An iterative solver hit its iteration budget (exit code 3).

    Carries the last residual so callers can report how far the solve got.
    """

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class IrreducibilityError(KamwalkError):
    """Perron vector came out with a non-positive entry."""


class InconsistentEigendataError(KamwalkError):
    """Eigendata fails a cross-consistency check (e.g. stationarity)."""


class UnsupportedConfigError(KamwalkError):
    """Structurally valid input outside the supported regime (exit code 4)."""


class NumericalDegeneracyError(KamwalkError):
    """Monte Carlo weights collapsed onto a single sample (exit code 3)."""


class UndefinedIntervalError(KamwalkError, ValueError):
    """An interval query selected no lattice sites."""
