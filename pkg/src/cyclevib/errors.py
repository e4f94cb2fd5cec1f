"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, NumericError and
TapeError -> 3, assertion failures -> 1.
"""


class CycleVibError(Exception):
    """Base class for all package errors."""


class ShapeError(CycleVibError, ValueError):
    """Array dimensions violate an operation's contract."""


class NumericError(CycleVibError, ArithmeticError):
    """A non-finite value appeared where the contract requires finite math."""


class TapeError(CycleVibError, RuntimeError):
    """Misuse of the differentiation tape (non-scalar loss, reused tape)."""


class ConfigError(CycleVibError, ValueError):
    """Invalid configuration values or inconsistent settings."""
