"""Exception hierarchy shared by all modules."""


class KitaevError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(KitaevError, ValueError):
    pass


class DomainError(InvalidArgumentError):
    """Input lies outside the mathematical domain of a formula."""


class DegeneracyError(KitaevError, ArithmeticError):
    """A grid momentum has E_q = 0, so the ground state is not unique.

    The offending momentum (or couplings) is kept in ``where`` for
    diagnostics.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class OracleError(KitaevError, ArithmeticError):
    """The finite-difference oracle could not be evaluated (F underflowed to 0)."""


class FitError(KitaevError, RuntimeError):
    pass


class CollapseError(FitError):
    """Data collapse found no interior minimum; ``residual_curve`` holds the scan."""

    def __init__(self, message, residual_curve=None):
        super().__init__(message)
        self.residual_curve = residual_curve
