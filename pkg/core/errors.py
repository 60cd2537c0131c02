"""Exception hierarchy shared by every finslerkit package."""


class FinslerKitError(Exception):
    """Base class for all finslerkit errors."""


class InputError(FinslerKitError, ValueError):
    """Invalid argument: wrong dimension, non-positive parameter, bad grid."""


class ConfigError(InputError):
    """A run configuration could not be resolved."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class PreconditionError(InputError):
    """Input violates an operation's precondition."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class DegenerateBallError(InputError):
    """A graph ball holds fewer than two samples."""


class NumericError(FinslerKitError, ArithmeticError):
    """Integration or solver failure, with diagnostics attached."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class StencilError(NumericError):
    """Finite-difference stencil leaves the region where the function is charted."""


class ConstructionError(FinslerKitError):
    """A graph, cover or partition could not be built."""


class SearchFailureError(ConstructionError):
    """No radius on the search lattice passed the biLipschitz test."""
