"""Typed exceptions shared by all modules.

Every failure mode the harness can surface carries a short machine-readable
``code`` so run metadata and CLI exit paths stay consistent.
"""


class BifluidError(Exception):
    """Base class for all package errors."""

    code = "error"


class ConfigError(BifluidError):
    """Invalid configuration or constructor arguments."""

    code = "config"


class DomainError(BifluidError, ValueError):
    """An operation was called outside its stated domain."""

    code = "domain"


class NumericsError(BifluidError):
    """Base class for runtime numerical failures."""

    code = "numerical"


class CompatibilityError(NumericsError):
    """Poisson right-hand side is not mean-free to tolerance."""

    code = "compatibility"


class SolverError(NumericsError):
    """Iterative solver failed to converge; carries the last residual."""

    code = "solver"

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class StabilityError(NumericsError):
    """Time step exceeds the stability policy."""

    code = "stability"


class PositivityError(NumericsError):
    """A density left the admissible nonnegative range beyond floor repair."""

    code = "positivity"


class VacuumProximityError(NumericsError):
    """Equilibrium densities left the configured away-from-vacuum bracket."""

    code = "vacuum-proximity"


class UnsupportedBranchError(BifluidError):
    """A certified bound was requested outside its supported parameter range."""

    code = "unsupported-branch"
