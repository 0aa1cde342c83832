"""Exception types shared across the toolkit."""

from __future__ import annotations


class WassdaError(Exception):
    """Base class for toolkit errors."""


class ConfigError(WassdaError):
    """Invalid or malformed experiment configuration."""


class InfeasibleError(WassdaError):
    """Equality/bound constraint system admits no feasible point.

    ``index`` points at the violated constraint row when one can be named.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class SolverError(WassdaError):
    """Optimization failed to converge within its iteration budget.

    Carries the final duality gap and residual norms for diagnosis.
    """

    def __init__(
        self,
        message: str,
        duality_gap: float | None = None,
        primal_residual: float | None = None,
        dual_residual: float | None = None,
    ):
        super().__init__(message)
        self.duality_gap = duality_gap
        self.primal_residual = primal_residual
        self.dual_residual = dual_residual
