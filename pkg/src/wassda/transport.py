"""Discrete optimal transport between probability histograms.

Ground costs are pointwise displacement powers ``|x_i - z_j|^p``; plans are
solved exactly as linear programs by the same interior-point engine that
handles the regularized assimilation problems (with a zero quadratic term),
so there is a single solver and a single test surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .histogram import ProbabilityHistogram, SupportGrid
from .qpsolve import MarginalConstraints, QuadraticProgram, solve_qp

__all__ = [
    "GroundCostMatrix",
    "TransportPlan",
    "cost_matrix",
    "solve_kantorovich",
    "wasserstein",
]

_MARGINAL_TOL = 1e-7


@dataclass(frozen=True)
class GroundCostMatrix:
    """Pairwise transport costs ``|x_i - z_j|^p`` between two grids."""

    costs: np.ndarray
    p: float

    def __post_init__(self):
        c = np.asarray(self.costs, dtype=np.float64)
        if c.ndim != 2:
            raise ValueError("cost matrix must be 2-D")
        if np.any(c < 0):
            raise ValueError("ground costs must be nonnegative")
        c.flags.writeable = False
        object.__setattr__(self, "costs", c)


@dataclass(frozen=True)
class TransportPlan:
    """Nonnegative mass flows between two support grids.

    Row sums reproduce the source masses and column sums the target masses,
    each within 1e-7.
    """

    flows: np.ndarray
    source_grid: SupportGrid
    target_grid: SupportGrid

    def __post_init__(self):
        f = np.asarray(self.flows, dtype=np.float64)
        if f.shape != (self.source_grid.k, self.target_grid.k):
            raise ValueError(
                f"flow shape {f.shape} does not match grids "
                f"({self.source_grid.k}, {self.target_grid.k})"
            )
        if np.any(f < -1e-9):
            raise ValueError("transport flows must be nonnegative")
        f.flags.writeable = False
        object.__setattr__(self, "flows", f)

    def source_marginal(self) -> np.ndarray:
        return self.flows.sum(axis=1)

    def target_marginal(self) -> np.ndarray:
        return self.flows.sum(axis=0)

    def cost(self, ground: GroundCostMatrix) -> float:
        """Total transport work ``tr(C'U)`` under the given ground cost."""
        return float(np.sum(ground.costs * self.flows))


def cost_matrix(src: SupportGrid, tgt: SupportGrid, p: float = 2.0) -> GroundCostMatrix:
    """Elementwise displacement costs ``|x_i - z_j|^p`` between two grids."""
    if p <= 0:
        raise ValueError(f"cost exponent must be positive, got {p}")
    diff = np.abs(src.points[:, None] - tgt.points[None, :])
    return GroundCostMatrix(diff**p, p)


def solve_kantorovich(
    px: ProbabilityHistogram,
    pz: ProbabilityHistogram,
    cost: GroundCostMatrix,
    max_iter: int = 200,
) -> TransportPlan:
    """Minimum-cost coupling of two histograms under mass conservation.

    Solves ``min tr(C'U)`` subject to ``U 1 = px``, ``U' 1 = pz``, ``U >= 0``
    through the interior-point engine.  One column constraint (the heaviest
    bin, guaranteed nonredundant after presolve) is dropped as linearly
    dependent before factorization.
    """
    k, l = px.grid.k, pz.grid.k
    if cost.costs.shape != (k, l):
        raise ValueError(f"cost shape {cost.costs.shape} does not match ({k}, {l})")
    drop = int(np.argmax(pz.masses))
    cons = MarginalConstraints(k, l, True, True, drop_col=drop)
    b = np.concatenate([px.masses, np.delete(pz.masses, drop)])
    qp = QuadraticProgram(None, cost.costs.ravel(), cons, b)
    # distances take a square root of the objective, so drive the gap well
    # below the generic default; these LPs converge superlinearly anyway
    sol = solve_qp(qp, max_iter=max_iter, gap_tol=1e-13)
    if sol.status != "converged":
        raise SolverError(
            f"transport solve did not converge after {sol.iterations} iterations "
            f"(gap {sol.duality_gap:.3e})",
            duality_gap=sol.duality_gap,
            primal_residual=sol.primal_residual,
            dual_residual=sol.dual_residual,
        )
    flows = np.maximum(sol.u.reshape(k, l), 0.0)
    plan = TransportPlan(flows, px.grid, pz.grid)
    if (
        np.abs(plan.source_marginal() - px.masses).max() > _MARGINAL_TOL
        or np.abs(plan.target_marginal() - pz.masses).max() > _MARGINAL_TOL
    ):
        raise SolverError(
            "transport plan violates marginal feasibility",
            duality_gap=sol.duality_gap,
            primal_residual=sol.primal_residual,
        )
    return plan


def wasserstein(
    px: ProbabilityHistogram,
    pz: ProbabilityHistogram,
    p: float = 2.0,
) -> float:
    """p-Wasserstein distance: optimal transport cost to the power 1/p."""
    ground = cost_matrix(px.grid, pz.grid, p)
    plan = solve_kantorovich(px, pz, ground)
    total = plan.cost(ground)
    return float(max(total, 0.0) ** (1.0 / p))
