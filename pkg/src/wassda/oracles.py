"""Independent reference implementations for verification.

Everything here deliberately avoids the production code paths: transport
optima come from exhaustive enumeration, the variational analysis from
first-order descent, and distances from the 1-D quantile-coupling formula.
These routines back the built-in ``verify`` command and the test suite;
they are slow by design and only intended for small instances.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

__all__ = [
    "transport_bruteforce",
    "monge_bruteforce",
    "wasserstein_quantile_1d",
    "minimize_quadratic_misfit",
    "active_set_reference",
]


def transport_bruteforce(px: np.ndarray, pz: np.ndarray, cost: np.ndarray) -> float:
    """Minimum transport cost by enumerating transportation-polytope vertices.

    Every vertex of ``{U >= 0 : row sums = px, col sums = pz}`` is supported
    on at most k+l-1 cells, so enumerating all candidate supports and solving
    the marginal equations on each finds the LP optimum exactly.  Intended
    for k, l <= 4.
    """
    px = np.asarray(px, dtype=np.float64)
    pz = np.asarray(pz, dtype=np.float64)
    k, l = px.size, pz.size
    if cost.shape != (k, l):
        raise ValueError("cost shape does not match marginals")
    n = k * l
    A = np.zeros((k + l, n))
    for i in range(k):
        A[i, i * l:(i + 1) * l] = 1.0
    for j in range(l):
        A[k + j, j::l] = 1.0
    b = np.concatenate([px, pz])
    flat_cost = cost.ravel()
    best = np.inf
    for support in combinations(range(n), min(k + l - 1, n)):
        cols = A[:, support]
        f, *_ = np.linalg.lstsq(cols, b, rcond=None)
        if np.abs(cols @ f - b).max() > 1e-9 or np.any(f < -1e-12):
            continue
        best = min(best, float(flat_cost[list(support)] @ f))
    return best


def monge_bruteforce(px: np.ndarray, pz: np.ndarray, cost: np.ndarray) -> float | None:
    """Cheapest deterministic (no mass splitting) assignment, by recursion.

    Each source bin must map to exactly one target bin and the target
    marginal must be matched exactly.  Returns the plan cost of the best
    map, or None when no mass-preserving map exists.  Feasibility pruning
    keeps k = l <= 8 tractable.
    """
    px = np.asarray(px, dtype=np.float64)
    pz = np.asarray(pz, dtype=np.float64)
    k, l = px.size, pz.size
    tol = 1e-12
    remaining = pz.copy()
    best = [np.inf]

    def recurse(i: int, acc: float):
        if acc >= best[0]:
            return
        if i == k:
            if np.abs(remaining).max() <= 1e-9:
                best[0] = acc
            return
        for j in range(l):
            take = px[i]
            if remaining[j] >= take - tol:
                remaining[j] -= take
                recurse(i + 1, acc + cost[i, j] * take)
                remaining[j] += take

    recurse(0, 0.0)
    return None if not np.isfinite(best[0]) else float(best[0])


def wasserstein_quantile_1d(
    points_a: np.ndarray,
    masses_a: np.ndarray,
    points_b: np.ndarray,
    masses_b: np.ndarray,
    p: float = 2.0,
) -> float:
    """Exact 1-D p-Wasserstein distance via the quantile coupling.

    Integrates |Fa^{-1}(u) - Fb^{-1}(u)|^p over u in (0, 1) by splitting at
    the merged CDF breakpoints of the two atomic distributions.
    """
    ca = np.cumsum(masses_a)
    cb = np.cumsum(masses_b)
    levels = np.unique(np.concatenate([[0.0], ca, cb]))
    levels = levels[levels <= 1.0 + 1e-12]
    total = 0.0
    prev = 0.0
    for u in levels[1:]:
        if u - prev <= 1e-15:
            prev = u
            continue
        mid = 0.5 * (prev + u)
        qa = points_a[min(int(np.searchsorted(ca, mid, side="left")), points_a.size - 1)]
        qb = points_b[min(int(np.searchsorted(cb, mid, side="left")), points_b.size - 1)]
        total += (u - prev) * abs(qa - qb) ** p
        prev = u
    return float(total ** (1.0 / p))


def minimize_quadratic_misfit(
    x_b: np.ndarray,
    y: np.ndarray,
    H: np.ndarray,
    B: np.ndarray,
    R: np.ndarray,
    grad_tol: float = 1e-10,
    max_iter: int = 200_000,
) -> np.ndarray:
    """First-order minimizer of the background/observation misfit.

    Steepest descent with exact line search on the convex quadratic

        |x - x_b|^2_{B^-1} + |y - Hx|^2_{R^-1}

    down to an infinity-norm gradient of ``grad_tol``.  Serves as the
    independent cross-check of the closed-form analysis update.
    """
    x_b = np.atleast_1d(np.asarray(x_b, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    H = np.atleast_2d(np.asarray(H, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    R = np.atleast_2d(np.asarray(R, dtype=np.float64))
    Binv = np.linalg.inv(B)
    Rinv = np.linalg.inv(R)
    hess = 2.0 * (Binv + H.T @ Rinv @ H)
    x = x_b.copy()
    for _ in range(max_iter):
        g = 2.0 * (Binv @ (x - x_b)) - 2.0 * (H.T @ (Rinv @ (y - H @ x)))
        if np.abs(g).max() <= grad_tol:
            break
        step = float(g @ g) / float(g @ hess @ g)
        x = x - step * g
    return x


def active_set_reference(Q: np.ndarray, c: np.ndarray, A: np.ndarray, b: np.ndarray):
    """Globally minimize a small nonnegative QP by active-set enumeration.

    For every subset of variables pinned at zero, solves the corresponding
    equality-constrained stationarity system and keeps the best feasible
    candidate.  Exponential in n; use n <= ~12.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    c = np.asarray(c, dtype=np.float64)
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    n = c.size
    m = b.size
    best_obj = np.inf
    best_u = None
    for bits in range(2 ** n):
        pinned = np.array([(bits >> i) & 1 for i in range(n)], dtype=bool)
        free = ~pinned
        nf = int(free.sum())
        if nf == 0:
            if np.abs(b).max(initial=0.0) <= 1e-12:
                if 0.0 < best_obj:
                    best_obj, best_u = 0.0, np.zeros(n)
            continue
        Qf = Q[np.ix_(free, free)]
        Af = A[:, free]
        kkt = np.zeros((nf + m, nf + m))
        kkt[:nf, :nf] = Qf
        kkt[:nf, nf:] = -Af.T
        kkt[nf:, :nf] = Af
        rhs = np.concatenate([-c[free], b])
        sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        if np.abs(kkt @ sol - rhs).max() > 1e-8:
            continue
        uf = sol[:nf]
        if np.any(uf < -1e-9):
            continue
        u = np.zeros(n)
        u[free] = np.maximum(uf, 0.0)
        obj = 0.5 * float(u @ Q @ u) + float(c @ u)
        if obj < best_obj - 1e-15:
            best_obj, best_u = obj, u
    return best_obj, best_u
