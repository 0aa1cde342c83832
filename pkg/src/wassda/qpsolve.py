"""Convex quadratic programming over nonnegative variables.

Solves problems of the form

    minimize    0.5 u'Qu + c'u
    subject to  A u = b,  u >= 0

with a Mehrotra-style predictor-corrector primal-dual interior-point
method.  Two structural features keep the transport-plan programs cheap:

* the quadratic term may be supplied in factored form Q = F'WF with a thin
  F, in which case Newton systems are solved through the Woodbury identity
  instead of dense factorizations;
* equality constraints may be supplied as marginal-sum maps over a k-by-l
  plan matrix, which are applied as reshaped row/column sums and never
  materialized.

The solver is deterministic: identical inputs produce bitwise-identical
solutions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import InfeasibleError

__all__ = [
    "DenseConstraints",
    "MarginalConstraints",
    "DenseQuadratic",
    "LowRankQuadratic",
    "QuadraticProgram",
    "QpSolution",
    "feasibility_check",
    "solve_qp",
]

logger = logging.getLogger(__name__)

_REG = 1e-10          # diagonal shift on the Newton systems
_STEP_FRACTION = 0.995  # fraction-to-boundary factor
_GAP_TOL = 1e-7       # duality gap, relative to 1 + |objective|
_PRIMAL_TOL = 1e-9    # equality residual, relative to 1 + |b|_inf
_DUAL_TOL = 1e-8      # stationarity residual, relative to problem scale
_FEAS_TOL = 1e-8      # phase-1 feasibility tolerance
_START_FLOOR = 1e-8   # interiority floor for generic starting points


# --- equality constraint operators -----------------------------------------


class DenseConstraints:
    """Explicit equality constraint matrix ``A`` of shape (m_eq, n)."""

    def __init__(self, A: np.ndarray):
        A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        if A.ndim != 2:
            raise ValueError("constraint matrix must be 2-D")
        self.A = A

    @property
    def m_eq(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def matvec(self, u: np.ndarray) -> np.ndarray:
        return self.A @ u

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        return self.A.T @ y

    def gram(self, w: np.ndarray) -> np.ndarray:
        """Weighted Gram matrix ``A diag(w) A'``."""
        return (self.A * w) @ self.A.T

    def to_dense(self) -> np.ndarray:
        return self.A

    def presolve(self, b: np.ndarray):
        """Fix variables forced to zero by zero-RHS sign-consistent rows.

        Returns ``(keep, reduced_constraints, reduced_b)`` where ``keep`` is
        None when nothing can be eliminated.
        """
        A = self.A
        keep_var = np.ones(A.shape[1], dtype=bool)
        keep_row = np.ones(A.shape[0], dtype=bool)
        changed = True
        while changed:
            changed = False
            sub = A[np.ix_(keep_row, keep_var)]
            bsub = b[keep_row]
            rows = np.flatnonzero(keep_row)
            for local_i, i in enumerate(rows):
                row = sub[local_i]
                if bsub[local_i] != 0.0:
                    if not np.any(row):
                        raise InfeasibleError(
                            f"constraint row {i} has no active variables but b={bsub[local_i]!r}",
                            index=int(i),
                        )
                    continue
                nz = row != 0.0
                if not nz.any():
                    keep_row[i] = False
                    changed = True
                    continue
                if np.all(row[nz] > 0) or np.all(row[nz] < 0):
                    fixed = np.flatnonzero(keep_var)[nz]
                    keep_var[fixed] = False
                    keep_row[i] = False
                    changed = True
        if keep_var.all() and keep_row.all():
            return None, self, b
        reduced = DenseConstraints(A[np.ix_(keep_row, keep_var)])
        return keep_var, reduced, b[keep_row]

    def interior_point(self, b: np.ndarray) -> np.ndarray:
        """Least-squares feasible point, floored for interiority."""
        if self.m_eq == 0:
            return np.full(self.n, 1.0 / max(self.n, 1))
        u, *_ = np.linalg.lstsq(self.A, b, rcond=None)
        resid = self.A @ u - b
        worst = int(np.argmax(np.abs(resid)))
        if abs(resid[worst]) > _FEAS_TOL * (1.0 + np.abs(b).max(initial=0.0)):
            raise InfeasibleError(
                f"no feasible point: constraint {worst} residual {resid[worst]:.3e}",
                index=worst,
            )
        return np.maximum(u, _START_FLOOR)


class MarginalConstraints:
    """Row/column sum constraints over a k-by-l transport plan.

    Variables are the plan entries in row-major order (source index major).
    Row sums pin the source marginal, column sums the target marginal.
    ``drop_col`` names one column constraint omitted as redundant when both
    marginals are constrained; it must be a positive-mass column so the
    zero-mass presolve still sees every degenerate bin.
    """

    def __init__(
        self,
        k: int,
        l: int,
        constrain_rows: bool,
        constrain_cols: bool,
        drop_col: int | None = None,
    ):
        if not (constrain_rows or constrain_cols):
            raise ValueError("at least one marginal must be constrained")
        if drop_col is not None and not (constrain_rows and constrain_cols):
            raise ValueError("a column constraint can be dropped only when both marginals are present")
        self.k = int(k)
        self.l = int(l)
        self.constrain_rows = bool(constrain_rows)
        self.constrain_cols = bool(constrain_cols)
        self.drop_col = None if drop_col is None else int(drop_col)

    @property
    def n(self) -> int:
        return self.k * self.l

    @property
    def n_row_cons(self) -> int:
        return self.k if self.constrain_rows else 0

    @property
    def m_eq(self) -> int:
        m = self.n_row_cons
        if self.constrain_cols:
            m += self.l - (self.drop_col is not None)
        return m

    def _col_ids(self) -> np.ndarray:
        cols = np.arange(self.l)
        if self.drop_col is not None:
            cols = np.delete(cols, self.drop_col)
        return cols

    def matvec(self, u: np.ndarray) -> np.ndarray:
        U = u.reshape(self.k, self.l)
        parts = []
        if self.constrain_rows:
            parts.append(U.sum(axis=1))
        if self.constrain_cols:
            cs = U.sum(axis=0)
            if self.drop_col is not None:
                cs = np.delete(cs, self.drop_col)
            parts.append(cs)
        return np.concatenate(parts)

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        nr = self.n_row_cons
        out = np.zeros((self.k, self.l))
        if self.constrain_rows:
            out += y[:nr, None]
        if self.constrain_cols:
            ycol = np.zeros(self.l)
            ycol[self._col_ids()] = y[nr:]
            out += ycol[None, :]
        return out.ravel()

    def gram(self, w: np.ndarray) -> np.ndarray:
        W = w.reshape(self.k, self.l)
        if self.constrain_rows and self.constrain_cols:
            cols = self._col_ids()
            lc = cols.size
            M = np.zeros((self.k + lc, self.k + lc))
            M[: self.k, : self.k] = np.diag(W.sum(axis=1))
            M[self.k:, self.k:] = np.diag(W.sum(axis=0)[cols])
            cross = W[:, cols]
            M[: self.k, self.k:] = cross
            M[self.k:, : self.k] = cross.T
            return M
        if self.constrain_rows:
            return np.diag(W.sum(axis=1))
        return np.diag(W.sum(axis=0)[self._col_ids()])

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.m_eq, self.n))
        nr = self.n_row_cons
        idx = np.arange(self.n).reshape(self.k, self.l)
        if self.constrain_rows:
            for i in range(self.k):
                A[i, idx[i, :]] = 1.0
        if self.constrain_cols:
            for out_row, j in enumerate(self._col_ids()):
                A[nr + out_row, idx[:, j]] = 1.0
        return A

    # --- marginal bookkeeping ----------------------------------------------

    def marginals(self, b: np.ndarray) -> tuple[np.ndarray | None, np.ndarray | None]:
        """Recover full (row, col) marginals from the stacked RHS ``b``."""
        nr = self.n_row_cons
        row_m = b[:nr].copy() if self.constrain_rows else None
        col_m = None
        if self.constrain_cols:
            col_m = np.zeros(self.l)
            col_m[self._col_ids()] = b[nr:]
            if self.drop_col is not None:
                col_m[self.drop_col] = row_m.sum() - b[nr:].sum()
        return row_m, col_m

    def presolve(self, b: np.ndarray):
        row_m, col_m = self.marginals(b)
        act_r = np.ones(self.k, dtype=bool) if row_m is None else row_m > 0.0
        act_c = np.ones(self.l, dtype=bool) if col_m is None else col_m > 0.0
        if act_r.all() and act_c.all():
            return None, self, b
        if self.drop_col is not None and not act_c[self.drop_col]:
            raise ValueError("the dropped redundant column must carry positive mass")
        ka = int(act_r.sum())
        la = int(act_c.sum())
        if ka == 0 or la == 0:
            raise InfeasibleError("all constrained marginal mass is zero", index=0)
        drop_r = None
        if self.drop_col is not None:
            drop_r = int(np.searchsorted(np.flatnonzero(act_c), self.drop_col))
        reduced = MarginalConstraints(ka, la, self.constrain_rows, self.constrain_cols, drop_r)
        keep = np.outer(act_r, act_c).ravel()
        parts = []
        if row_m is not None:
            parts.append(row_m[act_r])
        if col_m is not None:
            cm = col_m[act_c]
            if drop_r is not None:
                cm = np.delete(cm, drop_r)
            parts.append(cm)
        return keep, reduced, np.concatenate(parts)

    def interior_point(self, b: np.ndarray) -> np.ndarray:
        """Product coupling of the marginals; strictly positive on the
        active support and exactly feasible."""
        row_m, col_m = self.marginals(b)
        for name, m in (("row", row_m), ("column", col_m)):
            if m is None:
                continue
            neg = np.flatnonzero(m < 0)
            if neg.size:
                raise InfeasibleError(
                    f"negative {name} marginal at bin {neg[0]}", index=int(neg[0])
                )
        if row_m is not None and col_m is not None:
            tr, tc = row_m.sum(), col_m.sum()
            if abs(tr - tc) > _FEAS_TOL * (1.0 + max(tr, tc)):
                raise InfeasibleError(
                    f"marginal totals differ: {tr!r} vs {tc!r}", index=self.k
                )
            return np.outer(row_m, col_m).ravel() / tr
        if col_m is not None:
            return np.tile(col_m / self.k, (self.k, 1)).ravel()
        return np.repeat(row_m / self.l, self.l)


# --- quadratic terms --------------------------------------------------------


class DenseQuadratic:
    """Explicit symmetric PSD matrix ``Q``."""

    def __init__(self, Q: np.ndarray):
        Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
        if Q.shape[0] != Q.shape[1]:
            raise ValueError(f"Q must be square, got {Q.shape}")
        if np.abs(Q - Q.T).max(initial=0.0) > 1e-9 * (1.0 + np.abs(Q).max(initial=0.0)):
            raise ValueError("Q must be symmetric within 1e-9")
        self.Q = 0.5 * (Q + Q.T)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def matvec(self, u: np.ndarray) -> np.ndarray:
        return self.Q @ u

    def quad(self, u: np.ndarray) -> float:
        return float(u @ self.Q @ u)

    def to_dense(self) -> np.ndarray:
        return self.Q

    def restrict(self, keep: np.ndarray) -> DenseQuadratic:
        return DenseQuadratic(self.Q[np.ix_(keep, keep)])


class LowRankQuadratic:
    """Factored quadratic term ``Q = F'WF`` with thin ``F`` (r-by-n).

    ``W`` is a small symmetric PSD r-by-r weight; ``W = 0`` or ``r = 0``
    degrades gracefully to a pure linear objective.
    """

    def __init__(self, F: np.ndarray, W: np.ndarray):
        F = np.atleast_2d(np.asarray(F, dtype=np.float64))
        W = np.atleast_2d(np.asarray(W, dtype=np.float64))
        if W.shape != (F.shape[0], F.shape[0]):
            raise ValueError(f"W shape {W.shape} does not match F rank {F.shape[0]}")
        self.F = F
        self.W = 0.5 * (W + W.T)

    @property
    def n(self) -> int:
        return self.F.shape[1]

    @property
    def rank(self) -> int:
        return self.F.shape[0]

    def matvec(self, u: np.ndarray) -> np.ndarray:
        return self.F.T @ (self.W @ (self.F @ u))

    def quad(self, u: np.ndarray) -> float:
        fu = self.F @ u
        return float(fu @ self.W @ fu)

    def to_dense(self) -> np.ndarray:
        return self.F.T @ self.W @ self.F

    def restrict(self, keep: np.ndarray) -> LowRankQuadratic:
        return LowRankQuadratic(self.F[:, keep], self.W)


def _as_quadratic(Q, n: int):
    if Q is None:
        return LowRankQuadratic(np.zeros((0, n)), np.zeros((0, 0)))
    if isinstance(Q, (DenseQuadratic, LowRankQuadratic)):
        return Q
    return DenseQuadratic(Q)


def _as_constraints(A):
    if isinstance(A, (DenseConstraints, MarginalConstraints)):
        return A
    return DenseConstraints(A)


# --- problem and solution containers ----------------------------------------


class QuadraticProgram:
    """Equality-constrained nonnegative QP in standard form.

    ``Q`` may be a dense symmetric PSD array, a :class:`LowRankQuadratic`,
    or None for a pure LP.  ``A_eq`` may be a dense array or a
    :class:`MarginalConstraints` operator.  Construction runs a phase-1
    feasibility pass and raises :class:`InfeasibleError` when the feasible
    set is empty.
    """

    def __init__(self, Q, c: np.ndarray, A_eq, b_eq: np.ndarray):
        c = np.asarray(c, dtype=np.float64).ravel()
        b_eq = np.asarray(b_eq, dtype=np.float64).ravel()
        self.quadratic = _as_quadratic(Q, c.size)
        self.constraints = _as_constraints(A_eq)
        if self.quadratic.n != c.size:
            raise ValueError("Q and c dimensions disagree")
        if self.constraints.n != c.size:
            raise ValueError("A_eq column count does not match c")
        if self.constraints.m_eq != b_eq.size:
            raise ValueError("A_eq row count does not match b_eq")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(b_eq)):
            raise ValueError("c and b_eq must be finite")
        self.c = c
        self.b_eq = b_eq
        feasibility_check(self.constraints, self.b_eq, self.n)

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def m_eq(self) -> int:
        return self.constraints.m_eq

    def dense_Q(self) -> np.ndarray:
        """Materialize Q; intended for small programs and tests."""
        return self.quadratic.to_dense()

    def dense_A(self) -> np.ndarray:
        """Materialize A_eq; intended for small programs and tests."""
        return self.constraints.to_dense()

    def objective(self, u: np.ndarray) -> float:
        return 0.5 * self.quadratic.quad(u) + float(self.c @ u)


@dataclass
class QpSolution:
    """Interior-point solution with convergence diagnostics.

    On ``status == "converged"`` the iterate satisfies ``u >= -1e-9``,
    ``|A u - b|_inf <= 1e-7`` and a duality gap below
    ``1e-7 * (1 + |objective|)``.
    """

    u: np.ndarray
    objective: float
    duality_gap: float
    iterations: int
    status: str
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    gap_history: np.ndarray = field(default_factory=lambda: np.zeros(0))


def feasibility_check(A_eq, b_eq: np.ndarray, n: int) -> np.ndarray:
    """Phase-1 pass: return an interior feasible point or raise.

    For marginal (transport-plan) constraints the product coupling of the
    marginals is returned analytically; it is strictly positive wherever
    the marginals are.  For dense constraints a least-squares point, floored
    for interiority, is returned.  Raises :class:`InfeasibleError` naming a
    violated constraint row otherwise.
    """
    cons = _as_constraints(A_eq)
    b_eq = np.asarray(b_eq, dtype=np.float64).ravel()
    if cons.n != n:
        raise ValueError(f"constraints are over {cons.n} variables, expected {n}")
    if cons.m_eq != b_eq.size:
        raise ValueError("b_eq length does not match constraint rows")
    return cons.interior_point(b_eq)


# --- interior-point engine ---------------------------------------------------


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not neg.any():
        return np.inf
    return float(np.min(v[neg] / -dv[neg]))


class _NewtonContext:
    """Per-iteration factorization of D = Q + diag(z/u + reg) and the
    Schur complement A D^-1 A'."""

    def __init__(self, quadratic, constraints):
        self.quad = quadratic
        self.cons = constraints
        self.lowrank = isinstance(quadratic, LowRankQuadratic)

    def factor(self, d: np.ndarray):
        if self.lowrank:
            F, W = self.quad.F, self.quad.W
            p = 1.0 / d
            self._p = p
            r = F.shape[0]
            if r:
                Fp = F * p  # r x n, rows scaled by P
                K = np.eye(r) + W @ (Fp @ F.T)
                self._KinvW = np.linalg.solve(K, W)
                self._F = F
            else:
                self._KinvW = None
            S = self.cons.gram(p)
            if self._KinvW is not None:
                U1 = np.stack([self.cons.matvec(p * F[j]) for j in range(r)], axis=1)
                S = S - U1 @ self._KinvW @ U1.T
        else:
            Qd = self.quad.to_dense() + np.diag(d)
            self._choD = cho_factor(Qd, lower=True, check_finite=False)
            Ad = self.cons.to_dense()
            S = Ad @ cho_solve(self._choD, Ad.T, check_finite=False)
        self._choS = self._factor_spd(S)

    @staticmethod
    def _factor_spd(S: np.ndarray):
        shift = 0.0
        scale = max(np.abs(S).max(initial=0.0), 1.0)
        for _ in range(4):
            try:
                return cho_factor(S + shift * np.eye(S.shape[0]), lower=True, check_finite=False)
            except LinAlgError:
                shift = max(shift * 100.0, _REG * scale)
        raise InfeasibleError("Schur complement is numerically singular (dependent constraints?)")

    def solve_D(self, v: np.ndarray) -> np.ndarray:
        if self.lowrank:
            pv = self._p * v
            if self._KinvW is None:
                return pv
            corr = self._F.T @ (self._KinvW @ (self._F @ pv))
            return pv - self._p * corr
        return cho_solve(self._choD, v, check_finite=False)

    def solve_kkt(self, rhs_u: np.ndarray, r_p: np.ndarray):
        """Solve the condensed Newton system for (du, dy)."""
        t = self.solve_D(rhs_u)
        rhs_y = -r_p - self.cons.matvec(t)
        dy = cho_solve(self._choS, rhs_y, check_finite=False)
        du = self.solve_D(rhs_u + self.cons.rmatvec(dy))
        return du, dy


def _initial_duals(constraints, g0: np.ndarray):
    """Least-squares multipliers absorbing most of the initial gradient,
    with a Mehrotra-style positivity shift on the bound duals."""
    m = constraints.m_eq
    if m:
        gram1 = constraints.gram(np.ones(g0.size))
        gram1[np.diag_indices_from(gram1)] += _REG * max(np.abs(gram1).max(), 1.0)
        y = cho_solve(_NewtonContext._factor_spd(gram1), constraints.matvec(g0), check_finite=False)
    else:
        y = np.zeros(0)
    z_tilde = g0 - constraints.rmatvec(y)
    shift = max(0.0, -1.5 * z_tilde.min(initial=0.0))
    floor = 1e-4 * (1.0 + np.abs(g0).max(initial=0.0))
    z = np.maximum(z_tilde + shift, floor)
    return y, z


def _solve_reduced(quadratic, c, constraints, b, max_iter: int,
                   gap_tol: float, primal_tol: float, dual_tol: float):
    n = c.size
    u = constraints.interior_point(b)
    u = np.maximum(u, _START_FLOOR)
    g0 = quadratic.matvec(u) + c
    y, z = _initial_duals(constraints, g0)

    scale_b = 1.0 + np.abs(b).max(initial=0.0)
    scale_d = 1.0 + np.abs(c).max(initial=0.0)
    ctx = _NewtonContext(quadratic, constraints)
    gaps = []
    trace = logger.isEnabledFor(logging.DEBUG)

    status = "max_iter"
    it = 0
    for it in range(1, max_iter + 1):
        qu = quadratic.matvec(u)
        r_p = constraints.matvec(u) - b
        r_d = qu + c - constraints.rmatvec(y) - z
        gap = float(u @ z)
        mu = gap / n
        obj = 0.5 * float(u @ qu) + float(c @ u)
        pres = np.abs(r_p).max(initial=0.0)
        dres = np.abs(r_d).max(initial=0.0)
        gaps.append(gap)
        if trace:
            logger.debug(
                "ipm iter=%d gap=%.3e primal=%.3e dual=%.3e obj=%.6e",
                it - 1, gap, pres, dres, obj,
            )
        if (
            gap <= gap_tol * (1.0 + abs(obj))
            and pres <= primal_tol * scale_b
            and dres <= dual_tol * (scale_d + np.abs(z).max(initial=0.0))
        ):
            status = "converged"
            break

        d = z / u + _REG
        ctx.factor(d)

        # predictor (affine scaling) step
        rhs_aff = -r_d - z
        du_a, dy_a = ctx.solve_kkt(rhs_aff, r_p)
        dz_a = -z - (z / u) * du_a
        ap = min(1.0, _max_step(u, du_a))
        ad = min(1.0, _max_step(z, dz_a))
        mu_aff = float((u + ap * du_a) @ (z + ad * dz_a)) / n
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0

        # corrector with centering, reusing the factorization
        w = (sigma * mu - du_a * dz_a) / u - z
        du, dy = ctx.solve_kkt(-r_d + w, r_p)
        dz = w - (z / u) * du

        ap = min(1.0, _STEP_FRACTION * _max_step(u, du))
        ad = min(1.0, _STEP_FRACTION * _max_step(z, dz))
        if float((u + ap * du) @ (z + ad * dz)) > gap:
            # the second-order term can push the gap uphill while the dual
            # residual is still large; the plain centering direction cannot
            w = (sigma * mu) / u - z
            du, dy = ctx.solve_kkt(-r_d + w, r_p)
            dz = w - (z / u) * du
            ap = min(1.0, _STEP_FRACTION * _max_step(u, du))
            ad = min(1.0, _STEP_FRACTION * _max_step(z, dz))
        # keep the complementarity gap nonincreasing
        for _ in range(16):
            if float((u + ap * du) @ (z + ad * dz)) <= gap:
                break
            ap *= 0.6
            ad *= 0.6

        u = u + ap * du
        y = y + ad * dy
        z = z + ad * dz

    qu = quadratic.matvec(u)
    r_p = constraints.matvec(u) - b
    r_d = qu + c - constraints.rmatvec(y) - z
    gap = float(u @ z)
    obj = 0.5 * float(u @ qu) + float(c @ u)
    if status != "converged":
        pres = np.abs(r_p).max(initial=0.0)
        dres = np.abs(r_d).max(initial=0.0)
        if (
            gap <= gap_tol * (1.0 + abs(obj))
            and pres <= primal_tol * scale_b
            and dres <= dual_tol * (scale_d + np.abs(z).max(initial=0.0))
        ):
            status = "converged"
        gaps.append(gap)
    return u, obj, gap, it, status, np.abs(r_p).max(initial=0.0), np.abs(r_d).max(initial=0.0), np.array(gaps)


def solve_qp(
    qp: QuadraticProgram,
    max_iter: int = 200,
    gap_tol: float = _GAP_TOL,
    primal_tol: float = _PRIMAL_TOL,
    dual_tol: float = _DUAL_TOL,
) -> QpSolution:
    """Solve a nonnegative equality-constrained QP to interior-point optimality.

    Zero-mass marginal bins (or, for dense constraints, zero-RHS rows with
    sign-consistent coefficients) are presolved out, the reduced program is
    solved, and the fixed zeros are scattered back, so the returned vector
    always has the full variable count.
    """
    keep, cons_r, b_r = qp.constraints.presolve(qp.b_eq)
    if keep is None:
        quad_r, c_r = qp.quadratic, qp.c
    else:
        quad_r, c_r = qp.quadratic.restrict(keep), qp.c[keep]

    u_r, obj, gap, iters, status, pres, dres, gaps = _solve_reduced(
        quad_r, c_r, cons_r, b_r, max_iter, gap_tol, primal_tol, dual_tol
    )
    if keep is None:
        u = u_r
    else:
        u = np.zeros(qp.n)
        u[keep] = u_r
    if status != "converged":
        logger.warning(
            "qp did not converge: gap=%.3e primal=%.3e dual=%.3e after %d iterations",
            gap, pres, dres, iters,
        )
    return QpSolution(
        u=u,
        objective=obj,
        duality_gap=gap,
        iterations=iters,
        status=status,
        primal_residual=pres,
        dual_residual=dres,
        gap_history=gaps,
    )
