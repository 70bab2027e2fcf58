"""
Linear programs over torque polytopes: maximise c·x subject to A·x ≤ b

Two backends share one interface. `simplex` is a dense active-set method that walks
vertices of {A·x ≤ b} with Bland's rule; `highs` hands the problem to scipy's HiGHS.
A program is built once per constraint stack so the phase-one vertex is reused across
the many directions ICHM asks for.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, lu_factor, lu_solve, null_space
from scipy.optimize import linprog

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9
PIVOT_TOL = 1e-12


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LPResult:
    status: LPStatus
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    active: Optional[tuple[int, ...]] = None


class _Walk:
    """Active-set vertex walk on normalised rows"""

    def __init__(self, A: np.ndarray, b: np.ndarray, tol: float):
        self.A = A
        self.b = b
        self.tol = tol
        self.dim = A.shape[1]
        self.max_iterations = 50 * (A.shape[0] + self.dim)

    def _step(self, x: np.ndarray, d: np.ndarray, skip: Sequence[int]):
        """Largest move along d that keeps A·x ≤ b; ties go to the lowest row index"""
        rates = self.A @ d
        rates[list(skip)] = 0.0
        candidates = np.flatnonzero(rates > PIVOT_TOL)
        if candidates.size == 0:
            return None, np.inf
        slack = np.maximum(self.b[candidates] - self.A[candidates] @ x, 0.0)
        ratios = slack / rates[candidates]
        best = ratios.min()
        ties = candidates[ratios <= best + PIVOT_TOL * max(1.0, best)]
        return int(ties.min()), float(best)

    def crash(self, c: np.ndarray, x: np.ndarray, active: list[int]):
        """Grow the active set to a vertex without decreasing c·x"""
        while len(active) < self.dim:
            basis = null_space(self.A[active]) if active else np.eye(self.dim)
            d = basis @ (basis.T @ c)
            if np.linalg.norm(d) <= PIVOT_TOL * max(1.0, np.linalg.norm(c)):
                d = basis[:, 0]
            row, t = self._step(x, d, active)
            if row is None:
                if c @ d > PIVOT_TOL:
                    return None
                d = -d
                row, t = self._step(x, d, active)
                if row is None:
                    return None
            x = x + t * d
            active.append(row)
        return x, active

    def run(self, c: np.ndarray, active: list[int]):
        """
        Walk from the vertex named by `active` to an optimum

        Returns:
            (status, x, active) with x None unless optimal
        """
        active = list(active)
        for _ in range(self.max_iterations):
            try:
                lu = lu_factor(self.A[active])
            except (LinAlgError, ValueError):
                return None
            x = lu_solve(lu, self.b[active])
            multipliers = lu_solve(lu, c, trans=1)
            negative = [k for k in range(self.dim) if multipliers[k] < -PIVOT_TOL * max(1.0, abs(c).max())]
            if not negative:
                return LPStatus.OPTIMAL, x, active
            # Bland: leave through the lowest-index row among the improving ones
            k = min(negative, key=lambda j: active[j])
            unit = np.zeros(self.dim)
            unit[k] = -1.0
            d = lu_solve(lu, unit)
            row, _ = self._step(x, d, active)
            if row is None:
                return LPStatus.UNBOUNDED, None, active
            active[k] = row
        logger.warning(f"Simplex hit its iteration cap ({self.max_iterations}) on a {self.A.shape} problem")
        return None


class LinearProgram:
    """
    Dense simplex program for a fixed constraint stack A·x ≤ b

    Rows are scaled to unit norm, zero rows are dropped (or make the problem infeasible),
    and directions along the null space of A are handled analytically.
    """

    backend = "simplex"

    def __init__(self, A, b):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.shape[0]}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("LP data must be finite")
        self.n = A.shape[1]
        self._A_raw = A
        self._b_raw = b

        norms = np.linalg.norm(A, axis=1)
        scale = max(1.0, norms.max(initial=0.0))
        zero = norms <= 1e-14 * scale
        self._trivially_infeasible = bool(np.any(b[zero] < -FEASIBILITY_TOL * max(1.0, np.abs(b).max(initial=0.0))))
        self.rows = np.flatnonzero(~zero)
        A_n = A[self.rows] / norms[self.rows, None]
        b_n = b[self.rows] / norms[self.rows]
        self.tol = FEASIBILITY_TOL * max(1.0, np.abs(b_n).max(initial=0.0))

        # restrict to the row space of A; the rest of R^n is free
        if A_n.shape[0]:
            _, s, vt = np.linalg.svd(A_n, full_matrices=False)
            rank = int(np.sum(s > 1e-10 * s[0])) if s.size else 0
        else:
            rank, vt = 0, np.zeros((0, self.n))
        self.basis = vt[:rank].T
        self._walk = _Walk(A_n @ self.basis, b_n, self.tol) if rank else None
        self._start: Optional[tuple[np.ndarray, list[int]]] = None
        self._phase_one_done = False

    def _phase_one(self):
        """Find a vertex of the reduced problem, or decide it is infeasible"""
        self._phase_one_done = True
        if self._trivially_infeasible:
            return
        if self._walk is None:
            if np.all(self._b_raw[self.rows] >= -self.tol):
                self._start = (np.zeros(0), [])
            return
        walk = self._walk
        K, r = walk.A.shape
        shortfall = max(0.0, float(-walk.b.min()))
        if shortfall <= walk.tol:
            z = np.zeros(r)
        else:
            # auxiliary problem in (z, s): A·z − s ≤ b, −s ≤ 0, maximise −s
            aux_A = np.vstack([np.hstack([walk.A, -np.ones((K, 1))]), np.append(np.zeros(r), -1.0)])
            aux_b = np.append(walk.b, 0.0)
            aux = _Walk(aux_A, aux_b, walk.tol)
            aux_c = np.append(np.zeros(r), -1.0)
            start = np.append(np.zeros(r), shortfall)
            tight = [int(np.argmin(walk.b))]
            crashed = aux.crash(aux_c, start, tight)
            if crashed is None:
                return
            outcome = aux.run(aux_c, crashed[1])
            if outcome is None or outcome[0] is not LPStatus.OPTIMAL:
                return
            _, point, _ = outcome
            if point[-1] > walk.tol:
                return
            z = point[:-1]
        slack = walk.b - walk.A @ z
        active: list[int] = []
        for row in np.flatnonzero(np.abs(slack) <= walk.tol):
            trial = active + [int(row)]
            if np.linalg.matrix_rank(walk.A[trial], tol=1e-10) == len(trial):
                active = trial
            if len(active) == r:
                break
        self._start = (z, active)

    @property
    def feasible(self) -> bool:
        if not self._phase_one_done:
            self._phase_one()
        return self._start is not None

    def maximize(self, c, start: Optional[Sequence[int]] = None) -> LPResult:
        """
        Maximise c·x

        Args:
            c: Objective direction
            start: Active rows (original indices) of a vertex to warm-start from

        Returns:
            LPResult; `active` names the rows tight at the optimum
        """
        c = np.asarray(c, dtype=float).reshape(-1)
        if c.shape != (self.n,):
            raise ValueError(f"objective has {c.shape[0]} entries, program has {self.n} variables")
        if not self.feasible:
            return LPResult(LPStatus.INFEASIBLE)

        c_reduced = self.basis.T @ c
        if np.linalg.norm(c - self.basis @ c_reduced) > 1e-10 * max(1.0, np.linalg.norm(c)):
            return LPResult(LPStatus.UNBOUNDED)
        if self._walk is None:
            return LPResult(LPStatus.OPTIMAL, np.zeros(self.n), 0.0, ())

        outcome = None
        if start is not None:
            outcome = self._warm(c_reduced, start)
        if outcome is None:
            z, active = self._start
            crashed = self._walk.crash(c_reduced, z.copy(), list(active))
            if crashed is None:
                return LPResult(LPStatus.UNBOUNDED)
            outcome = self._walk.run(c_reduced, crashed[1])
        if outcome is None:
            logger.warning("Simplex walk failed, retrying with HiGHS")
            return HighsProgram(self._A_raw, self._b_raw).maximize(c)

        status, z, active = outcome
        if status is not LPStatus.OPTIMAL:
            return LPResult(status)
        x = self.basis @ z
        return LPResult(LPStatus.OPTIMAL, x, float(c @ x), tuple(int(self.rows[k]) for k in active))

    def _warm(self, c_reduced: np.ndarray, start: Sequence[int]):
        internal = np.searchsorted(self.rows, np.asarray(start, dtype=int))
        if len(internal) != self._walk.dim or np.any(internal >= self.rows.size):
            return None
        if np.any(self.rows[internal] != np.asarray(start)):
            return None
        active = [int(k) for k in internal]
        try:
            vertex = np.linalg.solve(self._walk.A[active], self._walk.b[active])
        except LinAlgError:
            return None
        if np.any(self._walk.A @ vertex > self._walk.b + self._walk.tol):
            return None
        return self._walk.run(c_reduced, active)


class HighsProgram:
    """Same interface as LinearProgram, solved by scipy's HiGHS"""

    backend = "highs"

    def __init__(self, A, b):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.b = np.asarray(b, dtype=float).reshape(-1)
        self.n = self.A.shape[1]

    @property
    def feasible(self) -> bool:
        return self.maximize(np.zeros(self.n)).status is LPStatus.OPTIMAL

    def maximize(self, c, start: Optional[Sequence[int]] = None) -> LPResult:
        c = np.asarray(c, dtype=float).reshape(-1)
        result = linprog(-c, A_ub=self.A, b_ub=self.b, bounds=(None, None), method="highs")
        if result.status == 0:
            x = np.asarray(result.x)
            slack = self.b - self.A @ x
            tol = FEASIBILITY_TOL * max(1.0, np.abs(self.b).max(initial=0.0))
            return LPResult(LPStatus.OPTIMAL, x, float(c @ x), tuple(int(k) for k in np.flatnonzero(slack <= tol)))
        if result.status == 3:
            return LPResult(LPStatus.UNBOUNDED)
        if result.status != 2:
            logger.warning(f"HiGHS returned status {result.status}: {result.message}")
        return LPResult(LPStatus.INFEASIBLE)


def make_program(A, b, backend: Optional[str] = None):
    """LP object for a fixed constraint stack; backend defaults to settings.lp_backend"""
    if backend is None:
        from reachspan.config import settings
        backend = settings.lp_backend
    if backend == "simplex":
        return LinearProgram(A, b)
    if backend == "highs":
        return HighsProgram(A, b)
    raise ValueError(f"unknown LP backend {backend!r}")


def solve_lp(c, A, b, backend: Optional[str] = None) -> LPResult:
    """
    Maximise c·x subject to A·x ≤ b

    Returns:
        LPResult with status optimal, infeasible or unbounded
    """
    return make_program(A, b, backend).maximize(c)
