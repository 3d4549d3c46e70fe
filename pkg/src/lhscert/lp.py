"""Small dense linear programs in the form ``max c.x  s.t.  A x >= b,  A_eq x = b_eq,  lo <= x <= hi``.

Problems here have a few dozen variables and up to ~10^4 inequality rows, so
:func:`solve_lp` runs a cutting-plane loop: it solves with a working subset of
rows, adds the most violated remaining rows and repeats until every row holds
to ``feas_tol``.  Each restricted problem goes to HiGHS.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9


class IterationCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class LinearProgram:
    objective: np.ndarray  # maximised
    a_ge: np.ndarray
    b_ge: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    bounds: tuple = ()  # per-variable (lo, hi); empty means x >= 0

    def __post_init__(self):
        n = len(self.objective)
        if self.a_ge.ndim != 2 or self.a_ge.shape[1] != n or len(self.b_ge) != len(self.a_ge):
            raise ValueError("inequality block does not match the variable count")
        if self.a_eq is not None and self.a_eq.shape[1] != n:
            raise ValueError("equality block does not match the variable count")
        if not (np.all(np.isfinite(self.a_ge)) and np.all(np.isfinite(self.b_ge))):
            raise ValueError("non-finite LP coefficients")
        if self.bounds and len(self.bounds) != n:
            raise ValueError("one bound pair per variable required")

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.a_ge)

    def violation(self, x) -> np.ndarray:
        """Per-row shortfall ``max(b - A x, 0)``."""
        return np.maximum(self.b_ge - self.a_ge @ x, 0.0)


@dataclass
class LPSolution:
    status: str  # optimal | infeasible | unbounded
    objective: float = float("nan")
    x: np.ndarray | None = None
    rounds: int = 0
    active_rows: int = 0
    max_violation: float = float("nan")
    info: dict = field(default_factory=dict)


_HIGHS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
    "presolve": True,
}


def _solve_restricted(lp: LinearProgram, rows: np.ndarray):
    return linprog(
        -lp.objective,
        A_ub=-lp.a_ge[rows] if len(rows) else None,
        b_ub=-lp.b_ge[rows] if len(rows) else None,
        A_eq=lp.a_eq,
        b_eq=lp.b_eq,
        bounds=list(lp.bounds) if lp.bounds else (0, None),
        method="highs",
        options=_HIGHS,
    )


def solve_lp(
    lp: LinearProgram,
    feas_tol: float = FEAS_TOL,
    initial_rows: int = 64,
    batch: int = 64,
    max_rounds: int = 200,
    x0=None,
) -> LPSolution:
    """Cutting-plane solve; exact for the full row set once no row is violated.

    ``x0`` seeds the initial working set with the rows it violates most.
    """
    m = lp.n_rows
    if m == 0:
        active = np.zeros(0, dtype=int)
    else:
        if x0 is None:
            x0 = np.zeros(lp.n_vars)
        score = lp.b_ge - lp.a_ge @ np.asarray(x0, dtype=float)
        k = min(initial_rows, m)
        active = np.sort(np.argpartition(-score, k - 1)[:k])
    in_set = np.zeros(m, dtype=bool)
    in_set[active] = True

    for rnd in range(1, max_rounds + 1):
        res = _solve_restricted(lp, active)
        if res.status == 2:
            return LPSolution("infeasible", rounds=rnd, active_rows=len(active))
        if res.status == 3:
            return LPSolution("unbounded", rounds=rnd, active_rows=len(active))
        if res.status != 0:
            raise RuntimeError(f"HiGHS failed: {res.message}")
        x = res.x
        viol = lp.violation(x) if m else np.zeros(0)
        viol[in_set] = np.where(viol[in_set] > feas_tol, viol[in_set], 0.0)
        worst = float(viol.max()) if m else 0.0
        if worst <= feas_tol:
            return LPSolution(
                "optimal",
                objective=float(lp.objective @ x),
                x=x,
                rounds=rnd,
                active_rows=len(active),
                max_violation=float(lp.violation(x).max()) if m else 0.0,
            )
        cand = np.flatnonzero((viol > feas_tol) & ~in_set)
        if len(cand) == 0:
            # violated rows are already active: HiGHS tolerance drift, accept residual
            log.debug("active rows violated by %.2e after round %d", worst, rnd)
            return LPSolution(
                "optimal",
                objective=float(lp.objective @ x),
                x=x,
                rounds=rnd,
                active_rows=len(active),
                max_violation=worst,
            )
        take = cand[np.argsort(-viol[cand])[:batch]]
        in_set[take] = True
        active = np.flatnonzero(in_set)
    raise IterationCapExceeded(f"no convergence after {max_rounds} cutting-plane rounds")


def solve_lp_full(lp: LinearProgram) -> LPSolution:
    """Single HiGHS solve with every row; reference path for tests."""
    res = _solve_restricted(lp, np.arange(lp.n_rows))
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status)
    if status is None:
        raise RuntimeError(f"HiGHS failed: {res.message}")
    if status != "optimal":
        return LPSolution(status)
    return LPSolution(
        "optimal",
        objective=float(lp.objective @ res.x),
        x=res.x,
        rounds=1,
        active_rows=lp.n_rows,
        max_violation=float(lp.violation(res.x).max()) if lp.n_rows else 0.0,
    )
