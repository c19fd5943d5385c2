"""Solver-independent result types and LP helpers shared by the backends."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy import sparse

from ..milp.instance import MilpInstance

STATUSES = ("optimal", "feasible", "infeasible", "unbounded", "limit", "error")
FEAS_TOL = 1e-6


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverLimits:
    time_limit: float | None = None   # seconds
    node_limit: int | None = None
    mip_gap: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        for name in ("time_limit", "node_limit"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ValueError(f"{name} must be positive")
        if not self.mip_gap > 0:
            raise ValueError("mip_gap must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class Solution:
    status: str
    objective: float = math.nan
    values: dict[str, float] = field(default_factory=dict)
    gap: float = math.inf
    solve_time: float = 0.0
    nodes: int = 0
    backend: str = ""
    message: str = ""

    @property
    def has_values(self) -> bool:
        return self.status in ("optimal", "feasible") or (self.status == "limit" and bool(self.values))


@dataclass
class LpResult:
    status: str           # optimal / infeasible / unbounded / error
    x: np.ndarray | None
    fun: float            # minimization value of c @ x


def lp_solve(c, A, rlb, rub, lb, ub, tight: bool = False) -> LpResult:
    """Solve min c@x over row ranges and bounds with HiGHS (via linprog)."""
    A = sparse.csr_matrix(A)
    eq = np.isfinite(rlb) & np.isfinite(rub) & (rlb == rub)
    up = np.isfinite(rub) & ~eq
    lo = np.isfinite(rlb) & ~eq
    A_ub = sparse.vstack([A[up], -A[lo]]).tocsr() if (up.any() or lo.any()) else None
    b_ub = np.concatenate([rub[up], -rlb[lo]]) if A_ub is not None else None
    A_eq = A[eq] if eq.any() else None
    b_eq = rlb[eq] if eq.any() else None
    bounds = np.column_stack([np.where(np.isfinite(lb), lb, -np.inf), np.where(np.isfinite(ub), ub, np.inf)])
    if len(c) == 0:
        return LpResult("optimal", np.zeros(0), 0.0)
    if np.any(bounds[:, 0] > bounds[:, 1]):
        return LpResult("infeasible", None, math.inf)
    opts = {"presolve": True}
    if tight:
        opts.update(primal_feasibility_tolerance=1e-10, dual_feasibility_tolerance=1e-10)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                  method="highs", options=opts)
    if res.status == 2:
        # Confirm infeasibility without presolve (see solve_highs).
        opts["presolve"] = False
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                      method="highs", options=opts)
    if res.status == 0:
        return LpResult("optimal", np.asarray(res.x, dtype=float), float(res.fun))
    if res.status == 2:
        return LpResult("infeasible", None, math.inf)
    if res.status == 3:
        return LpResult("unbounded", None, -math.inf)
    return LpResult("error", None, math.nan)


def polish(inst: MilpInstance, x: np.ndarray, arrays=None) -> np.ndarray | None:
    """Fix binaries to their rounded values and re-solve the LP tightly."""
    c, A, rlb, rub, lb, ub, integ = arrays if arrays is not None else inst.to_arrays()
    lb = lb.copy()
    ub = ub.copy()
    idx = np.flatnonzero(integ)
    r = np.round(x[idx])
    lb[idx] = r
    ub[idx] = r
    res = lp_solve(c, A, rlb, rub, lb, ub, tight=True)
    if res.status != "optimal":
        return None
    out = res.x.copy()
    out[idx] = r
    return out


def to_values(inst: MilpInstance, x: np.ndarray) -> dict[str, float]:
    return {v.name: float(val) for v, val in zip(inst.variables, x)}


def empty_solution(inst: MilpInstance, backend: str) -> Solution:
    return Solution("optimal", inst.objective_constant, {}, 0.0, 0.0, 0, backend)
