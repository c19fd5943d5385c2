"""In-process HiGHS branch-and-cut through scipy, with an LP polish step."""

from __future__ import annotations

import math
import time

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from ..milp.instance import MilpInstance
from .base import Solution, SolverLimits, empty_solution, polish, to_values


def solve_highs(inst: MilpInstance, limits: SolverLimits = SolverLimits()) -> Solution:
    t0 = time.perf_counter()
    if not inst.variables:
        return empty_solution(inst, "highs")
    arrays = inst.to_arrays()
    c, A, rlb, rub, lb, ub, integ = arrays
    opts = {"presolve": True, "mip_rel_gap": limits.mip_gap, "disp": False}
    if limits.time_limit is not None:
        opts["time_limit"] = float(limits.time_limit)
    if limits.node_limit is not None:
        opts["node_limit"] = int(limits.node_limit)
    cons = [LinearConstraint(A, rlb, rub)] if A.shape[0] else []
    res = milp(c, constraints=cons, bounds=Bounds(lb, ub), integrality=integ, options=opts)
    if res.status == 2:
        # Presolve occasionally misjudges feasibility on big-M rows; confirm without it.
        opts["presolve"] = False
        res = milp(c, constraints=cons, bounds=Bounds(lb, ub), integrality=integ, options=opts)
    elapsed = time.perf_counter() - t0
    sign = -1.0 if inst.sense == "max" else 1.0
    if res.status == 2:
        return Solution("infeasible", backend="highs", solve_time=elapsed, message=res.message)
    if res.status == 3:
        return Solution("unbounded", backend="highs", solve_time=elapsed, message=res.message)
    if res.x is None:
        st = "limit" if res.status == 1 else "error"
        return Solution(st, backend="highs", solve_time=elapsed, message=res.message)
    x = polish(inst, np.asarray(res.x), arrays)
    if x is None:
        x = np.asarray(res.x, dtype=float)
        x[np.flatnonzero(integ)] = np.round(x[np.flatnonzero(integ)])
    gap = float(getattr(res, "mip_gap", 0.0) or 0.0)
    if res.status == 0:
        status = "optimal" if gap <= limits.mip_gap + 1e-12 else "feasible"
    else:
        status = "limit"
    obj = sign * float(c @ x) + inst.objective_constant
    return Solution(status, obj, to_values(inst, x), gap if math.isfinite(gap) else math.inf,
                    time.perf_counter() - t0, int(getattr(res, "mip_node_count", 0) or 0), "highs",
                    res.message)
