"""Built-in exact solvers: best-first branch-and-bound and an exhaustive oracle."""

from __future__ import annotations

import heapq
import itertools
import math
import time

import numpy as np
from scipy import sparse

from ..milp.instance import MilpInstance
from .base import FEAS_TOL, Solution, SolverError, SolverLimits, empty_solution, lp_solve, polish, to_values

BB_BINARY_GUARD = 60
ORACLE_BINARY_GUARD = 20


def _frac_pick(x: np.ndarray, bins: np.ndarray) -> int | None:
    """Most fractional binary; ties go to the lowest index."""
    if not len(bins):
        return None
    vals = x[bins]
    frac = np.minimum(vals - np.floor(vals), np.ceil(vals) - vals)
    best = int(np.argmax(frac))  # argmax returns the first maximum
    if frac[best] <= FEAS_TOL:
        return None
    return int(bins[best])


def solve_bb(inst: MilpInstance, limits: SolverLimits = SolverLimits(),
             guard: int = BB_BINARY_GUARD) -> Solution:
    """Best-first branch-and-bound on LP relaxations."""
    t0 = time.perf_counter()
    if not inst.variables:
        return empty_solution(inst, "bb")
    free = inst.free_binaries()
    if len(free) > guard:
        raise SolverError(f"{len(free)} free binaries exceed the branch-and-bound guard of {guard}; "
                          "use the HiGHS or external backend for instances this size")
    arrays = inst.to_arrays()
    c, A, rlb, rub, lb0, ub0, integ = arrays
    bins = np.flatnonzero(integ)
    sign = -1.0 if inst.sense == "max" else 1.0

    def relax(lb, ub):
        return lp_solve(c, A, rlb, rub, lb, ub)

    root = relax(lb0, ub0)
    if root.status == "infeasible":
        return Solution("infeasible", backend="bb", solve_time=time.perf_counter() - t0, nodes=1)
    if root.status == "unbounded":
        return Solution("unbounded", backend="bb", solve_time=time.perf_counter() - t0, nodes=1)
    if root.status != "optimal":
        return Solution("error", backend="bb", message="root LP failed",
                        solve_time=time.perf_counter() - t0, nodes=1)

    inc_x, inc_f = None, math.inf
    counter = itertools.count()
    heap = [(root.fun, next(counter), lb0, ub0, root)]
    nodes = 0
    status = None
    best_bound = root.fun

    def tol_of(f):
        return limits.mip_gap * max(1.0, abs(f)) if math.isfinite(f) else 0.0

    while heap:
        bound, _, lb, ub, res = heapq.heappop(heap)
        best_bound = bound
        if bound >= inc_f - tol_of(inc_f):
            heap.clear()
            break
        nodes += 1
        if limits.node_limit is not None and nodes > limits.node_limit:
            heapq.heappush(heap, (bound, next(counter), lb, ub, res))
            status = "limit"
            break
        if limits.time_limit is not None and time.perf_counter() - t0 > limits.time_limit:
            heapq.heappush(heap, (bound, next(counter), lb, ub, res))
            status = "limit"
            break
        k = _frac_pick(res.x, bins)
        if k is None:
            x = polish(inst, res.x, arrays)
            if x is None:
                x = res.x.copy()
                x[bins] = np.round(x[bins])
            f = float(c @ x)
            if f < inc_f:
                inc_x, inc_f = x, f
            continue
        for val in (math.floor(res.x[k]), math.ceil(res.x[k])):
            lb2, ub2 = lb.copy(), ub.copy()
            lb2[k] = ub2[k] = float(val)
            child = relax(lb2, ub2)
            if child.status == "optimal" and child.fun < inc_f - tol_of(inc_f):
                heapq.heappush(heap, (child.fun, next(counter), lb2, ub2, child))
            elif child.status == "unbounded":
                return Solution("unbounded", backend="bb", nodes=nodes,
                                solve_time=time.perf_counter() - t0)

    elapsed = time.perf_counter() - t0
    if heap:
        best_bound = min(best_bound, min(h[0] for h in heap))
    if inc_x is None:
        if status == "limit":
            return Solution("limit", backend="bb", nodes=nodes, solve_time=elapsed,
                            message="limit reached without an incumbent")
        return Solution("infeasible", backend="bb", nodes=nodes, solve_time=elapsed)
    gap = max(0.0, (inc_f - best_bound) / max(1.0, abs(inc_f))) if heap or status else 0.0
    obj = sign * inc_f + inst.objective_constant
    final = status or ("optimal" if gap <= limits.mip_gap else "feasible")
    return Solution(final, obj, to_values(inst, inc_x), gap, elapsed, nodes, "bb")


def enumerate_oracle(inst: MilpInstance, guard: int = ORACLE_BINARY_GUARD) -> Solution:
    """Try every combination of the free binaries and solve the remaining LP.

    Combinations are walked depth-first; a partial assignment whose implied
    bounds cross (interval propagation) is provably infeasible and its whole
    subtree is skipped. No pruning by objective bound is done.
    """
    t0 = time.perf_counter()
    if not inst.variables:
        return empty_solution(inst, "oracle")
    free = inst.free_binaries()
    if len(free) > guard:
        raise SolverError(f"{len(free)} free binaries exceed the oracle guard of {guard}")
    arrays = inst.to_arrays()
    c, A, rlb, rub, lb0, ub0, integ = arrays
    prop = Propagator(A, rlb, rub, integ)
    sign = -1.0 if inst.sense == "max" else 1.0
    best_x, best_f = None, math.inf
    lps = 0
    unbounded = False
    stack = [(0, lb0.copy(), ub0.copy())]
    while stack and not unbounded:
        k, lb, ub = stack.pop()
        if prop.tighten(lb, ub) is None:
            continue
        if k == len(free):
            lps += 1
            res = lp_solve(c, A, rlb, rub, lb, ub)
            if res.status == "unbounded":
                unbounded = True
            elif res.status == "optimal" and res.fun < best_f - 1e-12 * max(1.0, abs(res.fun)):
                best_x, best_f = res.x, res.fun
            continue
        j = free[k]
        for val in (1.0, 0.0):  # pushed in reverse so 0 is explored first
            lb2, ub2 = lb.copy(), ub.copy()
            lb2[j] = ub2[j] = val
            stack.append((k + 1, lb2, ub2))
    elapsed = time.perf_counter() - t0
    if unbounded:
        return Solution("unbounded", backend="oracle", nodes=lps, solve_time=elapsed)
    if best_x is None:
        return Solution("infeasible", backend="oracle", nodes=lps, solve_time=elapsed)
    x = polish(inst, best_x, arrays)
    if x is None:
        x = best_x
    return Solution("optimal", sign * float(c @ x) + inst.objective_constant, to_values(inst, x),
                    0.0, elapsed, lps, "oracle")


class Propagator:
    """Multi-pass interval bound tightening over the rows of ``A``.

    Bounds are only declared crossed beyond ``tol`` (relative), so a
    numerically tight but feasible assignment is never discarded.
    """

    def __init__(self, A, rlb, rub, integ, tol: float = 1e-6, rounds: int = 25):
        coo = sparse.coo_matrix(A)
        self.r, self.j, self.a = coo.row, coo.col, coo.data
        self.m = A.shape[0]
        self.rlb, self.rub = np.asarray(rlb, float), np.asarray(rub, float)
        self.int_mask = np.asarray(integ) > 0
        self.tol, self.rounds = tol, rounds

    def _residual(self, contrib):
        fin = np.isfinite(contrib)
        total = np.bincount(self.r, weights=np.where(fin, contrib, 0.0), minlength=self.m)
        n_inf = np.bincount(self.r, weights=(~fin).astype(float), minlength=self.m)
        rr = self.r
        return np.where(fin, np.where(n_inf[rr] == 0, total[rr] - np.where(fin, contrib, 0.0), np.nan),
                        np.where(n_inf[rr] == 1, total[rr], np.nan))

    def tighten(self, lb: np.ndarray, ub: np.ndarray):
        """Tighten ``lb``/``ub`` in place; None when they provably cross."""
        r, j, a = self.r, self.j, self.a
        pos = a > 0
        with np.errstate(invalid="ignore", over="ignore"):
            for _ in range(self.rounds):
                lo_c = np.where(pos, a * lb[j], a * ub[j])
                hi_c = np.where(pos, a * ub[j], a * lb[j])
                res_min = self._residual(lo_c)   # NaN: unbounded below
                res_max = self._residual(hi_c)   # NaN: unbounded above
                from_ub = (self.rub[r] - res_min) / a   # valid where rub finite, res_min finite
                from_lb = (self.rlb[r] - res_max) / a
                ok_ub = np.isfinite(from_ub)
                ok_lb = np.isfinite(from_lb)
                cand_ub = np.full(len(lb), np.inf)
                cand_lb = np.full(len(lb), -np.inf)
                # a > 0: rub gives an upper bound, rlb a lower bound; a < 0 swaps them.
                np.minimum.at(cand_ub, j[pos & ok_ub], from_ub[pos & ok_ub])
                np.maximum.at(cand_lb, j[pos & ok_lb], from_lb[pos & ok_lb])
                np.maximum.at(cand_lb, j[~pos & ok_ub], from_ub[~pos & ok_ub])
                np.minimum.at(cand_ub, j[~pos & ok_lb], from_lb[~pos & ok_lb])
                scale = 1.0 + np.maximum(np.abs(np.where(np.isfinite(cand_lb), cand_lb, 0.0)),
                                         np.abs(np.where(np.isfinite(cand_ub), cand_ub, 0.0)))
                cand_ub = cand_ub + self.tol * scale
                cand_lb = cand_lb - self.tol * scale
                cand_ub[self.int_mask] = np.floor(cand_ub[self.int_mask])
                cand_lb[self.int_mask] = np.ceil(cand_lb[self.int_mask])
                new_ub = np.minimum(ub, cand_ub)
                new_lb = np.maximum(lb, cand_lb)
                if np.any(new_lb > new_ub):
                    return None
                changed = np.any(new_ub < ub - 1e-7 * (1 + np.abs(ub))) or \
                    np.any(new_lb > lb + 1e-7 * (1 + np.abs(lb)))
                lb[:], ub[:] = new_lb, new_ub
                if not changed:
                    break
        return lb, ub
