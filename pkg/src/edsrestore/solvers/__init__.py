"""Uniform solve interface over the built-in and external backends."""

from __future__ import annotations

from ..milp.instance import MilpInstance
from .base import Solution, SolverError, SolverLimits, lp_solve
from .bb import BB_BINARY_GUARD, enumerate_oracle, solve_bb
from .external import read_solution, solve_external, solver_command, write_solution
from .highs import solve_highs
from .lpformat import export_lp, parse_lp

BACKENDS = ("builtin", "bb", "highs", "external")


def solve(inst: MilpInstance, limits: SolverLimits = SolverLimits(), backend: str = "builtin",
          command: str | None = None) -> Solution:
    """Solve ``inst``.

    ``builtin`` runs the branch-and-bound when the free binaries fit its guard
    and in-process HiGHS otherwise.
    """
    problems = inst.problems()
    if problems:
        raise ValueError("malformed instance: " + "; ".join(problems[:5]))
    if backend == "builtin":
        backend = "bb" if len(inst.free_binaries()) <= BB_BINARY_GUARD else "highs"
    if backend == "bb":
        return solve_bb(inst, limits)
    if backend == "highs":
        return solve_highs(inst, limits)
    if backend == "external":
        return solve_external(inst, limits, command)
    raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


__all__ = [
    "BACKENDS", "Solution", "SolverError", "SolverLimits", "enumerate_oracle", "export_lp",
    "lp_solve", "parse_lp", "read_solution", "solve", "solve_bb", "solve_external", "solve_highs",
    "solver_command", "write_solution",
]
