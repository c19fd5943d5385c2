"""Process-level bridge: write an LP file, run a solver command, read its solution.

Solution file format: a first line ``status <word>`` followed by one
``<name> <value>`` line per variable.  Lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import math
import os
import shlex
import subprocess
import sys
import tempfile
import time
from pathlib import Path

from ..milp.instance import MilpInstance
from .base import STATUSES, Solution, SolverError, SolverLimits
from .lpformat import export_lp

ENV_VAR = "EDSRESTORE_SOLVER_CMD"
DEFAULT_CMD = f"{shlex.quote(sys.executable)} -m edsrestore.solvers.highs_cli {{lp}} {{sol}}"


def solver_command(template: str | None = None) -> str:
    return os.environ.get(ENV_VAR) or template or DEFAULT_CMD


def write_solution(path: str | Path, sol: Solution) -> None:
    lines = [f"status {sol.status}", f"# objective {sol.objective!r}"]
    lines += [f"{k} {v!r}" for k, v in sol.values.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_solution(path: str | Path) -> tuple[str, dict[str, float]]:
    status, values = None, {}
    for line in Path(path).read_text().splitlines():
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        key, _, val = s.partition(" ")
        if status is None and key == "status":
            status = val.strip().lower()
            continue
        values[key] = float(val)
    if status not in STATUSES:
        raise SolverError(f"solution file has no valid status line (got {status!r})")
    return status, values


def solve_external(inst: MilpInstance, limits: SolverLimits = SolverLimits(),
                   template: str | None = None) -> Solution:
    cmd = solver_command(template)
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory(prefix="edsrestore-") as tmp:
        lp = Path(tmp) / "model.lp"
        sol = Path(tmp) / "model.sol"
        lp.write_text(export_lp(inst))
        argv = [tok.format(lp=str(lp), sol=str(sol)) for tok in shlex.split(cmd)]
        if limits.time_limit is not None:
            timeout = limits.time_limit * 2 + 30
        else:
            timeout = None
        env = dict(os.environ)
        src = str(Path(__file__).resolve().parents[2])
        env["PYTHONPATH"] = src + (os.pathsep + env["PYTHONPATH"] if env.get("PYTHONPATH") else "")
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout, env=env)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise SolverError(f"external solver failed to run: {exc}") from exc
        if proc.returncode != 0 or not sol.exists():
            raise SolverError(f"external solver exited with {proc.returncode}: {proc.stderr.strip()}")
        status, values = read_solution(sol)
    elapsed = time.perf_counter() - t0
    if status not in ("optimal", "feasible", "limit") or not values:
        return Solution(status, backend="external", solve_time=elapsed)
    missing = [v.name for v in inst.variables if v.name not in values]
    if missing:
        raise SolverError(f"solution file misses {len(missing)} variables, e.g. {missing[0]}")
    obj = inst.evaluate(values)
    return Solution(status, obj, {v.name: values[v.name] for v in inst.variables},
                    0.0 if status == "optimal" else math.inf, elapsed, 0, "external")
