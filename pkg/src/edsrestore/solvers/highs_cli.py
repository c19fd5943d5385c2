"""Bundled solver runner for the external bridge.

Usage: python -m edsrestore.solvers.highs_cli MODEL.lp SOLUTION.sol [--time-limit S] [--mip-gap G]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .base import SolverLimits
from .external import write_solution
from .highs import solve_highs
from .lpformat import parse_lp


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="edsrestore-highs")
    ap.add_argument("lp")
    ap.add_argument("sol")
    ap.add_argument("--time-limit", type=float, default=None)
    ap.add_argument("--mip-gap", type=float, default=1e-6)
    args = ap.parse_args(argv)
    inst = parse_lp(Path(args.lp).read_text())
    sol = solve_highs(inst, SolverLimits(time_limit=args.time_limit, mip_gap=args.mip_gap))
    write_solution(args.sol, sol)
    return 0


if __name__ == "__main__":
    sys.exit(main())
