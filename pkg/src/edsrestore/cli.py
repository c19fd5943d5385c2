"""Command-line entry point: ``edsrestore run|idp|solve-ccp|verify|compare``.

Exit codes: 0 success, 1 input error, 2 solver failure, 3 verification violations.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("edsrestore")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="edsrestore", description="Rolling multi-agent restoration scheduling.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="roll the restoration over a scenario")
    r.add_argument("--scenario", required=True, help="bundled scenario name or JSON path")
    r.add_argument("--horizon-min", type=int)
    r.add_argument("--control-min", type=int)
    r.add_argument("--step-min", type=int)
    r.add_argument("--end-min", type=int)
    r.add_argument("--solver", default="builtin", choices=("builtin", "external", "bb", "highs"))
    r.add_argument("--solver-cmd", help="external solver template with {lp} and {sol}")
    r.add_argument("--out", required=True, help="report directory")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--no-figures", action="store_true")

    i = sub.add_parser("idp", help="run the information discovery process once")
    i.add_argument("--scenario", required=True)
    i.add_argument("--at-min", type=float, default=0.0)
    i.add_argument("--tol", type=float)
    i.add_argument("--max-iter", type=int)
    i.add_argument("--out")

    s = sub.add_parser("solve-ccp", help="build and solve one CCP's model")
    s.add_argument("--scenario", required=True)
    s.add_argument("--at-min", type=float, default=0.0)
    s.add_argument("--ccp", type=int, required=True, help="smallest member id of the CCP")
    s.add_argument("--export-lp", help="write the model in LP format here")
    s.add_argument("--solver", default="builtin", choices=("builtin", "external", "bb", "highs", "none"))
    s.add_argument("--solver-cmd")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="write the schedule JSON here")

    v = sub.add_parser("verify", help="re-check every schedule of a run directory")
    v.add_argument("--result", required=True)

    c = sub.add_parser("compare", help="compare restored load of two runs at one moment")
    c.add_argument("--result", action="append", required=True)
    c.add_argument("--at-min", type=float, required=True)
    c.add_argument("--out", help="write the comparison block here")
    return p


def _scenario(name: str):
    from .scenario import ScenarioError, resolve_scenario
    try:
        return resolve_scenario(name)
    except ScenarioError as exc:
        raise InputError(str(exc)) from None


def cmd_run(a) -> int:
    from .pipeline import realized_radiality, run_scenario, verify_timeline
    from .reports import emit_reports
    sc = _scenario(a.scenario)
    try:
        tl = run_scenario(sc, horizon=a.horizon_min, control_gap=a.control_min, step=a.step_min,
                          end_min=a.end_min, backend=a.solver, command=a.solver_cmd, seed=a.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    emit_reports(tl, a.out, sc.name, figures=not a.no_figures)
    for r in tl.rows():
        print(f"t={r.t_c:g} sum_pg={r.sum_pg:.1f} pl1={r.sum_pl1:.1f} pl2={r.sum_pl2:.1f} "
              f"pl3={r.sum_pl3:.1f}")
    code = EXIT_OK
    for m in tl.moments:
        for w in m.warnings:
            _err(f"t={m.t_c:g}: {w}")
    if any(r.status in ("extended", "held") and r.scheduler is not None
           for m in tl.moments for r in m.ccps):
        code = EXIT_SOLVER
    bad = [(t, c, rep) for t, c, rep in verify_timeline(tl) if not rep.ok]
    for t, c, rep in bad:
        _err(f"t={t:g} ccp {c}: {rep}")
    for t, msg in realized_radiality(tl):
        _err(f"t={t:g}: realized state not radial ({msg})")
        bad.append((t, None, None))
    if bad:
        code = EXIT_VERIFY
    return code


def cmd_idp(a) -> int:
    from dataclasses import replace
    from .consensus import write_trace_csv
    from .pipeline import idp_at
    sc = _scenario(a.scenario)
    cfg = sc.config.idp_config()
    try:
        if a.tol is not None:
            cfg = replace(cfg, tol=a.tol)
        if a.max_iter is not None:
            cfg = replace(cfg, k_max=a.max_iter)
        _, run = idp_at(sc, a.at_min, cfg)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    doc = {"t_c": a.at_min, "rounds": run.rounds, "elapsed_ms": run.elapsed_ms,
           "converged": run.converged, "ccps": run.ccps()}
    print(json.dumps(doc))
    if a.out:
        out = Path(a.out)
        out.mkdir(parents=True, exist_ok=True)
        from .reports import tlabel
        write_trace_csv(run, out / f"consensus_trace_{tlabel(a.at_min)}.csv")
        (out / f"ccp_{tlabel(a.at_min)}.json").write_text(json.dumps(doc, indent=1) + "\n")
    if not run.converged:
        _err(run.message)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_solve_ccp(a) -> int:
    from .milp import build_model
    from .pipeline import idp_at, solve_ccp
    from .solvers import SolverError, export_lp
    sc = _scenario(a.scenario)
    if a.solver == "none":
        world, idp = idp_at(sc, a.at_min)
        match = [m for m in idp.ccps() if m[0] == a.ccp]
        if not match:
            raise InputError(f"no CCP with smallest member {a.ccp}")
        caps = [b for b in match[0] if b in world.network.dgs or b in world.network.ess]
        if not caps:
            raise InputError(f"CCP {a.ccp} has no agent able to schedule")
        inst = build_model(idp.views[caps[0]], world.network, sc.config.time_grid().at(a.at_min),
                           sc.config.milp_config())
        if a.export_lp:
            Path(a.export_lp).write_text(export_lp(inst))
        print(json.dumps({"variables": len(inst.variables), "rows": len(inst.constraints),
                          "free_binaries": len(inst.free_binaries())}))
        return EXIT_OK
    try:
        res = solve_ccp(sc, a.at_min, a.ccp, a.solver, a.solver_cmd, a.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    except SolverError as exc:
        _err(str(exc))
        return EXIT_SOLVER
    if a.export_lp:
        Path(a.export_lp).write_text(export_lp(res.instance))
    sol = res.solution
    print(json.dumps({"ccp": a.ccp, "members": res.members, "scheduler": res.scheduler,
                      "status": sol.status, "objective": sol.objective, "backend": sol.backend,
                      "free_binaries": len(res.instance.free_binaries())}))
    if res.schedule is None:
        _err(f"solver status {sol.status}: {sol.message}")
        return EXIT_SOLVER
    if a.out:
        Path(a.out).write_text(res.schedule.to_json() + "\n")
    if not res.report.ok:
        _err(str(res.report))
        return EXIT_VERIFY
    return EXIT_OK


def cmd_verify(a) -> int:
    from .milp import Tolerances, verify_schedule
    from .reports import load_schedule_document
    root = Path(a.result)
    if not root.is_dir():
        raise InputError(f"{root} is not a directory")
    files = sorted(root.glob("schedule_*.json"))
    if not files:
        raise InputError(f"no schedule files in {root}")
    bad = 0
    for f in files:
        sched, view, net, grid, cfg = load_schedule_document(f)
        if view is None:
            _err(f"{f.name}: no verification context; skipped")
            continue
        rep = verify_schedule(sched, view, net, grid, Tolerances(), cfg)
        print(f"{f.name}: {rep}")
        if not rep.ok:
            bad += 1
            _err(f"{f.name}: {rep}")
    return EXIT_VERIFY if bad else EXIT_OK


def cmd_compare(a) -> int:
    from .reports import comparison_block, read_step_rows, row_at
    if len(a.result) != 2:
        raise InputError("compare needs exactly two --result directories")
    runs = []
    for d in a.result:
        root = Path(d)
        try:
            summary = json.loads((root / "summary.json").read_text())
            row = row_at(read_step_rows(root), a.at_min)
        except (OSError, KeyError, ValueError) as exc:
            raise InputError(f"{root}: {exc}") from None
        runs.append((str(root), summary.get("control_gap"), row))
    block = comparison_block(runs, a.at_min)
    text = json.dumps(block, indent=1, sort_keys=True)
    print(text)
    if a.out:
        Path(a.out).write_text(text + "\n")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "idp": cmd_idp, "solve-ccp": cmd_solve_ccp, "verify": cmd_verify,
            "compare": cmd_compare}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputError as exc:
        _err(str(exc))
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        _err(f"error: {exc}")
        return EXIT_INPUT
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
