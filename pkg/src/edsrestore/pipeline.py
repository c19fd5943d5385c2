"""Glue between scenarios, the rolling engine, the solvers and verification."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .consensus import IdpConfig, IdpRun, run_idp
from .grid import is_radial_islanding
from .milp import (MilpInstance, Schedule, Tolerances, VerificationReport, build_model,
                   integer_fields, publish_fields, verify_schedule)
from .rolling import EndCondition, Timeline, World, inject_events, isolated_dg_autostart, run
from .scenario import Scenario
from .solvers import Solution, solve


def run_scenario(scenario: Scenario, *, horizon: float | None = None, control_gap: float | None = None,
                 step: float | None = None, end_min: float | None = None, backend: str = "builtin",
                 command: str | None = None, seed: int = 0,
                 full_restoration: bool = False) -> Timeline:
    cfg = scenario.config
    grid = cfg.time_grid(horizon=horizon, control_gap=control_gap, step=step)
    return run(scenario, grid, cfg.idp_config(), cfg.milp_config(),
               EndCondition(end_min=end_min, full_restoration=full_restoration),
               backend=backend, limits=cfg.solver_limits(seed), command=command)


def world_at(scenario: Scenario, t: float) -> World:
    """Initial state with every event up to ``t`` applied (no scheduling in between)."""
    world = World(scenario.network, replace(scenario.initial_state, time=t), scenario.comm)
    inject_events(world, [e for e in scenario.events if e.time <= t + 1e-9], t)
    isolated_dg_autostart(world, t)
    return world


def idp_at(scenario: Scenario, t: float, config: IdpConfig | None = None) -> tuple[World, IdpRun]:
    world = world_at(scenario, t)
    local = {a: publish_fields(world.network, world.state, a) for a in world.comm.available}
    return world, run_idp(world.comm, local, config or scenario.config.idp_config(),
                          integer_fields(world.network))


@dataclass
class CcpSolve:
    members: list[int]
    scheduler: int
    instance: MilpInstance
    solution: Solution
    schedule: Schedule | None
    report: VerificationReport | None


def solve_ccp(scenario: Scenario, t: float, ccp: int, backend: str = "builtin",
              command: str | None = None, seed: int = 0) -> CcpSolve:
    """Build and solve the model of the CCP whose smallest member is ``ccp``."""
    world, idp = idp_at(scenario, t)
    match = [m for m in idp.ccps() if m[0] == ccp]
    if not match:
        raise ValueError(f"no CCP with smallest member {ccp} at t={t}; "
                         f"found {[m[0] for m in idp.ccps()]}")
    members = match[0]
    caps = [b for b in members if b in world.network.dgs or b in world.network.ess]
    if not caps:
        raise ValueError(f"CCP {ccp} has no agent able to schedule")
    view = idp.views[caps[0]]
    grid = scenario.config.time_grid().at(t)
    cfg = scenario.config.milp_config()
    inst = build_model(view, world.network, grid, cfg)
    sol = solve(inst, scenario.config.solver_limits(seed), backend, command)
    if not sol.has_values:
        return CcpSolve(members, caps[0], inst, sol, None, None)
    sched = Schedule.from_solution(inst, sol.values, sol.objective, sol.status, ccp)
    return CcpSolve(members, caps[0], inst, sol, sched,
                    verify_schedule(sched, view, world.network, grid, Tolerances(), cfg))


def verify_timeline(timeline: Timeline) -> list[tuple[float, int, VerificationReport]]:
    """Verify every freshly solved schedule of a run."""
    out = []
    for m in timeline.moments:
        for r in m.ccps:
            if r.schedule is not None and r.status == "solved" and r.view is not None:
                out.append((m.t_c, r.ccp_id, verify_schedule(r.schedule, r.view, r.network, r.grid,
                                                              Tolerances(), r.config)))
    return out


def realized_radiality(timeline: Timeline) -> list[tuple[float, str]]:
    """Realized steps whose energized network is not a forest of source-rooted trees."""
    bad = []
    for t, st in timeline.steps:
        nets = [m.network for m in timeline.moments if m.t_c <= t + 1e-9 and m.network is not None]
        if not nets:
            continue
        rep = is_radial_islanding(nets[-1], st)
        if not rep.ok:
            bad.append((t, f"clause {rep.clause}: {rep.detail}"))
    return bad
