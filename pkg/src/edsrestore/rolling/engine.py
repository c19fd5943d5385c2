"""Universal-clock rolling loop: events, IDP, per-CCP scheduling, plant execution."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ..consensus import CcpView, IdpConfig, run_idp
from ..grid import Network, NetworkState, TimeGrid
from ..milp import MilpConfig, Schedule, build_model, integer_fields, publish_fields
from ..solvers import Solution, SolverError, SolverLimits, solve
from .events import Event, World, inject_events, isolated_dg_autostart

log = logging.getLogger(__name__)

SOC_CHECK_TOL = 1e-6


@dataclass(frozen=True)
class EndCondition:
    end_min: float | None = None       # default: t0 + horizon
    full_restoration: bool = False
    external_supply: bool = True


@dataclass
class CcpRecord:
    ccp_id: int
    members: list[int]
    scheduler: int | None
    status: str                        # solved / idle / extended / held
    schedule: Schedule | None = None
    solution_status: str = ""
    message: str = ""
    view: CcpView | None = None
    network: Network | None = None
    grid: TimeGrid | None = None
    config: MilpConfig | None = None


@dataclass
class MomentRecord:
    t_c: float
    rounds: int
    elapsed_ms: float
    converged: bool
    agents: list[int]
    trace: np.ndarray
    ccps: list[CcpRecord] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    network: Network | None = None


@dataclass(frozen=True)
class ReportRow:
    t_c: float
    sum_pg: float
    sum_pl1: float
    sum_pl2: float
    sum_pl3: float

    @property
    def total_load(self) -> float:
        return self.sum_pl1 + self.sum_pl2 + self.sum_pl3

    @classmethod
    def of(cls, t: float, state: NetworkState) -> "ReportRow":
        tot = state.totals()
        return cls(t, tot["sum_pg"], tot["sum_pl1"], tot["sum_pl2"], tot["sum_pl3"])


@dataclass
class Timeline:
    t0: float
    step: float
    control_gap: float
    horizon: float
    weights: tuple[float, float, float] = (1000.0, 100.0, 10.0)
    moments: list[MomentRecord] = field(default_factory=list)
    steps: list[tuple[float, NetworkState]] = field(default_factory=list)
    end_time: float = 0.0
    stop_reason: str = ""

    def state_at(self, t: float) -> NetworkState:
        for ts, st in self.steps:
            if abs(ts - t) < 1e-9:
                return st
        raise KeyError(f"no realized state at t={t}")

    def rows(self) -> list[ReportRow]:
        """One aggregate row per scheduling moment plus the end of the run."""
        out = [ReportRow.of(m.t_c, self.state_at(m.t_c)) for m in self.moments]
        if self.steps and (not self.moments or self.end_time > self.moments[-1].t_c + 1e-9):
            out.append(ReportRow.of(self.end_time, self.state_at(self.end_time)))
        return out

    def step_rows(self) -> list[ReportRow]:
        return [ReportRow.of(t, st) for t, st in self.steps]

    def consensus_rows(self) -> list[tuple[float, int, float]]:
        return [(m.t_c, m.rounds, m.elapsed_ms) for m in self.moments]

    def weighted_load(self, state: NetworkState) -> float:
        tot = state.totals()
        return sum(w * tot[f"sum_pl{c + 1}"] for c, w in enumerate(self.weights))


def _overlay(base: NetworkState, sched: Schedule, n: int, prev: NetworkState | None,
             network: Network) -> NetworkState:
    buses = sched.meta.get("buses", [])
    feeders = sched.meta.get("feeders", [])
    v, w = dict(base.v), dict(base.w)
    pl, ql = dict(base.pl), dict(base.ql)
    pg, qg, pdg, soc = dict(base.p_g), dict(base.q_g), dict(base.p_dg), dict(base.soc)
    S = sched.get
    for b in buses:
        v[b] = int(round(S("v", b, n)))
        if prev is not None:
            v[b] = max(v[b], int(prev.v.get(b, 0)))
        pl[b] = tuple(S(f"PL{c}", b, n) for c in (1, 2, 3))
        ql[b] = tuple(S(f"QL{c}", b, n) for c in (1, 2, 3))
        pg[b] = S("PG", b, n)
        qg[b] = S("QG", b, n)
        if sched.has("PDG", b):
            pdg[b] = S("PDG", b, n)
        if sched.has("SoC", b):
            es = network.ess[b]
            if prev is None:
                soc[b] = base.soc.get(b, S("SoC", b, n))
            else:
                delta = (S("Pch", b, n - 1) * es.eta_ch - S("Pdis", b, n - 1) * es.eta_dis) \
                    * (sched.step / 60.0) / es.capacity
                soc[b] = prev.soc[b] + delta
                if abs(soc[b] - S("SoC", b, n)) > SOC_CHECK_TOL:
                    log.warning("SoC replay at bus %s differs from schedule by %.3g",
                                b, soc[b] - S("SoC", b, n))
    for key in feeders:
        w[key] = int(round(S("w", key, n)))
        if prev is not None:
            w[key] = max(w[key], int(prev.w.get(key, 0)))
    return replace(base, time=sched.moment(n), v=v, w=w, pl=pl, ql=ql, p_g=pg, q_g=qg,
                   p_dg=pdg, soc=soc)


def _overlay_series(bases: list[NetworkState], sched: Schedule, window: range,
                    network: Network) -> list[NetworkState]:
    if len(window) and (window.start < 0 or window[-1] >= sched.n_intervals):
        raise ValueError(f"window {window.start}..{window.stop - 1} exceeds schedule coverage "
                         f"0..{sched.n_intervals - 1}")
    out: list[NetworkState] = []
    for k, n in enumerate(window):
        prev = out[-1] if out else None
        out.append(_overlay(bases[k], sched, n, prev, network))
    return out


def apply_schedule(state: NetworkState, schedule: Schedule, window: range,
                   network: Network) -> list[NetworkState]:
    """Realized states for the schedule intervals in ``window``.

    Control and state values are copied; SoC is replayed from charge and
    discharge powers; energized buses and feeders stay energized.
    """
    return _overlay_series([state] * len(window), schedule, window, network)


def _shift(sched: Schedule, offset: int, length: int, t_c: float) -> Schedule:
    """Previous schedule re-indexed from ``offset``, holding its last interval."""
    idx = [min(offset + k, sched.n_intervals - 1) for k in range(length)]
    series = {f: {e: [row[i] for i in idx] for e, row in rows.items()} for f, rows in sched.series.items()}
    # Hold charge/discharge at zero once the old schedule has run out.
    for fam in ("Pch", "Pdis"):
        for e, row in series.get(fam, {}).items():
            for k, i in enumerate(idx):
                if offset + k >= sched.n_intervals - 1:
                    row[k] = 0.0
    return Schedule(t_c, sched.step, length, series, sched.objective, "extended", sched.ccp_id,
                    list(sched.members), dict(sched.meta))


def _is_fully_restored(network: Network, state: NetworkState) -> bool:
    for b, bus in network.buses.items():
        got = state.restored(b)
        if any(g < p - 1e-6 for g, p in zip(got, bus.load_p)):
            return False
    return True


def run(scenario, grid: TimeGrid, idp_config: IdpConfig = IdpConfig(),
        milp_config: MilpConfig = MilpConfig(), end: EndCondition = EndCondition(),
        backend: str = "builtin", limits: SolverLimits = SolverLimits(),
        command: str | None = None) -> Timeline:
    """Roll the restoration from ``grid.t_c`` until the end condition holds."""
    world = World(scenario.network, replace(scenario.initial_state, time=grid.t_c), scenario.comm)
    pending = sorted(scenario.events, key=lambda e: e.time)
    t0 = grid.t_c
    end_t = end.end_min if end.end_min is not None else t0 + grid.horizon
    tl = Timeline(t0, grid.step, grid.control_gap, grid.horizon, tuple(milp_config.weights))
    last_sched: dict[int, Schedule] = {}
    t_c = t0
    while t_c < end_t - 1e-9:
        due = [e for e in pending if e.time <= t_c + 1e-9]
        pending = [e for e in pending if e.time > t_c + 1e-9]
        inject_events(world, due, t_c)
        if end.external_supply and world.external_supply:
            tl.stop_reason = f"external supply at {t_c}"
            break
        isolated_dg_autostart(world, t_c)

        comm = world.comm
        local = {a: publish_fields(world.network, world.state, a) for a in comm.available}
        idp = run_idp(comm, local, idp_config, integer_fields(world.network))
        moment = MomentRecord(t_c, idp.rounds, idp.elapsed_ms, idp.converged, list(idp.agents),
                              idp.trace, events=due, network=world.network)
        if not idp.converged:
            moment.warnings.append(f"IDP did not converge: {idp.message}")

        g = grid.at(t_c)
        n_win = int(round(min(grid.control_gap, end_t - t_c) / grid.step))
        states = [replace(world.state, time=t_c + k * grid.step) for k in range(n_win + 1)]
        ready = dict(world.state.dg_ready)

        for members in idp.ccps():
            cid = members[0]
            caps = [b for b in members if b in world.network.dgs or b in world.network.ess]
            rec = CcpRecord(cid, list(members), caps[0] if caps else None, "idle")
            moment.ccps.append(rec)
            if rec.scheduler is None or not idp.converged:
                if not idp.converged:
                    rec.status, rec.message = "held", "IDP did not converge"
                continue
            for b in members:
                if b in world.network.dgs and ready.get(b) is None:
                    ready[b] = t_c
            view = idp.views[rec.scheduler]
            rec.view, rec.network, rec.grid, rec.config = view, world.network, g, milp_config
            sched = _schedule(view, world.network, g, milp_config, backend, limits, command, rec)
            if sched is None:
                prev = last_sched.get(rec.scheduler)
                if prev is not None:
                    offset = int(round((t_c - prev.t_c) / grid.step))
                    sched = _shift(prev, offset, g.n_intervals, t_c)
                    rec.status = "extended"
                    moment.warnings.append(f"CCP {cid}: solver failed, previous schedule extended")
                else:
                    rec.status = "held"
                    moment.warnings.append(f"CCP {cid}: solver failed, state held")
                    continue
            else:
                rec.status = "solved"
                last_sched[rec.scheduler] = sched
            sched.ccp_id = cid
            rec.schedule = sched
            states = _overlay_series(states, sched, range(0, n_win + 1), world.network)

        states = [replace(s, dg_ready=ready) for s in states]
        for k in range(n_win):
            tl.steps.append((t_c + k * grid.step, states[k]))
        tl.moments.append(moment)
        world.state = states[n_win]
        t_c = t_c + n_win * grid.step
        if end.full_restoration and _is_fully_restored(world.network, world.state):
            tl.stop_reason = f"full restoration at {t_c}"
            break
    tl.steps.append((t_c, replace(world.state, time=t_c)))
    tl.end_time = t_c
    if not tl.stop_reason:
        tl.stop_reason = f"end of run at {t_c}"
    return tl


def _schedule(view, network, grid, config, backend, limits, command, rec: CcpRecord) -> Schedule | None:
    for attempt, cfg in enumerate((config, replace(config, seed_pg_band=1e9))):
        inst = build_model(view, network, grid, cfg)
        try:
            sol: Solution = solve(inst, limits, backend, command)
        except SolverError as exc:
            rec.message = str(exc)
            log.warning("CCP %s: %s", rec.ccp_id, exc)
            return None
        rec.solution_status = sol.status
        if sol.has_values:
            if attempt:
                rec.message = "generation seeding relaxed"
                rec.config = cfg
            return Schedule.from_solution(inst, sol.values, sol.objective, sol.status, rec.ccp_id)
        rec.message = f"solver status {sol.status}"
    return None
