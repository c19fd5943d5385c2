"""Scenario bundle: grid, initial state, comm graph, events and run settings."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from ..consensus import CommGraph, IdpConfig
from ..grid import Network, NetworkState, TimeGrid, validate_network
from ..milp import MilpConfig
from ..rolling.events import Event
from ..solvers import SolverLimits


@dataclass(frozen=True)
class ScenarioConfig:
    weights: tuple[float, float, float] = (1000.0, 100.0, 10.0)
    lambda_min: float = 0.1
    segments: int = 6
    pwl_selectors: bool = True
    es_q_mode: str = "table_binary"
    big_m_policy: str = "tight"
    flow_bound: str = "dimensional"
    idp_tol: float = 1e-10
    idp_k_max: int = 100_000
    idp_latency_ms: float = 1.0
    t0: float = 0.0
    horizon: float = 120.0
    step: float = 5.0
    control_gap: float = 30.0
    solver_time_limit: float | None = None
    solver_mip_gap: float = 1e-6

    def time_grid(self, **overrides) -> TimeGrid:
        kw = dict(t_c=self.t0, horizon=self.horizon, step=self.step, control_gap=self.control_gap)
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return TimeGrid(**kw)

    def idp_config(self) -> IdpConfig:
        return IdpConfig(self.idp_tol, self.idp_k_max, self.idp_latency_ms)

    def milp_config(self) -> MilpConfig:
        return MilpConfig(weights=tuple(self.weights), segments=self.segments,
                          pwl_selectors=self.pwl_selectors, big_m_policy=self.big_m_policy,
                          lambda_min=self.lambda_min, es_q_mode=self.es_q_mode,
                          flow_bound=self.flow_bound)

    def solver_limits(self, seed: int = 0) -> SolverLimits:
        return SolverLimits(time_limit=self.solver_time_limit, mip_gap=self.solver_mip_gap, seed=seed)

    def problems(self) -> list[str]:
        out = []
        for label, make in (("time grid", self.time_grid), ("IDP", self.idp_config),
                            ("MILP", self.milp_config)):
            try:
                make()
            except ValueError as exc:
                out.append(f"config: {label}: {exc}")
        if self.solver_time_limit is not None and not self.solver_time_limit > 0:
            out.append("config: solver_time_limit must be positive")
        if not 0 < self.solver_mip_gap < 1:
            out.append("config: solver_mip_gap must lie in (0, 1)")
        return out

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass(frozen=True)
class Scenario:
    name: str
    network: Network
    initial_state: NetworkState
    comm: CommGraph
    events: tuple[Event, ...] = ()
    config: ScenarioConfig = field(default_factory=ScenarioConfig)
    description: str = ""

    def problems(self) -> list[str]:
        """Referential integrity across sections plus every section's own checks."""
        net, st = self.network, self.initial_state
        out = [f"network: {m}" for m in validate_network(net)]
        fkeys = {f.key for f in net.feeders}
        for label, mapping in (("avail_bus", st.avail_bus), ("v", st.v), ("pl", st.pl),
                               ("ql", st.ql), ("p_g", st.p_g), ("q_g", st.q_g)):
            for b in mapping:
                if b not in net.buses:
                    out.append(f"state.{label}: unknown bus {b}")
        for label, mapping in (("avail_feeder", st.avail_feeder), ("w", st.w)):
            for k in mapping:
                if k not in fkeys:
                    out.append(f"state.{label}: unknown feeder {k}")
        for b in st.p_dg:
            if b not in net.dgs:
                out.append(f"state.p_dg: bus {b} hosts no DG")
        for b in st.dg_ready:
            if b not in net.dgs:
                out.append(f"state.dg_start: bus {b} hosts no DG")
        for b, s in st.soc.items():
            if b not in net.ess:
                out.append(f"state.soc: bus {b} hosts no ES")
            elif not net.ess[b].soc_min <= s <= net.ess[b].soc_max:
                out.append(f"state.soc: bus {b} SoC {s} outside its bounds")
        for b in net.ess:
            if b not in st.soc:
                out.append(f"state.soc: ES at bus {b} has no initial SoC")
        for a in self.comm.agents:
            if a not in net.buses:
                out.append(f"comm: agent {a} has no bus")
        for k, ev in enumerate(self.events):
            p = ev.payload
            where = f"events[{k}] ({ev.kind} at {ev.time})"
            if ev.kind in ("dg_discovered", "es_discovered", "bus_repaired") and int(p["bus"]) not in net.buses:
                out.append(f"{where}: unknown bus {p['bus']}")
            if ev.kind == "feeder_repaired" and str(p["feeder"]) not in fkeys:
                out.append(f"{where}: unknown feeder {p['feeder']}")
            if ev.kind == "agent_restored":
                for a in p["agents"]:
                    if int(a) not in self.comm.agents:
                        out.append(f"{where}: unknown agent {a}")
            if ev.kind == "link_restored":
                for a in (p["a"], p["b"]):
                    if int(a) not in self.comm.agents:
                        out.append(f"{where}: unknown agent {a}")
            if ev.kind == "load_scaled" and p.get("bus") is not None and int(p["bus"]) not in net.buses:
                out.append(f"{where}: unknown bus {p['bus']}")
        out.extend(self.config.problems())
        return out
