"""Timed events and their effect on the grid, its state and the comm graph."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

from ..consensus import CommGraph
from ..grid import Bus, DgUnit, EsUnit, Network, NetworkState

log = logging.getLogger(__name__)

EVENT_KINDS = ("dg_discovered", "es_discovered", "agent_restored", "feeder_repaired",
               "bus_repaired", "link_restored", "load_scaled", "external_supply")

_REQUIRED = {
    "dg_discovered": ("bus", "p_max", "p_min", "q_max", "q_min", "ramp_rate", "t_syn"),
    "es_discovered": ("bus", "capacity", "p_ch_max", "p_dis_max", "eta_ch", "eta_dis",
                      "soc_min", "soc_max", "soc"),
    "agent_restored": ("agents",),
    "feeder_repaired": ("feeder",),
    "bus_repaired": ("bus",),
    "link_restored": ("a", "b"),
    "load_scaled": ("factor",),
    "external_supply": (),
}


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    payload: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if self.time < 0:
            out.append(f"event time {self.time} is negative")
        if self.kind not in EVENT_KINDS:
            out.append(f"unknown event kind {self.kind!r}")
            return out
        for key in _REQUIRED[self.kind]:
            if key not in self.payload:
                out.append(f"{self.kind} event at {self.time} lacks payload key {key!r}")
        return out

    def to_dict(self) -> dict:
        return {"time": self.time, "kind": self.kind, "payload": dict(self.payload)}


@dataclass
class World:
    """Mutable bundle the engine threads through events."""

    network: Network
    state: NetworkState
    comm: CommGraph
    external_supply: bool = False


def _restore_agent(world: World, agent: int, with_bus: bool = True) -> None:
    if agent not in world.network.buses:
        raise ValueError(f"agent {agent} has no bus")
    world.comm = world.comm.with_agent(agent, True)
    if with_bus:
        avail = dict(world.state.avail_bus)
        avail[agent] = 1
        world.state = replace(world.state, avail_bus=avail)


def apply_event(world: World, ev: Event) -> None:
    p = ev.payload
    st = world.state
    if ev.kind == "dg_discovered":
        b = int(p["bus"])
        if b in world.network.dgs:
            raise ValueError(f"bus {b} already hosts a DG")
        dg = DgUnit(b, float(p["p_max"]), float(p["p_min"]), float(p["q_max"]), float(p["q_min"]),
                    float(p["ramp_rate"]), float(p["t_syn"]),
                    None if p.get("t_start") is None else float(p["t_start"]))
        world.network = world.network.with_dg(dg)
        ready = dict(st.dg_ready)
        ready[b] = dg.t_start
        world.state = replace(st, dg_ready=ready)
        if p.get("restore_agent", True):
            _restore_agent(world, b)
    elif ev.kind == "es_discovered":
        b = int(p["bus"])
        if b in world.network.ess:
            raise ValueError(f"bus {b} already hosts an ES")
        es = EsUnit(b, float(p["capacity"]), float(p["p_ch_max"]), float(p["p_dis_max"]),
                    float(p["eta_ch"]), float(p["eta_dis"]), float(p["soc_min"]), float(p["soc_max"]))
        world.network = world.network.with_es(es)
        soc = dict(st.soc)
        soc[b] = float(p["soc"])
        world.state = replace(st, soc=soc)
        if p.get("restore_agent", True):
            _restore_agent(world, b)
    elif ev.kind == "agent_restored":
        for a in p["agents"]:
            _restore_agent(world, int(a), bool(p.get("with_bus", True)))
    elif ev.kind == "feeder_repaired":
        key = str(p["feeder"])
        world.network.feeder(key)  # KeyError for unknown feeders
        if st.avail_feeder.get(key, 0):
            log.warning("feeder %s is already available; repair ignored", key)
            return
        avail = dict(st.avail_feeder)
        avail[key] = 1
        world.state = replace(st, avail_feeder=avail)
    elif ev.kind == "bus_repaired":
        b = int(p["bus"])
        if b not in world.network.buses:
            raise ValueError(f"unknown bus {b}")
        if st.avail_bus.get(b, 0):
            log.warning("bus %s is already available; repair ignored", b)
            return
        avail = dict(st.avail_bus)
        avail[b] = 1
        world.state = replace(st, avail_bus=avail)
    elif ev.kind == "link_restored":
        a, b = int(p["a"]), int(p["b"])
        world.comm = world.comm.with_link(a, b)
    elif ev.kind == "load_scaled":
        factor = float(p["factor"])
        if factor < 0:
            raise ValueError("load scale factor must be non-negative")
        targets = [int(p["bus"])] if p.get("bus") is not None else sorted(world.network.buses)
        net = world.network
        pl = dict(st.pl)
        ql = dict(st.ql)
        for b in targets:
            bus = net.buses[b]
            new = Bus(bus.id, tuple(x * factor for x in bus.load_p), tuple(x * factor for x in bus.load_q),
                      bus.lambda_min, bus.has_agent, bus.priority_class)
            net = net.with_bus(new)
            if b in pl:
                pl[b] = tuple(min(x, cap) for x, cap in zip(pl[b], new.load_p))
            if b in ql:
                ql[b] = tuple(min(x, cap) for x, cap in zip(ql[b], new.load_q))
        world.network = net
        world.state = replace(st, pl=pl, ql=ql)
    elif ev.kind == "external_supply":
        world.external_supply = True


def inject_events(world: World, events, clock: float) -> list[Event]:
    """Apply ``events`` (all timestamped at or before ``clock``) in time order."""
    applied = []
    for ev in sorted(events, key=lambda e: e.time):
        if ev.time > clock + 1e-9:
            raise ValueError(f"event at {ev.time} is later than the clock {clock}")
        apply_event(world, ev)
        applied.append(ev)
    return applied


def isolated_dg_autostart(world: World, clock: float) -> list[int]:
    """Start the synchronization countdown of DGs whose agent has no live links."""
    nb = world.comm.neighbors()
    started = []
    ready = dict(world.state.dg_ready)
    for b in sorted(world.network.dgs):
        if b in nb and not nb[b] and ready.get(b) is None:
            ready[b] = clock
            started.append(b)
    if started:
        world.state = replace(world.state, dg_ready=ready)
    return started


