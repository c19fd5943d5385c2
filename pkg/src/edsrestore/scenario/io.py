"""Versioned, strict JSON (de)serialization of scenarios.

Document layout::

    {"format": "edsrestore-scenario", "version": 1, "name": ..., "description": ...,
     "network": {...}, "state": {...}, "comm": {...}, "events": [...], "config": {...}}

Unknown keys are errors unless ``strict=False``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from ..consensus import CommGraph
from ..grid import ES_Q_TABLE, Bus, DgUnit, EsUnit, Feeder, Network, NetworkState
from ..rolling.events import Event
from .types import Scenario, ScenarioConfig

FORMAT = "edsrestore-scenario"
VERSION = 1


class ScenarioError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("\n".join(errors))
        self.errors = list(errors)


_BUS_KEYS = {"id", "load_p", "load_q", "lambda_min", "has_agent", "priority_class"}
_FEEDER_KEYS = {"i", "j", "r", "x", "i_max"}
_DG_KEYS = {"bus", "p_max", "p_min", "q_max", "q_min", "ramp_rate", "t_syn", "t_start"}
_ES_KEYS = {"bus", "capacity", "p_ch_max", "p_dis_max", "eta_ch", "eta_dis", "soc_min", "soc_max",
            "q_capability", "s_rated"}
_STATE_KEYS = {"time", "avail_bus", "avail_feeder", "unavailable_buses", "unavailable_feeders",
               "v", "w", "pl", "ql", "p_g", "q_g", "p_dg", "soc", "dg_start"}
_TOP_KEYS = {"format", "version", "name", "description", "network", "state", "comm", "events", "config"}


class _Reader:
    def __init__(self, strict: bool):
        self.strict = strict
        self.errors: list[str] = []

    def keys(self, obj: Any, allowed: set[str], where: str, required: tuple[str, ...] = ()) -> bool:
        if not isinstance(obj, Mapping):
            self.errors.append(f"{where}: expected an object")
            return False
        if self.strict:
            for k in sorted(set(obj) - allowed):
                self.errors.append(f"{where}: unknown key {k!r}")
        ok = True
        for k in required:
            if k not in obj:
                self.errors.append(f"{where}: missing key {k!r}")
                ok = False
        return ok

    def build(self, where: str, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except (TypeError, ValueError, KeyError) as exc:
            self.errors.append(f"{where}: {exc}")
            return None


def _triple(v) -> tuple[float, float, float]:
    t = tuple(float(x) for x in v)
    if len(t) != 3:
        raise ValueError(f"expected 3 values, got {len(t)}")
    return t  # type: ignore[return-value]


def _network(r: _Reader, d) -> Network | None:
    if not r.keys(d, {"v_nom", "v_min", "v_max", "buses", "feeders", "dgs", "ess"}, "network", ("buses",)):
        return None
    buses: dict[int, Bus] = {}
    for k, b in enumerate(d.get("buses", [])):
        where = f"network.buses[{k}]"
        if r.keys(b, _BUS_KEYS, where, ("id",)):
            bus = r.build(where, lambda: Bus(int(b["id"]), _triple(b.get("load_p", (0, 0, 0))),
                                             _triple(b.get("load_q", (0, 0, 0))),
                                             None if b.get("lambda_min") is None else float(b["lambda_min"]),
                                             bool(b.get("has_agent", True)), int(b.get("priority_class", 1))))
            if bus is not None:
                if bus.id in buses:
                    r.errors.append(f"{where}: duplicate bus id {bus.id}")
                buses[bus.id] = bus
    feeders = []
    for k, f in enumerate(d.get("feeders", [])):
        where = f"network.feeders[{k}]"
        if r.keys(f, _FEEDER_KEYS, where, tuple(sorted(_FEEDER_KEYS))):
            fd = r.build(where, lambda: Feeder(int(f["i"]), int(f["j"]), float(f["r"]), float(f["x"]),
                                               float(f["i_max"])))
            if fd is not None:
                feeders.append(fd)
    dgs = {}
    for k, g in enumerate(d.get("dgs", [])):
        where = f"network.dgs[{k}]"
        if r.keys(g, _DG_KEYS, where, tuple(sorted(_DG_KEYS - {"t_start"}))):
            dg = r.build(where, lambda: DgUnit(int(g["bus"]), float(g["p_max"]), float(g["p_min"]),
                                               float(g["q_max"]), float(g["q_min"]), float(g["ramp_rate"]),
                                               float(g["t_syn"]),
                                               None if g.get("t_start") is None else float(g["t_start"])))
            if dg is not None:
                if dg.bus in dgs:
                    r.errors.append(f"{where}: duplicate DG at bus {dg.bus}")
                dgs[dg.bus] = dg
    ess = {}
    for k, e in enumerate(d.get("ess", [])):
        where = f"network.ess[{k}]"
        if r.keys(e, _ES_KEYS, where, tuple(sorted(_ES_KEYS - {"q_capability", "s_rated"}))):
            es = r.build(where, lambda: EsUnit(
                int(e["bus"]), float(e["capacity"]), float(e["p_ch_max"]), float(e["p_dis_max"]),
                float(e["eta_ch"]), float(e["eta_dis"]), float(e["soc_min"]), float(e["soc_max"]),
                tuple(tuple(float(x) for x in row) for row in e.get("q_capability", ES_Q_TABLE)),
                None if e.get("s_rated") is None else float(e["s_rated"])))
            if es is not None:
                if es.bus in ess:
                    r.errors.append(f"{where}: duplicate ES at bus {es.bus}")
                ess[es.bus] = es
    v_nom = float(d.get("v_nom", 4.16))
    return Network(buses, tuple(feeders), dgs, ess, v_nom, float(d.get("v_min", 0.95 * v_nom)),
                   float(d.get("v_max", 1.05 * v_nom)))


def _int_map(d: Mapping | None) -> dict[int, Any]:
    return {int(k): v for k, v in (d or {}).items()}


def _state(r: _Reader, d, net: Network) -> NetworkState | None:
    if not r.keys(d, _STATE_KEYS, "state"):
        return None
    try:
        if "avail_bus" in d:
            avail_bus = {int(k): int(v) for k, v in d["avail_bus"].items()}
        else:
            bad = {int(b) for b in d.get("unavailable_buses", [])}
            avail_bus = {b: int(b not in bad) for b in net.buses}
        if "avail_feeder" in d:
            avail_f = {str(k): int(v) for k, v in d["avail_feeder"].items()}
        else:
            bad_f = {str(k) for k in d.get("unavailable_feeders", [])}
            avail_f = {f.key: int(f.key not in bad_f) for f in net.feeders}
        if "dg_start" in d:
            ready = {int(k): (None if v is None else float(v)) for k, v in d["dg_start"].items()}
        else:
            ready = {b: dg.t_start for b, dg in net.dgs.items()}
        return NetworkState(
            time=float(d.get("time", 0.0)), avail_bus=avail_bus, avail_feeder=avail_f,
            v={k: int(v) for k, v in _int_map(d.get("v")).items()},
            w={str(k): int(v) for k, v in (d.get("w") or {}).items()},
            pl={k: _triple(v) for k, v in _int_map(d.get("pl")).items()},
            ql={k: _triple(v) for k, v in _int_map(d.get("ql")).items()},
            p_g={k: float(v) for k, v in _int_map(d.get("p_g")).items()},
            q_g={k: float(v) for k, v in _int_map(d.get("q_g")).items()},
            p_dg={k: float(v) for k, v in _int_map(d.get("p_dg")).items()},
            soc={k: float(v) for k, v in _int_map(d.get("soc")).items()},
            dg_ready=ready)
    except (TypeError, ValueError, AttributeError) as exc:
        r.errors.append(f"state: {exc}")
        return None


def _comm(r: _Reader, d, net: Network) -> CommGraph | None:
    if not r.keys(d, {"agents", "unavailable_agents", "links"}, "comm"):
        return None
    try:
        if "agents" in d:
            agents = {int(k): bool(v) for k, v in d["agents"].items()}
        else:
            down = {int(a) for a in d.get("unavailable_agents", [])}
            agents = {b: b not in down for b, bus in net.buses.items() if bus.has_agent}
        links = d.get("links", "mirror_feeders")
        if links == "mirror_feeders":
            pairs = [(f.i, f.j) for f in net.feeders if f.i in agents and f.j in agents]
        else:
            pairs = [(int(a), int(b)) for a, b in links]
        return CommGraph.build(agents, pairs)
    except (TypeError, ValueError, AttributeError) as exc:
        r.errors.append(f"comm: {exc}")
        return None


def _events(r: _Reader, d) -> tuple[Event, ...]:
    out = []
    if not isinstance(d, list):
        r.errors.append("events: expected a list")
        return ()
    for k, e in enumerate(d):
        where = f"events[{k}]"
        if r.keys(e, {"time", "kind", "payload"}, where, ("time", "kind")):
            ev = r.build(where, lambda: Event(float(e["time"]), str(e["kind"]), dict(e.get("payload", {}))))
            if ev is not None:
                out.append(ev)
    return tuple(out)


def _config(r: _Reader, d) -> ScenarioConfig:
    if not r.keys(d, set(ScenarioConfig.keys()), "config"):
        return ScenarioConfig()
    kw = {k: v for k, v in d.items() if k in ScenarioConfig.keys()}
    if "weights" in kw:
        kw["weights"] = tuple(float(x) for x in kw["weights"])
    return ScenarioConfig(**kw)


def scenario_from_dict(doc: Mapping, strict: bool = True) -> Scenario:
    r = _Reader(strict)
    if not r.keys(doc, _TOP_KEYS, "document", ("network",)):
        raise ScenarioError(r.errors)
    if doc.get("format", FORMAT) != FORMAT:
        r.errors.append(f"document: format {doc.get('format')!r} is not {FORMAT!r}")
    if doc.get("version") != VERSION:
        r.errors.append(f"document: unsupported version {doc.get('version')!r} (expected {VERSION})")
    net = _network(r, doc["network"])
    if net is None or r.errors:
        raise ScenarioError(r.errors)
    st = _state(r, doc.get("state", {}), net)
    comm = _comm(r, doc.get("comm", {}), net)
    events = _events(r, doc.get("events", []))
    cfg = _config(r, doc.get("config", {}))
    if r.errors:
        raise ScenarioError(r.errors)
    sc = Scenario(str(doc.get("name", "")), net, st, comm, events, cfg, str(doc.get("description", "")))
    problems = sc.problems()
    if problems:
        raise ScenarioError(problems)
    return sc


def load_scenario(path: str | Path, strict: bool = True) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}"]) from exc
    try:
        return scenario_from_dict(doc, strict)
    except ScenarioError as exc:
        raise ScenarioError([f"{path}: {m}" for m in exc.errors]) from None


def network_to_dict(net: Network) -> dict:
    return {
        "v_nom": net.v_nom, "v_min": net.v_min, "v_max": net.v_max,
        "buses": [{"id": b.id, "load_p": list(b.load_p), "load_q": list(b.load_q),
                   "lambda_min": b.lambda_min, "has_agent": b.has_agent,
                   "priority_class": b.priority_class} for _, b in sorted(net.buses.items())],
        "feeders": [{"i": f.i, "j": f.j, "r": f.r, "x": f.x, "i_max": f.i_max} for f in net.feeders],
        "dgs": [{"bus": g.bus, "p_max": g.p_max, "p_min": g.p_min, "q_max": g.q_max, "q_min": g.q_min,
                 "ramp_rate": g.ramp_rate, "t_syn": g.t_syn, "t_start": g.t_start}
                for _, g in sorted(net.dgs.items())],
        "ess": [{"bus": e.bus, "capacity": e.capacity, "p_ch_max": e.p_ch_max, "p_dis_max": e.p_dis_max,
                 "eta_ch": e.eta_ch, "eta_dis": e.eta_dis, "soc_min": e.soc_min, "soc_max": e.soc_max,
                 "q_capability": [list(row) for row in e.q_capability], "s_rated": e.s_rated}
                for _, e in sorted(net.ess.items())],
    }


def network_from_dict(d: Mapping) -> Network:
    r = _Reader(True)
    net = _network(r, d)
    if r.errors or net is None:
        raise ScenarioError(r.errors)
    return net


def _smap(m: Mapping, fn=lambda v: v) -> dict:
    return {str(k): fn(v) for k, v in sorted(m.items(), key=lambda kv: (str(type(kv[0])), kv[0]))}


def state_to_dict(st: NetworkState) -> dict:
    return {
        "time": st.time, "avail_bus": _smap(st.avail_bus), "avail_feeder": _smap(st.avail_feeder),
        "v": _smap(st.v), "w": _smap(st.w), "pl": _smap(st.pl, list), "ql": _smap(st.ql, list),
        "p_g": _smap(st.p_g), "q_g": _smap(st.q_g), "p_dg": _smap(st.p_dg), "soc": _smap(st.soc),
        "dg_start": _smap(st.dg_ready),
    }


def scenario_to_dict(sc: Scenario) -> dict:
    cfg = {k: getattr(sc.config, k) for k in ScenarioConfig.keys()}
    cfg["weights"] = list(cfg["weights"])
    return {
        "format": FORMAT, "version": VERSION, "name": sc.name, "description": sc.description,
        "network": network_to_dict(sc.network),
        "state": state_to_dict(sc.initial_state),
        "comm": {"agents": _smap(sc.comm.agents),
                 "links": [list(link) for link in sorted(tuple(sorted(l)) for l in sc.comm.links)]},
        "events": [e.to_dict() for e in sc.events],
        "config": cfg,
    }


def save_scenario(sc: Scenario, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(scenario_to_dict(sc), indent=1) + "\n")
    return path
