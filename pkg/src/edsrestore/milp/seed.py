"""Local measurements published by each bus agent and their reassembly.

Field names are flat strings so they can ride in the consensus vector:
bus fields (``avail``, ``v``, ``pl1``..``ql3``, ``pg``, ``qg``, ``pdg``,
``dg_on``, ``tstart``, ``soc``) plus one group per incident feeder
(``fa:<key>``, ``fw:<key>``, ``fr:<key>``, ``fx:<key>``).
"""

from __future__ import annotations

from ..consensus import CcpView
from ..grid import Network, NetworkState

BUS_FLAGS = ("avail", "v", "dg_on")
FEEDER_FLAGS = ("fa", "fw")


def publish_fields(network: Network, state: NetworkState, bus: int) -> dict[str, float]:
    pl = state.restored(bus)
    ql = tuple(state.ql.get(bus, (0.0, 0.0, 0.0)))
    out = {
        "avail": float(state.avail_bus.get(bus, 0)),
        "v": float(state.v.get(bus, 0)),
        "pl1": pl[0], "pl2": pl[1], "pl3": pl[2],
        "ql1": ql[0], "ql2": ql[1], "ql3": ql[2],
        "pg": float(state.p_g.get(bus, 0.0)),
        "qg": float(state.q_g.get(bus, 0.0)),
    }
    if bus in network.dgs:
        ts = state.dg_ready.get(bus)
        out["pdg"] = float(state.p_dg.get(bus, 0.0))
        out["dg_on"] = 0.0 if ts is None else 1.0
        out["tstart"] = 0.0 if ts is None else float(ts)
    if bus in network.ess:
        out["soc"] = float(state.soc.get(bus, 0.0))
    for f in network.feeders:
        if bus in (f.i, f.j):
            out[f"fa:{f.key}"] = float(state.avail_feeder.get(f.key, 0))
            out[f"fw:{f.key}"] = float(state.w.get(f.key, 0))
            out[f"fr:{f.key}"] = f.r
            out[f"fx:{f.key}"] = f.x
    return out


def integer_fields(network: Network) -> set[str]:
    names = set(BUS_FLAGS)
    for f in network.feeders:
        names.update(f"{p}:{f.key}" for p in FEEDER_FLAGS)
    return names


def view_from_state(network: Network, state: NetworkState, members=None,
                    rounds: int = 0, latency: float = 0.0) -> CcpView:
    """Exact view of ``members`` (default: every bus), as if consensus had
    converged with no numerical error."""
    members = frozenset(network.buses if members is None else members)
    gs = {}
    for b in sorted(members):
        for k, v in publish_fields(network, state, b).items():
            gs[(b, k)] = v
    return CcpView(members, len(members), gs, rounds, rounds * latency)


def observed_state(view: CcpView, network: Network, time: float) -> NetworkState:
    """Rebuild a (member-restricted) NetworkState from a CCP view.

    Flags are rounded; restored loads and SoC are clipped into their physical
    ranges to absorb consensus noise; start times are rounded to 1e-6 min.
    """
    members = sorted(b for b in view.members if b in network.buses)
    mset = set(members)
    g = view.global_state

    def val(b, k, default=0.0):
        return g.get((b, k), default)

    avail_bus, v, pl, ql, pg, qg, pdg, soc, ready = {}, {}, {}, {}, {}, {}, {}, {}, {}
    for b in members:
        bus = network.buses[b]
        avail_bus[b] = int(round(val(b, "avail")))
        v[b] = int(round(val(b, "v"))) if avail_bus[b] else 0
        pl[b] = tuple(min(max(val(b, f"pl{c + 1}"), 0.0), bus.load_p[c]) for c in range(3))
        ql[b] = tuple(max(val(b, f"ql{c + 1}"), 0.0) for c in range(3))
        pg[b] = val(b, "pg")
        qg[b] = val(b, "qg")
        if b in network.dgs:
            pdg[b] = val(b, "pdg")
            on = int(round(val(b, "dg_on")))
            ready[b] = round(val(b, "tstart"), 6) if on else None
        if b in network.ess:
            es = network.ess[b]
            soc[b] = min(max(val(b, "soc"), es.soc_min), es.soc_max)

    avail_f, w = {}, {}
    for f in network.feeders:
        if f.i in mset and f.j in mset:
            src = min(f.i, f.j)
            avail_f[f.key] = int(round(val(src, f"fa:{f.key}", val(max(f.i, f.j), f"fa:{f.key}"))))
            w[f.key] = int(round(val(src, f"fw:{f.key}"))) if avail_f[f.key] else 0
    return NetworkState(time=time, avail_bus=avail_bus, avail_feeder=avail_f, v=v, w=w,
                        pl=pl, ql=ql, p_g=pg, q_g=qg, p_dg=pdg, soc=soc, dg_ready=ready)
