"""Constructors for the bundled scenarios.

The JSON files under ``data/`` are generated from these functions
(``python -m edsrestore.scenario.library``) and checked against them in the
test suite.
"""

from __future__ import annotations

import sys
from pathlib import Path

from ..consensus import CommGraph
from ..grid import Bus, DgUnit, EsUnit, Feeder, Network, blackout_state
from ..rolling.events import Event
from .types import Scenario, ScenarioConfig

DATA_DIR = Path(__file__).parent / "data"


def fig3_mas() -> Scenario:
    """Seven agents; losing agent 7 splits the MAS into {1,2,3,4} and {5,6}."""
    links = [(1, 2), (2, 3), (3, 4), (2, 4), (4, 7), (5, 7), (5, 6)]
    buses = {i: Bus(i) for i in range(1, 8)}
    feeders = tuple(Feeder(a, b, 0.1, 0.1, 200.0) for a, b in links)
    net = Network(buses, feeders)
    comm = CommGraph.build({i: i != 7 for i in range(1, 8)}, links)
    return Scenario("fig3_mas", net, blackout_state(net, unavailable_buses=[7]), comm,
                    description="Seven-agent MAS with agent 7 out of service (communication only).")


def tri3() -> Scenario:
    buses = {i: Bus(i, (30.0, 20.0, 10.0), (10.0, 5.0, 3.0)) for i in (1, 2, 3)}
    feeders = (Feeder(1, 2, 0.3, 0.2, 200.0), Feeder(2, 3, 0.3, 0.2, 200.0), Feeder(1, 3, 0.3, 0.2, 200.0))
    net = Network(buses, feeders, dgs={1: DgUnit(1, 300.0, 0.0, 200.0, -200.0, 50.0, 0.0, 0.0)})
    comm = CommGraph.build([1, 2, 3], [(1, 2), (2, 3), (1, 3)])
    cfg = ScenarioConfig(horizon=10.0, step=5.0, control_gap=5.0, pwl_selectors=False,
                         es_q_mode="conservative_fixed")
    return Scenario("tri3", net, blackout_state(net), comm, config=cfg,
                    description="Three-bus ring with one ready DG; oracle fixture.")


def path13() -> Scenario:
    """Thirteen-bus chain, DG at the head, ES at the tail, one late feeder repair."""
    n = 13
    buses = {i: Bus(i, (8.0 + i % 3, 6.0, 4.0 + i % 2), (3.0, 2.0, 1.0), priority_class=1 + i % 3)
             for i in range(1, n + 1)}
    feeders = tuple(Feeder(i, i + 1, 0.05, 0.04, 150.0) for i in range(1, n))
    dg = DgUnit(1, 150.0, 10.0, 100.0, -60.0, 10.0, 5.0, 0.0)
    es = EsUnit(13, 100.0, 30.0, 30.0, 0.9, 1.1, 0.1, 0.95)
    net = Network(buses, feeders, dgs={1: dg}, ess={13: es})
    st = blackout_state(net, unavailable_feeders=["7-8"], soc={13: 0.7})
    comm = CommGraph.build(range(1, n + 1), [(i, i + 1) for i in range(1, n)])
    events = (Event(20.0, "feeder_repaired", {"feeder": "7-8"}),)
    cfg = ScenarioConfig(horizon=40.0, step=10.0, control_gap=20.0, pwl_selectors=False,
                         es_q_mode="conservative_fixed")
    return Scenario("path13", net, st, comm, events, cfg,
                    description="Thirteen-bus chain sized like one CCP; feeder 7-8 repaired at 20 min.")


# ---- IEEE 123-bus feeder ---------------------------------------------------

# (from, to, length ft, configuration) for the standard line segments.
IEEE123_LINES = (
    (1, 2, 175, 10), (1, 3, 250, 11), (1, 7, 300, 1), (3, 4, 200, 11), (3, 5, 325, 11),
    (5, 6, 250, 11), (7, 8, 200, 1), (8, 12, 225, 10), (8, 9, 225, 9), (8, 13, 300, 1),
    (9, 14, 425, 9), (13, 34, 150, 11), (13, 18, 825, 2), (14, 11, 250, 9), (14, 10, 250, 9),
    (15, 16, 375, 11), (15, 17, 350, 11), (18, 19, 250, 9), (18, 21, 300, 2), (19, 20, 325, 9),
    (21, 22, 525, 10), (21, 23, 250, 2), (23, 24, 550, 11), (23, 25, 275, 2), (25, 26, 350, 7),
    (25, 28, 200, 2), (26, 27, 275, 7), (26, 31, 225, 11), (27, 33, 500, 9), (28, 29, 300, 2),
    (29, 30, 350, 2), (30, 250, 200, 2), (31, 32, 300, 11), (34, 15, 100, 11), (35, 36, 650, 8),
    (35, 40, 250, 1), (36, 37, 300, 9), (36, 38, 250, 10), (38, 39, 325, 10), (40, 41, 325, 11),
    (40, 42, 250, 1), (42, 43, 500, 10), (42, 44, 200, 1), (44, 45, 200, 9), (44, 47, 250, 1),
    (45, 46, 300, 9), (47, 48, 150, 4), (47, 49, 250, 4), (49, 50, 250, 4), (50, 51, 250, 4),
    (52, 53, 200, 1), (53, 54, 125, 1), (54, 55, 275, 1), (54, 57, 350, 3), (55, 56, 275, 1),
    (57, 58, 250, 10), (57, 60, 750, 3), (58, 59, 250, 10), (60, 61, 550, 5), (60, 62, 250, 12),
    (62, 63, 175, 12), (63, 64, 350, 12), (64, 65, 425, 12), (65, 66, 325, 12), (67, 68, 200, 9),
    (67, 72, 275, 3), (67, 97, 250, 3), (68, 69, 275, 9), (69, 70, 325, 9), (70, 71, 275, 9),
    (72, 73, 275, 11), (72, 76, 200, 3), (73, 74, 350, 11), (74, 75, 400, 11), (76, 77, 400, 6),
    (76, 86, 700, 3), (77, 78, 100, 6), (78, 79, 225, 6), (78, 80, 475, 6), (80, 81, 475, 6),
    (81, 82, 250, 6), (81, 84, 675, 11), (82, 83, 250, 6), (84, 85, 475, 11), (86, 87, 450, 6),
    (87, 88, 175, 9), (87, 89, 275, 6), (89, 90, 225, 10), (89, 91, 225, 6), (91, 92, 300, 11),
    (91, 93, 225, 6), (93, 94, 275, 9), (93, 95, 300, 6), (95, 96, 200, 10), (97, 98, 275, 3),
    (98, 99, 550, 3), (99, 100, 300, 3), (100, 450, 800, 3), (101, 102, 225, 11), (101, 105, 275, 3),
    (102, 103, 325, 11), (103, 104, 700, 11), (105, 106, 225, 10), (105, 108, 325, 3),
    (106, 107, 575, 10), (108, 109, 450, 9), (108, 300, 1000, 3), (109, 110, 300, 9),
    (110, 111, 575, 9), (110, 112, 125, 9), (112, 113, 525, 9), (113, 114, 325, 9),
    (135, 35, 375, 4), (149, 1, 400, 1), (152, 52, 400, 1), (160, 67, 350, 6), (197, 101, 250, 3),
)
# Closed switches and the 61-610 transformer, modeled as near-zero-impedance branches.
IEEE123_SWITCHES = ((13, 152), (18, 135), (60, 160), (61, 610), (97, 197))
# Normally-open tie kept as a candidate branch.
IEEE123_TIES = ((54, 94),)

# Spot loads (kW) of the standard feeder; scaled and split into classes below.
IEEE123_SPOT_KW = {
    1: 40, 2: 20, 4: 40, 5: 20, 6: 40, 7: 20, 9: 40, 10: 20, 11: 40, 12: 20, 16: 40, 17: 20,
    19: 40, 20: 40, 22: 40, 24: 40, 28: 40, 29: 40, 30: 40, 31: 20, 32: 20, 33: 40, 34: 40,
    35: 40, 37: 40, 38: 20, 39: 20, 41: 20, 42: 20, 43: 40, 45: 20, 46: 20, 47: 105, 48: 210,
    49: 140, 50: 40, 51: 20, 52: 40, 53: 40, 55: 20, 56: 20, 58: 20, 59: 20, 60: 20, 62: 40,
    63: 40, 64: 75, 65: 140, 66: 75, 68: 20, 69: 40, 70: 20, 71: 40, 73: 40, 74: 40, 75: 40,
    76: 245, 77: 40, 79: 40, 80: 40, 82: 40, 83: 20, 84: 20, 85: 40, 86: 20, 87: 40, 88: 40,
    90: 40, 92: 40, 94: 40, 95: 20, 96: 20, 98: 40, 99: 40, 100: 40, 102: 20, 103: 40, 104: 40,
    106: 40, 107: 40, 109: 40, 111: 20, 112: 20, 113: 40, 114: 20,
}
LOAD_SCALE = 0.7
Q_OVER_P = 0.5
# Split of each bus's load over classes 1..3, by priority class of the bus.
CLASS_SPLIT = {1: (0.6, 0.25, 0.15), 2: (0.2, 0.55, 0.25), 3: (0.1, 0.3, 0.6)}

# Ohm per mile (single-phase equivalent) and ampacity per configuration group.
_THREE_PHASE = (0.306, 0.627, 400.0)
_LATERAL = (0.592, 0.766, 230.0)
_SWITCH = (0.001, 0.001, 600.0)

# Agents alive at t=0: three islands of 13, 10 and 6 agents.
IEEE123_ALIVE_T0 = (
    (1, 2, 3, 4, 5, 6, 7, 8, 9, 12, 13, 14, 34),            # DG at 8
    (53, 54, 55, 56, 57, 58, 59, 60, 61, 62),               # DG at 57, ES at 61
    (101, 102, 105, 106, 107, 108),                         # DG at 105
)
# Agents brought back together with the newly discovered units.
IEEE123_RESTORED_30 = (10, 11, 15, 16, 17, 18, 19, 20, 21, 22, 42, 43, 44, 45, 46, 47, 48, 49,
                       40, 41, 35, 36, 37, 135, 152, 52, 63, 64)
IEEE123_RESTORED_60 = (23, 24, 25, 28, 29, 76, 77, 78, 79, 80, 86, 87, 88, 89, 90, 91, 92,
                       103, 104, 109, 110, 111, 112)


def _priority(bus: int) -> int:
    return 1 + (bus * 7) % 3


def ieee123_network() -> Network:
    ids = sorted({b for a, c, *_ in IEEE123_LINES for b in (a, c)}
                 | {b for pair in IEEE123_SWITCHES + IEEE123_TIES for b in pair})
    buses = {}
    for b in ids:
        p = LOAD_SCALE * IEEE123_SPOT_KW.get(b, 0)
        split = CLASS_SPLIT[_priority(b)]
        lp = tuple(round(p * s, 6) for s in split)
        buses[b] = Bus(b, lp, tuple(round(Q_OVER_P * x, 6) for x in lp), priority_class=_priority(b))
    feeders = []
    for a, c, ft, cfg in IEEE123_LINES:
        r, x, imax = _THREE_PHASE if cfg <= 8 else _LATERAL
        miles = ft / 5280.0
        feeders.append(Feeder(a, c, round(r * miles, 6), round(x * miles, 6), imax))
    for a, c in IEEE123_SWITCHES + IEEE123_TIES:
        feeders.append(Feeder(a, c, *_SWITCH))
    dgs = {
        8: DgUnit(8, 200.0, 33.3, 150.0, -150.0, 11.1, 10.0, -10.0),
        57: DgUnit(57, 300.0, 66.7, 200.0, -200.0, 16.7, 15.0, 0.0),
        105: DgUnit(105, 200.0, 33.3, 150.0, -150.0, 11.1, 10.0, 0.0),
    }
    ess = {61: EsUnit(61, 200.0, 50.0, 50.0, 0.85, 1.15, 0.05, 0.95, s_rated=50.0)}
    return Network(buses, tuple(feeders), dgs, ess)


def _dg_event(t: float, bus: int, p_max, p_min, q_max, ramp, t_syn, t_start) -> list[Event]:
    return [Event(t, "dg_discovered", {"bus": bus, "p_max": p_max, "p_min": p_min, "q_max": q_max,
                                     "q_min": -q_max, "ramp_rate": ramp, "t_syn": t_syn,
                                     "t_start": t_start})]


def ieee123_mod() -> Scenario:
    net = ieee123_network()
    alive = {b for group in IEEE123_ALIVE_T0 for b in group}
    comm = CommGraph.build({b: b in alive for b in net.buses}, [(f.i, f.j) for f in net.feeders])
    st = blackout_state(net, soc={61: 0.8})
    events = [Event(30.0, "agent_restored", {"agents": list(IEEE123_RESTORED_30)})]
    events += _dg_event(30.0, 44, 150.0, 16.7, 100.0, 8.3, 10.0, 15.0)
    events += [Event(60.0, "agent_restored", {"agents": list(IEEE123_RESTORED_60)})]
    events += _dg_event(60.0, 23, 100.0, 5.6, 60.0, 5.6, 5.0, 40.0)
    events += _dg_event(60.0, 78, 120.0, 13.3, 100.0, 6.7, 10.0, 50.0)
    events += _dg_event(60.0, 89, 120.0, 13.3, 100.0, 6.7, 10.0, 20.0)
    cfg = ScenarioConfig(horizon=120.0, step=5.0, control_gap=30.0, pwl_selectors=False,
                         es_q_mode="conservative_fixed", solver_time_limit=900.0,
                         solver_mip_gap=1e-3)
    return Scenario("ieee123_mod", net, st, comm, tuple(events), cfg, description=(
        "IEEE 123-bus topology with the published DG/ES fleet. Loads are the standard spot loads "
        f"scaled by {LOAD_SCALE} and split into three classes by a fixed rule; they are synthetic, "
        "not the original study's data. Agents alive at t=0 form islands of 13, 10 and 6."))


BUILDERS = {"fig3_mas": fig3_mas, "tri3": tri3, "path13": path13, "ieee123_mod": ieee123_mod}


def write_data(directory: Path = DATA_DIR) -> list[Path]:
    from .io import save_scenario
    directory.mkdir(parents=True, exist_ok=True)
    return [save_scenario(make(), directory / f"{name}.json") for name, make in BUILDERS.items()]


if __name__ == "__main__":
    for p in write_data(Path(sys.argv[1]) if len(sys.argv) > 1 else DATA_DIR):
        print(p)
