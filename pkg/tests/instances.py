"""Random small restoration instances shared by the oracle-based tests."""

from __future__ import annotations

import random
from dataclasses import replace

from edsrestore.grid import Bus, DgUnit, EsUnit, Feeder, Network, TimeGrid, blackout_state
from edsrestore.milp import MilpConfig, build_model, view_from_state

SMALL_GRID = TimeGrid(0.0, 10.0, 5.0, 5.0)
SMALL_CONFIG = MilpConfig(pwl_selectors=False, es_q_mode="conservative_fixed")
MAX_FREE = 12


def random_network(rng: random.Random, n_buses: int | None = None) -> Network:
    n = n_buses or rng.randint(2, 6)
    ids = list(range(1, n + 1))
    feeders = []
    for b in ids[1:]:
        a = rng.randint(1, b - 1)
        feeders.append(Feeder(a, b, round(rng.uniform(0.05, 0.5), 3), round(rng.uniform(0.05, 0.5), 3),
                              rng.choice((80.0, 150.0, 250.0))))
    if n >= 3 and rng.random() < 0.4:
        pairs = {f.pair for f in feeders}
        extra = [(a, b) for a in ids for b in ids if a < b and frozenset((a, b)) not in pairs]
        a, b = rng.choice(extra)
        feeders.append(Feeder(a, b, 0.2, 0.2, 150.0))
    buses = {b: Bus(b, tuple(float(rng.choice((0, 5, 10, 20, 40))) for _ in range(3)),
                    tuple(float(rng.choice((0, 2, 5))) for _ in range(3))) for b in ids}
    g = rng.choice(ids)
    dgs = {g: DgUnit(g, float(rng.choice((60, 120, 300))), float(rng.choice((0, 0, 10, 50))),
                     100.0, -100.0, float(rng.choice((5, 20, 60))), 0.0, float(rng.choice((-10, 0, 20))))}
    ess = {}
    if rng.random() < 0.3:
        e = rng.choice(ids)
        ess = {e: EsUnit(e, 100.0, 30.0, 30.0, 0.9, 1.1, 0.1, 0.9)}
    return Network(buses, tuple(feeders), dgs, ess)


def random_instance(rng: random.Random, config: MilpConfig = SMALL_CONFIG, max_free: int = MAX_FREE):
    """``(instance, view, network)`` with at most ``max_free`` free binaries."""
    while True:
        net = random_network(rng)
        st = blackout_state(net, soc={b: 0.5 for b in net.ess})
        if rng.random() < 0.2:
            # Seed an impossible generation level; some instances must be infeasible.
            g = next(iter(net.dgs))
            st = replace(st, p_g={g: 5000.0})
        view = view_from_state(net, st)
        inst = build_model(view, net, SMALL_GRID, config)
        if len(inst.free_binaries()) <= max_free:
            return inst, view, net
