import itertools

import pytest

from edsrestore.consensus import CommGraph, run_idp
from edsrestore.grid import Bus, DgUnit, EsUnit, Feeder, Network, TimeGrid, blackout_state, feeder_key
from edsrestore.milp import (MilpConfig, Schedule, build_model, ccp_sets, integer_fields,
                             publish_fields, vname, verify_schedule, view_from_state)
from edsrestore.solvers import enumerate_oracle, solve

from instances import SMALL_CONFIG, SMALL_GRID

FAST = MilpConfig(pwl_selectors=False, es_q_mode="conservative_fixed")


def path3(load=10.0) -> Network:
    buses = {b: Bus(b, (load, 0.0, 0.0), (load / 2, 0.0, 0.0)) for b in (1, 2, 3)}
    feeders = (Feeder(1, 2, 0.1, 0.1, 200.0), Feeder(2, 3, 0.1, 0.1, 200.0))
    return Network(buses, feeders, {1: DgUnit(1, 200.0, 0.0, 200.0, -200.0, 100.0, 0.0, 0.0)})


def triangle() -> Network:
    net = path3()
    return Network(net.buses, net.feeders + (Feeder(1, 3, 0.1, 0.1, 200.0),), net.dgs)


def build(net, grid=SMALL_GRID, config=FAST, state=None):
    view = view_from_state(net, state or blackout_state(net))
    return build_model(view, net, grid, config), view


def test_interval_count():
    inst, _ = build(path3(), TimeGrid(0, 120, 5, 30))
    assert inst.meta["n_intervals"] == 24
    for fam in ("v", "PG", "PL1"):
        assert sum(1 for v in inst.variables if v.family == fam and v.entity == (2,)) == 24


def test_every_row_is_tagged():
    inst, _ = build(path3().with_es(EsUnit(3, 100, 20, 20, 0.9, 1.1, 0.1, 0.9)),
                    config=MilpConfig())
    assert inst.problems() == []
    assert all(r.eq for r in inst.constraints)
    tags = {r.eq for r in inst.constraints}
    assert {"2", "3", "13", "20", "36", "51", "52"} <= tags


def test_no_loads_no_generation():
    net = Network({1: Bus(1), 2: Bus(2)}, (Feeder(1, 2, 0.1, 0.1, 10.0),))
    inst, _ = build(net)
    assert inst.flags["degenerate"]
    sol = solve(inst)
    assert sol.status == "optimal" and sol.objective == pytest.approx(0.0)
    assert all(abs(x) < 1e-9 for k, x in sol.values.items() if k.startswith(("P_", "Q_")))


def test_path_full_restoration():
    net = path3()
    inst, view = build(net)
    sol = solve(inst)
    assert sol.status == "optimal"
    for b in (1, 2, 3):
        assert sol.values[vname("PL1", (b,), 1)] == pytest.approx(10.0)
    for f in net.feeders:
        assert sol.values[vname("w", (f.i, f.j), 1)] == 1
    oracle = enumerate_oracle(inst)
    assert oracle.objective == pytest.approx(sol.objective, abs=1e-6)


def test_triangle_feasible_patterns_are_spanning_trees():
    net = triangle()
    feasible = []
    for pattern in itertools.product((0, 1), repeat=3):
        inst, _ = build(net)
        for b in (1, 2, 3):
            inst.fix(vname("v", (b,), 1), 1)
        for f, on in zip(net.feeders, pattern):
            inst.fix(vname("w", (f.i, f.j), 1), on)
        if enumerate_oracle(inst).status == "optimal":
            feasible.append(pattern)
    assert sorted(feasible) == [(0, 1, 1), (1, 0, 1), (1, 1, 0)]


def test_triangle_bb_matches_oracle():
    inst, _ = build(triangle())
    assert solve(inst, backend="bb").objective == pytest.approx(enumerate_oracle(inst).objective, abs=1e-6)


def test_fictitious_feeders_into_bus0_are_zero():
    inst, _ = build(triangle())
    sol = solve(inst)
    for v in inst.variables:
        if v.family == "wfd" and v.entity[-1] == 0:
            assert sol.values[v.name] == 0


def test_single_dg_no_feeders_carries_one_unit():
    net = Network({1: Bus(1, (5.0, 0, 0))}, (), {1: DgUnit(1, 50, 0, 10, -10, 50, 0, 0)})
    inst, _ = build(net)
    sol = solve(inst)
    assert sol.values[vname("vf", (0,), 1)] == 1
    assert sol.values[vname("H", (0, 1), 1)] == pytest.approx(1.0)


def test_dg_not_ready_cannot_produce():
    net = path3().with_dg(DgUnit(1, 200.0, 0.0, 200.0, -200.0, 100.0, 30.0, 0.0))
    inst, _ = build(net)
    sol = solve(inst)
    assert sol.objective == pytest.approx(0.0)


def test_es_reactive_gating():
    net = Network({1: Bus(1, (5.0, 0, 0), (1.0, 0, 0))}, (),
                  ess={1: EsUnit(1, 200, 50, 50, 0.85, 1.15, 0.1, 0.9, s_rated=50.0)})
    st = blackout_state(net, soc={1: 0.8})
    for mode in ("table_binary", "conservative_fixed"):
        inst, view = build(net, config=MilpConfig(es_q_mode=mode), state=st)
        sol = solve(inst)
        assert sol.status == "optimal"
        # out of use at the seeded dark interval
        assert sol.values[vname("QES", (1,), 0)] == pytest.approx(0.0)
        sched = Schedule.from_solution(inst, sol.values, sol.objective)
        assert verify_schedule(sched, view, net, SMALL_GRID, config=MilpConfig(es_q_mode=mode)).ok


def test_weight_scaling_scales_objective():
    inst, _ = build(path3())
    a = solve(inst).objective
    inst2, _ = build(path3(), config=FAST.scaled(3.0))
    assert solve(inst2).objective == pytest.approx(3 * a, rel=1e-9)


def test_ccp_sets_drop_unavailable():
    net = triangle()
    st = blackout_state(net, unavailable_buses=[3], unavailable_feeders=[feeder_key(1, 2)])
    sets = ccp_sets(view_from_state(net, st), net, SMALL_GRID)
    assert sets.buses == [1, 2]
    assert sets.feeders == []
    assert sets.live == {1}


def test_view_from_idp_equals_direct_view():
    net = path3()
    st = blackout_state(net)
    run = run_idp(CommGraph.build([1, 2, 3], [(1, 2), (2, 3)]),
                  {b: publish_fields(net, st, b) for b in (1, 2, 3)}, integer_fields=integer_fields(net))
    a = build_model(run.views[1], net, SMALL_GRID, SMALL_CONFIG)
    b = build_model(view_from_state(net, st), net, SMALL_GRID, SMALL_CONFIG)
    assert a.structurally_equal(b, rel=1e-9)


def test_continuity_in_optimal_schedule():
    net = path3()
    inst, _ = build(net, TimeGrid(0, 30, 5, 10))
    sol = solve(inst)
    sched = Schedule.from_solution(inst, sol.values, sol.objective)
    for fam in ("v", "w", "PL1", "PL2"):
        for row in sched.series[fam].values():
            assert all(b >= a - 1e-9 for a, b in zip(row, row[1:]))
