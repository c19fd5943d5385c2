import logging
from dataclasses import replace

import pytest

from edsrestore.consensus import CommGraph
from edsrestore.grid import Bus, DgUnit, Feeder, Network, blackout_state
from edsrestore.rolling import Event, World, apply_event, inject_events, isolated_dg_autostart

TABLE_VI = {"bus": 44, "p_max": 150.0, "p_min": 16.7, "q_max": 100.0, "q_min": -100.0,
            "ramp_rate": 8.3, "t_syn": 10.0, "t_start": 15.0}


def world(dgs=None, links=((1, 2),), agents=(1, 2, 3)) -> World:
    buses = {b: Bus(b, (5.0, 0, 0)) for b in (1, 2, 3, 44)}
    net = Network(buses, (Feeder(1, 2, 0.1, 0.1, 100), Feeder(2, 3, 0.1, 0.1, 100)), dgs or {})
    comm = CommGraph.build({b: b in agents for b in buses}, links)
    return World(net, blackout_state(net), comm)


def test_table_vi_dg_is_ready_in_the_next_horizon():
    w = world()
    inject_events(w, [Event(30.0, "dg_discovered", TABLE_VI)], 30.0)
    dg = w.network.dgs[44]
    assert dg.ready_time() == 25.0 <= 30.0
    assert w.state.dg_ready[44] == 15.0
    assert w.comm.agents[44] and w.state.avail_bus[44] == 1


def test_duplicate_dg_rejected():
    w = world()
    apply_event(w, Event(0.0, "dg_discovered", TABLE_VI))
    with pytest.raises(ValueError):
        apply_event(w, Event(5.0, "dg_discovered", TABLE_VI))


def test_repair_of_available_feeder_is_a_warning(caplog):
    w = world()
    before = w.state
    with caplog.at_level(logging.WARNING):
        apply_event(w, Event(0.0, "feeder_repaired", {"feeder": "1-2"}))
    assert w.state is before
    assert "already available" in caplog.text


def test_feeder_repair_and_unknown_feeder():
    w = world()
    w.state = blackout_state(w.network, unavailable_feeders=["2-3"])
    apply_event(w, Event(0.0, "feeder_repaired", {"feeder": "2-3"}))
    assert w.state.avail_feeder["2-3"] == 1
    with pytest.raises(KeyError):
        apply_event(w, Event(0.0, "feeder_repaired", {"feeder": "7-9"}))


def test_empty_event_list_is_identity():
    w = world()
    st, comm, net = w.state, w.comm, w.network
    assert inject_events(w, [], 10.0) == []
    assert (w.state, w.comm, w.network) == (st, comm, net)


def test_future_event_rejected():
    with pytest.raises(ValueError):
        inject_events(world(), [Event(40.0, "bus_repaired", {"bus": 1})], 30.0)


def test_payload_schema_checked():
    with pytest.raises(ValueError):
        Event(0.0, "dg_discovered", {"bus": 3})
    with pytest.raises(ValueError):
        Event(-1.0, "link_restored", {"a": 1, "b": 2})
    with pytest.raises(ValueError):
        Event(0.0, "meteor", {})


def test_agent_and_link_restoration():
    w = world(links=(), agents=(1,))
    inject_events(w, [Event(0.0, "agent_restored", {"agents": [2, 3]}),
                      Event(0.0, "link_restored", {"a": 2, "b": 3})], 0.0)
    assert w.comm.available == [1, 2, 3]
    assert w.comm.active_links() == [(2, 3)]


def test_load_scaling_caps_restored_load():
    w = world()
    w.state = replace(w.state, pl={1: (5.0, 0.0, 0.0)})
    apply_event(w, Event(0.0, "load_scaled", {"factor": 0.5, "bus": 1}))
    assert w.network.buses[1].load_p == (2.5, 0.0, 0.0)
    assert w.state.pl[1] == (2.5, 0.0, 0.0)


def test_isolated_dg_autostarts():
    dg = DgUnit(3, 100.0, 0.0, 50.0, -50.0, 10.0, 10.0, None)
    w = world(dgs={3: dg})
    assert isolated_dg_autostart(w, 0.0) == [3]
    ready_at = w.state.dg_ready[3] + dg.t_syn
    assert ready_at == 10.0


def test_connected_dg_and_isolated_plain_agent_untouched():
    dg = DgUnit(1, 100.0, 0.0, 50.0, -50.0, 10.0, 10.0, None)
    w = world(dgs={1: dg})
    assert isolated_dg_autostart(w, 0.0) == []
    assert w.state.dg_ready[1] is None


def test_external_supply_flag():
    w = world()
    apply_event(w, Event(50.0, "external_supply", {}))
    assert w.external_supply
