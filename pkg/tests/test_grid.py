import pytest

from edsrestore.grid import (Bus, DgUnit, EsUnit, Feeder, Network, NetworkState, TimeGrid,
                             blackout_state, check_islands, connected_components,
                             is_radial_islanding, validate_network)


def ring3(**kw) -> Network:
    buses = {b: Bus(b, (10.0, 0.0, 0.0), (2.0, 0.0, 0.0)) for b in (1, 2, 3)}
    feeders = (Feeder(1, 2, 0.1, 0.1, 100.0), Feeder(2, 3, 0.1, 0.1, 100.0),
               Feeder(1, 3, 0.1, 0.1, 100.0))
    return Network(buses, feeders, {1: DgUnit(1, 100.0, 0.0, 50.0, -50.0, 10.0, 0.0, 0.0)}, **kw)


def table_es(**kw) -> EsUnit:
    args = dict(bus=1, capacity=200.0, p_ch_max=50.0, p_dis_max=50.0, eta_ch=0.85, eta_dis=1.15,
                soc_min=0.1, soc_max=0.9)
    args.update(kw)
    return EsUnit(**args)


def test_valid_ring_has_no_violations():
    assert validate_network(ring3()) == []


def test_feeder_to_missing_bus_is_named():
    net = ring3()
    bad = Network(net.buses, net.feeders + (Feeder(1, 99, 0.1, 0.1, 10.0),), net.dgs)
    out = validate_network(bad)
    assert len(out) == 1 and "99" in out[0]


def test_soc_ordering_violation():
    out = validate_network(ring3().with_es(table_es(bus=2, soc_min=0.9, soc_max=0.1)))
    assert len(out) == 1 and "soc" in out[0].lower()


def test_voltage_band_and_negative_impedance():
    net = ring3(v_min=5.0)
    assert any("v_min" in p or "voltage" in p.lower() for p in validate_network(net))
    bad = Network(ring3().buses, (Feeder(1, 2, -0.1, 0.1, 100.0),))
    assert validate_network(bad)


@pytest.mark.parametrize("p_kw, expected", [
    (0.0, (-1.1 * 50, 0.6 * 50)),
    (15.0, (-1.0 * 50, 0.6 * 50)),   # 0.3 p.u.
    (45.0, (-0.5 * 50, 0.5 * 50)),   # 0.9 p.u.
])
def test_es_reactive_table(p_kw, expected):
    assert table_es().q_range(p_kw) == pytest.approx(expected)


def test_es_reactive_table_outside_range():
    with pytest.raises(ValueError):
        table_es().q_range(80.0)


def test_components_examples():
    links = [(1, 2), (2, 3), (3, 4), (5, 6)]
    assert connected_components(range(1, 7), links) == [[1, 2, 3, 4], [5, 6]]
    assert connected_components([9], []) == [[9]]
    k5 = [(a, b) for a in range(5) for b in range(a + 1, 5)]
    assert connected_components(range(5), k5) == [[0, 1, 2, 3, 4]]


def test_components_dangling_edge():
    with pytest.raises(ValueError):
        connected_components([1, 2], [(1, 3)])


def test_radiality_clauses():
    assert not check_islands([1, 2, 3], [(1, 2), (2, 3), (1, 3)], [1])
    assert check_islands([1, 2, 3], [(1, 2), (2, 3)], [1])
    rep = check_islands([2, 3], [(2, 3)], [1])
    assert not rep and rep.clause == "c"
    rep = check_islands([1], [(1, 2)], [1])
    assert rep.clause == "a"


def test_radiality_on_state():
    net = ring3()
    st = NetworkState(v={1: 1, 2: 1, 3: 1}, w={"1-2": 1, "2-3": 1})
    assert is_radial_islanding(net, st)
    st = NetworkState(v={1: 1, 2: 1, 3: 1}, w={"1-2": 1, "2-3": 1, "1-3": 1})
    assert is_radial_islanding(net, st).clause == "b"


def test_blackout_state():
    st = blackout_state(ring3(), unavailable_buses=[3], unavailable_feeders=["1-2"])
    assert st.avail_bus == {1: 1, 2: 1, 3: 0}
    assert st.avail_feeder["1-2"] == 0 and st.avail_feeder["2-3"] == 1
    assert st.totals() == {"sum_pg": 0.0, "sum_pl1": 0.0, "sum_pl2": 0.0, "sum_pl3": 0.0}


def test_time_grid():
    g = TimeGrid(0, 120, 5, 30)
    assert (g.n_intervals, g.n_control) == (24, 6)
    assert g.at(30).moment(2) == 40
    for bad in ((0, 120, 7, 30), (0, 120, 5, 120), (0, 120, 5, 0), (0, 120, 5, 32)):
        with pytest.raises(ValueError):
            TimeGrid(*bad)


def test_dg_ready_time():
    assert DgUnit(1, 1, 0, 1, -1, 1, 10.0, 15.0).ready_time() == 25.0
    assert DgUnit(1, 1, 0, 1, -1, 1, 10.0).ready_time() == float("inf")
