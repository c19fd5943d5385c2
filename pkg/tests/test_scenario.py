import copy
import json

import pytest

from edsrestore.grid import validate_network
from edsrestore.pipeline import idp_at, world_at
from edsrestore.scenario import (BUILDERS, DATA_DIR, VERSION, ScenarioError, builtin_scenarios,
                                 load_scenario, resolve_scenario, save_scenario, scenario_from_dict,
                                 scenario_to_dict)


@pytest.fixture(scope="module")
def ieee():
    return resolve_scenario("ieee123_mod")


def test_builtins_load():
    scs = builtin_scenarios()
    assert set(scs) == {"fig3_mas", "tri3", "path13", "ieee123_mod"}
    for sc in scs.values():
        assert sc.problems() == []


def test_data_files_match_builders():
    for name, make in BUILDERS.items():
        on_disk = json.loads((DATA_DIR / f"{name}.json").read_text())
        assert on_disk == json.loads(json.dumps(scenario_to_dict(make())))


def test_fig3_partition():
    sc = resolve_scenario("fig3_mas")
    assert len(sc.comm.agents) == 7 and not sc.comm.agents[7]
    _, run = idp_at(sc, 0.0)
    assert run.ccps() == [[1, 2, 3, 4], [5, 6]]


def test_tri3_fixture():
    sc = resolve_scenario("tri3")
    assert len(sc.network.feeders) == 3 and len(sc.network.dgs) == 1
    assert validate_network(sc.network) == []


def test_ieee123_resources(ieee):
    net = ieee.network
    assert len(net.buses) == 123
    assert validate_network(net) == []
    es = net.ess[61]
    assert (es.capacity, es.p_ch_max, es.p_dis_max, es.eta_ch, es.eta_dis) == (200.0, 50.0, 50.0, 0.85, 1.15)
    assert ieee.initial_state.soc[61] == 0.8
    dg = net.dgs[57]
    assert (dg.p_max, dg.t_syn, dg.t_start) == (300.0, 15.0, 0.0)


def test_ieee123_events(ieee):
    at60 = sorted(e.payload["bus"] for e in ieee.events if e.time == 60.0 and e.kind == "dg_discovered")
    assert at60 == [23, 78, 89]
    at30 = [e.payload for e in ieee.events if e.time == 30.0 and e.kind == "dg_discovered"]
    assert [(p["bus"], p["p_max"], p["t_start"], p["t_syn"]) for p in at30] == [(44, 150.0, 15.0, 10.0)]


def test_ieee123_ccp_sizes(ieee):
    _, run = idp_at(ieee, 0.0)
    assert run.converged
    assert sorted(len(c) for c in run.ccps()) == [6, 10, 13]
    assert all(any(b in ieee.network.dgs or b in ieee.network.ess for b in c) for c in run.ccps())


def test_ieee123_world_after_events(ieee):
    w = world_at(ieee, 60.0)
    assert {23, 44, 78, 89} <= set(w.network.dgs)


def test_roundtrip(tmp_path):
    for sc in builtin_scenarios().values():
        path = save_scenario(sc, tmp_path / f"{sc.name}.json")
        back = load_scenario(path)
        assert scenario_to_dict(back) == scenario_to_dict(sc)
        assert back.network == sc.network and back.events == sc.events and back.config == sc.config


def doc():
    return scenario_to_dict(resolve_scenario("tri3"))


def test_strict_rejects_unknown_keys():
    d = doc()
    d["network"]["buses"][0]["colour"] = "red"
    with pytest.raises(ScenarioError) as exc:
        scenario_from_dict(d)
    assert "colour" in str(exc.value) and "bus" in str(exc.value)
    assert scenario_from_dict(d, strict=False).name == "tri3"


def test_version_mismatch():
    d = doc()
    d["version"] = VERSION + 1
    with pytest.raises(ScenarioError, match="version"):
        scenario_from_dict(d)


def test_feeder_to_missing_bus():
    d = doc()
    d["network"]["feeders"].append({"i": 1, "j": 99, "r": 0.1, "x": 0.1, "i_max": 10.0})
    with pytest.raises(ScenarioError, match="99"):
        scenario_from_dict(d)


def test_bad_config_and_events():
    d = copy.deepcopy(doc())
    d["config"]["control_gap"] = 7.0
    with pytest.raises(ScenarioError, match="control gap"):
        scenario_from_dict(d)
    d = copy.deepcopy(doc())
    d["events"] = [{"time": 5.0, "kind": "feeder_repaired", "payload": {}}]
    with pytest.raises(ScenarioError, match="feeder"):
        scenario_from_dict(d)


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"format": ')
    with pytest.raises(ScenarioError, match="line 1"):
        load_scenario(p)


def test_unknown_name():
    with pytest.raises(ScenarioError):
        resolve_scenario("nowhere")


def test_state_shorthand():
    d = doc()
    d["state"] = {"unavailable_buses": [3], "unavailable_feeders": ["1-2"], "dg_start": {"1": 5.0}}
    sc = scenario_from_dict(d)
    assert sc.initial_state.avail_bus[3] == 0 and sc.initial_state.avail_feeder["1-2"] == 0
    assert sc.initial_state.dg_ready[1] == 5.0
