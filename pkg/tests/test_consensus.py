import csv
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edsrestore.consensus import (AgentVector, CommGraph, IdpConfig, IdpNotConverged, consensus_step,
                                  convergence_trace, metropolis_weights, require_converged, run_idp,
                                  write_trace_csv)
from edsrestore.grid import connected_components

FIG3_LINKS = [(1, 2), (2, 3), (3, 4), (2, 4), (4, 7), (5, 7), (5, 6)]


def test_metropolis_examples():
    w = metropolis_weights(CommGraph.build([1, 2, 3], [(1, 2), (2, 3)]))
    assert w[(1, 2)] == pytest.approx(1 / 3)
    assert w[(1, 1)] == pytest.approx(2 / 3)
    assert w[(2, 2)] == pytest.approx(1 / 3)
    assert metropolis_weights(CommGraph.build([4]))[(4, 4)] == 1.0
    w = metropolis_weights(CommGraph.build([1, 2], [(1, 2)]))
    assert w[(1, 2)] == w[(2, 1)] == w[(1, 1)] == w[(2, 2)] == 0.5


def test_consensus_step_examples():
    g = CommGraph.build([1, 2], [(1, 2)])
    vec = {1: AgentVector({(1, "x"): 2.0}, {1: 1.0}), 2: AgentVector({(1, "x"): 4.0}, {2: 1.0})}
    out = consensus_step(vec, metropolis_weights(g))
    assert out[1].entries[(1, "x")] == out[2].entries[(1, "x")] == 3.0

    g = CommGraph.build([1, 2, 3], [(1, 2), (2, 3)])
    vec = {a: AgentVector({(3, "x"): 6.0 if a == 3 else 0.0}, {a: 1.0}) for a in (1, 2, 3)}
    assert consensus_step(vec, metropolis_weights(g))[2].entries[(3, "x")] == pytest.approx(2.0)

    g = CommGraph.build([5])
    vec = {5: AgentVector({(5, "x"): 7.0}, {5: 1.0})}
    assert consensus_step(vec, metropolis_weights(g))[5].entries == {(5, "x"): 7.0}


def test_pair_reconstruction():
    run = run_idp(CommGraph.build([1, 2], [(1, 2)]), {1: {"L": 6.0}, 2: {}})
    assert run.converged
    for a in (1, 2):
        v = run.views[a]
        assert v.agent_count == 2 and v.field(1, "L") == pytest.approx(6.0)


def test_singleton_identity():
    run = run_idp(CommGraph.build([3]), {3: {"L": 4.5}})
    assert run.views[3].agent_count == 1 and run.views[3].field(3, "L") == 4.5
    assert convergence_trace(run)[3] == [1.0] * (run.rounds + 1)


def test_fig3_partition_and_isolation():
    agents = {a: a != 7 for a in range(1, 8)}
    run = run_idp(CommGraph.build(agents, FIG3_LINKS), {a: {"L": float(a)} for a in range(1, 7)})
    assert run.ccps() == [[1, 2, 3, 4], [5, 6]]
    left, right = run.views[1], run.views[5]
    assert {a for a, _ in left.global_state} == {1, 2, 3, 4}
    assert {a for a, _ in right.global_state} == {5, 6}


def test_symmetric_pair_trace():
    run = run_idp(CommGraph.build([1, 2], [(1, 2)]), {})
    series = convergence_trace(run)[1]
    assert series[-1] == pytest.approx(2.0)
    assert all(b >= a - 1e-15 for a, b in zip(series[1:], series[2:]))


def test_disconnected_singletons_trace():
    run = run_idp(CommGraph.build([1, 2]), {})
    assert convergence_trace(run) == {1: [1.0, 1.0], 2: [1.0, 1.0]}


def test_non_convergence_reported():
    g = CommGraph.build(range(1, 11), [(a, a + 1) for a in range(1, 10)])
    run = run_idp(g, {}, IdpConfig(k_max=3))
    assert not run.converged
    with pytest.raises(IdpNotConverged):
        require_converged(run)


def test_bad_links_rejected():
    with pytest.raises(ValueError):
        CommGraph.build([1, 2], [(1, 3)])
    with pytest.raises(ValueError):
        CommGraph.build([1], [(1, 1)])


def test_elapsed_is_rounds_times_latency():
    run = run_idp(CommGraph.build([1, 2, 3], [(1, 2), (2, 3)]), {}, IdpConfig(iteration_latency=2.5))
    assert run.elapsed_ms == run.rounds * 2.5
    assert run.views[1].elapsed_ms == run.rounds * 2.5


def test_trace_csv(tmp_path):
    run = run_idp(CommGraph.build([1, 2], [(1, 2)]), {})
    path = write_trace_csv(run, tmp_path / "t.csv")
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["round", "agent_id", "inverse_indicator"]
    assert len(rows) == 1 + 2 * (run.rounds + 1)


def test_deterministic_trace():
    rng = random.Random(3)
    g = CommGraph.build(range(12), [(a, rng.randrange(a)) for a in range(1, 12)])
    states = {a: {"x": rng.uniform(-5, 5)} for a in range(12)}
    a, b = run_idp(g, states), run_idp(g, states)
    assert a.trace.tobytes() == b.trace.tobytes()


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 15))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=25))
    edges = [(a, b) for a, b in edges if a != b]
    vals = draw(st.lists(st.floats(-1e3, 1e3), min_size=n, max_size=n))
    return n, edges, vals


@settings(max_examples=40, deadline=None)
@given(graphs())
def test_idp_matches_components_and_sums(case):
    n, edges, vals = case
    run = run_idp(CommGraph.build(range(n), edges), {a: {"x": vals[a]} for a in range(n)})
    assert run.converged
    comps = connected_components(range(n), edges)
    assert run.ccps() == comps
    for comp in comps:
        total = sum(vals[a] for a in comp)
        for a in comp:
            view = run.views[a]
            assert abs(run.trace[-1, a] - len(comp)) < 1e-6
            got = sum(view.field(b, "x") for b in comp)
            assert abs(got - total) <= 1e-6 * max(1.0, sum(abs(vals[b]) for b in comp))


def test_conservation_per_round():
    g = CommGraph.build(range(6), [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)])
    vec = {a: AgentVector.initial(a, {"x": float(a * a)}) for a in range(6)}
    w = metropolis_weights(g)
    for _ in range(20):
        vec = consensus_step(vec, w)
        for a in range(6):
            assert sum(v.entries.get((a, "x"), 0.0) for v in vec.values()) == pytest.approx(a * a, abs=1e-9)
            assert sum(v.indicator.get(a, 0.0) for v in vec.values()) == pytest.approx(1.0, abs=1e-12)
    assert np.isfinite(w[(0, 0)])
