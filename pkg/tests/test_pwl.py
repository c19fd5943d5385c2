import random

import numpy as np
import pytest

from edsrestore.milp import MilpInstance, breakpoints, max_error, pwl_square, pwl_value, sampled_gap
from edsrestore.solvers import solve_bb


def test_chord_example():
    assert pwl_value(0.25, 1.0, 2) == pytest.approx(0.125)
    assert max_error(1.0, 2) == pytest.approx(0.0625)
    assert pwl_value(0.0, 3.0, 4) == 0.0


def test_exact_at_nodes():
    nodes = breakpoints(2.0, 3)
    assert len(nodes) == 7
    assert np.allclose(pwl_value(nodes, 2.0, 3), nodes**2)


def test_bad_bound():
    with pytest.raises(ValueError):
        breakpoints(0.0, 3)
    with pytest.raises(ValueError):
        breakpoints(1.0, 0)


def test_gap_within_bound():
    rng = random.Random(11)
    for _ in range(10):
        ybar, lam = rng.uniform(0.1, 500), rng.randint(1, 12)
        lo, hi = sampled_gap(ybar, lam)
        assert lo >= -1e-9 and hi <= max_error(ybar, lam) + 1e-9


@pytest.mark.parametrize("selectors", [True, False])
def test_rows_give_chord_at_minimum(selectors):
    # minimizing the expression of y**2 with y pinned recovers the chord
    for y in (-0.8, 0.1, 0.25, 0.9):
        inst = MilpInstance(sense="min")
        inst.add_var("y", lb=y, ub=y)
        expr = pwl_square(inst, "y", 1.0, 2, prefix="s", entity=(1,), selectors=selectors)
        inst.objective = expr
        sol = solve_bb(inst)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(float(pwl_value(y, 1.0, 2)), abs=1e-9)


def test_selectors_pin_the_chord_from_above():
    inst = MilpInstance(sense="max")
    inst.add_var("y", lb=0.25, ub=0.25)
    inst.objective = pwl_square(inst, "y", 1.0, 2, prefix="s", entity=(1,), selectors=True)
    assert solve_bb(inst).objective == pytest.approx(0.125)


def test_gate_off_forces_zero():
    inst = MilpInstance(sense="max")
    inst.add_var("y", lb=-1.0, ub=1.0)
    inst.add_var("g", kind="binary", lb=0, ub=0)
    inst.objective = pwl_square(inst, "y", 1.0, 2, prefix="s", entity=(1,), gate="g")
    sol = solve_bb(inst)
    assert sol.objective == pytest.approx(0.0) and sol.values["y"] == pytest.approx(0.0)
