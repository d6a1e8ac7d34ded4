"""Light dynamics: hand-trace oracles, bijectivity, twin cross-checks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from manhattan_pinball.configuration import constant, from_closed_sites, sample
from manhattan_pinball.geometry import UNIT, Direction, mirror_orientation
from manhattan_pinball.tracer import (
    Escape,
    RayState,
    default_max_steps,
    dump_trajectory,
    loads_trajectory,
    step,
    step_back,
    trace,
    trace_python,
    trace_summary,
    trajectory_metrics,
)

E, N, W, S = Direction.E, Direction.N, Direction.W, Direction.S


def test_step_hand_cases():
    c = from_closed_sites(5, [(1, 0), (1, -1)])
    # straight through an open site
    assert step(RayState((0, 0), E), from_closed_sites(5, [])) == RayState((1, 0), E)
    # (1, 0) is a NW mirror: east becomes south
    assert step(RayState((0, 0), E), c) == RayState((1, 0), S)
    # (1, -1) is a NE mirror: south becomes west
    assert step(RayState((1, 0), S), c) == RayState((1, -1), W)
    # (0, -1) open in c: continue west... from (1,-1) going W
    assert step(RayState((1, -1), W), c) == RayState((0, -1), W)


def test_step_escape():
    c = constant(2, False)
    with pytest.raises(Escape) as ei:
        step(RayState((2, 0), E), c)
    assert ei.value.state == RayState((2, 0), E)


def test_p1_orbit():
    c = constant(6, True)
    t = trace(c, RayState((0, 0), E))
    assert t.status == "closed"
    assert len(t.states) == 4
    assert t.visited == {(0, 0), (1, 0), (1, -1), (0, -1)}
    assert t.linf_diameter == 1
    assert t.containment == 2


def test_p1_orbit_universality():
    # at p = 1 every orbit is a 4-step loop around one face
    c = constant(8, True)
    for a in range(-4, 5):
        for b in range(-4, 5):
            for d in Direction:
                t = trace(c, RayState((a, b), d))
                assert t.status == "closed" and len(t.states) == 4
                assert t.linf_diameter == 1


def test_p0_escape_straight():
    c = constant(5, False)
    t = trace(c, RayState((0, 0), E))
    assert t.status == "escaped"
    assert [tuple(s) for s in t.states] == [(k, 0, 0) for k in range(6)]


def test_single_mirror_deflection():
    # NW mirror at (3, 0): the eastbound ray turns south and escapes
    c = from_closed_sites(4, [(3, 0)])
    t = trace(c, RayState((0, 0), E))
    assert t.status == "escaped"
    expect = [(0, 0, 0), (1, 0, 0), (2, 0, 0), (3, 0, 3), (3, -1, 3),
              (3, -2, 3), (3, -3, 3), (3, -4, 3)]
    assert [tuple(s) for s in t.states] == expect


def test_manhattan_consistency_along_trajectories():
    # outgoing directions always respect the one-way streets: row b is E for
    # even b and W for odd b; column a is N for even a and S for odd a
    for seed in range(10):
        c = sample(0.5, 10, seed=seed)
        t = trace(c, RayState((0, 0), E))
        for a, b, d in t.states:
            if d in (0, 2):
                assert d == (0 if b % 2 == 0 else 2), (a, b, d)
            else:
                assert d == (1 if a % 2 == 0 else 3), (a, b, d)


def test_trace_matches_python_twin():
    for seed in range(25):
        c = sample(0.45 + 0.01 * seed, 12, seed=seed)
        a = trace(c, RayState((0, 0), E))
        b = trace_python(c, RayState((0, 0), E), default_max_steps(12))
        assert a.status == b.status
        assert np.array_equal(a.states, b.states)
        assert (a.linf_diameter, a.containment) == (b.linf_diameter, b.containment)


def test_trace_summary_agrees_with_trace():
    for seed in range(10):
        c = sample(0.55, 10, seed=seed)
        t = trace(c, RayState((0, 0), E))
        status, nstates, diam, radius = trace_summary(c, RayState((0, 0), E))
        assert (status, nstates, diam, radius) == (
            t.status, len(t.states), t.linf_diameter, t.containment)


def test_trace_summary_abort_radius():
    c = constant(6, False)  # ray runs straight east, leaving Q_2 quickly
    status, _, _, radius = trace_summary(c, RayState((0, 0), E), abort_radius=2)
    assert status == "aborted"
    assert radius == 3


def test_budget_exhaustion():
    c = constant(6, False)
    t = trace(c, RayState((0, 0), E), max_steps=3)
    assert t.status == "budget_exceeded"
    assert len(t.states) == 4  # start plus three steps


@settings(max_examples=100, deadline=None)
@given(st.integers(-4, 4), st.integers(-4, 4), st.integers(0, 3), st.integers(0, 50))
def test_step_back_inverts_step(a, b, d, seed):
    c = sample(0.5, 6, seed=seed)
    s = RayState((a, b), Direction(d))
    try:
        nxt = step(s, c)
    except Escape:
        return
    assert step_back(nxt, c) == s


def test_trajectory_metrics():
    c = constant(4, True)
    t = trace(c, RayState((0, 0), E))
    assert trajectory_metrics(t) == (1, 2, True)


def test_start_outside_extent_rejected():
    with pytest.raises(ValueError):
        trace(constant(3, False), RayState((5, 0), E))


def test_dump_roundtrip():
    c = sample(0.5, 8, seed=4)
    t = trace(c, RayState((0, 0), E))
    t2 = loads_trajectory(dump_trajectory(t))
    assert t2.status == t.status
    assert np.array_equal(t2.states, t.states)
    assert (t2.linf_diameter, t2.containment) == (t.linf_diameter, t.containment)
