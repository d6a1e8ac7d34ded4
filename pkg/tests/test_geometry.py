"""Geometry oracles: independent edge enumeration and reflection algebra."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from manhattan_pinball.geometry import (
    OPPOSITE,
    UNIT,
    Direction,
    Orientation,
    TiltedRegion,
    edge_for_site,
    is_tilted_vertex,
    mirror_orientation,
    q_radius,
    reflect,
    region_contains,
    vertex_in_q,
)

W = 6  # window half-width for brute enumeration


def brute_edges(w):
    """All tilted edges in a window, from first principles.

    Vertices are (x + 1/2, y + 1/2) with x - y even; edges join vertices at
    offset (+-1, +-1).
    """
    verts = {
        (x + 0.5, y + 0.5)
        for x in range(-w, w + 1)
        for y in range(-w, w + 1)
        if (x - y) % 2 == 0
    }
    edges = set()
    for v in verts:
        for dx, dy in ((1, 1), (1, -1)):
            u = (v[0] + dx, v[1] + dy)
            if u in verts:
                edges.add(frozenset((v, u)))
    return edges


def test_every_site_is_midpoint_of_exactly_one_edge():
    edges = brute_edges(W)
    midpoints = {}
    for e in edges:
        (x1, y1), (x2, y2) = sorted(e)
        mid = ((x1 + x2) / 2, (y1 + y2) / 2)
        assert mid == (int(mid[0]), int(mid[1]))  # integer midpoint
        assert mid not in midpoints
        midpoints[mid] = e
    # every interior integer point appears
    for a in range(-W + 1, W):
        for b in range(-W + 1, W):
            assert (a, b) in midpoints


def test_edge_for_site_matches_brute_enumeration():
    edges = brute_edges(W)
    by_mid = {}
    for e in edges:
        (x1, y1), (x2, y2) = sorted(e)
        by_mid[((x1 + x2) / 2, (y1 + y2) / 2)] = e
    for a in range(-W + 1, W):
        for b in range(-W + 1, W):
            got = edge_for_site((a, b))
            assert frozenset(got) == by_mid[(a, b)]
            # west endpoint first
            assert got[0][0] < got[1][0]
            for v in got:
                assert is_tilted_vertex(v)


def test_orientation_matches_edge_slope():
    for a in range(-5, 6):
        for b in range(-5, 6):
            (x1, y1), (x2, y2) = edge_for_site((a, b))
            slope = (y2 - y1) / (x2 - x1)
            expected = Orientation.NE if slope > 0 else Orientation.NW
            assert mirror_orientation((a, b)) == expected
            assert mirror_orientation((a, b)) == ((a - b) % 2)


def _reflect_by_vectors(d, m):
    # independent oracle: reflect the unit vector across the mirror line,
    # y = x for NE and y = -x for NW
    dx, dy = UNIT[d]
    rx, ry = (dy, dx) if m == Orientation.NE else (-dy, -dx)
    return Direction(UNIT.index((rx, ry)))


def test_reflect_table_against_vector_oracle():
    for d in Direction:
        for m in Orientation:
            assert reflect(d, m) == _reflect_by_vectors(d, m)
            assert reflect(reflect(d, m), m) == d  # involution


def test_opposite_table():
    for d in Direction:
        dx, dy = UNIT[d]
        assert UNIT[OPPOSITE[d]] == (-dx, -dy)


def test_region_membership_examples():
    # Q_n is the tilted box centered at (1/2, 1/2)
    q3 = TiltedRegion("Q", 3)
    assert q3.contains((0.5, 0.5))
    assert q3.contains((2, 2))  # u = 3, v = 0
    assert not q3.contains((3, 3))  # u = 5
    assert not q3.contains((2.5, -1.5))  # v = 4
    # T_n: 1 <= u <= n, |v| <= 2n
    t4 = TiltedRegion("T", 4)
    assert t4.contains((1, 1)) and t4.contains((2.5, 2.5))
    assert not t4.contains((0.5, 0.5))  # u = 0
    assert not t4.contains((5, -4.5))  # v = 9.5
    # the four ring rectangles at n = 4
    assert TiltedRegion("T1", 4).contains((4, 2))  # u = 5, v = 2
    assert not TiltedRegion("T1", 4).contains((2, 2))
    assert TiltedRegion("T2", 4).contains((-3, -1))  # u = -5
    assert TiltedRegion("T3", 4).contains((5, -2))  # v = 7, u = 2
    assert TiltedRegion("T4", 4).contains((-2, 5))  # v = -7, u = 2
    assert region_contains(TiltedRegion("T4", 4), (-2, 5))


def test_t2_inequalities():
    # u = x + y - 1 must lie in [-8, -5] for T2 at n = 4
    r = TiltedRegion("T2", 4)
    assert not r.contains((-3, 0))  # u = -4, too shallow
    assert r.contains((-3, -1))  # u = -5, boundary
    assert not r.contains((-4, -4))  # u = -9, too deep
    assert not r.contains((-5, -4))  # u = -10


def test_region_kind_validation():
    with pytest.raises(ValueError):
        TiltedRegion("X", 3)
    with pytest.raises(ValueError):
        TiltedRegion("Q", 0)


@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(1, 15))
def test_q_radius_consistent_with_membership(a, b, n):
    r = q_radius((a, b))
    assert TiltedRegion("Q", n).contains((a, b)) == (r <= n)
    if r >= 1:
        assert TiltedRegion("Q", r).contains((a, b))
        if r >= 2:
            assert not TiltedRegion("Q", r - 1).contains((a, b))


@given(st.integers(1, 12), st.floats(-30, 30), st.floats(-30, 30))
def test_region_nesting(n, x, y):
    if TiltedRegion("Q", n).contains((x, y)):
        assert TiltedRegion("Q", n + 1).contains((x, y))


@given(st.integers(-15, 15), st.integers(-15, 15), st.integers(1, 10))
def test_vertex_in_q_agrees_with_region(i, j, n):
    v = (i + 0.5, j + 0.5)
    assert vertex_in_q(v, n) == TiltedRegion("Q", n).contains(v)
