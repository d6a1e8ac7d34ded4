"""Lattice geometry for the Manhattan pinball model.

The percolation substrate is the tilted lattice: points (x + 1/2, y + 1/2)
with x, y integers and x - y even, joined by edges of length sqrt(2).  Every
such edge has an integer midpoint, and every integer point is the midpoint of
exactly one edge, so a "site" (integer pair) is the canonical key for an
edge.  Light moves on the integer grid along one-way streets: row b carries
direction E when b is even and W when b is odd; column a carries N when a is
even and S when a is odd.  A mirror on a closed edge swaps the horizontal and
vertical transit of its site.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum


class Direction(IntEnum):
    E = 0
    N = 1
    W = 2
    S = 3


class Orientation(IntEnum):
    NE = 0  # "/" mirror, edge of slope +1
    NW = 1  # "\" mirror, edge of slope -1


# Unit displacement per direction, indexed by Direction value.
UNIT = ((1, 0), (0, 1), (-1, 0), (0, -1))

# reflect tables: REFLECT[orientation][direction] -> direction.
# NE swaps E<->N and W<->S; NW swaps E<->S and W<->N.
_REFLECT = (
    (Direction.N, Direction.E, Direction.S, Direction.W),
    (Direction.S, Direction.W, Direction.N, Direction.E),
)

OPPOSITE = (Direction.W, Direction.S, Direction.E, Direction.N)


def is_tilted_vertex(point) -> bool:
    """True iff ``point`` (a pair of half-integer reals) is a tilted-lattice vertex."""
    u, v = point
    x = u - 0.5
    y = v - 0.5
    if x != int(x) or y != int(y):
        return False
    return (int(x) - int(y)) % 2 == 0


def mirror_orientation(site) -> Orientation:
    """Orientation of the unique tilted edge whose midpoint is ``site``."""
    a, b = site
    return Orientation.NE if (a - b) % 2 == 0 else Orientation.NW


def edge_for_site(site):
    """The tilted edge with midpoint ``site``, as an ordered pair of vertices.

    Endpoints differ from the site by (+-1/2, +-1/2); the west endpoint comes
    first.
    """
    a, b = site
    if (a - b) % 2 == 0:
        return ((a - 0.5, b - 0.5), (a + 0.5, b + 0.5))
    return ((a - 0.5, b + 0.5), (a + 0.5, b - 0.5))


def reflect(d: Direction, m: Orientation) -> Direction:
    """Direction after a right-angle deflection by a mirror of orientation ``m``."""
    return _REFLECT[m][d]


@dataclass(frozen=True)
class TiltedRegion:
    """One of the tilted regions at scale ``n`` used by the event detectors.

    kind "Q":  |x+y-1| <= n and |x-y| <= n   (tilted box centered at (1/2, 1/2))
    kind "T":  1 <= x+y-1 <= n and |x-y| <= 2n
    kinds "T1".."T4": the four rectangles ringing Q_n, long side of length 4n.
    """

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in ("Q", "T", "T1", "T2", "T3", "T4"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("region scale n must be >= 1")

    def contains(self, point) -> bool:
        x, y = point
        u = x + y - 1
        v = x - y
        n = self.n
        if self.kind == "Q":
            return abs(u) <= n and abs(v) <= n
        if self.kind == "T":
            return 1 <= u <= n and abs(v) <= 2 * n
        if self.kind == "T1":
            return n + 1 <= u <= 2 * n and abs(v) <= 2 * n
        if self.kind == "T2":
            return -2 * n <= u <= -n - 1 and abs(v) <= 2 * n
        if self.kind == "T3":
            return n + 1 <= v <= 2 * n and abs(u) <= 2 * n
        return -2 * n <= v <= -n - 1 and abs(u) <= 2 * n


def region_contains(region: TiltedRegion, point) -> bool:
    """Evaluate the region's defining inequalities on real coordinates."""
    return region.contains(point)


def q_radius(point) -> int:
    """Smallest m such that Q_m contains ``point`` (an integer site)."""
    a, b = point
    return max(abs(a + b - 1), abs(a - b))


def vertex_in_q(vertex, n) -> bool:
    """Q_n membership for a tilted vertex given as a real pair."""
    x, y = vertex
    return abs(x + y - 1) <= n and abs(x - y) <= n
