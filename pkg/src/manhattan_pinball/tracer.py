"""Deterministic light dynamics: step map, trajectory tracing, metrics.

The ray state is (site just departed, outgoing direction); the origin ray is
((0, 0), E).  The forward map is a bijection on states, so every trajectory
is either a closed orbit or leaves the extent.  The hot loop is compiled with
numba; a pure-python twin is kept for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .configuration import Configuration
from .geometry import UNIT, Direction, mirror_orientation, reflect

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        def deco(f):
            return f
        return deco if not (args and callable(args[0])) else args[0]


class RayState(NamedTuple):
    site: tuple
    dir: Direction


class Escape(Exception):
    """Raised by ``step`` when the next site lies outside the extent.

    Carries the exiting state (last in-extent state) in ``state``.
    """

    def __init__(self, state: RayState):
        super().__init__(f"ray escapes from {state}")
        self.state = state


def step(s: RayState, c: Configuration) -> RayState:
    """One move of the light ray (reference implementation)."""
    da, db = UNIT[s.dir]
    na, nb = s.site[0] + da, s.site[1] + db
    if not c.in_extent((na, nb)):
        raise Escape(s)
    if c.closed_at((na, nb)):
        nd = reflect(s.dir, mirror_orientation((na, nb)))
    else:
        nd = s.dir
    return RayState((na, nb), nd)


def step_back(s: RayState, c: Configuration) -> RayState:
    """Inverse of ``step`` (the dynamics is a bijection on states)."""
    d = reflect(s.dir, mirror_orientation(s.site)) if c.closed_at(s.site) else s.dir
    da, db = UNIT[d]
    pa, pb = s.site[0] - da, s.site[1] - db
    if not c.in_extent((pa, pb)):
        raise Escape(s)
    return RayState((pa, pb), d)


_CLOSED, _ESCAPED, _BUDGET, _REPEAT, _ABORTED = 0, 1, 2, 3, 4

_STATUS_NAMES = {_CLOSED: "closed", _ESCAPED: "escaped", _BUDGET: "budget_exceeded"}


@njit(cache=True)
def _trace_kernel(closed, M, a0, b0, d0, max_steps, abort_radius, states, store):
    W = 2 * M + 1
    visited = np.zeros(W * W, dtype=np.uint8)
    a, b, d = a0, b0, d0
    visited[(a0 + M) * W + (b0 + M)] = np.uint8(1 << d0)
    if store:
        states[0, 0] = a0
        states[0, 1] = b0
        states[0, 2] = d0
    n = 1
    steps = 0
    mina = maxa = a0
    minb = maxb = b0
    radius = max(abs(a0 + b0 - 1), abs(a0 - b0))
    status = _BUDGET
    while steps < max_steps:
        if d == 0:
            na, nb = a + 1, b
        elif d == 1:
            na, nb = a, b + 1
        elif d == 2:
            na, nb = a - 1, b
        else:
            na, nb = a, b - 1
        if na < -M or na > M or nb < -M or nb > M:
            status = _ESCAPED
            break
        if closed[na + M, nb + M]:
            nd = (d ^ 1) if (na - nb) % 2 == 0 else (3 - d)
        else:
            nd = d
        steps += 1
        if na == a0 and nb == b0 and nd == d0:
            status = _CLOSED
            break
        idx = (na + M) * W + (nb + M)
        mask = np.uint8(1 << nd)
        if visited[idx] & mask:
            status = _REPEAT
            break
        visited[idx] |= mask
        if store:
            states[n, 0] = na
            states[n, 1] = nb
            states[n, 2] = nd
        n += 1
        if na < mina:
            mina = na
        elif na > maxa:
            maxa = na
        if nb < minb:
            minb = nb
        elif nb > maxb:
            maxb = nb
        r = max(abs(na + nb - 1), abs(na - nb))
        if r > radius:
            radius = r
            if abort_radius >= 0 and radius > abort_radius:
                status = _ABORTED
                break
        a, b, d = na, nb, nd
    diam = max(maxa - mina, maxb - minb)
    return status, n, diam, radius


@dataclass(frozen=True)
class Trajectory:
    """Traced light path with closure status and containment metrics."""

    start: RayState
    states: np.ndarray  # (n, 3) int32 rows of (a, b, dir)
    status: str
    linf_diameter: int
    containment: int  # minimal m with all visited sites in Q_m

    def __len__(self):
        return len(self.states)

    def state(self, i) -> RayState:
        a, b, d = self.states[i]
        return RayState((int(a), int(b)), Direction(int(d)))

    @property
    def visited(self):
        """Set of visited sites, start included."""
        return {(int(a), int(b)) for a, b in self.states[:, :2]}

    def contained_in(self, m: int) -> bool:
        return self.containment <= m


def default_max_steps(M: int) -> int:
    return 16 * (2 * M + 1) ** 2


def trace(c: Configuration, start: RayState = RayState((0, 0), Direction.E),
          max_steps: int | None = None) -> Trajectory:
    """Iterate the step map until closure, escape, or step budget."""
    if not c.in_extent(start.site):
        raise ValueError("start site outside extent")
    if max_steps is None:
        max_steps = default_max_steps(c.extent)
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    W = 2 * c.extent + 1
    cap = min(max_steps, 4 * W * W) + 1
    states = np.empty((cap, 3), dtype=np.int32)
    status, n, diam, radius = _trace_kernel(
        c.closed, c.extent, start.site[0], start.site[1], int(start.dir),
        max_steps, -1, states, True,
    )
    if status == _REPEAT:
        raise AssertionError("non-start state repeated: dynamics not injective")
    out = states[:n].copy()
    out.flags.writeable = False
    return Trajectory(
        start=start,
        states=out,
        status=_STATUS_NAMES[status],
        linf_diameter=int(diam),
        containment=int(radius),
    )


def trace_summary(c: Configuration, start: RayState = RayState((0, 0), Direction.E),
                  max_steps: int | None = None, abort_radius: int = -1):
    """(status, steps, linf_diameter, containment) without storing states.

    ``abort_radius >= 0`` stops early with status 'aborted' once the
    containment radius exceeds it; used by event estimators that only care
    about closure within Q_n.
    """
    if max_steps is None:
        max_steps = default_max_steps(c.extent)
    dummy = np.empty((1, 3), dtype=np.int32)
    status, n, diam, radius = _trace_kernel(
        c.closed, c.extent, start.site[0], start.site[1], int(start.dir),
        max_steps, abort_radius, dummy, False,
    )
    if status == _REPEAT:
        raise AssertionError("non-start state repeated: dynamics not injective")
    name = _STATUS_NAMES.get(status, "aborted")
    return name, int(n), int(diam), int(radius)


def trace_python(c: Configuration, start: RayState, max_steps: int) -> Trajectory:
    """Pure-python twin of ``trace``, for cross-checks in tests."""
    states = [start]
    seen = {start}
    s = start
    status = "budget_exceeded"
    for _ in range(max_steps):
        try:
            s = step(s, c)
        except Escape:
            status = "escaped"
            break
        if s == start:
            status = "closed"
            break
        assert s not in seen, "non-start state repeated"
        seen.add(s)
        states.append(s)
    arr = np.array([[a, b, int(d)] for (a, b), d in states], dtype=np.int32)
    sites = arr[:, :2]
    diam = int(max(np.ptp(sites[:, 0]), np.ptp(sites[:, 1])))
    radius = int(np.max(np.maximum(np.abs(sites[:, 0] + sites[:, 1] - 1),
                                   np.abs(sites[:, 0] - sites[:, 1]))))
    return Trajectory(start=start, states=arr, status=status,
                      linf_diameter=diam, containment=radius)


def trajectory_metrics(t: Trajectory):
    """(linf_diameter, minimal m with L inside Q_m, closed flag)."""
    if len(t.states) == 0:
        raise ValueError("trajectory has no states")
    return t.linf_diameter, t.containment, t.status == "closed"


# Trajectory dump format: header with status and metrics, one state per line.

def dump_trajectory(t: Trajectory) -> str:
    lines = [
        "manhattan-pinball trajectory v1",
        f"status {t.status}",
        f"states {len(t.states)}",
        f"linf_diameter {t.linf_diameter}",
        f"containment {t.containment}",
    ]
    for a, b, d in t.states:
        lines.append(f"{a} {b} {Direction(int(d)).name}")
    return "\n".join(lines) + "\n"


def loads_trajectory(text: str) -> Trajectory:
    from .errors import ConfigParseError

    lines = text.splitlines()
    if not lines or lines[0] != "manhattan-pinball trajectory v1":
        raise ConfigParseError("missing trajectory header", line=1)
    meta = {}
    for i, key in enumerate(("status", "states", "linf_diameter", "containment")):
        parts = lines[i + 1].split()
        if len(parts) != 2 or parts[0] != key:
            raise ConfigParseError(f"expected '{key} ...'", line=i + 2)
        meta[key] = parts[1]
    n = int(meta["states"])
    if len(lines) != 5 + n:
        raise ConfigParseError("state count does not match header", line=len(lines))
    rows = []
    for lineno, line in enumerate(lines[5:], start=6):
        a, b, d = line.split()
        rows.append([int(a), int(b), int(Direction[d])])
    arr = np.array(rows, dtype=np.int32).reshape(n, 3)
    arr.flags.writeable = False
    start = RayState((int(arr[0, 0]), int(arr[0, 1])), Direction(int(arr[0, 2])))
    return Trajectory(start=start, states=arr, status=meta["status"],
                      linf_diameter=int(meta["linf_diameter"]),
                      containment=int(meta["containment"]))
