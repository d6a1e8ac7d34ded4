"""Detectors for the percolation events on the tilted lattice.

Events, from local to global:
  * radial closed path: (1/2, 1/2) joined by closed edges to a vertex
    outside Q_n.
  * rectangle crossing: a closed path inside a tilted rectangle joining its
    two short sides (the long-direction crossing).
  * surrounding circuit, exact: a closed circuit inside Q_2n with Q_n in its
    interior, detected by parity of crossings of a fixed cut ray on a doubled
    cover of the closed graph.
  * surrounding circuit, four-rectangle: the sufficient construction from
    four long crossings.
  * dual crosscheck: the planar-dual reformulation (no open face path from
    the center to outside Q_2n); must agree with the exact detector.

Vertices are indexed by integer pairs (i, j) with i - j even, standing for
the tilted vertex (i + 1/2, j + 1/2).  Faces of the tilted lattice are
indexed by (k, l) with k - l odd, standing for the face centered at
(k + 1/2, l + 1/2).  The cut ray is {(x, 1) : x > 1/2}: a tilted edge with
midpoint site (a, b) crosses it iff b == 1 and a >= 1.  No vertex lies on
the line y = 1, and winding parity about any point of the central block is
the parity of the ray crossings.

Bulk detection builds a static edge catalogue per (extent, n) once, masks it
with the sample's closed field, and runs scipy connected components; witness
construction is a separate deterministic breadth-first search used at desk
scale.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .configuration import Configuration

__all__ = [
    "EventResult",
    "radial_closed_path",
    "rect_crossing",
    "surrounding_circuit_exact",
    "surrounding_circuit_4rect",
    "dual_crosscheck",
]


@dataclass(frozen=True)
class EventResult:
    holds: bool
    # When holds: list of tilted vertices (real pairs) forming the path or
    # circuit.  When not (exact detector only): list of face centers forming
    # the blocking dual path, or None if no witness was requested.
    witness: list | None = None
    event: str = ""


# ---------------------------------------------------------------------------
# static catalogues
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _site_endpoints(M):
    """Endpoint vertex indices (i, j) for every site in the extent, flattened."""
    rng = np.arange(-M, M + 1, dtype=np.int32)
    A, B = np.meshgrid(rng, rng, indexing="ij")
    A = A.ravel()
    B = B.ravel()
    ne = (A - B) % 2 == 0
    i1 = A - 1
    j1 = np.where(ne, B - 1, B)
    i2 = A
    j2 = np.where(ne, B, B - 1)
    site_flat = (A + M) * (2 * M + 1) + (B + M)
    return A, B, site_flat, i1, j1, i2, j2


def _vid(i, j, L):
    return (i + L) * (2 * L + 1) + (j + L)


def _in_q(i, j, n):
    return (np.abs(i + j) <= n) & (np.abs(i - j) <= n)


@lru_cache(maxsize=64)
def _radial_static(M, n):
    A, B, site_flat, i1, j1, i2, j2 = _site_endpoints(M)
    L = M + 1
    n_nodes = (2 * L + 1) ** 2
    e1 = _vid(i1, j1, L)
    e2 = _vid(i2, j2, L)
    rng = np.arange(-L, L + 1, dtype=np.int32)
    I, J = np.meshgrid(rng, rng, indexing="ij")
    outside = (~_in_q(I, J, n)) & ((I - J) % 2 == 0)
    return site_flat, e1, e2, n_nodes, _vid(0, 0, L), outside.ravel()


_RECT_KINDS = ("T", "T1", "T2", "T3", "T4")


def _rect_region(kind, i, j, n):
    u = i + j
    v = i - j
    if kind == "T":
        return (1 <= u) & (u <= n) & (np.abs(v) <= 2 * n)
    if kind == "T1":
        return (n + 1 <= u) & (u <= 2 * n) & (np.abs(v) <= 2 * n)
    if kind == "T2":
        return (-2 * n <= u) & (u <= -n - 1) & (np.abs(v) <= 2 * n)
    if kind == "T3":
        return (n + 1 <= v) & (v <= 2 * n) & (np.abs(u) <= 2 * n)
    return (-2 * n <= v) & (v <= -n - 1) & (np.abs(u) <= 2 * n)


def _rect_sides(kind, i, j, n):
    # the two ends of the long direction
    coord = i - j if kind in ("T", "T1", "T2") else i + j
    return coord == -2 * n, coord == 2 * n


def rect_min_extent(n, which):
    return (3 * n) // 2 + 2 if which == "T" else 2 * n + 1


@lru_cache(maxsize=64)
def _rect_static(M, n, kind):
    A, B, site_flat, i1, j1, i2, j2 = _site_endpoints(M)
    L = M + 1
    in1 = _rect_region(kind, i1, j1, n)
    in2 = _rect_region(kind, i2, j2, n)
    keep = in1 & in2
    rng = np.arange(-L, L + 1, dtype=np.int32)
    I, J = np.meshgrid(rng, rng, indexing="ij")
    vertex_ok = ((I - J) % 2 == 0) & _rect_region(kind, I, J, n)
    sA, sB = _rect_sides(kind, I, J, n)
    side_a = np.flatnonzero((vertex_ok & sA).ravel())
    side_b = np.flatnonzero((vertex_ok & sB).ravel())
    return (
        site_flat[keep],
        _vid(i1, j1, L)[keep],
        _vid(i2, j2, L)[keep],
        (2 * L + 1) ** 2,
        side_a,
        side_b,
    )


@lru_cache(maxsize=64)
def _annulus_static(M, n):
    """Usable-edge catalogue for the circuit detectors.

    Usable = both endpoints in Q_2n and neither endpoint in Q_n; the closed
    state is applied per sample.  Includes the cut-ray crossing flag.
    """
    A, B, site_flat, i1, j1, i2, j2 = _site_endpoints(M)
    L = M + 1
    keep = (
        _in_q(i1, j1, 2 * n)
        & _in_q(i2, j2, 2 * n)
        & ~_in_q(i1, j1, n)
        & ~_in_q(i2, j2, n)
    )
    cross = ((B == 1) & (A >= 1))[keep]
    return (
        site_flat[keep],
        _vid(i1, j1, L)[keep],
        _vid(i2, j2, L)[keep],
        (2 * L + 1) ** 2,
        cross.astype(np.int64),
    )


@lru_cache(maxsize=64)
def _dual_static(M, n):
    """Face adjacency catalogue for the dual crosscheck.

    A site (a, b) separates faces (a, b-1) / (a-1, b) when its edge is NE and
    (a, b) / (a-1, b-1) when NW.  A dual step across a site is blocked iff
    the site's edge is usable (closed and structurally eligible for the
    circuit); the closed state is applied per sample.
    """
    A, B, site_flat, i1, j1, i2, j2 = _site_endpoints(M)
    structural = (
        _in_q(i1, j1, 2 * n)
        & _in_q(i2, j2, 2 * n)
        & ~_in_q(i1, j1, n)
        & ~_in_q(i2, j2, n)
    )
    ne = (A - B) % 2 == 0
    k1 = A
    l1 = np.where(ne, B - 1, B)
    k2 = A - 1
    l2 = np.where(ne, B, B - 1)
    F = M + 1
    f1 = _vid(k1, l1, F)
    f2 = _vid(k2, l2, F)
    start = _vid(0, -1, F)
    rng = np.arange(-F, F + 1, dtype=np.int32)
    K, Lg = np.meshgrid(rng, rng, indexing="ij")
    is_face = (K - Lg) % 2 != 0
    far = (np.abs(K + Lg) > 2 * n) | (np.abs(K - Lg) > 2 * n)
    targets = np.flatnonzero((is_face & far).ravel())
    return site_flat, f1, f2, (2 * F + 1) ** 2, structural, start, targets


def _components(r, c, n_nodes):
    g = coo_matrix(
        (np.ones(len(r), dtype=np.int8), (r, c)), shape=(n_nodes, n_nodes)
    )
    _, labels = connected_components(g, directed=False)
    return labels


# ---------------------------------------------------------------------------
# witness search (desk scale, deterministic)
# ---------------------------------------------------------------------------


def _closed_neighbors(c, i, j):
    """Closed-edge neighbors of vertex (i, j), in lexicographic order."""
    M = c.extent
    out = []
    for di, dj in ((-1, -1), (-1, 1), (1, -1), (1, 1)):
        # edge between (i, j) and (i+di, j+dj); its midpoint site:
        a = i + (di + 1) // 2
        b = j + (dj + 1) // 2
        if abs(a) > M or abs(b) > M:
            continue
        if c.closed_at((a, b)):
            out.append((i + di, j + dj))
    return out


def _bfs_path(c, sources, goal_pred, region_pred):
    """Deterministic BFS over closed edges; returns vertex path or None."""
    parent = {s: None for s in sources}
    queue = deque(sorted(sources))
    while queue:
        v = queue.popleft()
        if goal_pred(v):
            path = []
            while v is not None:
                path.append(v)
                v = parent[v]
            path.reverse()
            return path
        for w in _closed_neighbors(c, *v):
            if w not in parent and region_pred(w):
                parent[w] = v
                queue.append(w)
    # sources may already satisfy the goal even when isolated
    return None


def _vertex_real(v):
    return (v[0] + 0.5, v[1] + 0.5)


# ---------------------------------------------------------------------------
# detectors
# ---------------------------------------------------------------------------


def radial_closed_path(c: Configuration, n: int, witness: bool = False) -> EventResult:
    """Event A_n: closed path from (1/2, 1/2) to some vertex outside Q_n."""
    if c.extent < n + 2:
        raise ValueError(f"extent {c.extent} does not cover Q_{n + 1}")
    site_flat, e1, e2, n_nodes, start, outside = _radial_static(c.extent, n)
    mask = c.closed.ravel()[site_flat]
    labels = _components(e1[mask], e2[mask], n_nodes)
    hit = outside & (labels == labels[start])
    holds = bool(hit.any())
    w = None
    if witness and holds:
        path = _bfs_path(
            c,
            [(0, 0)],
            lambda v: not (abs(v[0] + v[1]) <= n and abs(v[0] - v[1]) <= n),
            lambda v: True,
        )
        w = [_vertex_real(v) for v in path]
    return EventResult(holds=holds, witness=w, event=f"A_{n}")


def rect_crossing(c: Configuration, n: int, which: str = "T",
                  witness: bool = False) -> EventResult:
    """Event A'_n (which='T') or one of the four rectangle crossings."""
    if which not in _RECT_KINDS:
        raise ValueError(f"unknown rectangle {which!r}")
    if c.extent < rect_min_extent(n, which):
        raise ValueError(f"extent {c.extent} does not cover {which} at n={n}")
    site_flat, e1, e2, n_nodes, side_a, side_b = _rect_static(c.extent, n, which)
    mask = c.closed.ravel()[site_flat]
    labels = _components(e1[mask], e2[mask], n_nodes)
    common = np.intersect1d(labels[side_a], labels[side_b])
    holds = bool(common.size)
    w = None
    if witness and holds:
        region = lambda v: bool(_rect_region(which, np.int64(v[0]), np.int64(v[1]), n))

        def on_side_b(v):
            coord = v[0] - v[1] if which in ("T", "T1", "T2") else v[0] + v[1]
            return coord == 2 * n
        sources = []
        L = c.extent + 1
        for i in range(-L, L + 1):
            for j in range(-L, L + 1):
                if (i - j) % 2 == 0 and region((i, j)):
                    coord = i - j if which in ("T", "T1", "T2") else i + j
                    if coord == -2 * n:
                        sources.append((i, j))
        path = _bfs_path(c, sources, on_side_b, region)
        w = [_vertex_real(v) for v in path]
    return EventResult(holds=holds, witness=w, event=f"A'_{n}[{which}]")


def _reduce_to_simple_cycle(walk, parity_of):
    """Reduce a closed walk of odd cut parity to a simple cycle of odd parity."""
    walk = list(walk)
    assert walk[0] == walk[-1]
    while True:
        seen = {}
        split = None
        for idx, v in enumerate(walk[:-1]):
            if v in seen:
                split = (seen[v], idx)
                break
            seen[v] = idx
        if split is None:
            return walk
        lo, hi = split
        inner = walk[lo : hi + 1]
        outer = walk[: lo + 1] + walk[hi + 1 :]
        walk = inner if parity_of(inner) % 2 == 1 else outer


def _walk_parity(walk):
    par = 0
    for (i1, j1), (i2, j2) in zip(walk, walk[1:]):
        a = (i1 + i2 + 1) // 2
        b = (j1 + j2 + 1) // 2
        if b == 1 and a >= 1:
            par += 1
    return par


def walk_winding(walk):
    """Signed crossings of the cut ray; +-1 for a surrounding simple cycle."""
    w = 0
    for (i1, j1), (i2, j2) in zip(walk, walk[1:]):
        a = (i1 + i2 + 1) // 2
        b = (j1 + j2 + 1) // 2
        if b == 1 and a >= 1:
            w += 1 if j2 > j1 else -1
    return w


def _circuit_witness(c, n):
    """BFS on (vertex, parity) over usable edges; returns a simple cycle."""
    M = c.extent

    def usable_neighbor(v, w):
        ok = lambda x: (abs(x[0] + x[1]) <= 2 * n and abs(x[0] - x[1]) <= 2 * n
                        and not (abs(x[0] + x[1]) <= n and abs(x[0] - x[1]) <= n))
        return ok(v) and ok(w)

    starts = []
    for i in range(-2 * n - 1, 2 * n + 2):
        for j in range(-2 * n - 1, 2 * n + 2):
            if (i - j) % 2 == 0 and usable_neighbor((i, j), (i, j)):
                starts.append((i, j))
    for root in starts:
        parent = {(root, 0): None}
        queue = deque([(root, 0)])
        found = None
        while queue and found is None:
            (v, p) = queue.popleft()
            for w in _closed_neighbors(c, *v):
                if not usable_neighbor(v, w):
                    continue
                a = (v[0] + w[0] + 1) // 2
                b = (v[1] + w[1] + 1) // 2
                q = p ^ (1 if (b == 1 and a >= 1) else 0)
                if (w, q) not in parent:
                    parent[(w, q)] = (v, p)
                    queue.append((w, q))
                    if (w, 1 - q) in parent:
                        found = w
                        break
        if found is None:
            continue
        paths = []
        for p in (0, 1):
            node = (found, p)
            path = []
            while node is not None:
                path.append(node[0])
                node = parent[node]
            paths.append(path)
        # both paths run found -> root; their concatenation closes the walk
        walk = paths[0] + list(reversed(paths[1]))[1:]
        assert walk[0] == found and walk[-1] == found
        assert _walk_parity(walk) % 2 == 1
        cycle = _reduce_to_simple_cycle(walk, _walk_parity)
        assert abs(walk_winding(cycle)) == 1
        return [_vertex_real(v) for v in cycle]
    return None


def surrounding_circuit_exact(c: Configuration, n: int,
                              witness: bool = False) -> EventResult:
    """Event A''_n: a closed circuit in Q_2n with Q_n in its interior."""
    if n < 2:
        raise ValueError("surrounding circuit needs n >= 2")
    if c.extent < 2 * n + 2:
        raise ValueError(f"extent {c.extent} does not cover Q_{2 * n + 1}")
    site_flat, e1, e2, n_nodes, cross = _annulus_static(c.extent, n)
    mask = c.closed.ravel()[site_flat]
    e1 = e1[mask]
    e2 = e2[mask]
    cr = cross[mask]
    r = np.concatenate([2 * e1, 2 * e1 + 1])
    cc = np.concatenate([2 * e2 + cr, 2 * e2 + 1 - cr])
    labels = _components(r, cc, 2 * n_nodes)
    touched = np.unique(np.concatenate([e1, e2])) if len(e1) else np.array([], dtype=np.int64)
    holds = bool(np.any(labels[2 * touched] == labels[2 * touched + 1])) if touched.size else False
    w = None
    if witness:
        if holds:
            w = _circuit_witness(c, n)
        else:
            w = _dual_path(c, n)
    return EventResult(holds=holds, witness=w, event=f"A''_{n}")


def surrounding_circuit_4rect(c: Configuration, n: int) -> EventResult:
    """Sufficient condition: all four rectangles crossed in the long direction."""
    if c.extent < 2 * n + 2:
        raise ValueError(f"extent {c.extent} does not cover Q_{2 * n + 1}")
    holds = all(rect_crossing(c, n, k).holds for k in ("T1", "T2", "T3", "T4"))
    return EventResult(holds=holds, event=f"A''_{n}[4rect]")


def _dual_path(c, n):
    """Open dual path from the center face to outside Q_2n, or None."""
    M = c.extent

    def passable(a, b):
        if abs(a) > M or abs(b) > M or not c.closed_at((a, b)):
            return True
        # structural usability of the crossed edge
        if (a - b) % 2 == 0:
            pts = ((a - 1, b - 1), (a, b))
        else:
            pts = ((a - 1, b), (a, b - 1))
        for i, j in pts:
            if abs(i + j) > 2 * n or abs(i - j) > 2 * n:
                return True
            if abs(i + j) <= n and abs(i - j) <= n:
                return True
        return False

    start = (0, -1)
    parent = {start: None}
    queue = deque([start])
    while queue:
        k, l = queue.popleft()
        if abs(k + l) > 2 * n or abs(k - l) > 2 * n:
            path = []
            v = (k, l)
            while v is not None:
                path.append((v[0] + 0.5, v[1] + 0.5))
                v = parent[v]
            path.reverse()
            return path
        # neighbor faces and the site crossed to reach them
        for (dk, dl) in ((-1, -1), (-1, 1), (1, -1), (1, 1)):
            w = (k + dk, l + dl)
            a = k + (dk + 1) // 2
            b = l + (dl + 1) // 2
            if w not in parent and passable(a, b):
                parent[w] = (k, l)
                queue.append(w)
    return None


def dual_crosscheck(c: Configuration, n: int) -> bool:
    """True iff no open dual face path escapes the annulus (circuit exists)."""
    if n < 2:
        raise ValueError("dual crosscheck needs n >= 2")
    if c.extent < 2 * n + 2:
        raise ValueError(f"extent {c.extent} does not cover Q_{2 * n + 1}")
    site_flat, f1, f2, n_nodes, structural, start, targets = _dual_static(c.extent, n)
    blocked = c.closed.ravel()[site_flat] & structural
    keep = ~blocked
    labels = _components(f1[keep], f2[keep], n_nodes)
    return not bool(np.any(labels[targets] == labels[start]))


def dump_witness(result: EventResult) -> str:
    """Witness dump: header naming the event, then 'u v' vertex lines."""
    lines = [
        "manhattan-pinball witness v1",
        f"event {result.event}",
        f"holds {int(result.holds)}",
    ]
    for u, v in result.witness or []:
        lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


def loads_witness(text: str) -> EventResult:
    from .errors import ConfigParseError

    lines = text.splitlines()
    if not lines or lines[0] != "manhattan-pinball witness v1":
        raise ConfigParseError("missing witness header", line=1)
    if len(lines) < 3 or not lines[1].startswith("event ") or not lines[2].startswith("holds "):
        raise ConfigParseError("malformed witness header", line=2)
    pts = []
    for lineno, line in enumerate(lines[3:], start=4):
        u, v = line.split()
        pts.append((float(u), float(v)))
    return EventResult(holds=bool(int(lines[2].split()[1])),
                       witness=pts or None,
                       event=lines[1].split(None, 1)[1])
