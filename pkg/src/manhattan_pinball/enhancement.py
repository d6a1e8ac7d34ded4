"""Enhancement patterns: matching, the enhancement map, and validation.

A pattern is a finite template around an anchor: sites required closed,
sites required open, and one distinguished open site (the red edge) that the
enhancement closes wherever a translated copy of the template appears.  The
pattern is data, not code: the shipped default lives in
``data/default_pattern.txt`` and is validated at load time by three checks:

  * translation: the red edge of one copy never coincides with a required
    open edge of another jointly-satisfiable copy, so overlapping copies
    flip exactly their own reds;
  * detour: with only the pattern's mirrors present, light reaching the red
    site passes through, runs a bounded loop, and re-emerges exactly as if
    it had been deflected by a mirror on the red edge (so closing the red
    edge changes trajectories only by splicing bounded loops in or out);
  * essentiality: there is a window configuration where closing the red
    edge is pivotal for a side-to-side closed crossing.

The detour check additionally requires every site the loop visits to be
constrained by the pattern; an unconstrained visited site could carry a
mirror in a real sample and derail the loop, which would break the splice
argument the verification harness replays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import events as _ev
from .configuration import Configuration, from_closed_sites
from .errors import ConfigParseError
from .geometry import Direction, edge_for_site, mirror_orientation, reflect
from .tracer import RayState, trace

PATTERN_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Pattern:
    closed_sites: frozenset
    open_sites: frozenset
    red_site: tuple
    name: str = "unnamed"

    def __post_init__(self):
        if self.red_site not in self.open_sites:
            raise ValueError("red site must be required open")
        if self.closed_sites & self.open_sites:
            raise ValueError("closed and open requirements overlap")

    @property
    def radius(self) -> int:
        return max(
            max(abs(a), abs(b)) for a, b in self.closed_sites | self.open_sites
        )

    @property
    def sites(self):
        return self.closed_sites | self.open_sites


@dataclass(frozen=True)
class MatchSet:
    offsets: tuple  # sorted (t1, t2) pairs, t1 + t2 even


@dataclass
class DetourReport:
    ok: bool
    radius: int  # D: max l-inf distance of visited detour sites from red
    returns: dict  # entry direction name -> outgoing direction name at first return
    diagnostics: dict  # non-transit entries -> short description
    failure: str | None = None


@dataclass
class PatternReport:
    translation_ok: bool
    translation_counterexample: tuple | None
    detour: DetourReport
    essential_witness: Configuration | None
    essential_searched: int

    @property
    def all_ok(self) -> bool:
        return (
            self.translation_ok
            and self.detour.ok
            and self.essential_witness is not None
        )


# ---------------------------------------------------------------------------
# matching and the enhancement map
# ---------------------------------------------------------------------------


def match_pattern(c: Configuration, g: Pattern, excluded_core=None) -> MatchSet:
    """All parity-valid offsets whose translated copy appears in ``c``.

    Copies must lie fully inside the extent.  With ``excluded_core = k``,
    offsets whose red edge is inside Q_k are dropped.
    """
    M = c.extent
    if M < g.radius:
        raise ValueError("extent smaller than pattern radius")
    sites = sorted(g.sites)
    lo_a = min(a for a, _ in sites)
    hi_a = max(a for a, _ in sites)
    lo_b = min(b for _, b in sites)
    hi_b = max(b for _, b in sites)
    # offset bounds keeping every pattern site inside the extent
    t1_lo, t1_hi = -M - lo_a, M - hi_a
    t2_lo, t2_hi = -M - lo_b, M - hi_b
    if t1_lo > t1_hi or t2_lo > t2_hi:
        return MatchSet(offsets=())
    n1 = t1_hi - t1_lo + 1
    n2 = t2_hi - t2_lo + 1
    ok = np.ones((n1, n2), dtype=bool)
    for (a, b) in sorted(g.closed_sites):
        ok &= c.closed[t1_lo + a + M : t1_lo + a + M + n1,
                       t2_lo + b + M : t2_lo + b + M + n2]
    for (a, b) in sorted(g.open_sites):
        ok &= ~c.closed[t1_lo + a + M : t1_lo + a + M + n1,
                        t2_lo + b + M : t2_lo + b + M + n2]
    T1, T2 = np.meshgrid(
        np.arange(t1_lo, t1_hi + 1), np.arange(t2_lo, t2_hi + 1), indexing="ij"
    )
    ok &= (T1 + T2) % 2 == 0
    if excluded_core is not None:
        # valid offsets have even coordinate sum, so translated red edges
        # keep the orientation of the pattern's own red edge
        (x1, y1), (x2, y2) = edge_for_site(g.red_site)
        e1x, e1y = x1 + T1, y1 + T2
        e2x, e2y = x2 + T1, y2 + T2
        k = excluded_core
        inq = lambda x, y: (np.abs(x + y - 1) <= k) & (np.abs(x - y) <= k)
        ok &= ~(inq(e1x, e1y) & inq(e2x, e2y))
    idx = np.argwhere(ok)
    offsets = tuple((int(i + t1_lo), int(j + t2_lo)) for i, j in idx)
    return MatchSet(offsets=offsets)


def enhance(c: Configuration, g: Pattern, excluded_core=None) -> Configuration:
    """Close the red edge of every matched copy (single pass over ``c``)."""
    ms = match_pattern(c, g, excluded_core)
    closed = c.closed.copy()
    M = c.extent
    ra, rb = g.red_site
    for t1, t2 in ms.offsets:
        closed[ra + t1 + M, rb + t2 + M] = True
    return Configuration(
        extent=M, closed=closed, p=c.p, seed=c.seed,
        stream_index=c.stream_index, provenance="enhanced", generator=c.generator,
    )


# ---------------------------------------------------------------------------
# validation checks
# ---------------------------------------------------------------------------


def check_translation_lemma(g: Pattern):
    """(ok, first counterexample offset or None), by exhaustive offset scan."""
    sites = g.sites
    lo_a = min(a for a, _ in sites)
    hi_a = max(a for a, _ in sites)
    lo_b = min(b for _, b in sites)
    hi_b = max(b for _, b in sites)
    span_a = hi_a - lo_a
    span_b = hi_b - lo_b
    closed = g.closed_sites
    opens = g.open_sites
    ra, rb = g.red_site
    for t1 in range(-span_a, span_a + 1):
        for t2 in range(-span_b, span_b + 1):
            if (t1, t2) == (0, 0) or (t1 + t2) % 2 != 0:
                continue
            shifted_closed = {(a + t1, b + t2) for a, b in closed}
            shifted_open = {(a + t1, b + t2) for a, b in opens}
            if closed & shifted_open or shifted_closed & opens:
                continue  # the two copies can never appear jointly
            if (ra + t1, rb + t2) in opens or (ra - t1, rb - t2) in opens:
                return False, (t1, t2)
    return True, None


_TRANSIT = {  # entry directions that can pass through a site, by coordinate parity
    (0, 0): (Direction.E, Direction.N),
    (1, 1): (Direction.W, Direction.S),
    (1, 0): (Direction.E, Direction.S),
    (0, 1): (Direction.W, Direction.N),
}


def _pattern_config(g: Pattern, extent=None) -> Configuration:
    if extent is None:
        extent = max(4 * g.radius, g.radius + 2)
    return from_closed_sites(extent, g.closed_sites)


def check_detour(g: Pattern, max_radius: int = 5) -> DetourReport:
    """Trace the pattern's detour loop for both transit entry directions.

    For each entry direction d the loop must return the ray to the red site
    leaving with reflect(d, orientation(red)), stay within l-inf distance
    ``max_radius`` of the red site, and visit only pattern-constrained
    sites.  The other two directions cannot transit the red site and are
    recorded as diagnostics.
    """
    red = g.red_site
    orient = mirror_orientation(red)
    cfg = _pattern_config(g)
    entries = _TRANSIT[(red[0] % 2, red[1] % 2)]
    others = tuple(d for d in Direction if d not in entries)
    returns = {}
    radius = 0
    failure = None
    for d in entries:
        t = trace(cfg, RayState(red, d))
        k = None
        for idx in range(1, len(t.states)):
            if (int(t.states[idx, 0]), int(t.states[idx, 1])) == red:
                k = idx
                break
        if k is None:
            failure = f"entry {d.name}: ray never returns to the red site ({t.status})"
            break
        out = Direction(int(t.states[k, 2]))
        returns[d.name] = out.name
        if out != reflect(d, orient):
            failure = (
                f"entry {d.name}: returns with {out.name}, "
                f"expected {reflect(d, orient).name}"
            )
            break
        loop = t.states[: k + 1]
        dist = int(
            np.max(np.maximum(np.abs(loop[:, 0] - red[0]), np.abs(loop[:, 1] - red[1])))
        )
        radius = max(radius, dist)
        if dist > max_radius:
            failure = f"entry {d.name}: detour radius {dist} exceeds {max_radius}"
            break
        visited = {(int(a), int(b)) for a, b in loop[:, :2]}
        stray = visited - g.sites
        if stray:
            failure = f"entry {d.name}: detour visits unconstrained sites {sorted(stray)}"
            break
    diagnostics = {}
    for d in others:
        t = trace(cfg, RayState(red, d))
        diagnostics[d.name] = f"non-transit entry, trace status {t.status}"
    return DetourReport(
        ok=failure is None and len(returns) == len(entries),
        radius=radius,
        returns=returns,
        diagnostics=diagnostics,
        failure=failure,
    )


def _window_crossing(c: Configuration) -> bool:
    """Closed path joining the west and east bands of the window."""
    M = c.extent
    site_flat, e1, e2, n_nodes, _, _ = _ev._radial_static(M, 1)
    mask = c.closed.ravel()[site_flat]
    labels = _ev._components(e1[mask], e2[mask], n_nodes)
    L = M + 1
    rng = np.arange(-L, L + 1, dtype=np.int32)
    I, J = np.meshgrid(rng, rng, indexing="ij")
    vert = (I - J) % 2 == 0
    west = np.flatnonzero((vert & (I <= -M + 1)).ravel())
    east = np.flatnonzero((vert & (I >= M - 1)).ravel())
    return bool(np.intersect1d(labels[west], labels[east]).size)


def _is_essential_witness(c: Configuration, g: Pattern) -> bool:
    if (0, 0) not in match_pattern(c, g).offsets:
        return False
    return (not _window_crossing(c)) and _window_crossing(enhance(c, g))


def _chain_to_boundary(g, extent, start_vertex, westward, blocked_vertices):
    """BFS a path of closable sites from a red endpoint to a window band.

    Returns (chain sites, chain vertices) or None.  Chain sites must be
    unconstrained by the pattern; chain edges must avoid the pattern's
    mirror endpoints and previously used vertices.
    """
    pattern_vertices = set()
    for s in g.closed_sites:
        pattern_vertices.update(edge_for_site(s))
    goal = (lambda v: v[0] <= -extent + 1) if westward else (lambda v: v[0] >= extent - 1)
    start = (int(start_vertex[0] - 0.5), int(start_vertex[1] - 0.5))
    parent = {start: None}
    via = {}
    queue = [start]
    while queue:
        v = queue.pop(0)
        if goal(v):
            sites = []
            verts = []
            node = v
            while node is not None:
                verts.append(node)
                if parent[node] is not None:
                    sites.append(via[node])
                node = parent[node]
            return sites, verts
        for di, dj in ((-1, -1), (-1, 1), (1, -1), (1, 1)):
            w = (v[0] + di, v[1] + dj)
            a, b = v[0] + (di + 1) // 2, v[1] + (dj + 1) // 2
            if abs(a) > extent or abs(b) > extent:
                continue
            if (a, b) in g.sites or w in parent:
                continue
            wr = (w[0] + 0.5, w[1] + 0.5)
            if wr in pattern_vertices or w in blocked_vertices:
                continue
            parent[w] = v
            via[w] = (a, b)
            queue.append(w)
    return None


def check_essential(g: Pattern, window: int | None = None, budget: int = 2000):
    """Search for a pivotality witness; (witness config or None, trials used).

    The first candidate is constructive: two closed chains tied to the red
    edge's endpoints, reaching opposite window bands, so the red edge is the
    only bridge.  Remaining budget goes to randomized fill of unconstrained
    sites.  Absence of a witness within budget is inconclusive.
    """
    W = window if window is not None else 2 * g.radius + 6
    if W < 2 * g.radius + 4:
        raise ValueError("window must be at least 2 * radius + 4")
    trials = 0
    v_w, v_e = edge_for_site(g.red_site)
    built = _chain_to_boundary(g, W, v_w, True, set())
    if built is not None:
        sites_w, verts_w = built
        built_e = _chain_to_boundary(g, W, v_e, False, set(verts_w))
        if built_e is not None:
            sites_e, _ = built_e
            cfg = from_closed_sites(W, set(g.closed_sites) | set(sites_w) | set(sites_e))
            trials += 1
            if _is_essential_witness(cfg, g):
                return cfg, trials
    rng = np.random.default_rng(12345)
    grid = [
        (a, b)
        for a in range(-W, W + 1)
        for b in range(-W, W + 1)
        if (a, b) not in g.sites
    ]
    while trials < budget:
        trials += 1
        q = rng.uniform(0.2, 0.7)
        extra = [s for s in grid if rng.random() < q]
        cfg = from_closed_sites(W, set(g.closed_sites) | set(extra))
        if _is_essential_witness(cfg, g):
            return cfg, trials
    return None, trials


def validate_pattern(g: Pattern, essential_budget: int = 2000) -> PatternReport:
    ok, ce = check_translation_lemma(g)
    det = check_detour(g)
    witness, searched = (None, 0)
    if ok and det.ok:
        witness, searched = check_essential(g, budget=essential_budget)
    return PatternReport(
        translation_ok=ok,
        translation_counterexample=ce,
        detour=det,
        essential_witness=witness,
        essential_searched=searched,
    )


# ---------------------------------------------------------------------------
# pattern search
# ---------------------------------------------------------------------------


def _enumerate_detour_routes(r_max, entry, exit_dir, node_budget=200000, max_routes=64):
    """DFS over mirror placements for a loop from the anchor back to itself.

    Yields (mirrors, opens) for routes that start at (0, 0) moving ``entry``
    and next arrive at (0, 0) moving ``exit_dir``, confined to radius
    ``r_max``, visiting no site twice, with at most 6 mirrors.
    """
    results = []
    nodes = 0

    def dfs(a, b, d, mirrors, opens):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget or len(results) >= max_routes:
            return
        da, db = ((1, 0), (0, 1), (-1, 0), (0, -1))[d]
        na, nb = a + da, b + db
        if (na, nb) == (0, 0):
            if d == exit_dir:
                results.append((frozenset(mirrors), frozenset(opens)))
            return
        if abs(na) > r_max or abs(nb) > r_max:
            return
        if (na, nb) in mirrors or (na, nb) in opens:
            return
        # pass through
        dfs(na, nb, d, mirrors, opens | {(na, nb)})
        # place a mirror
        if len(mirrors) < 6:
            nd = (d ^ 1) if (na - nb) % 2 == 0 else (3 - d)
            dfs(na, nb, nd, mirrors | {(na, nb)}, opens)

    dfs(0, 0, int(entry), frozenset(), frozenset())
    return sorted(results, key=lambda mo: (len(mo[0]), len(mo[1]), sorted(mo[0])))


def _endpoints_connected(closed_sites, red):
    """Do the pattern's mirrors alone join the red edge's endpoints?"""
    v1, v2 = edge_for_site(red)
    adj = {}
    for s in closed_sites:
        e = edge_for_site(s)
        adj.setdefault(e[0], set()).add(e[1])
        adj.setdefault(e[1], set()).add(e[0])
    seen = {v1}
    stack = [v1]
    while stack:
        v = stack.pop()
        if v == v2:
            return True
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def search_patterns(r_max: int, budget: int = 200, essential_budget: int = 200):
    """Discover valid patterns anchored at a red site of even parities.

    Enumerates detour loops for both transit entries, pairs compatible
    loops, and keeps the candidates passing all three checks, sorted by
    mirror count.  Returns (patterns, budget_exhausted).
    """
    if r_max > 4:
        raise ValueError("r_max is capped at 4 (combinatorial guard)")
    if r_max < 2:
        raise ValueError("r_max must be at least 2")
    if budget <= 0:
        return [], True
    red = (0, 0)
    east_routes = _enumerate_detour_routes(r_max, Direction.E, Direction.N)
    north_routes = _enumerate_detour_routes(r_max, Direction.N, Direction.E)
    candidates = []
    seen = set()
    for me, oe in east_routes:
        for mn, on in north_routes:
            if (me & on) or (mn & oe):
                continue
            closed = me | mn
            if len(closed) > 12:
                continue
            key = (closed, oe | on)
            if key in seen:
                continue
            seen.add(key)
            candidates.append((closed, oe | on | {red}))
    candidates.sort(key=lambda co: (len(co[0]), len(co[1]), sorted(co[0])))
    found = []
    tested = 0
    exhausted = False
    for closed, opens in candidates:
        if _endpoints_connected(closed, red):
            continue  # red can never be pivotal
        if tested >= budget:
            exhausted = True
            break
        tested += 1
        g = Pattern(
            closed_sites=frozenset(closed),
            open_sites=frozenset(opens),
            red_site=red,
            name=f"searched-r{r_max}-{tested}",
        )
        report = validate_pattern(g, essential_budget=essential_budget)
        if report.all_ok:
            found.append(g)
    found.sort(key=lambda g: (len(g.closed_sites), g.radius, sorted(g.closed_sites)))
    return found, exhausted


# ---------------------------------------------------------------------------
# pattern file format
# ---------------------------------------------------------------------------


def dumps_pattern(g: Pattern) -> str:
    lines = [
        f"manhattan-pinball pattern v{PATTERN_FORMAT_VERSION}",
        f"name {g.name}",
        f"red {g.red_site[0]} {g.red_site[1]}",
    ]
    for a, b in sorted(g.closed_sites):
        lines.append(f"closed {a} {b}")
    for a, b in sorted(g.open_sites):
        lines.append(f"open {a} {b}")
    return "\n".join(lines) + "\n"


def loads_pattern(text: str) -> Pattern:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("manhattan-pinball pattern v"):
        raise ConfigParseError("missing pattern header", line=1)
    if lines[0].rsplit("v", 1)[-1] != str(PATTERN_FORMAT_VERSION):
        raise ConfigParseError("unsupported pattern format version", line=1)
    name = None
    red = None
    closed = set()
    opens = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if parts[0] == "name" and len(parts) == 2:
            name = parts[1]
            continue
        if parts[0] in ("red", "closed", "open") and len(parts) == 3:
            try:
                site = (int(parts[1]), int(parts[2]))
            except ValueError:
                raise ConfigParseError("bad site coordinates", line=lineno)
            if parts[0] == "red":
                red = site
                opens.add(site)
            elif parts[0] == "closed":
                closed.add(site)
            else:
                opens.add(site)
            continue
        raise ConfigParseError(f"unrecognized line {line!r}", line=lineno)
    if name is None or red is None:
        raise ConfigParseError("pattern file lacks a name or red line")
    return Pattern(
        closed_sites=frozenset(closed),
        open_sites=frozenset(opens),
        red_site=red,
        name=name,
    )


def save_pattern(g: Pattern, path) -> None:
    from .configuration import atomic_write_text

    atomic_write_text(path, dumps_pattern(g))


def load_pattern(path) -> Pattern:
    with open(path) as fh:
        return loads_pattern(fh.read())


@lru_cache(maxsize=1)
def default_pattern() -> Pattern:
    """The shipped, search-discovered default pattern."""
    from importlib.resources import files

    text = files("manhattan_pinball.data").joinpath("default_pattern.txt").read_text()
    return loads_pattern(text)
