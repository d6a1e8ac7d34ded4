"""Enhancement patterns: matching oracle, the three validity checks, search."""

import numpy as np
import pytest

from manhattan_pinball.configuration import constant, from_closed_sites, sample
from manhattan_pinball.enhancement import (
    Pattern,
    check_detour,
    check_essential,
    check_translation_lemma,
    default_pattern,
    dumps_pattern,
    enhance,
    load_pattern,
    loads_pattern,
    match_pattern,
    save_pattern,
    search_patterns,
    validate_pattern,
)
from manhattan_pinball.errors import ConfigParseError
from manhattan_pinball.geometry import edge_for_site, vertex_in_q


def brute_match(c, g, excluded_core=None):
    """Exhaustive reference matcher: test every offset site by site."""
    M = c.extent
    out = []
    for t1 in range(-2 * M, 2 * M + 1):
        for t2 in range(-2 * M, 2 * M + 1):
            if (t1 + t2) % 2 != 0:
                continue
            if not all(abs(a + t1) <= M and abs(b + t2) <= M for a, b in g.sites):
                continue
            if not all(c.closed_at((a + t1, b + t2)) for a, b in g.closed_sites):
                continue
            if any(c.closed_at((a + t1, b + t2)) for a, b in g.open_sites):
                continue
            if excluded_core is not None:
                v1, v2 = edge_for_site((g.red_site[0] + t1, g.red_site[1] + t2))
                if vertex_in_q(v1, excluded_core) and vertex_in_q(v2, excluded_core):
                    continue
            out.append((t1, t2))
    return sorted(out)


def test_match_against_brute_oracle():
    g = default_pattern()
    for seed in range(8):
        c = sample(0.35, 7, seed=seed)
        assert sorted(match_pattern(c, g).offsets) == brute_match(c, g)
        assert sorted(match_pattern(c, g, excluded_core=4).offsets) == brute_match(
            c, g, excluded_core=4)


def test_planted_copy_matches():
    g = default_pattern()
    c = from_closed_sites(8, g.closed_sites)
    assert match_pattern(c, g).offsets == ((0, 0),)
    e = enhance(c, g)
    diff = np.argwhere(e.closed != c.closed)
    assert [tuple(d - 8) for d in diff] == [g.red_site]
    assert e.provenance == "enhanced"


def test_translated_planted_copy():
    g = default_pattern()
    t = (4, -2)  # even coordinate sum keeps street parities aligned
    c = from_closed_sites(9, {(a + t[0], b + t[1]) for a, b in g.closed_sites})
    assert match_pattern(c, g).offsets == (t,)


def test_enhance_changes_exactly_matched_reds():
    g = default_pattern()
    for seed in range(6):
        c = sample(0.5, 10, seed=100 + seed)
        e = enhance(c, g)
        diff = {tuple(d - 10) for d in np.argwhere(e.closed != c.closed)}
        ra, rb = g.red_site
        assert diff == {(ra + t1, rb + t2) for t1, t2 in match_pattern(c, g).offsets}
        assert not (c.closed & ~e.closed).any()  # closed-increasing


def test_excluded_core_drops_central_matches():
    g = default_pattern()
    c = from_closed_sites(8, g.closed_sites)
    assert match_pattern(c, g, excluded_core=4).offsets == ()
    # a far translate survives the same exclusion
    t = (6, 6)
    c2 = from_closed_sites(12, {(a + t[0], b + t[1]) for a, b in g.closed_sites})
    assert match_pattern(c2, g, excluded_core=4).offsets == (t,)


def test_shipped_pattern_passes_all_checks():
    g = default_pattern()
    report = validate_pattern(g)
    assert report.translation_ok
    assert report.detour.ok and report.detour.radius <= 5
    assert set(report.detour.returns) == {"E", "N"}
    assert report.essential_witness is not None
    assert report.all_ok


def test_detour_is_exactly_the_reflected_exit():
    g = default_pattern()
    det = check_detour(g)
    # the red edge at (0, 0) is NE, so east in must leave north and vice versa
    assert det.returns == {"E": "N", "N": "E"}
    assert det.radius == 3
    assert set(det.diagnostics) == {"W", "S"}


def test_translation_lemma_counterexample_detected():
    # closed (3,1) and open (2,0): shifting by (2,0) is parity-valid,
    # overlapping, jointly satisfiable, and puts the red on the other copy's
    # required-open site (2,0)
    bad = Pattern(closed_sites=frozenset({(3, 1)}),
                  open_sites=frozenset({(0, 0), (2, 0)}),
                  red_site=(0, 0))
    ok, ce = check_translation_lemma(bad)
    assert not ok
    assert ce in ((2, 0), (-2, 0))


def test_detour_failure_on_broken_pattern():
    g = default_pattern()
    mirrors = sorted(g.closed_sites)
    broken = Pattern(closed_sites=frozenset(mirrors[:-1]),
                     open_sites=g.open_sites, red_site=g.red_site)
    assert not check_detour(broken).ok


def test_detour_rejects_unconstrained_visits():
    # same loop shape but with the required-open legs left unconstrained:
    # a random mirror on the leg could derail the splice, so the check fails
    g = default_pattern()
    stripped = Pattern(closed_sites=g.closed_sites,
                       open_sites=frozenset({g.red_site}),
                       red_site=g.red_site)
    det = check_detour(stripped)
    assert not det.ok
    assert "unconstrained" in det.failure


def test_essential_witness_is_pivotal():
    g = default_pattern()
    w, _ = check_essential(g)
    assert w is not None
    # the planted copy matches; only the red edge separates no-crossing from
    # crossing (checked through the public enhancement map)
    assert (0, 0) in match_pattern(w, g).offsets
    from manhattan_pinball.enhancement import _window_crossing
    assert not _window_crossing(w)
    assert _window_crossing(enhance(w, g))


def test_essential_absent_when_red_is_sealed_off():
    # all edges adjacent to the red edge's endpoints are required open, so
    # nothing can ever attach to the red edge: no witness exists
    sealed = Pattern(
        closed_sites=frozenset({(5, 0), (0, 5)}),  # arbitrary far mirrors
        open_sites=frozenset({(0, 0), (1, 0), (0, 1), (1, 1),
                              (-1, 0), (0, -1), (-1, -1)}),
        red_site=(0, 0),
    )
    w, trials = check_essential(sealed, budget=40)
    assert w is None
    assert trials == 40


def test_pattern_invariants():
    with pytest.raises(ValueError, match="required open"):
        Pattern(closed_sites=frozenset(), open_sites=frozenset({(1, 1)}),
                red_site=(0, 0))
    with pytest.raises(ValueError, match="overlap"):
        Pattern(closed_sites=frozenset({(0, 0)}),
                open_sites=frozenset({(0, 0)}), red_site=(0, 0))


def test_pattern_file_roundtrip(tmp_path):
    g = default_pattern()
    assert loads_pattern(dumps_pattern(g)) == g
    path = tmp_path / "g.txt"
    save_pattern(g, path)
    assert load_pattern(path) == g


def test_pattern_file_errors():
    with pytest.raises(ConfigParseError, match="header"):
        loads_pattern("not a pattern\n")
    with pytest.raises(ConfigParseError, match="version"):
        loads_pattern("manhattan-pinball pattern v9\n")
    ok = dumps_pattern(default_pattern())
    with pytest.raises(ConfigParseError, match="coordinates"):
        loads_pattern(ok.replace("red 0 0", "red x 0"))
    with pytest.raises(ConfigParseError, match="unrecognized"):
        loads_pattern(ok + "bogus line\n")
    with pytest.raises(ConfigParseError, match="name or red"):
        loads_pattern("manhattan-pinball pattern v1\nopen 0 0\n")


def test_match_extent_guard():
    g = default_pattern()
    with pytest.raises(ValueError):
        match_pattern(constant(2, False), g)


def test_search_rediscovers_the_shipped_pattern():
    found, exhausted = search_patterns(3, budget=50, essential_budget=50)
    assert found
    g = default_pattern()
    smallest = found[0]
    assert smallest.closed_sites == g.closed_sites
    assert smallest.open_sites == g.open_sites
    assert smallest.red_site == g.red_site


def test_search_radius_guards():
    with pytest.raises(ValueError):
        search_patterns(5)
    with pytest.raises(ValueError):
        search_patterns(1)
