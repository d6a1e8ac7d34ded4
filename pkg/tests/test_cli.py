"""Command surface: exit codes, golden byte stability, file plumbing."""

import pytest

from manhattan_pinball.cli import main


def run(args):
    return main(args)


def test_version(capsys):
    with pytest.raises(SystemExit) as ei:
        run(["--version"])
    assert ei.value.code == 0
    out = capsys.readouterr().out
    assert "splitmix64-v1" in out
    assert "configuration format v1" in out


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as ei:
        run(["sample", "--p", "0.5"])  # missing required flags
    assert ei.value.code == 2
    assert "--extent" in capsys.readouterr().err


def test_missing_file_exit_2(tmp_path, capsys):
    rc = run(["trace", "--config", str(tmp_path / "nope.txt"),
              "--out", str(tmp_path / "t.txt")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_sample_then_trace_p1_loop(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    out = tmp_path / "t.txt"
    assert run(["sample", "--p", "1", "--extent", "8", "--seed", "7",
                "--out", str(cfg)]) == 0
    assert run(["trace", "--config", str(cfg), "--out", str(out),
                "--svg", str(tmp_path / "t.svg")]) == 0
    text = out.read_text()
    assert "status closed" in text
    assert "states 4" in text
    svg = (tmp_path / "t.svg").read_text()
    assert svg.startswith("<?xml") and svg.rstrip().endswith("</svg>")


def test_golden_byte_stability(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for out in (a, b):
        run(["sample", "--p", "0.5", "--extent", "10", "--seed", "3",
             "--out", str(out)])
    assert a.read_bytes() == b.read_bytes()
    sa, sb = tmp_path / "a.svg", tmp_path / "b.svg"
    for cfg, svg in ((a, sa), (b, sb)):
        run(["render", "--config", str(cfg), "--layers", "lattice,mirrors",
             "--out", str(svg)])
    assert sa.read_bytes() == sb.read_bytes()


def test_estimate_csv_trivial(tmp_path):
    csv = tmp_path / "e.csv"
    assert run(["estimate", "--event", "Aprime", "--p", "0", "--n", "8",
                "--trials", "10", "--seed", "1", "--csv", str(csv)]) == 0
    lines = csv.read_text().splitlines()
    assert lines[1].split(",")[5] == "0.0"


def test_event_and_witness_and_render(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    run(["sample", "--p", "0.7", "--extent", "18", "--seed", "3",
         "--out", str(cfg)])
    wit = tmp_path / "w.txt"
    assert run(["event", "--config", str(cfg), "--event", "Acirc",
                "--n", "4", "--witness", str(wit)]) == 0
    out = capsys.readouterr().out
    assert "holds=" in out
    assert wit.read_text().startswith("manhattan-pinball witness v1")
    svg = tmp_path / "r.svg"
    assert run(["render", "--config", str(cfg), "--witness", str(wit),
                "--layers", "lattice,mirrors,circuit_witness",
                "--out", str(svg)]) == 0
    assert "<polyline" in svg.read_text() or "holds 0" in wit.read_text()


def test_enhance_diff(tmp_path):
    cfg = tmp_path / "c.txt"
    run(["sample", "--p", "0.5", "--extent", "12", "--seed", "11",
         "--out", str(cfg)])
    out = tmp_path / "e.txt"
    diff = tmp_path / "d.txt"
    assert run(["enhance", "--config", str(cfg), "--pattern", "default",
                "--out", str(out), "--diff", str(diff)]) == 0
    # every changed site listed in the diff is closed in the output
    from manhattan_pinball.configuration import load
    before, after = load(cfg), load(out)
    changed = {tuple(map(int, line.split())) for line in
               diff.read_text().splitlines()}
    for site in changed:
        assert not before.closed_at(site) and after.closed_at(site)


def test_verify_exit_codes(tmp_path, capsys):
    csv = tmp_path / "v.csv"
    assert run(["verify", "--p", "1", "--n", "101", "--trials", "2",
                "--seed", "1", "--csv", str(csv)]) == 0
    assert "conditional_pass_rate=1.0" in capsys.readouterr().out
    assert csv.read_text().splitlines()[1] == "0,1,1,1,1,1"
    # n <= 100 is a usage error
    assert run(["verify", "--p", "1", "--n", "50", "--trials", "2",
                "--seed", "1"]) == 2


def test_pattern_check_and_search(tmp_path, capsys):
    assert run(["pattern", "check", "--pattern", "default"]) == 0
    out = capsys.readouterr().out
    assert "translation=pass" in out and "detour=pass" in out
    dest = tmp_path / "found.txt"
    assert run(["pattern", "search", "--radius", "3", "--budget", "5",
                "--out", str(dest)]) == 0
    assert dest.read_text().startswith("manhattan-pinball pattern v1")


def test_bad_layer_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    run(["sample", "--p", "0.5", "--extent", "5", "--seed", "1",
         "--out", str(cfg)])
    assert run(["render", "--config", str(cfg), "--layers", "sparkles",
                "--out", str(tmp_path / "x.svg")]) == 2
