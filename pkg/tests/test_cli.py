import csv
import io

import numpy as np
import pytest

from gsedtiles import cli, deficit as dl, robinson
from gsedtiles.errors import ConfigError
from gsedtiles.wang import Configuration, defects

from conftest import tileset


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


@pytest.fixture
def tiling15(tmp_path):
    p = tmp_path / "t15.txt"
    assert cli.main(["robinson", "gen", "--size", "15x15", "--out", str(p)]) == 0
    return p


def test_render_ascii_rows_and_determinism(tiling15, capsys):
    rc, a, _ = run(capsys, "render", str(tiling15))
    assert rc == 0
    rows = [r for r in a.splitlines() if not r.startswith("#")]
    assert len(rows) == 15 and all(len(r) == 29 for r in rows)
    assert any("1" in r for r in rows)  # 1-border rings drawn
    assert a.splitlines()[-1] == "# defects 0:"
    _, b, _ = run(capsys, "render", str(tiling15))
    assert a == b


@pytest.mark.parametrize("fmt,magic", [("svg", b"<svg"), ("ppm", b"P6")])
def test_render_other_formats(fmt, magic):
    ts = tileset()
    c = robinson.generate_tiling(ts, 15, 15, (0, 0))
    spec = cli.RenderSpec(format=fmt, highlight="defects")
    data = cli.render(ts, c, spec)
    assert magic in data[:200] and data == cli.render(ts, c, spec)


def test_render_marks_exactly_the_defects():
    ts = tileset()
    c = dl.inject_defects(robinson.generate_tiling(ts, 15, 15, (0, 0)), 1, 3, ts)
    text = cli.render(ts, c, cli.RenderSpec(highlight="defects")).decode()
    want = sorted(defects(ts.base, c).points)
    trailer = text.splitlines()[-1]
    assert trailer.startswith(f"# defects {len(want)}:")
    marks = trailer.split(":", 1)[1].split()
    assert marks == [f"({x / 2:g},{y / 2:g})" for x, y in want]
    grid = text.splitlines()[:15]
    hmarks = sum(r.count("!") for r in grid)
    assert hmarks == sum(1 for x, _ in want if x % 2 == 0)


def test_render_spec_validation():
    with pytest.raises(ConfigError):
        cli.RenderSpec(format="png")
    with pytest.raises(ConfigError):
        cli.RenderSpec(layers=())
    with pytest.raises(ConfigError):
        cli.RenderSpec(highlight="everything")


def test_config_round_trip(tmp_path):
    cfg = cli.RunConfig(seed=7, L=[64, 128], defects=(2, 5), machines=["parity"])
    assert cli.RunConfig.from_text(cfg.to_text()) == cfg
    p = tmp_path / "c.cfg"
    p.write_text("# comment\nlambda = 3/2\ntrials = 5\n")
    got = cli.RunConfig.load(p)
    assert got.lam == cli.Fraction(3, 2) and got.trials == 5
    for bad in ("bogus = 1\n", "trials = 0\n", "lambda = x\n", "defects = 5..2\n"):
        with pytest.raises(ConfigError):
            cli.RunConfig.from_text(bad)


def test_config_rng_streams():
    cfg = cli.RunConfig(seed=3)
    a = cfg.rng(1).integers(0, 10 ** 9, 4)
    assert (a == cli.RunConfig(seed=3).rng(1).integers(0, 10 ** 9, 4)).all()
    assert not (a == cfg.rng(2).integers(0, 10 ** 9, 4)).all()


def test_exit_codes(tmp_path, capsys):
    assert run(capsys, "tm", "run", "builtin:nope")[0] == 2
    missing = tmp_path / "missing.cfg"
    assert run(capsys, "experiment", "convergence", "--config", str(missing))[0] == 2
    assert run(capsys, "experiment", "no-such")[0] == 2
    assert run(capsys, "gsed", "fgsed", "--machine", "builtin:parity")[0] == 2
    rc, _, err = run(capsys, "ham", "solve", "--tileset", "", "--size", "9x9", "--machine", "builtin:parity",
                     "--method", "brute")
    assert rc in (2, 3)
    with pytest.raises(SystemExit) as e:
        cli.main(["robinson", "bogus"])
    assert e.value.code == 2


def test_resource_exit_code(capsys):
    rc, _, err = run(capsys, "gsed", "fgsed", "--machine", "builtin:parity", "--eps", "0b0." + "0" * 400 + "1")
    assert rc == 3 and "budget" in err


def test_check_failure_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.setitem(cli.EXPERIMENTS, "convergence", lambda cfg: ("a\n", "ok 0\n", False))
    assert run(capsys, "experiment", "convergence", "--out", str(tmp_path))[0] == 1


def test_tm_and_gsed_commands(capsys):
    rc, out, _ = run(capsys, "tm", "run", "builtin:parity", "--input", "101")
    assert rc == 0 and "accepted" in out
    rc, out, _ = run(capsys, "gsed", "extract", "--machine", "builtin:parity", "-k", "6")
    assert rc == 0 and out.splitlines()[-1] == "bits 000101"
    rc, out, _ = run(capsys, "gsed", "decide", "--machine", "builtin:reject", "--alpha", "0b0.0000000000001",
                     "--beta", "0b0.0000000001")  # a_2, beta_2 with i_1 = 0
    assert rc == 0 and out.strip() == "no"
    rc, out, _ = run(capsys, "gsed", "fgsed", "--machine", "builtin:accept", "--eps", "0b0.00000001")
    assert rc == 0 and out.strip().startswith("0b0")


def test_robinson_borders_command(tiling15, capsys):
    rc, out, _ = run(capsys, "robinson", "borders", str(tiling15))
    lines = out.splitlines()
    assert rc == 0 and lines[0] == "n corner_x corner_y complete"
    assert len(lines) - 1 == len(robinson.find_borders(tileset(), Configuration.from_text(tiling15.read_text())))


def test_deficit_run_command(tmp_path, capsys):
    report = tmp_path / "d.csv"
    rc, out, _ = run(capsys, "deficit", "run", "--size", "64", "--defects", "1..8", "--trials", "6",
                     "--report", str(report))
    assert rc == 0
    rows = list(csv.DictReader(io.StringIO(report.read_text())))
    assert len(rows) == 6 and all(int(r["slack"]) >= 0 for r in rows)


def test_experiments_reproducible(tmp_path, capsys):
    sets = ["--set", "L=64", "--set", "trials=5", "--set", "k=4"]
    for name in ("deficit-sweep", "extraction-roundtrip", "solver-crosscheck", "convergence"):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(capsys, "experiment", name, *sets, "--out", str(a))[0] == 0
        assert run(capsys, "experiment", name, *sets, "--out", str(b))[0] == 0
        assert (a / f"{name}.csv").read_bytes() == (b / f"{name}.csv").read_bytes()
        assert "ok 1" in (a / f"{name}.txt").read_text()


def test_extraction_roundtrip_matches_direct(tmp_path):
    cfg = cli.RunConfig(k=6, machines=["parity"])
    assert cli.experiment("extraction-roundtrip", cfg, tmp_path)
    row = next(csv.DictReader(open(tmp_path / "extraction-roundtrip.csv")))
    assert row["recovered"] == row["direct"] == "000101"
