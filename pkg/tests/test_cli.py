import io

import pytest

from singshock.cli import main, parse_eps, parse_state


def run(args, tmp_path):
    buf = io.StringIO()
    code = main(list(args) + ["--out", str(tmp_path)], stdout=buf)
    return code, buf.getvalue()


def test_analyze_output(tmp_path):
    code, out = run(["analyze"], tmp_path)
    assert code == 0
    lines = dict(line.split(None, 1) for line in out.splitlines() if line.strip())
    assert lines["s"].strip() == "0"
    assert lines["e0"].strip() == "0.432"
    assert (tmp_path / "analyze_summary.csv").exists()


def test_negative_state_values(tmp_path):
    code, out = run(["analyze", "--uL", "2,6", "--uR", "-1.6,4.56"], tmp_path)
    assert code == 0 and "0.432" in out


def test_degenerate_data_exit(tmp_path, capsys):
    code, _ = run(["analyze", "--uL", "0,1", "--uR", "0,0"], tmp_path)
    assert code == 1
    assert "DegenerateData" in capsys.readouterr().err


def test_usage_errors(tmp_path):
    assert run(["analyze", "--bogus"], tmp_path)[0] == 64
    assert run(["nonsense"], tmp_path)[0] == 64
    assert run(["analyze", "--uL", "1"], tmp_path)[0] == 64
    assert run(["profile", "--eps", "a:b:c"], tmp_path)[0] == 64


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample\nuL = 2,6\nuR = -1.6, 4.56\ncells = 300\n")
    code, out = run(["analyze", "--config", str(cfg)], tmp_path)
    assert code == 0 and "0.432" in out
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run(["analyze", "--config", str(bad)], tmp_path)[0] == 64


def test_csv_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["inner", "--span", "25"], a)
    run(["inner", "--span", "25"], b)
    for name in ("inner_summary.csv",):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_outer_command(tmp_path):
    code, out = run(["outer"], tmp_path)
    assert code == 0
    assert "rank" in out


def test_small_sweep(tmp_path):
    code, out = run(["sweep", "--eps", "1e-2,7e-3"], tmp_path)
    assert code == 0
    rows = (tmp_path / "scaling.csv").read_text().splitlines()
    assert rows[0].startswith("epsilon,eps2_max_u2")
    assert len(rows) == 3


def test_small_pde_run(tmp_path):
    code, out = run(["pde", "--cells", "200", "--steps", "600", "--snapshot-every", "50"], tmp_path)
    assert code == 0
    assert (tmp_path / "pde_series.csv").exists()
    assert run(["pde", "--cfl", "2"], tmp_path)[0] == 64


def test_parsers():
    assert parse_state("2, 6").u2 == 6.0
    assert len(parse_eps("1e-2:0.7:1e-4")) == 14
    assert parse_eps("1e-2,1e-3") == [1e-2, 1e-3]
    with pytest.raises(Exception):
        parse_eps("")
