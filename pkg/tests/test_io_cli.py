import json
import time

import numpy as np
import numpy.testing as npt
import pytest

from esavcpd import SchemeId
from esavcpd import checks
from esavcpd.cli import UsageError, cmd_check, main, parse_config
from esavcpd.harness import run_convergence_study, run_energy_experiment, run_timing_study
from esavcpd.io import (CSV_COLUMNS, IoError, read_trajectory_csv, write_report_json,
                        write_trajectory_csv, write_trajectory_json)


@pytest.fixture
def record(std_init, std_model):
    return run_energy_experiment("s2-esav", std_model, std_init, 0.01, 1.0)


def test_csv_round_trip(tmp_path, record):
    path = tmp_path / "traj.csv"
    write_trajectory_csv(record, path, {"note": "x"})
    meta, cols = read_trajectory_csv(path)
    assert tuple(cols) == CSV_COLUMNS
    assert len(cols["t"]) == 101
    npt.assert_array_equal(cols["x2"], record.x[:, 1])
    npt.assert_array_equal(cols["aux"], record.aux)
    npt.assert_array_equal(cols["rel_energy_err"], record.relative_energy_error)
    assert meta["scheme"] == "s2-esav" and meta["note"] == "x"
    assert "package_version" in meta and "git_describe" in meta


def test_csv_t100_row_count(tmp_path, std_init, std_model):
    rec = run_energy_experiment("s1-esav", std_model, std_init, 0.01, 100.0)
    write_trajectory_csv(rec, tmp_path / "a.csv")
    _, cols = read_trajectory_csv(tmp_path / "a.csv")
    assert len(cols["t"]) == 10_001


def test_empty_record_writes_header_only(tmp_path, record):
    empty = type(record)("s1-esav", 0.1, *([np.empty((0,))] * 7))
    write_trajectory_csv(empty, tmp_path / "e.csv")
    lines = [l for l in (tmp_path / "e.csv").read_text().splitlines() if not l.startswith("#")]
    assert lines == [",".join(CSV_COLUMNS)]


def test_trajectory_json(tmp_path, record):
    write_trajectory_json(record, tmp_path / "t.json")
    body = json.loads((tmp_path / "t.json").read_text())
    assert len(body["columns"]["t"]) == 101
    assert body["error"] is None


def test_report_json(tmp_path, std_init, std_model):
    rep = run_convergence_study("s1-esav", std_model, std_init)
    write_report_json(rep, tmp_path / "c.json")
    body = json.loads((tmp_path / "c.json").read_text())
    assert len(body["stepsizes"]) == len(body["errors"]) == 7
    assert body["exact_regime"] is False

    timing = run_timing_study(T=0.01, repetitions=3)
    write_report_json(timing, tmp_path / "t.json")
    body = json.loads((tmp_path / "t.json").read_text())
    assert len(body["cells"]) == 42


def test_missing_directory_is_io_error(tmp_path, record):
    target = tmp_path / "nope" / "x.csv"
    with pytest.raises(IoError, match="nope"):
        write_trajectory_csv(record, target)


def test_parse_config_defaults():
    cfg = parse_config(["energy"])
    assert [s.value for s in cfg.schemes] == [s.value for s in SchemeId]
    assert cfg.eps == (1.0, 0.25, 0.0625)
    assert cfg.h == (1e-2,) and cfg.T == 100.0
    cfg = parse_config(["timing"])
    assert [s.value for s in cfg.schemes] == ["s1-sav", "s1-esav"]
    assert len(cfg.eps) == 7 and cfg.format == "json"


def test_parse_config_flags():
    cfg = parse_config(["simulate", "--scheme", "s1-sav", "--eps", "0.25", "--h", "0.01", "--T", "1"])
    assert cfg.schemes == (SchemeId.S1_SAV,)
    assert cfg.eps == (0.25,) and cfg.T == 1.0
    assert cfg.out == "trajectory.csv"


@pytest.mark.parametrize("argv,match", [
    (["simulate"], "s1-esav"),
    (["energy", "--eps", "0"], "eps"),
    (["energy", "--eps", "-1"], "eps"),
    (["simulate", "--scheme", "rk4"], "s2-mesav"),
    (["converge", "--format", "csv"], "format"),
    (["timing", "--repetitions", "2"], "repetitions"),
    (["frobnicate"], "invalid choice"),
    (["energy", "--x0", "1,2"], "x0"),
])
def test_parse_config_rejects(argv, match):
    with pytest.raises(UsageError, match=match):
        parse_config(argv)


def test_config_file_precedence(tmp_path):
    conf = tmp_path / "run.cfg"
    conf.write_text("# comment\nscheme = s1-esav\nh = 0.02\nT = 4\n")
    cfg = parse_config(["simulate", "--config", str(conf), "--h", "0.05"])
    assert cfg.schemes == (SchemeId.S1_ESAV,)
    assert cfg.h == (0.05,)
    assert cfg.T == 4.0
    conf.write_text("stepsize = 0.1\n")
    with pytest.raises(UsageError, match="stepsize"):
        parse_config(["simulate", "--config", str(conf)])


def test_main_exit_codes(tmp_path, capsys):
    out = tmp_path / "a.csv"
    assert main(["simulate", "--scheme", "s1-esav", "--T", "1", "--out", str(out)]) == 0
    assert main(["simulate"]) == 1
    assert main(["simulate", "--scheme", "s1-esav", "--T", "1", "--out", str(tmp_path / "x" / "a.csv")]) == 3
    assert main(["simulate", "--scheme", "s1-esav", "--x0", "0,0,1", "--T", "1", "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "usage error" in err and "I/O error" in err and "numeric failure" in err


def test_simulate_is_byte_deterministic(tmp_path):
    path = tmp_path / "a.csv"
    runs = []
    for _ in range(2):
        assert main(["simulate", "--scheme", "s2-mesav", "--eps", "0.25", "--T", "2", "--out", str(path)]) == 0
        runs.append(path.read_bytes())
    assert runs[0] == runs[1]


def test_energy_command_writes_one_file_per_run(tmp_path):
    outdir = tmp_path / "energy"
    assert main(["energy", "--T", "1", "--out", str(outdir)]) == 0
    files = sorted(p.name for p in outdir.iterdir())
    assert len(files) == 15
    assert "energy_s1-sav_eps0p0625.csv" in files


def test_converge_command(tmp_path):
    out = tmp_path / "c.json"
    assert main(["converge", "--scheme", "s1-esav,s2-esav", "--eps", "1", "--out", str(out)]) == 0
    reports = json.loads(out.read_text())["reports"]
    assert [r["scheme"] for r in reports] == ["s1-esav", "s2-esav"]


def test_check_command(capsys):
    t0 = time.perf_counter()
    assert cmd_check() == 0
    assert time.perf_counter() - t0 <= 10.0
    assert "6/6 checks passed" in capsys.readouterr().out


def test_check_detects_broken_skew(monkeypatch, capsys):
    def broken(b):
        b = np.asarray(b, dtype=float)
        return np.array([[0, b[2], -b[1]], [-b[2], 0, b[0]], [b[1], b[0], 0.0]])

    monkeypatch.setattr(checks, "skew", broken)
    assert cmd_check() != 0
    assert "FAIL" in capsys.readouterr().out


def test_checks_individually():
    results = checks.run_checks()
    assert len(results) == 6
    assert all(r.passed for r in results), [r for r in results if not r.passed]
    assert checks.series_exp_apply(np.zeros((3, 3)), [1.0, 2.0, 3.0]).tolist() == [1.0, 2.0, 3.0]
