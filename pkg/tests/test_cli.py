import csv
import json
import math
import os

import numpy as np
import pytest

from kitaev_fs.cli import ConfigError, build_parser, main, parse_range, read_sweep_csv, resolve


def rows(path):
    lines = [ln for ln in open(path, encoding="utf-8").read().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def echo(path):
    first = open(path, encoding="utf-8").readline()
    assert first.startswith("# config: ")
    return json.loads(first[len("# config: "):])


def run(*argv):
    return main([str(a) for a in argv])


def test_sweep_outputs(tmp_path):
    out = tmp_path / "fig1"
    assert run("sweep", "--line", "jx-eq-jy", "--lz", "0.2:0.8:120", "--sizes", "11,21", "--out", out) == 0
    assert sorted(p.name for p in out.iterdir()) == ["sweep_L11.csv", "sweep_L21.csv", "sweep_summary.json"]
    data = rows(out / "sweep_L11.csv")
    assert list(data[0]) == ["lambda", "chi_f", "chi_f_per_site", "gap"]
    assert len(data) == 120
    meta = echo(out / "sweep_L11.csv")
    assert meta["L"] == 11 and meta["config"]["sizes"] == [11, 21] and meta["config"]["lam"] == [0.2, 0.8, 120]
    summary = json.loads((out / "sweep_summary.json").read_text())
    assert summary["config"]["command"] == "sweep"
    assert set(summary["peaks"]) == {"11", "21"} and summary["failures"] == []


def test_sweep_rerun_identical(tmp_path):
    args = ["sweep", "--lz", "0.3:0.7:200", "--sizes", "31"]
    run(*args, "--out", tmp_path / "a")
    run(*args, "--out", tmp_path / "a2")
    run(*args, "--out", tmp_path / "b", "--threads", "4")
    a = (tmp_path / "a" / "sweep_L31.csv").read_text().splitlines()
    a2 = (tmp_path / "a2" / "sweep_L31.csv").read_text().splitlines()
    b = (tmp_path / "b" / "sweep_L31.csv").read_text().splitlines()
    assert a[1:] == a2[1:] == b[1:]
    # numeric fields round-trip exactly
    for rec in rows(tmp_path / "a" / "sweep_L31.csv"):
        for v in rec.values():
            assert "%.17g" % float(v) == v


def test_even_size_rejected(tmp_path, capsys):
    assert run("sweep", "--sizes", "100", "--out", tmp_path) == 2
    assert "L must be odd" in capsys.readouterr().err
    assert not list(tmp_path.iterdir())


def test_invalid_window_rejected(tmp_path, capsys):
    assert run("sweep", "--lz", "0.8:0.2:10", "--sizes", "11", "--out", tmp_path) == 2
    assert "invalid lz" in capsys.readouterr().err
    assert run("sweep", "--lz", "0.2:1.2:10", "--sizes", "11", "--out", tmp_path) == 2


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run("sweep", "--lz", "0.2:0.8:10", "--sizes", "11", "--out", blocker / "sub") == 2
    assert "invalid out" in capsys.readouterr().err


def test_partial_failure_lists_samples(tmp_path, capsys):
    code = run("sweep", "--line", "jz-third", "--lz", f"0.2:{2 / 3 - 0.2!r}:3", "--sizes", "9", "--out", tmp_path)
    assert code == 1
    assert "lambda=" in capsys.readouterr().err
    summary = json.loads((tmp_path / "sweep_summary.json").read_text())
    assert len(summary["peaks"]["9"]["skipped"]) == 1
    assert len(rows(tmp_path / "sweep_L9.csv")) == 2


def test_correlate_exp(tmp_path):
    assert run("correlate", "--jz", "0.6", "--line", "jx-eq-jy", "-L", "101", "--fit", "exp", "--out", tmp_path) == 0
    data = rows(tmp_path / "correlation.csv")
    assert list(data[0]) == ["r", "C", "abs_C"] and len(data) == 50
    fit = json.loads((tmp_path / "correlation_fit.json").read_text())
    assert fit["fit"]["kind"] == "exponential" and fit["fit"]["window"] == [3, 12]
    assert fit["theory"]["inverse_xi"] == pytest.approx(fit["fit"]["inverse_xi"], rel=0.05)


def test_correlate_power_and_dump(tmp_path):
    assert run("correlate", "--jz", "0.3", "-L", "51", "--fit", "power", "--dump-profile", "--out", tmp_path) == 0
    fit = json.loads((tmp_path / "correlation_fit.json").read_text())
    assert fit["fit"]["kind"] == "power" and 3 < fit["fit"]["exponent"] < 5
    assert "theory" not in fit
    assert len(rows(tmp_path / "correlation_profile.csv")) == 51 * 51 - 1


def test_correlate_wrong_phase_fit(tmp_path):
    assert run("correlate", "--jz", "0.3", "-L", "51", "--fit", "exp", "--out", tmp_path) == 1
    fit = json.loads((tmp_path / "correlation_fit.json").read_text())
    assert "phase A" in fit["fit"]["error"]


def test_correlate_domain(tmp_path, capsys):
    assert run("correlate", "--jz", "1.5", "--out", tmp_path) == 2
    assert "domain error" in capsys.readouterr().err
    assert run("correlate", "--couplings", "0.5,0.5,0.5", "--out", tmp_path) == 2


def test_scale_two_sizes_rejected(tmp_path, capsys):
    assert run("scale", "--sizes", "101,201", "--out", tmp_path) == 2
    assert "at least 3" in capsys.readouterr().err


def write_fixture(path, L, nu, mu):
    center = 0.5 - 0.3 / L
    lam = np.linspace(center - 0.05, center + 0.05, 801)
    x = L**nu * (lam - center)
    chi = 2 * L * L * L**mu / (1 + x * x)
    with open(path, "w") as fh:
        fh.write("lambda,chi_f,chi_f_per_site,gap\n")
        for a, b in zip(lam, chi):
            fh.write("%.17g,%.17g,%.17g,1\n" % (a, b, b / (2 * L * L)))


def test_scale_synthetic_fixture(tmp_path):
    files = []
    for L in (101, 201, 401, 801):
        files.append(tmp_path / f"L{L}.csv")
        write_fixture(files[-1], L, 0.9, 0.5)
    out = tmp_path / "out"
    assert run("scale", "--input", *files, "--x-max", "3", "--out", out) == 0
    res = json.loads((out / "scaling.json").read_text())
    assert abs(res["nu"] - 0.9) <= 0.01
    assert abs(res["mu"] - 0.5) <= 1e-3
    assert res["alpha"] == res["mu"] / res["nu"]
    curves = rows(out / "collapse.csv")
    assert {r["L"] for r in curves} == {"101", "201", "401", "801"}


def test_scale_reads_sweep_output(tmp_path):
    run("sweep", "--lz", "0.46:0.54:300", "--sizes", "41,61,81,101", "--out", tmp_path / "s")
    rec = read_sweep_csv(tmp_path / "s" / "sweep_L61.csv")
    assert rec.L == 61 and len(rec) == 300
    files = sorted((tmp_path / "s").glob("sweep_L*.csv"))
    code = run("scale", "--input", *files, "--out", tmp_path / "o")
    res = json.loads((tmp_path / "o" / "scaling.json").read_text())
    assert code == 0, res
    assert 0.6 < res["nu"] < 1.6


def test_scale_collapse_failure_reported(tmp_path):
    files = []
    for L in (101, 201, 401):
        files.append(tmp_path / f"L{L}.csv")
        write_fixture(files[-1], L, 0.9, 0.5)
    assert run("scale", "--input", *files, "--nu-range", "1.0:1.3", "--x-max", "3", "--out", tmp_path / "o") == 1
    res = json.loads((tmp_path / "o" / "scaling.json").read_text())
    assert "interior minimum" in res["error"] and len(res["residual_scan"]) > 2


def test_phase_diagram(tmp_path):
    assert run("phase-diagram", "--resolution", "50", "-L", "11", "--out", tmp_path) == 0
    data = rows(tmp_path / "phase_diagram.csv")
    assert list(data[0]) == ["jx", "jy", "jz", "phase", "gap"]
    assert len(data) == 51 * 52 // 2
    table = {}
    for r in data:
        j = tuple(float(r[k]) for k in ("jx", "jy", "jz"))
        table[tuple(round(v * 50) for v in j)] = r["phase"]
        if max(j) > 0.5 + 1e-12:
            assert r["phase"] == "A"
        elif max(j) < 0.5 - 1e-12:
            assert r["phase"] == "B"
        else:
            assert r["phase"] == "Boundary"
    # permuting the axes permutes the table
    for (i, j, k), phase in table.items():
        assert table[(j, k, i)] == phase and table[(j, i, k)] == phase


def test_phase_diagram_symmetric_point(tmp_path):
    run("phase-diagram", "--resolution", "3", "-L", "5", "--out", tmp_path)
    data = {(r["jx"], r["jy"], r["jz"]): r["phase"] for r in rows(tmp_path / "phase_diagram.csv")}
    third = "%.17g" % (1 / 3)
    assert data[(third, third, third)] == "B"


def test_phase_diagram_resolution(tmp_path, capsys):
    assert run("phase-diagram", "--resolution", "1", "--out", tmp_path) == 2
    assert "invalid resolution" in capsys.readouterr().err


def test_fidelity_command(tmp_path, capsys):
    assert run("fidelity", "--a", "0.2,0.2,0.6", "--b", "0.21,0.21,0.58", "-L", "11", "--out", tmp_path) == 0
    value = float(capsys.readouterr().out)
    res = json.loads((tmp_path / "fidelity.json").read_text())
    assert res["fidelity"] == value and 0 < value < 1
    assert res["log_fidelity"] == pytest.approx(math.log(value))


def test_config_file_and_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "run.conf"
    cfg.write_text('# comment\nlz = "0.3:0.7:20"\nsizes = 11,13\nout = %s\nthreads = 2\n' % (tmp_path / "cfg"))
    assert run("sweep", "--config", cfg, "--sizes", "15") == 0
    meta = echo(tmp_path / "cfg" / "sweep_L15.csv")["config"]
    assert meta["sizes"] == [15] and meta["lam"] == [0.3, 0.7, 20] and meta["threads"] == 2

    monkeypatch.setenv("KITAEV_FS_OUTDIR", str(tmp_path / "env"))
    assert run("sweep", "--config", cfg) == 0
    assert (tmp_path / "env" / "sweep_L13.csv").exists()
    assert run("sweep", "--config", cfg, "--out", tmp_path / "flag") == 0
    assert (tmp_path / "flag" / "sweep_L11.csv").exists()


def test_config_errors_name_field(tmp_path):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("bogus = 1\n")
    args = build_parser().parse_args(["sweep", "--config", str(cfg)])
    with pytest.raises(ConfigError) as info:
        resolve(args)
    assert info.value.field == "bogus"
    args = build_parser().parse_args(["sweep", "--threads", "0"])
    with pytest.raises(ConfigError, match="threads"):
        resolve(args)


@pytest.mark.parametrize("text", ["0.1:0.2", "a:b:3", "0.1:0.2:1", "0.3:0.2:5"])
def test_parse_range_rejects(text):
    with pytest.raises(ConfigError):
        parse_range("lz", text)


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-m", "kitaev_fs.cli", "fidelity", "--a", "0,0,1", "--b", "0,0,1", "-L", "3",
         "--out", str(tmp_path)],
        capture_output=True, text=True, env={**os.environ},
    )
    assert out.returncode == 0 and float(out.stdout) == 1.0
