"""Command-line interface: subcommands, overrides, exit codes, outputs."""

import numpy as np
import pytest

from statdim.cli import main

GRID_CFG = """
[experiment]
family = entrywise
trials = 4
base_seed = 3

[model]
n = 18
p = 18
dictionary = identity

[grid]
m = 4, 9, 14
s = 3
"""

COMPARE_CFG = """
[experiment]
family = entrywise
trials = 4
base_seed = 5
weights = optimal

[model]
n = 16
p = 16
dictionary = dct

[partition]
sizes = 4, 12
counts = 3, 1

[grid]
m = 4, 8, 12
"""


@pytest.fixture
def grid_cfg(tmp_path):
    f = tmp_path / "grid.cfg"
    f.write_text(GRID_CFG)
    return f


@pytest.fixture
def compare_cfg(tmp_path):
    f = tmp_path / "compare.cfg"
    f.write_text(COMPARE_CFG)
    return f


def test_missing_config_flag_is_a_config_error(capsys):
    assert main(["bounds"]) == 2
    assert "config error" in capsys.readouterr().err


def test_unreadable_config_is_a_config_error(tmp_path, capsys):
    assert main(["bounds", "--config", str(tmp_path / "nope.cfg")]) == 2
    assert "config error" in capsys.readouterr().err


def test_invalid_config_content(tmp_path, capsys):
    f = tmp_path / "bad.cfg"
    f.write_text(GRID_CFG.replace("family = entrywise", "family = tensor"))
    assert main(["bounds", "--config", str(f)]) == 2
    assert "family" in capsys.readouterr().err


def test_bounds_prints_theory_table(grid_cfg, capsys):
    assert main(["bounds", "--config", str(grid_cfg)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "family,s,weights,m_hat,width,theory_m,raw_m"
    family, s, label, m_hat, width, theory_m, raw_m = out[1].split(",")
    assert (family, s, label) == ("entrywise", "3", "unit")
    assert float(theory_m) == pytest.approx(float(m_hat) * 18, abs=1e-4)
    assert int(raw_m) >= float(theory_m)


def test_weights_prints_partition_table(compare_cfg, capsys):
    assert main(["weights", "--config", str(compare_cfg)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "part,size,alpha,omega"
    rows = [l.split(",") for l in out[1:]]
    assert [r[0] for r in rows] == ["0", "1"]
    assert [r[1] for r in rows] == ["4", "12"]
    # higher-accuracy part gets the smaller weight
    assert float(rows[0][3]) < float(rows[1][3])


def test_phase_grid_writes_csv(grid_cfg, tmp_path, capsys):
    out = tmp_path / "res.csv"
    assert main(["phase-grid", "--config", str(grid_cfg), "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "50% crossing" in printed
    assert str(out) in printed
    lines = out.read_text().splitlines()
    assert lines[0].startswith("family,")
    assert len(lines) == 4


def test_phase_grid_without_out_fails(grid_cfg, capsys):
    assert main(["phase-grid", "--config", str(grid_cfg)]) == 2
    assert "out" in capsys.readouterr().err


def test_seed_override_changes_seed_column(grid_cfg, tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(["phase-grid", "--config", str(grid_cfg), "--out", str(a)]) == 0
    assert main(["phase-grid", "--config", str(grid_cfg), "--out", str(b), "--seed", "99"]) == 0
    assert a.read_text() != b.read_text()
    assert a.read_text().splitlines()[1].endswith(",3")
    assert b.read_text().splitlines()[1].endswith(",99")


def test_trials_override(grid_cfg, tmp_path):
    out = tmp_path / "t.csv"
    assert main(["phase-grid", "--config", str(grid_cfg), "--out", str(out), "--trials", "2"]) == 0
    assert out.read_text().splitlines()[1].split(",")[5] == "2"


def test_threads_flag_gives_identical_output(grid_cfg, tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(["phase-grid", "--config", str(grid_cfg), "--out", str(a)]) == 0
    assert main(["phase-grid", "--config", str(grid_cfg), "--out", str(b), "--threads", "4"]) == 0
    assert a.read_text() == b.read_text()


def test_compare_writes_two_labeled_files(compare_cfg, tmp_path, capsys):
    out = tmp_path / "cmp.csv"
    assert main(["compare", "--config", str(compare_cfg), "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    unit = tmp_path / "cmp_unit.csv"
    wtd = tmp_path / "cmp_optimal.csv"
    assert unit.exists() and wtd.exists()
    assert str(unit) in printed and str(wtd) in printed
    # same cells in both files
    u = unit.read_text().splitlines()
    w = wtd.read_text().splitlines()
    assert len(u) == len(w) == 4
    assert [l.split(",")[4] for l in u[1:]] == [l.split(",")[4] for l in w[1:]]


def test_weights_flag_overrides_mode(compare_cfg, capsys):
    assert main(["bounds", "--config", str(compare_cfg), "--weights", "unit"]) == 0
    unit_out = capsys.readouterr().out
    assert main(["bounds", "--config", str(compare_cfg), "--weights", "optimal"]) == 0
    opt_out = capsys.readouterr().out
    assert ",unit," in unit_out and ",optimal," in opt_out
    m_unit = float(unit_out.splitlines()[1].split(",")[5])
    m_opt = float(opt_out.splitlines()[1].split(",")[5])
    assert m_opt < m_unit


def test_mc_check_agrees_with_kernels(grid_cfg, capsys):
    assert main(["mc-check", "--config", str(grid_cfg), "--trials", "20000"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "family,t,psi,mc_mean,mc_stderr,z"
    assert "OK: worst |z|" in out


def test_unknown_subcommand_exits_via_argparse(grid_cfg):
    with pytest.raises(SystemExit):
        main(["frobnicate", "--config", str(grid_cfg)])
