import os

import numpy as np
import pytest

from blochlab.cli import ConfigError, config_to_experiment, main, parse_config

FINE_GRID_CONF = """
# fast end-to-end configuration
experiment = bloch
dt_per_TB = 512

[params]
hbar = 2.828
F = 0.0011
eps = 0.0

[grid]
n_points = 4096
x_min = -804.24772
x_max = 804.24772

[output]
dir = {dir}
stride = 256
"""


def write_conf(tmp_path, text):
    path = tmp_path / "exp.conf"
    path.write_text(text)
    return str(path)


def test_parse_config_roundtrip(tmp_path):
    x = 256 * np.pi
    path = write_conf(tmp_path, FINE_GRID_CONF.format(dir=tmp_path / "out")
                      .replace("-804.24772", repr(-x))
                      .replace("804.24772", repr(x), 1))
    cfg = config_to_experiment(parse_config(path))
    assert cfg.experiment == "bloch"
    assert cfg.dt_per_TB == 512
    assert cfg.params.hbar == 2.828
    assert cfg.grid.n_points == 4096


def test_unknown_key_reports_line_number(tmp_path):
    path = write_conf(tmp_path, "experiment = bloch\nbogus = 1\n")
    with pytest.raises(ConfigError, match=":2"):
        parse_config(path)


def test_unknown_key_in_section(tmp_path):
    path = write_conf(tmp_path,
                      "experiment = bloch\n[params]\nn_points = 4\n")
    with pytest.raises(ConfigError, match=":3.*params"):
        parse_config(path)


def test_bad_section_and_syntax(tmp_path):
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(write_conf(tmp_path, "[stuff]\n"))
    with pytest.raises(ConfigError, match="key = value"):
        parse_config(write_conf(tmp_path, "experiment bloch\n"))
    with pytest.raises(ConfigError, match="bad value"):
        parse_config(write_conf(tmp_path, "dt_per_TB = soon\n"))


def test_missing_config_exits_1(capsys):
    assert main(["run", "missing.conf"]) == 1
    assert "error" in capsys.readouterr().err


def test_bad_config_exits_1(tmp_path, capsys):
    path = write_conf(tmp_path, "experiment = bloch\nwhatever = 3\n")
    assert main(["run", path]) == 1
    assert ":2" in capsys.readouterr().err


def test_run_and_verify_roundtrip(tmp_path, capsys):
    x = 256 * np.pi
    conf = (f"experiment = bloch\ndt_per_TB = 512\n"
            f"[grid]\nn_points = 4096\nx_min = {-x!r}\nx_max = {x!r}\n"
            f"[output]\ndir = {tmp_path / 'out'}\nstride = 256\n")
    path = write_conf(tmp_path, conf)
    assert main(["run", path]) == 0
    assert os.path.exists(tmp_path / "out" / "manifest.txt")
    assert main(["run", path, "--verify"]) == 0
    out = capsys.readouterr().out
    assert "ok" in out


def test_bands_csv_zone_edge_touch(tmp_path, capsys):
    out = str(tmp_path / "bands.csv")
    assert main(["bands", "--eps", "0", "--out", out]) == 0
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    i_edge = int(np.argmin(np.abs(data[:, 0] + 0.25)))
    assert abs(data[i_edge, 2] - data[i_edge, 1]) < 1e-8


def test_bands_csv_nonzero_eps_gap(tmp_path):
    out = str(tmp_path / "bands121.csv")
    assert main(["bands", "--eps", "0.121", "--out", out]) == 0
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert np.min(data[:, 2] - data[:, 1]) > 0.05


def test_presets_command(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in ("mzi_v0_sweep", "free_split", "split_t4"):
        assert name in out


def test_tb_check_command(capsys):
    assert main(["tb-check"]) == 0
    assert "worst relative error" in capsys.readouterr().out


def test_usage_error_exit_code():
    assert main(["definitely-not-a-command"]) == 1
