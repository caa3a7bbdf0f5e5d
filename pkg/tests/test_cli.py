import subprocess
import sys

import pytest

from memsim import cli

FAST = """
[sim]
duration = 0.02
probes = ["hebbian", "inhibitor"]
[stimulus]
pre_times = [0.005]
post_times = [0.007]
[experiment]
delta_t = [-2e-3, 2e-3]
window = 0.04
[conductance]
duration = 0.05
step_time = 0.025
"""


@pytest.fixture()
def fast_config(tmp_path):
    path = tmp_path / "fast.toml"
    path.write_text(FAST, encoding="utf-8")
    return path


@pytest.mark.parametrize("command,stem", [
    ("simulate", "simulate"), ("sweep-stdp", "sweep_stdp"), ("sweep-istdp", "sweep_istdp"),
    ("sweep-da-stdp", "sweep_da_stdp"), ("sweep-da-istdp", "sweep_da_istdp"),
    ("conductance", "conductance"),
])
def test_commands_write_csv_and_svg(tmp_path, fast_config, command, stem):
    out = tmp_path / "out"
    assert cli.main([command, "--config", str(fast_config), "--out", str(out), "--svg"]) == 0
    assert (out / f"{stem}.csv").exists() and (out / f"{stem}.svg").exists()


def test_svg_only_on_request(tmp_path, fast_config):
    assert cli.main(["sweep-stdp", "--config", str(fast_config), "--out", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["fast.toml", "sweep_stdp.csv"]


def test_dump_netlist_default_config(tmp_path):
    assert cli.main(["dump-netlist", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "netlist.txt").read_text().startswith("# memsim netlist")


def test_rerun_outputs_identical(tmp_path, fast_config):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["conductance", "--config", str(fast_config), "--out", str(out), "--svg"]) == 0
    for name in ("conductance.csv", "conductance.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    [],
    ["simulate", "--jobs", "0"],
    ["simulate", "--config", "/nonexistent/x.toml"],
])
def test_usage_errors_exit_1(tmp_path, argv):
    assert cli.main(argv + ["--out", str(tmp_path)]) == 1


def test_bad_config_exits_1(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("r8 = 0\n")
    assert cli.main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 1


def test_runtime_failure_exits_2(tmp_path, fast_config):
    # a spike lag larger than the window only fails once the sweep runs
    cfg = tmp_path / "late.toml"
    cfg.write_text(FAST.replace("delta_t = [-2e-3, 2e-3]", "delta_t = [0.5]"))
    assert cli.main(["sweep-stdp", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["simulate", "--config", str(fast_config), "--out", str(blocker)]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "memsim", "dump-netlist", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip().endswith("netlist.txt")
