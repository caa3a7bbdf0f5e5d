import pytest

from memsim.config import RunConfig, load_config, parse_config
from memsim.errors import ConfigurationError
from memsim.neuron import Mode, OneShotSense
from memsim.signals import ComponentValues


def test_empty_document_gives_defaults():
    cfg = parse_config("")
    assert cfg.cv == ComponentValues()
    assert cfg == RunConfig()


def test_zero_resistor_rejected():
    with pytest.raises(ConfigurationError):
        parse_config("r8 = 0")


def test_mod_wiper_reaches_modulation_stage():
    cfg = parse_config("mod_wiper = 0.25\nmod_mode = 'sombrero'")
    assert cfg.mod.wiper == 0.25 and cfg.mod.mode.value == "sombrero"
    gains = cfg.netlist().node("hebbian").p
    assert gains["wiper"] == 0.25


def test_unknown_keys_rejected():
    with pytest.raises(ConfigurationError, match="r5"):
        parse_config("r5 = 1.0")
    with pytest.raises(ConfigurationError, match="tau"):
        parse_config("[sim]\ntau = 1")
    with pytest.raises(ConfigurationError, match="unknown"):
        parse_config("[plots]\nx = 1")


def test_syntax_error_reports_line():
    with pytest.raises(ConfigurationError, match="line 3"):
        parse_config("r4 = 1e3\nc1 = 1e-6\nr8 = = 2\n")


def test_wrong_types():
    with pytest.raises(ConfigurationError):
        parse_config("r4 = 'big'")
    with pytest.raises(ConfigurationError):
        parse_config("r4 = true")
    with pytest.raises(ConfigurationError):
        parse_config("[sim]\nprobes = 'hebbian'")
    with pytest.raises(ConfigurationError):
        parse_config("[sim]\nmode = 'half_loop'")


def test_tables_are_parsed():
    cfg = parse_config("""
[sim]
dt = 2e-6
duration = 0.02
mode = "closed_loop"
oneshot_sense = "memristor_node"
probes = ["soma"]
[memristor]
g0 = 2e-4
inh_g0 = 5e-5
mu = 1e-3
[experiment]
delta_t = [1e-3, -1e-3]
da_stdp_settings = [["low", 0.1], ["high", 0.9]]
[conductance]
da_low = 0.2
""")
    assert cfg.sim.dt == 2e-6 and cfg.sim.mode is Mode.CLOSED_LOOP
    assert cfg.sim.oneshot_sense is OneShotSense.MEMRISTOR_NODE
    assert cfg.memristor.g == 2e-4 and cfg.inh_memristor.g == 5e-5 and cfg.inh_memristor.mu == 1e-3
    assert cfg.experiment.delta_t == (1e-3, -1e-3)
    assert cfg.experiment.da_stdp_settings == (("low", 0.1), ("high", 0.9))
    assert cfg.conductance.da_low == 0.2
    assert cfg.netlist().kinds()["soma"] == 1
    assert set(cfg.sim_config().stimuli) == {"tpre"}


def test_wiper_out_of_range():
    with pytest.raises(ConfigurationError, match="wiper"):
        parse_config("[experiment]\nda_istdp_settings = [['x', 1.5]]")


def test_resolution_checks():
    with pytest.raises(ConfigurationError, match="dt"):
        parse_config("[sim]\ndt = 1e-3")
    with pytest.raises(ConfigurationError, match="one-shot"):
        parse_config("c3 = 1e-12")


def test_load_config_from_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("r11 = 22e3\n", encoding="utf-8")
    assert load_config(path).cv.r11 == 22e3
