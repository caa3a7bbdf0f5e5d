"""TOML run configuration.

Every key is optional and falls back to the documented default; unknown keys
and tables are rejected so a typo cannot silently change an experiment.

Top-level keys hold component values (``r4``, ``c1``, ``c3``, ``r8``, ``r9``,
``r11``, ``mod_pot_total_ohms``, ``mod_wiper``, ``mod_mode``, ...).  Tables:
``[modulation]``, ``[memristor]``, ``[soma]``, ``[sim]``, ``[stimulus]``,
``[experiment]`` and ``[conductance]``.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .blocks import ModStageConfig, lag_alpha, one_shot_duration
from .engine import SimConfig
from .errors import ConfigurationError
from .experiments import (
    ACCEPTANCE_DELTA_TS,
    DEFAULT_DA_ISTDP_SETTINGS,
    DEFAULT_DA_STDP_SETTINGS,
    ConductanceProtocol,
    ExperimentParams,
)
from .memristor import MemristorState
from .neuron import (DEFAULT_INH_SYNAPSE, Mode, NeuronNetlist, OneShotSense, SomaConfig,
                     build_standard_netlist)
from .signals import ComponentValues, SpikeTrain, TimeGrid

# config key -> ComponentValues field
TOP_LEVEL = {
    "r4": "r4", "c1": "c1", "c3": "c3", "r8": "r8", "r9": "r9", "r11": "r11",
    "mod_pot_total_ohms": "mod_pot_total", "mod_wiper": "mod_wiper", "v_rail": "v_rail",
    "v_threshold_oneshot": "v_threshold_oneshot", "v_high_oneshot": "v_high_oneshot",
    "tau_inhibitor": "tau_inhibitor", "tau_output": "tau_output",
    "learning_gain": "learning_gain", "inhibitory_gain": "inhibitory_gain",
    "key_threshold": "key_threshold",
}
MODULATION_KEYS = ("gain_min", "gain_max", "sombrero_center", "sombrero_width")
MEMRISTOR_KEYS = ("g0", "inh_g0", "g_min", "g_max", "v_th_set", "v_th_reset", "mu")
SOMA_KEYS = tuple(f.name for f in fields(SomaConfig))
SIM_KEYS = ("dt", "duration", "probes", "mode", "oneshot_sense", "seed")
STIMULUS_KEYS = ("pre_times", "post_times")
EXPERIMENT_KEYS = ("delta_t", "da_stdp_settings", "da_istdp_settings", "da_delta_t",
                   "spike_width", "spike_amplitude", "window", "t0")
CONDUCTANCE_KEYS = tuple(f.name for f in fields(ConductanceProtocol))
TABLES = {
    "modulation": MODULATION_KEYS, "memristor": MEMRISTOR_KEYS, "soma": SOMA_KEYS,
    "sim": SIM_KEYS, "stimulus": STIMULUS_KEYS, "experiment": EXPERIMENT_KEYS,
    "conductance": CONDUCTANCE_KEYS,
}


@dataclass(frozen=True)
class SimSettings:
    dt: float = 1e-6
    duration: float = 0.1
    probes: tuple = ("hebbian", "inhibitor")
    mode: Mode = Mode.OPEN_LOOP
    oneshot_sense: OneShotSense = OneShotSense.INTEGRATOR_OUTPUT
    seed: int = 0


@dataclass(frozen=True)
class ExperimentSettings:
    delta_t: tuple = ACCEPTANCE_DELTA_TS
    da_stdp_settings: tuple = DEFAULT_DA_STDP_SETTINGS
    da_istdp_settings: tuple = DEFAULT_DA_ISTDP_SETTINGS
    da_delta_t: float = 2e-3
    spike_width: float = 100e-6
    spike_amplitude: float = 5.0
    window: float = 0.1
    t0: float | None = None


@dataclass(frozen=True)
class RunConfig:
    cv: ComponentValues = field(default_factory=ComponentValues)
    mod: ModStageConfig = field(default_factory=ModStageConfig)
    soma: SomaConfig = field(default_factory=SomaConfig)
    memristor: MemristorState = field(default_factory=MemristorState)
    inh_memristor: MemristorState = DEFAULT_INH_SYNAPSE
    sim: SimSettings = field(default_factory=SimSettings)
    pre_times: tuple = (0.05,)
    post_times: tuple = (0.052,)
    experiment: ExperimentSettings = field(default_factory=ExperimentSettings)
    conductance: ConductanceProtocol = field(default_factory=ConductanceProtocol)

    def netlist(self) -> NeuronNetlist:
        return build_standard_netlist(self.cv, self.mod, self.sim.mode, self.sim.oneshot_sense,
                                      self.soma, self.memristor, self.inh_memristor)

    def sim_config(self) -> SimConfig:
        grid = TimeGrid.from_duration(self.sim.duration, self.sim.dt)
        e = self.experiment
        stimuli = {"tpre": SpikeTrain(self.pre_times, e.spike_width, e.spike_amplitude)}
        if self.sim.mode is Mode.OPEN_LOOP:
            stimuli["tpost"] = SpikeTrain(self.post_times, e.spike_width, e.spike_amplitude)
        return SimConfig(grid, self.sim.probes, self.sim.seed, stimuli)

    def experiment_params(self, dt: float | None = None) -> ExperimentParams:
        e = self.experiment
        return ExperimentParams(self.cv, self.mod, self.sim.dt if dt is None else dt, e.window, e.t0,
                                e.spike_width, e.spike_amplitude, self.sim.oneshot_sense)


def _number(table: str, key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{table}{key} must be a number, got {value!r}")
    return float(value)


def _numbers(table: str, key: str, value) -> tuple:
    if not isinstance(value, list):
        raise ConfigurationError(f"{table}{key} must be a list of numbers")
    return tuple(_number(table, key, v) for v in value)


def _settings(table: str, key: str, value) -> tuple:
    if not isinstance(value, list):
        raise ConfigurationError(f"{table}{key} must be a list of [label, wiper] pairs")
    out = []
    for item in value:
        if not (isinstance(item, list) and len(item) == 2 and isinstance(item[0], str)):
            raise ConfigurationError(f"{table}{key} entries must be [label, wiper], got {item!r}")
        out.append((item[0], _number(table, key, item[1])))
    return tuple(out)


def parse_config(text: str) -> RunConfig:
    """Parse a TOML document into a fully populated :class:`RunConfig`."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"config syntax error: {exc}") from None

    cv_kwargs, mod_kwargs = {}, {}
    tables = {}
    for key, value in doc.items():
        if key in TABLES:
            if not isinstance(value, dict):
                raise ConfigurationError(f"[{key}] must be a table")
            unknown = sorted(set(value) - set(TABLES[key]))
            if unknown:
                raise ConfigurationError(f"unknown key(s) in [{key}]: {', '.join(unknown)}")
            tables[key] = value
        elif key == "mod_mode":
            if value not in ("linear", "sombrero"):
                raise ConfigurationError(f"mod_mode must be 'linear' or 'sombrero', got {value!r}")
            mod_kwargs["mode"] = value
        elif key in TOP_LEVEL:
            cv_kwargs[TOP_LEVEL[key]] = _number("", key, value)
        else:
            raise ConfigurationError(f"unknown config key {key!r}")

    cv = ComponentValues(**cv_kwargs)
    mod_table = tables.get("modulation", {})
    mod = ModStageConfig(wiper=cv.mod_wiper, **mod_kwargs,
                         **{k: _number("modulation.", k, v) for k, v in mod_table.items()})

    mem_table = {k: _number("memristor.", k, v) for k, v in tables.get("memristor", {}).items()}
    g0 = mem_table.pop("g0", None)
    inh_g0 = mem_table.pop("inh_g0", DEFAULT_INH_SYNAPSE.g)
    defaults = MemristorState()
    g_min = mem_table.get("g_min", defaults.g_min)
    g_max = mem_table.get("g_max", defaults.g_max)
    memristor = MemristorState(g=(g_min + g_max) / 2 if g0 is None else g0, **mem_table)
    inh_memristor = MemristorState(g=inh_g0, **mem_table)

    soma = SomaConfig(**{k: _number("soma.", k, v) for k, v in tables.get("soma", {}).items()})

    sim_kwargs = {}
    for key, value in tables.get("sim", {}).items():
        if key == "probes":
            if not (isinstance(value, list) and all(isinstance(v, str) for v in value)):
                raise ConfigurationError("sim.probes must be a list of node ids")
            sim_kwargs[key] = tuple(value)
        elif key == "mode":
            try:
                sim_kwargs[key] = Mode(value)
            except ValueError:
                raise ConfigurationError(f"sim.mode must be open_loop or closed_loop, got {value!r}") from None
        elif key == "oneshot_sense":
            try:
                sim_kwargs[key] = OneShotSense(value)
            except ValueError:
                raise ConfigurationError(f"unknown sim.oneshot_sense {value!r}") from None
        elif key == "seed":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigurationError("sim.seed must be an integer")
            sim_kwargs[key] = value
        else:
            sim_kwargs[key] = _number("sim.", key, value)
    sim = SimSettings(**sim_kwargs)
    if not sim.dt > 0 or not sim.duration > 0:
        raise ConfigurationError("sim.dt and sim.duration must be positive")

    stim = tables.get("stimulus", {})
    pre_times = _numbers("stimulus.", "pre_times", stim["pre_times"]) if "pre_times" in stim else (0.05,)
    post_times = _numbers("stimulus.", "post_times", stim["post_times"]) if "post_times" in stim else (0.052,)

    exp_kwargs = {}
    for key, value in tables.get("experiment", {}).items():
        if key == "delta_t":
            exp_kwargs[key] = _numbers("experiment.", key, value)
        elif key in ("da_stdp_settings", "da_istdp_settings"):
            exp_kwargs[key] = _settings("experiment.", key, value)
        else:
            exp_kwargs[key] = _number("experiment.", key, value)
    experiment = ExperimentSettings(**exp_kwargs)
    for label, wiper in experiment.da_stdp_settings + experiment.da_istdp_settings:
        if not 0 <= wiper <= 1:
            raise ConfigurationError(f"DA setting {label!r} has wiper {wiper} outside [0, 1]")

    conductance = ConductanceProtocol(**{k: _number("conductance.", k, v)
                                         for k, v in tables.get("conductance", {}).items()})

    cfg = RunConfig(cv, mod, soma, memristor, inh_memristor, sim, pre_times, post_times, experiment, conductance)
    check_resolution(cfg)
    return cfg


def check_resolution(cfg: RunConfig) -> None:
    """Reject steps too coarse for any time constant on the board."""
    dt = cfg.sim.dt
    for name, tau in (("r4*c1", cfg.cv.tau_integrator), ("tau_inhibitor", cfg.cv.tau_inhibitor),
                      ("tau_output", cfg.cv.tau_output), ("soma.tau_mem", cfg.soma.tau_mem)):
        try:
            lag_alpha(tau, dt)
        except ConfigurationError:
            raise ConfigurationError(f"sim.dt={dt} exceeds {name}/10 = {tau / 10}") from None
    width = one_shot_duration(cfg.cv.c3, cfg.cv.r11, cfg.cv.r8, cfg.cv.r9)
    if width < dt:
        raise ConfigurationError(f"one-shot width {width} s is shorter than sim.dt={dt}")
    for name, w in (("experiment.spike_width", cfg.experiment.spike_width),
                    ("soma.spike_width", cfg.soma.spike_width)):
        if w < dt:
            raise ConfigurationError(f"{name}={w} is shorter than sim.dt={dt}")


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
