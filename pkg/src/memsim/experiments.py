"""Experiment protocols: learning-window sweeps, dopamine sweeps, conductance run.

Every sweep point is an independent open-loop simulation, so sweeps can be
spread over a process pool (``jobs > 1``); results are always returned sorted
by their sweep key.
"""
from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import engine
from .blocks import ModStageConfig, modulation_gain
from .errors import ConfigurationError, ProtocolError
from .memristor import MemristorState, memristor_drive
from .neuron import BlockSpec, Edge, NeuronNetlist, OneShotSense, build_standard_netlist
from .signals import ComponentValues, DeltaT, SpikeTrain, TimeGrid, Trace, Unit

# potentiometer settings swept in the excitatory and inhibitory DA experiments
DEFAULT_DA_STDP_SETTINGS = (("0/50 kΩ", 0.0), ("25/25 kΩ", 0.5), ("37.5/12.5 kΩ", 0.75), ("50/0 kΩ", 1.0))
DEFAULT_DA_ISTDP_SETTINGS = (("0/1 MΩ", 0.0), ("250/750 kΩ", 0.25), ("500/500 kΩ", 0.5),
                           ("750/250 kΩ", 0.75))
ACCEPTANCE_DELTA_TS = tuple(s * m * 1e-3 for m in (1, 2, 4, 8, 16) for s in (-1, 1))


@dataclass(frozen=True)
class ExperimentParams:
    """Everything needed to rebuild the open-loop board for one protocol."""

    cv: ComponentValues = field(default_factory=ComponentValues)
    mod: ModStageConfig = field(default_factory=ModStageConfig)
    dt: float = 1e-6
    window: float = 0.1
    t0: float | None = None
    spike_width: float = 100e-6
    spike_amplitude: float = 5.0
    oneshot_sense: OneShotSense = OneShotSense.INTEGRATOR_OUTPUT

    @property
    def spike_time(self) -> float:
        return self.window / 2 if self.t0 is None else self.t0

    def netlist(self, wiper: float | None = None) -> NeuronNetlist:
        mod = self.mod if wiper is None else replace(self.mod, wiper=wiper)
        return build_standard_netlist(self.cv, mod, "open_loop", self.oneshot_sense)

    def train(self, times) -> SpikeTrain:
        return SpikeTrain(tuple(times), self.spike_width, self.spike_amplitude)


@dataclass(frozen=True)
class LearningCurvePoint:
    delta_t: float
    dw: float


@dataclass(frozen=True)
class DaSweepPoint:
    wiper: float
    pot_label: str
    peak_amplitude: float


@dataclass(frozen=True, eq=False)
class ConductanceRun:
    da_trace: Trace
    g_trace: Trace
    pulse_trace: Trace

    def __post_init__(self):
        grids = {self.da_trace.grid, self.g_trace.grid, self.pulse_trace.grid}
        if len(grids) != 1:
            raise ProtocolError("conductance run traces must share one grid")

    def segment_slope(self, t_from: float, t_to: float) -> float:
        """Mean dG/dt between two times (S/s)."""
        grid = self.g_trace.grid
        a = max(grid.index_at_or_after(t_from), 0)
        b = min(grid.index_at_or_before(t_to), grid.n_steps - 1)
        if b <= a:
            raise ProtocolError("empty slope segment")
        g = self.g_trace.values
        return float((g[b] - g[a]) / ((b - a) * grid.dt))


def reference_hebbian_dw(delta_t, a: float = 1e-3, dw_max: float = 1.0) -> float:
    """Clamped ``a / Δt`` learning rule with the sign of ``Δt``."""
    d = float(delta_t)
    if d == 0:
        return dw_max
    if math.isinf(d):
        return 0.0
    return math.copysign(min(a / abs(d), dw_max), d)


_LABEL = re.compile(r"^\s*([0-9]*\.?[0-9]+)\s*/\s*([0-9]*\.?[0-9]+)\s*([kKmM]?)\s*(?:Ω|ohm|Ohm)?\s*$")


def pot_label_to_wiper(label: str) -> float:
    """Wiper fraction from a ``"first/second unit"`` potentiometer label.

    Both numbers share the trailing unit; the wiper is ``first / (first + second)``.
    """
    m = _LABEL.match(label)
    if not m:
        raise ConfigurationError(f"cannot parse potentiometer label {label!r}")
    first, second = float(m.group(1)), float(m.group(2))
    if first + second <= 0:
        raise ConfigurationError(f"potentiometer label {label!r} has zero total")
    return first / (first + second)


def pot_total_ohms(label: str) -> float:
    m = _LABEL.match(label)
    if not m:
        raise ConfigurationError(f"cannot parse potentiometer label {label!r}")
    scale = {"": 1.0, "k": 1e3, "K": 1e3, "m": 1e6, "M": 1e6}[m.group(3)]
    return (float(m.group(1)) + float(m.group(2))) * scale


def measurement_window(params: ExperimentParams, delta_t: float) -> tuple[float, float]:
    t0 = params.spike_time
    return t0 - 5e-3, t0 + abs(delta_t) + 5 * params.cv.tau_integrator


def signed_extremum(trace: Trace, t_from: float, t_to: float) -> float:
    """Sample of largest magnitude within ``[t_from, t_to]`` (earliest on ties)."""
    grid = trace.grid
    a = max(grid.index_at_or_after(t_from), 0)
    b = min(grid.index_at_or_before(t_to), grid.n_steps - 1)
    seg = trace.values[a:b + 1]
    if not len(seg):
        return 0.0
    return float(seg[int(np.argmax(np.abs(seg)))])


def _pair_run(params: ExperimentParams, delta_t: float, probe: str, wiper: float | None = None) -> Trace:
    t0 = params.spike_time
    grid = TimeGrid.from_duration(params.window, params.dt)
    for t in (t0, t0 + delta_t):
        if not (grid.t_start <= t and t + params.spike_width <= grid.t_end):
            raise ProtocolError(f"spike at {t} s does not fit in the {params.window} s window")
    stimuli = {"tpre": params.train([t0]), "tpost": params.train([t0 + delta_t])}
    result = engine.run(params.netlist(wiper), engine.SimConfig(grid, (probe,), stimuli=stimuli))
    return result.traces[probe]


def _dw_point(args) -> LearningCurvePoint:
    params, delta_t, probe = args
    trace = _pair_run(params, delta_t, probe)
    return LearningCurvePoint(delta_t, signed_extremum(trace, *measurement_window(params, delta_t)))


def _da_point(args) -> DaSweepPoint:
    params, label, wiper, delta_t, probe = args
    trace = _pair_run(params, delta_t, probe, wiper)
    peak = abs(signed_extremum(trace, *measurement_window(params, delta_t)))
    return DaSweepPoint(wiper, label, peak)


def _map(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _delta_values(delta_ts) -> list[float]:
    return [float(d.value if isinstance(d, DeltaT) else d) for d in delta_ts]


def sweep_stdp(params: ExperimentParams, delta_ts=ACCEPTANCE_DELTA_TS, jobs: int = 1) -> list[LearningCurvePoint]:
    """Signed extremum of the Hebbian output for one pre/post pair per lag."""
    points = _map(_dw_point, [(params, d, "hebbian") for d in _delta_values(delta_ts)], jobs)
    return sorted(points, key=lambda p: p.delta_t)


def sweep_istdp(params: ExperimentParams, delta_ts=ACCEPTANCE_DELTA_TS, jobs: int = 1) -> list[LearningCurvePoint]:
    """Same protocol as :func:`sweep_stdp`, read from the Inhibitor output."""
    points = _map(_dw_point, [(params, d, "inhibitor") for d in _delta_values(delta_ts)], jobs)
    return sorted(points, key=lambda p: p.delta_t)


def _da_sweep(params, settings, delta_t, probe, jobs):
    items = []
    for setting in settings:
        if isinstance(setting, str):
            label, wiper = setting, pot_label_to_wiper(setting)
        else:
            label, wiper = setting
        items.append((params, str(label), float(wiper), float(delta_t), probe))
    return sorted(_map(_da_point, items, jobs), key=lambda p: p.wiper)


def sweep_da_stdp(params: ExperimentParams, settings=DEFAULT_DA_STDP_SETTINGS,
                  delta_t: float = 2e-3, jobs: int = 1) -> list[DaSweepPoint]:
    return _da_sweep(params, settings, delta_t, "hebbian", jobs)


def sweep_da_istdp(params: ExperimentParams, settings=DEFAULT_DA_ISTDP_SETTINGS,
                   delta_t: float = 2e-3, jobs: int = 1) -> list[DaSweepPoint]:
    return _da_sweep(params, settings, delta_t, "inhibitor", jobs)


# --------------------------------------------------------------------------
# conductance evolution

@dataclass(frozen=True)
class ConductanceProtocol:
    """Two free-running generators whose periods differ, so the pre/post lag drifts.

    The post train starts ``initial_lag`` after the pre train and slips by
    ``post_period - pre_period`` every cycle.
    """

    duration: float = 1.0
    pre_period: float = 20e-3
    post_period: float = 19.9e-3
    first_spike: float = 2e-3
    initial_lag: float = 6e-3
    da_low: float = 0.4
    da_high: float = 1.0
    step_time: float = 0.5

    def trains(self, params: ExperimentParams) -> tuple[SpikeTrain, SpikeTrain]:
        pre = SpikeTrain.periodic(self.first_spike, self.pre_period, self.duration,
                                  pulse_width=params.spike_width, amplitude=params.spike_amplitude)
        post = SpikeTrain.periodic(self.first_spike + self.initial_lag, self.post_period, self.duration,
                                   pulse_width=params.spike_width, amplitude=params.spike_amplitude)
        return pre, post

    def da_schedule(self, grid: TimeGrid) -> Trace:
        k = grid.index_at_or_after(self.step_time)
        values = np.full(grid.n_steps, self.da_low)
        values[max(k, 0):] = self.da_high
        return Trace(grid, values, Unit.DIMENSIONLESS)


def run_conductance_experiment(params: ExperimentParams, da_schedule: Trace,
                               pre_post_trains: tuple[SpikeTrain, SpikeTrain],
                               synapse: MemristorState | None = None) -> ConductanceRun:
    """Drive an excitatory memristor with the DA-modulated Hebbian output.

    ``da_schedule`` holds the wiper fraction over time; it feeds the wiper
    port of the modulation stage.
    """
    grid = da_schedule.grid
    if abs(grid.dt - params.dt) > 1e-15 * params.dt:
        raise ProtocolError("DA schedule must be sampled at the experiment step")
    if np.any(da_schedule.values < 0) or np.any(da_schedule.values > 1):
        raise ProtocolError("DA schedule values are wiper fractions and must lie in [0, 1]")
    pre, post = pre_post_trains
    for train in (pre, post):
        for t in train.spike_times:
            if not grid.contains(t):
                raise ProtocolError(f"spike at {t} s outside the simulation grid")
    base = params.netlist()
    netlist = NeuronNetlist(base.nodes + (BlockSpec("da", "generator"),),
                            base.edges + (Edge("da", "hebbian", "wiper"), Edge("da", "inhibitor", "wiper")),
                            base.mode, base.oneshot_sense)
    stimuli = {"tpre": pre, "tpost": post, "da": da_schedule}
    result = engine.run(netlist, engine.SimConfig(grid, ("hebbian",), stimuli=stimuli))
    pulses = result.traces["hebbian"]
    synapse = synapse or MemristorState()
    _, g_trace = memristor_drive(synapse, pulses)
    return ConductanceRun(da_schedule, g_trace, pulses)


def default_conductance_run(params: ExperimentParams | None = None,
                            protocol: ConductanceProtocol | None = None,
                            synapse: MemristorState | None = None) -> ConductanceRun:
    params = params or ExperimentParams()
    protocol = protocol or ConductanceProtocol()
    grid = TimeGrid.from_duration(protocol.duration, params.dt)
    return run_conductance_experiment(params, protocol.da_schedule(grid), protocol.trains(params), synapse)
