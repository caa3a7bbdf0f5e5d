"""Fixed-step executor for block netlists.

Nodes are evaluated in topological order each step; an edge flagged with
``delay=1`` delivers its source's output from the previous step (zero on the
first step).  Graphs without delayed edges are evaluated one whole trace per
node, which gives the same numbers as stepping because no node ever reads a
value produced later in the same step.

Sample convention: input sample ``k`` is held over step ``k`` and output
sample ``k`` is the state at the end of that step, so an integrator driven by
a unit step from rest reads ``1 - exp(-(k + 1) dt / tau)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, blocks
from .blocks import IntegratorState, ModStageConfig, OneShotState, Phase
from .errors import ConfigurationError, StructuralError
from .memristor import MemristorState
from .neuron import NeuronNetlist, SomaConfig, SomaState, _forward_order, soma_step, validate_netlist
from .signals import SpikeTrain, TimeGrid, Trace, Unit, spike_train_to_trace


@dataclass(frozen=True)
class SimConfig:
    grid: TimeGrid
    probes: tuple = ()
    seed: int = 0
    stimuli: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "probes", tuple(self.probes))


@dataclass
class SimResult:
    traces: dict
    final_states: dict

    def equals(self, other: "SimResult") -> bool:
        return (list(self.traces) == list(other.traces)
                and all(self.traces[k].equals(other.traces[k]) for k in self.traces)
                and self.final_states == other.final_states)


def topo_order(netlist: NeuronNetlist) -> list[str]:
    """Evaluation order over undelayed edges, ties broken by node id."""
    return _forward_order(netlist)


def run(netlist: NeuronNetlist, cfg: SimConfig, stepwise: bool | None = None) -> SimResult:
    """Simulate ``netlist`` on ``cfg.grid`` and return the probed traces.

    ``stepwise`` forces the per-step evaluator; by default it is used only
    when the netlist has delayed (feedback) edges.
    """
    validate_netlist(netlist)
    known = set(netlist.node_ids)
    for probe in cfg.probes:
        if probe not in known:
            raise StructuralError(f"probe {probe!r} is not a node")
    if not cfg.probes:
        raise ConfigurationError("at least one probe is required")
    order = topo_order(netlist)
    _check_time_constants(netlist, cfg.grid.dt)
    if stepwise is None:
        stepwise = bool(netlist.feedback_edges())
    if stepwise:
        outputs, states = _run_stepwise(netlist, cfg, order)
    else:
        outputs, states = _run_blockwise(netlist, cfg, order)
    traces = {p: Trace(cfg.grid, outputs[p], _unit(netlist.node(p).kind)) for p in cfg.probes}
    return SimResult(traces, {k: states[k] for k in sorted(states)})


def _unit(kind: str) -> Unit:
    return Unit.SIEMENS if kind == "memristor" else Unit.VOLT


def _check_time_constants(netlist: NeuronNetlist, dt: float) -> None:
    for n in netlist.nodes:
        p = n.p
        if n.kind in ("integrator", "adder_integrator"):
            blocks.lag_alpha(p["tau"], dt)
        elif n.kind == "one_shot" and p["pulse_width"] < dt * (1 - 1e-9):
            raise ConfigurationError(f"one-shot {n.id!r} pulse shorter than dt")


def _stimulus(node_id: str, cfg: SimConfig) -> np.ndarray:
    try:
        stim = cfg.stimuli[node_id]
    except KeyError:
        raise ConfigurationError(f"no stimulus supplied for generator {node_id!r}") from None
    if isinstance(stim, SpikeTrain):
        return np.array(spike_train_to_trace(stim, cfg.grid).values)
    if isinstance(stim, Trace):
        if stim.grid != cfg.grid:
            raise ConfigurationError(f"stimulus for {node_id!r} is on a different grid")
        return np.array(stim.values)
    raise ConfigurationError(f"stimulus for {node_id!r} must be a SpikeTrain or Trace")


def _mod_cfg(p: dict) -> ModStageConfig:
    return ModStageConfig(mode=p["mode"], wiper=p["wiper"], gain_min=p["gain_min"],
                          gain_max=p["gain_max"], sombrero_center=p["sombrero_center"],
                          sombrero_width=p["sombrero_width"])


def _soma_cfg(p: dict) -> SomaConfig:
    return SomaConfig(**p)


def _mem_state(p: dict, g: float | None = None) -> MemristorState:
    return MemristorState(g=p["g0"] if g is None else g, g_min=p["g_min"], g_max=p["g_max"],
                          v_th_set=p["v_th_set"], v_th_reset=p["v_th_reset"], mu=p["mu"])


# --------------------------------------------------------------------------
# whole-trace evaluation

def _run_blockwise(netlist, cfg, order):
    grid = cfg.grid
    dt = grid.dt
    out: dict[str, np.ndarray] = {}
    states: dict[str, object] = {}
    for node_id in order:
        node = netlist.node(node_id)
        p = node.p
        ins = {port: out[e.source] for port, e in netlist.inputs_of(node_id).items()}
        kind = node.kind
        if kind == "generator":
            y = _stimulus(node_id, cfg)
        elif kind in ("integrator", "adder_integrator"):
            x = ins["in"] if kind == "integrator" else _weighted_sum(ins, p["gains"])
            y = blocks.integrate(x, p["tau"], dt, p["v_rail"])
            states[node_id] = IntegratorState(float(y[-1]), p["tau"])
        elif kind == "one_shot":
            n_fire = _kernels.steps_for(p["pulse_width"], dt)
            y, armed, left = _kernels.one_shot(np.ascontiguousarray(ins["in"]), p["v_threshold"],
                                               p["v_high"], n_fire, True, 0)
            states[node_id] = _one_shot_state(p, int(left), bool(armed), dt)
        elif kind == "adder":
            y = blocks.inverting_adder([ins[f"in{i}"] for i in range(len(p["gains"]))],
                                       p["gains"], p["v_rail"])
        elif kind == "key":
            y = blocks.analog_key(ins["in"], ins["ctrl"], p["threshold"])
        elif kind == "controlled_inverter":
            y = blocks.controlled_inverter(ins["in"], ins["ctrl"], p["control_threshold"], p["v_rail"])
        elif kind == "modulation":
            gain = blocks.modulation_gain(_mod_cfg(p), ins.get("wiper"))
            y = np.clip(ins["in"] * gain, -p["v_rail"], p["v_rail"])
        elif kind == "memristor":
            y = _kernels.memristor_fold(np.ascontiguousarray(ins["in"]), p["g0"], p["g_min"], p["g_max"],
                                        p["v_th_set"], p["v_th_reset"], p["mu"], dt)
            states[node_id] = _mem_state(p, float(y[-1]))
        elif kind == "soma":
            stepper = _SomaStepper(p, dt)
            y = np.empty(grid.n_steps)
            for k in range(grid.n_steps):
                y[k] = stepper.step(ins["pre"][k], ins["exc"][k], ins["inh"][k])
            states[node_id] = stepper.snapshot()
        else:  # pragma: no cover - kinds are validated on construction
            raise StructuralError(f"unsupported kind {kind!r}")
        out[node_id] = np.asarray(y, dtype=np.float64)
    return out, states


def _weighted_sum(ins: dict, gains) -> np.ndarray:
    total = gains[0] * ins["in0"]
    for i in range(1, len(gains)):
        total = total + gains[i] * ins[f"in{i}"]
    return total


def _one_shot_state(p: dict, left: int, armed: bool, dt: float) -> OneShotState:
    if left:
        return OneShotState(p["pulse_width"], p["v_high"], p["v_threshold"], Phase.FIRING,
                            min(left * dt, p["pulse_width"]), armed)
    return OneShotState(p["pulse_width"], p["v_high"], p["v_threshold"], armed=armed)


# --------------------------------------------------------------------------
# per-step evaluation

class _SomaStepper:
    def __init__(self, p: dict, dt: float):
        self.cfg = _soma_cfg(p)
        self.dt = dt
        self.state = SomaState(v=self.cfg.v_reset)
        self.pulse_steps = _kernels.steps_for(self.cfg.spike_width, dt)
        self.pulse_left = 0

    def step(self, v_pre, g_exc, g_inh):
        self.state, spike = soma_step(self.state, g_exc * v_pre, g_inh * v_pre, self.dt, self.cfg)
        if spike:
            self.pulse_left = self.pulse_steps
        if self.pulse_left:
            self.pulse_left -= 1
            return self.cfg.spike_amplitude
        return 0.0

    def snapshot(self):
        return self.state


def _make_stepper(node, cfg: SimConfig):
    """Return ``(step, snapshot)`` closures mirroring the whole-trace kernels."""
    p = node.p
    dt = cfg.grid.dt
    kind = node.kind
    if kind == "generator":
        values = _stimulus(node.id, cfg)
        k = [0]

        def step(ins):
            v = values[k[0]]
            k[0] += 1
            return v
        return step, None
    if kind in ("integrator", "adder_integrator"):
        alpha = blocks.lag_alpha(p["tau"], dt)
        rail = p["v_rail"]
        gains = p.get("gains")
        y = [0.0]

        def step(ins):
            if gains is None:
                x = ins["in"]
            else:
                x = gains[0] * ins["in0"]
                for i in range(1, len(gains)):
                    x = x + gains[i] * ins[f"in{i}"]
            v = y[0] + (x - y[0]) * alpha
            y[0] = rail if v > rail else (-rail if v < -rail else v)
            return y[0]
        return step, lambda: IntegratorState(y[0], p["tau"])
    if kind == "one_shot":
        n_fire = _kernels.steps_for(p["pulse_width"], dt)
        th, high = p["v_threshold"], p["v_high"]
        st = {"armed": True, "left": 0}

        def step(ins):
            x = ins["in"]
            if st["left"] == 0:
                if x < th:
                    st["armed"] = True
                elif st["armed"]:
                    st["armed"] = False
                    st["left"] = n_fire
            if st["left"] > 0:
                st["left"] -= 1
                return high
            return 0.0
        return step, lambda: _one_shot_state(p, st["left"], st["armed"], dt)
    if kind == "adder":
        gains, rail = p["gains"], p["v_rail"]
        return (lambda ins: blocks.inverting_adder([ins[f"in{i}"] for i in range(len(gains))],
                                                   gains, rail)), None
    if kind == "key":
        th = p["threshold"]
        return (lambda ins: blocks.analog_key(ins["in"], ins["ctrl"], th)), None
    if kind == "controlled_inverter":
        th, rail = p["control_threshold"], p["v_rail"]
        return (lambda ins: blocks.controlled_inverter(ins["in"], ins["ctrl"], th, rail)), None
    if kind == "modulation":
        mcfg, rail = _mod_cfg(p), p["v_rail"]
        fixed = float(blocks.modulation_gain(mcfg))

        def step(ins):
            gain = fixed if "wiper" not in ins else float(blocks.modulation_gain(mcfg, ins["wiper"]))
            v = ins["in"] * gain
            return min(max(v, -rail), rail)
        return step, None
    if kind == "memristor":
        fold = _kernels.memristor_fold
        buf = np.empty(1)
        g = [p["g0"]]

        def step(ins):
            buf[0] = ins["in"]
            g[0] = float(fold(buf, g[0], p["g_min"], p["g_max"], p["v_th_set"],
                              p["v_th_reset"], p["mu"], dt)[0])
            return g[0]
        return step, lambda: _mem_state(p, g[0])
    if kind == "soma":
        stepper = _SomaStepper(p, dt)
        return (lambda ins: stepper.step(ins["pre"], ins["exc"], ins["inh"])), stepper.snapshot
    raise StructuralError(f"unsupported kind {kind!r}")  # pragma: no cover


def _run_stepwise(netlist, cfg, order):
    n = cfg.grid.n_steps
    steppers = {}
    snapshots = {}
    wiring = {}
    for node_id in order:
        step, snap = _make_stepper(netlist.node(node_id), cfg)
        steppers[node_id] = step
        if snap is not None:
            snapshots[node_id] = snap
        wiring[node_id] = [(port, e.source, bool(e.delay))
                           for port, e in sorted(netlist.inputs_of(node_id).items())]
    record = {node_id: np.empty(n) for node_id in order}
    cur = {node_id: 0.0 for node_id in order}
    prev = dict(cur)
    plan = [(node_id, steppers[node_id], wiring[node_id], record[node_id]) for node_id in order]
    for k in range(n):
        for node_id, step, inputs, rec in plan:
            ins = {port: (prev[src] if delayed else cur[src]) for port, src, delayed in inputs}
            v = step(ins)
            cur[node_id] = v
            rec[k] = v
        prev, cur = cur, prev
    return record, {k: snap() for k, snap in snapshots.items()}
