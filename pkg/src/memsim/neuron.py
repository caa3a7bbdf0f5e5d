"""Neuron topology as a directed block graph, plus the leaky integrate-and-fire soma.

Canonical open-loop board (node ids in brackets)::

    [tpre]  -> integrator [u2] -> one-shot [u3] ------------------> adder [u1]
    [tpost] -> integrator [u6] -> one-shot [u5] -> inverter [u8] -> adder [u1]

    key [ltp]: u2 trace, passed while u5 fires    (post samples the pre trace)
    key [ltd]: u6 trace, passed while u3 fires    (pre samples the post trace)

    ltp, ltd -> adder [u9] -> controlled inverter [u10] -> integrator [u11]
             -> modulation [hebbian]
    ltp, ltd -> adder-integrator [u7] -> modulation [inhibitor]

``u1`` is positive while only the post one-shot fires and negative while only
the pre one-shot fires; it keys the ``u10`` inverter so that post-after-pre
samples come out positive and pre-after-post samples negative.

In closed-loop mode ``tpost`` is replaced by a ``soma`` node fed by the
excitatory and inhibitory memristors; its edge into ``u6`` is the single
feedback edge and carries a one-step delay.
"""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace

from . import blocks
from .blocks import ModStageConfig
from .errors import ConfigurationError, StructuralError
from .memristor import MemristorState
from .signals import ComponentValues


class Mode(str, enum.Enum):
    OPEN_LOOP = "open_loop"
    CLOSED_LOOP = "closed_loop"


class OneShotSense(str, enum.Enum):
    INTEGRATOR_OUTPUT = "integrator_output"
    MEMRISTOR_NODE = "memristor_node"


# input ports each block kind must have driven; "in*" means one or more
# numbered ports in0, in1, ...
KIND_PORTS = {
    "generator": (),
    "integrator": ("in",),
    "adder_integrator": ("in*",),
    "one_shot": ("in",),
    "adder": ("in*",),
    "key": ("in", "ctrl"),
    "controlled_inverter": ("in", "ctrl"),
    "modulation": ("in",),
    "memristor": ("in",),
    "soma": ("pre", "exc", "inh"),
}
INTEGRATOR_KINDS = ("integrator", "adder_integrator")
# the inhibitory synapse starts weak so the soma can reach threshold at all
DEFAULT_INH_SYNAPSE = MemristorState(g=100e-6)


@dataclass(frozen=True)
class BlockSpec:
    id: str
    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in KIND_PORTS:
            raise StructuralError(f"unknown block kind {self.kind!r} for node {self.id!r}")
        params = self.params.items() if isinstance(self.params, dict) else self.params
        frozen = []
        for key, value in sorted(params):
            if isinstance(value, list):
                value = tuple(value)
            frozen.append((key, value))
        object.__setattr__(self, "params", tuple(frozen))

    @property
    def p(self) -> dict:
        return dict(self.params)


@dataclass(frozen=True, order=True)
class Edge:
    source: str
    sink: str
    port: str = "in"
    delay: int = 0


@dataclass(frozen=True)
class NeuronNetlist:
    nodes: tuple
    edges: tuple
    mode: Mode = Mode.OPEN_LOOP
    oneshot_sense: OneShotSense = OneShotSense.INTEGRATOR_OUTPUT

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.id)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "oneshot_sense", OneShotSense(self.oneshot_sense))

    def node(self, node_id: str) -> BlockSpec:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def inputs_of(self, node_id: str) -> dict[str, Edge]:
        return {e.port: e for e in self.edges if e.sink == node_id}

    def kinds(self) -> dict[str, int]:
        counts: dict[str, int] = defaultdict(int)
        for n in self.nodes:
            counts[n.kind] += 1
        return dict(counts)

    def feedback_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.delay]


def validate_netlist(netlist: NeuronNetlist) -> None:
    """Raise :class:`StructuralError` unless the netlist can be scheduled."""
    ids = netlist.node_ids
    if len(set(ids)) != len(ids):
        raise StructuralError("duplicate node ids")
    if not ids:
        raise StructuralError("empty netlist")
    known = set(ids)
    seen_ports = set()
    for e in netlist.edges:
        if e.source not in known or e.sink not in known:
            raise StructuralError(f"edge {e} references an unknown node")
        if e.delay not in (0, 1):
            raise StructuralError(f"edge {e} has unsupported delay {e.delay}")
        if (e.sink, e.port) in seen_ports:
            raise StructuralError(f"port {e.sink}.{e.port} has more than one driver")
        seen_ports.add((e.sink, e.port))
    for n in netlist.nodes:
        ports = netlist.inputs_of(n.id)
        for required in KIND_PORTS[n.kind]:
            if required.endswith("*"):
                numbered = sorted(p for p in ports if p.startswith("in"))
                expected = [f"in{i}" for i in range(len(numbered))]
                if not numbered or numbered != sorted(expected):
                    raise StructuralError(f"node {n.id!r} needs ports in0..inN")
                gains = n.p.get("gains", ())
                if len(gains) != len(numbered):
                    raise StructuralError(f"node {n.id!r} has {len(numbered)} inputs but {len(gains)} gains")
            elif required not in ports:
                raise StructuralError(f"port {n.id}.{required} is not driven")
        allowed = {p for p in KIND_PORTS[n.kind] if not p.endswith("*")}
        if n.kind == "modulation":
            allowed.add("wiper")
        for port in ports:
            if port not in allowed and not (any(r.endswith("*") for r in KIND_PORTS[n.kind])
                                            and port.startswith("in")):
                raise StructuralError(f"node {n.id!r} of kind {n.kind} has no port {port!r}")
    if len(ids) > 1 and not _connected(netlist):
        raise StructuralError("netlist graph is not connected")
    _forward_order(netlist)  # raises on undelayed cycles
    gens = {n.id for n in netlist.nodes if n.kind == "generator"}
    if netlist.mode is Mode.OPEN_LOOP and any(n.kind == "soma" for n in netlist.nodes):
        raise StructuralError("open-loop netlist must not contain a soma")
    if netlist.mode is Mode.CLOSED_LOOP and not any(n.kind == "soma" for n in netlist.nodes):
        raise StructuralError("closed-loop netlist needs a soma node")
    if _is_neuron_board(netlist) and netlist.mode is Mode.OPEN_LOOP and not {"tpre", "tpost"} <= gens:
        raise StructuralError("open-loop neuron needs tpre and tpost generators")


def _is_neuron_board(netlist: NeuronNetlist) -> bool:
    return any(n.id in ("u2", "u6") for n in netlist.nodes)


def _connected(netlist: NeuronNetlist) -> bool:
    adj = defaultdict(set)
    for e in netlist.edges:
        adj[e.source].add(e.sink)
        adj[e.sink].add(e.source)
    ids = netlist.node_ids
    stack, seen = [ids[0]], {ids[0]}
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(ids)


def _forward_order(netlist: NeuronNetlist) -> list[str]:
    """Kahn's algorithm over undelayed edges with lexicographic tie-break."""
    import heapq

    indeg = {i: 0 for i in netlist.node_ids}
    succ = defaultdict(list)
    for e in netlist.edges:
        if e.delay == 0:
            indeg[e.sink] += 1
            succ[e.source].append(e.sink)
    ready = [i for i, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for nxt in succ[node]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(order) != len(indeg):
        stuck = sorted(i for i, d in indeg.items() if d > 0)
        raise StructuralError(f"cycle without a delayed edge through {stuck}")
    return order


# --------------------------------------------------------------------------
# Soma (closed loop only)

@dataclass(frozen=True)
class SomaConfig:
    tau_mem: float = 20e-3
    v_threshold: float = 1.0
    v_reset: float = 0.0
    refractory: float = 2e-3
    spike_width: float = 100e-6
    spike_amplitude: float = 5.0
    c_norm: float = 0.4e-6

    def __post_init__(self):
        if not self.tau_mem > 0:
            raise ConfigurationError("tau_mem must be positive")
        if not self.spike_width > 0:
            raise ConfigurationError("spike_width must be positive")
        if not self.refractory >= self.spike_width:
            raise ConfigurationError("refractory must be at least spike_width")
        if not self.c_norm > 0:
            raise ConfigurationError("c_norm must be positive")


@dataclass(frozen=True)
class SomaState:
    v: float = 0.0
    refractory_left: float = 0.0


def soma_step(state: SomaState, excitatory_current: float, inhibitory_current: float,
              dt: float, cfg: SomaConfig) -> tuple[SomaState, bool]:
    """One forward-Euler step of a leaky integrate-and-fire membrane."""
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    if state.refractory_left > 0:
        left = state.refractory_left - dt
        return SomaState(cfg.v_reset, left if left > dt * 1e-9 else 0.0), False
    v = state.v + dt * (-state.v / cfg.tau_mem
                        + (excitatory_current - inhibitory_current) / cfg.c_norm)
    if v >= cfg.v_threshold:
        return SomaState(cfg.v_reset, cfg.refractory), True
    return SomaState(v, 0.0), False


# --------------------------------------------------------------------------
# Canonical board

def build_standard_netlist(cv: ComponentValues | None = None, mod_cfg: ModStageConfig | None = None,
                           mode: Mode | str = Mode.OPEN_LOOP,
                           oneshot_sense: OneShotSense | str = OneShotSense.INTEGRATOR_OUTPUT,
                           soma: SomaConfig | None = None,
                           ex_synapse: MemristorState | None = None,
                           inh_synapse: MemristorState | None = None) -> NeuronNetlist:
    cv = cv or ComponentValues()
    mod_cfg = mod_cfg or ModStageConfig(wiper=cv.mod_wiper)
    mode, oneshot_sense = Mode(mode), OneShotSense(oneshot_sense)
    rail = cv.v_rail
    tau = cv.tau_integrator
    width = blocks.one_shot_duration(cv.c3, cv.r11, cv.r8, cv.r9)
    post = "tpost" if mode is Mode.OPEN_LOOP else "soma"
    delay = 0 if mode is Mode.OPEN_LOOP else 1

    one_shot = dict(pulse_width=width, v_high=cv.v_high_oneshot, v_threshold=cv.v_threshold_oneshot)
    mod = dict(mode=mod_cfg.mode.value, wiper=mod_cfg.wiper, gain_min=mod_cfg.gain_min,
               gain_max=mod_cfg.gain_max, sombrero_center=mod_cfg.sombrero_center,
               sombrero_width=mod_cfg.sombrero_width, v_rail=rail)
    key = dict(threshold=cv.key_threshold)
    nodes = [
        BlockSpec("tpre", "generator"),
        BlockSpec("u2", "integrator", dict(tau=tau, v_rail=rail)),
        BlockSpec("u6", "integrator", dict(tau=tau, v_rail=rail)),
        BlockSpec("u3", "one_shot", one_shot),
        BlockSpec("u5", "one_shot", one_shot),
        BlockSpec("u8", "adder", dict(gains=[1.0], v_rail=rail)),
        BlockSpec("u1", "adder", dict(gains=[1.0, 1.0], v_rail=rail)),
        BlockSpec("ltp", "key", key),
        BlockSpec("ltd", "key", key),
        BlockSpec("u9", "adder", dict(gains=[-cv.learning_gain, -cv.learning_gain], v_rail=rail)),
        BlockSpec("u10", "controlled_inverter", dict(control_threshold=cv.key_threshold, v_rail=rail)),
        BlockSpec("u11", "integrator", dict(tau=cv.tau_output, v_rail=rail)),
        BlockSpec("u7", "adder_integrator",
                  dict(tau=cv.tau_inhibitor, gains=[cv.inhibitory_gain, cv.inhibitory_gain], v_rail=rail)),
        BlockSpec("hebbian", "modulation", mod),
        BlockSpec("inhibitor", "modulation", mod),
    ]
    sense_pre = "u2" if oneshot_sense is OneShotSense.INTEGRATOR_OUTPUT else "tpre"
    sense_post = "u6" if oneshot_sense is OneShotSense.INTEGRATOR_OUTPUT else post
    edges = [
        Edge("tpre", "u2"),
        Edge(post, "u6", "in", delay),
        Edge(sense_pre, "u3"),
        Edge(sense_post, "u5", "in", delay if sense_post == post else 0),
        Edge("u5", "u8", "in0"),
        Edge("u3", "u1", "in0"),
        Edge("u8", "u1", "in1"),
        Edge("u2", "ltp", "in"),
        Edge("u5", "ltp", "ctrl"),
        Edge("u6", "ltd", "in"),
        Edge("u3", "ltd", "ctrl"),
        Edge("ltp", "u9", "in0"),
        Edge("ltd", "u9", "in1"),
        Edge("u9", "u10", "in"),
        Edge("u1", "u10", "ctrl"),
        Edge("u10", "u11"),
        Edge("ltp", "u7", "in0"),
        Edge("ltd", "u7", "in1"),
        Edge("u11", "hebbian"),
        Edge("u7", "inhibitor"),
    ]
    if mode is Mode.OPEN_LOOP:
        nodes.append(BlockSpec("tpost", "generator"))
    else:
        soma = soma or SomaConfig()
        ex = ex_synapse or MemristorState()
        inh = inh_synapse or DEFAULT_INH_SYNAPSE
        nodes += [
            BlockSpec("soma", "soma", dict(vars(soma))),
            BlockSpec("ex_mem", "memristor", _mem_params(ex)),
            BlockSpec("inh_mem", "memristor", _mem_params(inh)),
        ]
        edges += [
            Edge("tpre", "soma", "pre"),
            Edge("ex_mem", "soma", "exc"),
            Edge("inh_mem", "soma", "inh"),
            Edge("hebbian", "ex_mem"),
            Edge("inhibitor", "inh_mem"),
        ]
    netlist = NeuronNetlist(tuple(nodes), tuple(edges), mode, oneshot_sense)
    validate_netlist(netlist)
    return netlist


def _mem_params(m: MemristorState) -> dict:
    return dict(g0=m.g, g_min=m.g_min, g_max=m.g_max, v_th_set=m.v_th_set,
                v_th_reset=m.v_th_reset, mu=m.mu)


def chain_from(netlist: NeuronNetlist, start: str, length: int) -> list[BlockSpec]:
    """Follow the single forward successor along ``in`` ports from ``start``."""
    chain = [netlist.node(start)]
    current = start
    for _ in range(length - 1):
        nexts = sorted(e.sink for e in netlist.edges
                       if e.source == current and e.port in ("in", "in0") and
                       netlist.node(e.sink).kind in ("integrator", "one_shot", "adder"))
        if not nexts:
            break
        current = nexts[0]
        chain.append(netlist.node(current))
    return chain
