"""CSV export and the plain-text netlist format.

Floats are written with ``repr``, the shortest decimal that parses back to
the same double, so every file re-reads bit-exactly and identical inputs give
byte-identical files.
"""
from __future__ import annotations

from pathlib import Path

from .engine import SimResult
from .errors import MemsimError, StructuralError
from .experiments import ConductanceRun, DaSweepPoint, LearningCurvePoint
from .neuron import BlockSpec, Edge, NeuronNetlist


class OutputError(MemsimError, OSError):
    """Writing an output file failed."""


def fmt(x) -> str:
    return repr(float(x))


def _columns(data) -> tuple[list[str], list]:
    if isinstance(data, SimResult):
        probes = list(data.traces)
        if not probes:
            raise ValueError("result has no traces")
        first = data.traces[probes[0]]
        return ["time_s"] + probes, [first.times()] + [data.traces[p].values for p in probes]
    if isinstance(data, ConductanceRun):
        return (["time_s", "da", "g_s", "pulse_v"],
                [data.g_trace.times(), data.da_trace.values, data.g_trace.values, data.pulse_trace.values])
    data = list(data)
    if data and all(isinstance(p, LearningCurvePoint) for p in data):
        return ["delta_t_s", "dw_v"], [[p.delta_t for p in data], [p.dw for p in data]]
    if data and all(isinstance(p, DaSweepPoint) for p in data):
        return ["wiper", "peak_v"], [[p.wiper for p in data], [p.peak_amplitude for p in data]]
    raise TypeError(f"cannot tabulate {type(data).__name__}")


def render_csv(data) -> str:
    header, cols = _columns(data)
    lines = [",".join(header)]
    lines.extend(",".join(map(fmt, row)) for row in zip(*cols))
    return "\n".join(lines) + "\n"


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_traces_csv(data, path) -> None:
    """Write a :class:`SimResult`, sweep table or conductance run as CSV."""
    _write(path, render_csv(data))


def read_csv(path) -> tuple[list[str], list[list[float]]]:
    """Read a file produced by :func:`write_traces_csv` back into columns."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    return header, [list(col) for col in zip(*rows)] if rows else [[] for _ in header]


# --------------------------------------------------------------------------
# netlist text format

def _fmt_param(value) -> str:
    if isinstance(value, (tuple, list)):
        return "[" + ",".join(fmt(v) for v in value) + "]"
    if isinstance(value, str):
        if not value or any(c.isspace() for c in value) or "=" in value:
            raise StructuralError(f"parameter string {value!r} cannot be dumped")
        return value
    return fmt(value)


def _parse_param(text: str):
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1]
        return tuple(float(v) for v in inner.split(",")) if inner else ()
    try:
        return float(text)
    except ValueError:
        return text


def render_netlist(netlist: NeuronNetlist) -> str:
    lines = ["# memsim netlist", f"mode {netlist.mode.value}",
             f"oneshot_sense {netlist.oneshot_sense.value}"]
    for node in sorted(netlist.nodes, key=lambda n: n.id):
        params = " ".join(f"{k}={_fmt_param(v)}" for k, v in node.params)
        lines.append(f"node {node.id} kind={node.kind}" + (f" {params}" if params else ""))
    for e in sorted(netlist.edges):
        lines.append(f"edge {e.source} -> {e.sink} port={e.port} delay={e.delay}")
    return "\n".join(lines) + "\n"


def dump_netlist(netlist: NeuronNetlist, path) -> None:
    _write(path, render_netlist(netlist))


def parse_netlist(text: str) -> NeuronNetlist:
    """Inverse of :func:`render_netlist`."""
    mode = sense = None
    nodes, edges = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "mode":
                mode = parts[1]
            elif parts[0] == "oneshot_sense":
                sense = parts[1]
            elif parts[0] == "node":
                fields = dict(p.split("=", 1) for p in parts[2:])
                kind = fields.pop("kind")
                nodes.append(BlockSpec(parts[1], kind, {k: _parse_param(v) for k, v in fields.items()}))
            elif parts[0] == "edge" and parts[2] == "->":
                fields = dict(p.split("=", 1) for p in parts[4:])
                edges.append(Edge(parts[1], parts[3], fields["port"], int(fields["delay"])))
            else:
                raise ValueError(parts[0])
        except (IndexError, KeyError, ValueError) as exc:
            raise StructuralError(f"netlist line {lineno}: cannot parse {raw!r}") from exc
    if mode is None or sense is None:
        raise StructuralError("netlist dump lacks mode or oneshot_sense")
    return NeuronNetlist(tuple(nodes), tuple(edges), mode, sense)


def load_netlist(path) -> NeuronNetlist:
    return parse_netlist(Path(path).read_text(encoding="utf-8"))
