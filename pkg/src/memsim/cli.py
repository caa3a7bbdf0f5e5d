"""Command-line front end.

    memsim <command> [--config FILE] [--out DIR] [--svg] [--jobs N]

Exit status: 0 on success, 1 for usage or configuration errors, 2 when the
run itself fails.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import engine, experiments, output, plotting
from .config import RunConfig, load_config
from .errors import ConfigurationError, StructuralError

COMMANDS = ("simulate", "sweep-stdp", "sweep-istdp", "sweep-da-stdp", "sweep-da-istdp",
            "conductance", "dump-netlist")
EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="memsim", description="Dopamine-modulated memristive neuron simulator")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="TOML configuration (defaults used if omitted)")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--svg", action="store_true", help="also write SVG figures")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    return parser


def _emit(data, out: Path, stem: str, svg: bool, title: str) -> list[Path]:
    written = [out / f"{stem}.csv"]
    output.write_traces_csv(data, written[0])
    if svg:
        written.append(out / f"{stem}.svg")
        plotting.write_plot_svg(data, written[1], title)
    return written


def execute(command: str, cfg: RunConfig, out: Path, svg: bool = False, jobs: int = 1) -> list[Path]:
    """Run one command and return the files it wrote."""
    out.mkdir(parents=True, exist_ok=True)
    params = cfg.experiment_params()
    e = cfg.experiment
    if command == "dump-netlist":
        path = out / "netlist.txt"
        output.dump_netlist(cfg.netlist(), path)
        return [path]
    if command == "simulate":
        result = engine.run(cfg.netlist(), cfg.sim_config())
        return _emit(result, out, "simulate", svg, "Probed node voltages")
    if command == "sweep-stdp":
        points = experiments.sweep_stdp(params, e.delta_t, jobs)
        return _emit(points, out, "sweep_stdp", svg, "Hebbian learning window")
    if command == "sweep-istdp":
        points = experiments.sweep_istdp(params, e.delta_t, jobs)
        return _emit(points, out, "sweep_istdp", svg, "Inhibitory learning window")
    if command == "sweep-da-stdp":
        points = experiments.sweep_da_stdp(params, e.da_stdp_settings, e.da_delta_t, jobs)
        return _emit(points, out, "sweep_da_stdp", svg, "DA modulation of STDP")
    if command == "sweep-da-istdp":
        points = experiments.sweep_da_istdp(params, e.da_istdp_settings, e.da_delta_t, jobs)
        return _emit(points, out, "sweep_da_istdp", svg, "DA modulation of iSTDP")
    if command == "conductance":
        run = experiments.default_conductance_run(params, cfg.conductance, cfg.memristor)
        return _emit(run, out, "conductance", svg, "Conductance under stepped DA")
    raise UsageError(f"unknown command {command!r}")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        cfg = load_config(args.config) if args.config else RunConfig()
    except UsageError as exc:
        print(f"memsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigurationError, StructuralError) as exc:
        print(f"memsim: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"memsim: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        written = execute(args.command, cfg, args.out, args.svg, args.jobs)
    except (ConfigurationError, StructuralError) as exc:
        print(f"memsim: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - any failure mid-run maps to exit 2
        print(f"memsim: run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
