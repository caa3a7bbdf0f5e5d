import numpy as np
import pytest

from memsim import engine
from memsim.blocks import IntegratorState
from memsim.errors import ConfigurationError, StructuralError
from memsim.neuron import BlockSpec, Edge, NeuronNetlist, build_standard_netlist
from memsim.signals import SpikeTrain, TimeGrid, Trace, constant_trace, spike_train_to_trace

from oracles import step_response


def _pair(t_pre=0.01, t_post=0.012):
    return {"tpre": SpikeTrain((t_pre,)), "tpost": SpikeTrain((t_post,))}


def test_topo_order_chain_and_diamond():
    chain = NeuronNetlist(
        (BlockSpec("z", "generator"), BlockSpec("b", "integrator", {"tau": 1e-3}),
         BlockSpec("a", "integrator", {"tau": 1e-3})),
        (Edge("z", "b"), Edge("b", "a")))
    assert engine.topo_order(chain) == ["z", "b", "a"]
    diamond = NeuronNetlist(
        (BlockSpec("g", "generator"), BlockSpec("l", "integrator", {"tau": 1e-3}),
         BlockSpec("r", "integrator", {"tau": 1e-3}), BlockSpec("s", "adder", {"gains": [1.0, 1.0]})),
        (Edge("g", "l"), Edge("g", "r"), Edge("l", "s", "in0"), Edge("r", "s", "in1")))
    assert engine.topo_order(diamond) == ["g", "l", "r", "s"]


def test_undelayed_cycle_rejected():
    net = NeuronNetlist(
        (BlockSpec("g", "generator"), BlockSpec("s", "adder", {"gains": [1.0, 1.0]}),
         BlockSpec("i", "integrator", {"tau": 1e-3})),
        (Edge("g", "s", "in0"), Edge("i", "s", "in1"), Edge("s", "i")))
    with pytest.raises(StructuralError, match="cycle"):
        engine.run(net, engine.SimConfig(TimeGrid(0, 1e-5, 10), ("i",), stimuli={"g": SpikeTrain(())}))


def test_generator_passthrough():
    net = NeuronNetlist((BlockSpec("g", "generator"),), ())
    grid = TimeGrid.from_duration(0.01, 1e-5)
    train = SpikeTrain((0.001, 0.005), 2e-4, 3.0)
    r = engine.run(net, engine.SimConfig(grid, ("g",), stimuli={"g": train}))
    assert r.traces["g"].equals(spike_train_to_trace(train, grid))


def _rc():
    return NeuronNetlist((BlockSpec("g", "generator"), BlockSpec("i", "integrator", {"tau": 1e-3, "v_rail": 12.0})),
                         (Edge("g", "i"),))


@pytest.mark.parametrize("stepwise", [False, True])
def test_integrator_step_closed_form(stepwise):
    grid = TimeGrid.from_duration(0.01, 1e-6)
    cfg = engine.SimConfig(grid, ("i",), stimuli={"g": constant_trace(grid, 1.0)})
    y = engine.run(_rc(), cfg, stepwise=stepwise).traces["i"].values
    ref = np.array([step_response(k, 1e-6, 1e-3) for k in range(grid.n_steps)])
    assert np.max(np.abs(y - ref)) < 1e-9


def test_missing_stimulus_and_probe_errors():
    grid = TimeGrid(0, 1e-5, 10)
    with pytest.raises(ConfigurationError, match="stimulus"):
        engine.run(_rc(), engine.SimConfig(grid, ("i",)))
    with pytest.raises(StructuralError, match="probe"):
        engine.run(_rc(), engine.SimConfig(grid, ("nope",), stimuli={"g": SpikeTrain(())}))
    with pytest.raises(ConfigurationError, match="probe"):
        engine.run(_rc(), engine.SimConfig(grid, (), stimuli={"g": SpikeTrain(())}))


def test_coarse_step_rejected():
    grid = TimeGrid(0, 5e-4, 10)
    with pytest.raises(ConfigurationError):
        engine.run(_rc(), engine.SimConfig(grid, ("i",), stimuli={"g": SpikeTrain(())}))


def test_stimulus_on_other_grid_rejected():
    grid = TimeGrid(0, 1e-5, 10)
    other = constant_trace(TimeGrid(0, 2e-5, 10), 1.0)
    with pytest.raises(ConfigurationError, match="grid"):
        engine.run(_rc(), engine.SimConfig(grid, ("i",), stimuli={"g": other}))


def test_run_is_deterministic(open_loop):
    grid = TimeGrid.from_duration(0.05, 1e-6)
    cfg = engine.SimConfig(grid, ("hebbian", "inhibitor", "u1"), stimuli=_pair())
    assert engine.run(open_loop, cfg).equals(engine.run(open_loop, cfg))


def test_stepwise_matches_blockwise(open_loop):
    grid = TimeGrid.from_duration(0.04, 1e-6)
    probes = tuple(open_loop.node_ids)
    cfg = engine.SimConfig(grid, probes, stimuli=_pair(0.015, 0.011))
    a = engine.run(open_loop, cfg, stepwise=False)
    b = engine.run(open_loop, cfg, stepwise=True)
    for p in probes:
        assert np.array_equal(a.traces[p].values, b.traces[p].values), p
    assert a.final_states == b.final_states


def test_probe_set_does_not_change_traces(open_loop):
    grid = TimeGrid.from_duration(0.04, 1e-6)
    one = engine.run(open_loop, engine.SimConfig(grid, ("hebbian",), stimuli=_pair()))
    many = engine.run(open_loop, engine.SimConfig(grid, ("u2", "hebbian", "u9"), stimuli=_pair()))
    assert one.traces["hebbian"].equals(many.traces["hebbian"])


def test_halving_dt_changes_peak_by_under_one_percent(open_loop):
    peaks = []
    for dt in (1e-6, 0.5e-6):
        grid = TimeGrid.from_duration(0.05, dt)
        r = engine.run(open_loop, engine.SimConfig(grid, ("hebbian", "inhibitor"), stimuli=_pair()))
        peaks.append([np.max(np.abs(r.traces[p].values)) for p in ("hebbian", "inhibitor")])
    (h1, i1), (h2, i2) = peaks
    assert abs(h1 - h2) / h2 < 0.01 and abs(i1 - i2) / i2 < 0.01


def test_final_states_reported(open_loop):
    grid = TimeGrid.from_duration(0.03, 1e-6)
    r = engine.run(open_loop, engine.SimConfig(grid, ("hebbian",), stimuli=_pair()))
    assert isinstance(r.final_states["u2"], IntegratorState)
    assert list(r.final_states) == sorted(r.final_states)


def test_closed_loop_soma_fires_and_synapses_move(closed_loop):
    grid = TimeGrid.from_duration(0.2, 1e-5)
    pre = SpikeTrain.periodic(0.002, 0.01, 0.2)
    r = engine.run(closed_loop, engine.SimConfig(grid, ("soma", "ex_mem", "inh_mem"), stimuli={"tpre": pre}))
    soma = r.traces["soma"].values
    assert np.count_nonzero(np.diff((soma > 0).astype(int)) == 1) >= 1
    assert r.traces["ex_mem"].unit.value == "siemens"
    assert r.traces["ex_mem"].values[-1] != r.traces["ex_mem"].values[0]
    assert r.traces["inh_mem"].values[-1] != r.traces["inh_mem"].values[0]
    again = engine.run(closed_loop, engine.SimConfig(grid, ("soma", "ex_mem", "inh_mem"), stimuli={"tpre": pre}))
    assert r.equals(again)


def test_closed_loop_quiet_without_input(closed_loop):
    grid = TimeGrid.from_duration(0.02, 1e-5)
    r = engine.run(closed_loop, engine.SimConfig(grid, ("soma", "hebbian"), stimuli={"tpre": SpikeTrain(())}))
    assert not r.traces["soma"].values.any() and not r.traces["hebbian"].values.any()
