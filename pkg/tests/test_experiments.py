import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from memsim import experiments as ex
from memsim.errors import ConfigurationError, ProtocolError
from memsim.signals import DeltaT, TimeGrid, Trace, Unit


def test_reference_rule_examples():
    assert ex.reference_hebbian_dw(1e-3) == 1.0
    assert ex.reference_hebbian_dw(-2e-3) == -0.5
    assert ex.reference_hebbian_dw(0.0) == 1.0
    assert ex.reference_hebbian_dw(math.inf) == 0.0
    assert ex.reference_hebbian_dw(1e-4) == 1.0


@given(st.floats(1e-4, 1.0), st.floats(1e-4, 1.0))
def test_reference_rule_odd_and_decreasing(a, b):
    assert ex.reference_hebbian_dw(-a) == -ex.reference_hebbian_dw(a)
    lo, hi = sorted((a, b))
    assert ex.reference_hebbian_dw(lo) >= ex.reference_hebbian_dw(hi)


@pytest.mark.parametrize("label,wiper,total", [
    ("0/50 kΩ", 0.0, 50e3), ("25/25 kΩ", 0.5, 50e3), ("37.5/12.5 kΩ", 0.75, 50e3),
    ("50/0 kΩ", 1.0, 50e3), ("250/750 kΩ", 0.25, 1e6), ("0/1 MΩ", 0.0, 1e6),
])
def test_pot_labels(label, wiper, total):
    assert ex.pot_label_to_wiper(label) == pytest.approx(wiper)
    assert ex.pot_total_ohms(label) == pytest.approx(total)


@pytest.mark.parametrize("bad", ["", "50 kΩ", "0/0 kΩ", "a/b"])
def test_bad_pot_labels(bad):
    with pytest.raises(ConfigurationError):
        ex.pot_label_to_wiper(bad)


def test_signed_extremum_prefers_magnitude():
    trace = Trace(TimeGrid(0.0, 1.0, 5), [0.0, 2.0, -3.0, 3.0, 1.0])
    assert ex.signed_extremum(trace, 0, 4) == -3.0
    assert ex.signed_extremum(trace, 3, 4) == 3.0


def test_stdp_sign_and_decay(params):
    pts = ex.sweep_stdp(params, [-4e-3, -1e-3, 1e-3, 4e-3])
    dws = {round(p.delta_t * 1e3): p.dw for p in pts}
    assert dws[1] > dws[4] > 0 > dws[-4] > dws[-1]
    assert [p.delta_t for p in pts] == sorted(p.delta_t for p in pts)


def test_stdp_window_is_odd(params):
    pts = ex.sweep_stdp(params, [-2e-3, 2e-3])
    assert pts[0].dw == pytest.approx(-pts[1].dw, rel=1e-9)


def test_istdp_window_is_even_and_positive(params):
    pts = ex.sweep_istdp(params, [-2e-3, 2e-3, 8e-3])
    assert pts[0].dw == pytest.approx(pts[1].dw, rel=1e-9)
    assert pts[1].dw > pts[2].dw > 0


def test_accepts_delta_t_objects(params):
    a = ex.sweep_stdp(params, [DeltaT(2e-3)])
    b = ex.sweep_stdp(params, [2e-3])
    assert a == b


def test_spike_outside_window(params):
    with pytest.raises(ProtocolError):
        ex.sweep_stdp(params, [0.06])


def test_parallel_sweep_matches_serial(params):
    serial = ex.sweep_stdp(params, [-8e-3, 1e-3, 4e-3])
    parallel = ex.sweep_stdp(params, [4e-3, -8e-3, 1e-3], jobs=2)
    assert serial == parallel


def test_da_sweep_orders_by_wiper_and_grows(params):
    pts = ex.sweep_da_stdp(params, [("b", 1.0), ("a", 0.0), "25/25 kΩ"])
    assert [p.wiper for p in pts] == [0.0, 0.5, 1.0]
    assert pts[0].peak_amplitude < pts[1].peak_amplitude < pts[2].peak_amplitude
    assert pts[1].pot_label == "25/25 kΩ"


def test_da_peak_scales_with_linear_gain(params):
    lo, hi = ex.sweep_da_istdp(params, [("lo", 0.0), ("hi", 1.0)])
    assert hi.peak_amplitude / lo.peak_amplitude == pytest.approx(
        params.mod.gain_max / params.mod.gain_min, rel=1e-6)


def test_conductance_protocol_lag_drifts():
    proto = ex.ConductanceProtocol()
    pre, post = proto.trains(ex.ExperimentParams())
    lags = [b - a for a, b in zip(pre.spike_times, post.spike_times)]
    assert lags[0] == pytest.approx(6e-3)
    assert all(y < x for x, y in zip(lags, lags[1:]))
    assert lags[-1] > 0


def test_da_schedule_steps_once():
    grid = TimeGrid.from_duration(0.01, 1e-4)
    da = ex.ConductanceProtocol(step_time=0.005).da_schedule(grid)
    assert da.unit is Unit.DIMENSIONLESS
    assert set(da.values[:50]) == {0.4} and set(da.values[50:]) == {1.0}


def test_short_conductance_run(params):
    proto = ex.ConductanceProtocol(duration=0.2, step_time=0.1)
    run = ex.default_conductance_run(params, proto)
    g = run.g_trace.values
    assert run.g_trace.unit is Unit.SIEMENS
    assert np.all(np.diff(g) >= 0)
    assert run.segment_slope(0.1, 0.2) > run.segment_slope(0.0, 0.1) > 0


def test_conductance_rejects_bad_schedule(params):
    grid = TimeGrid.from_duration(0.01, 1e-6)
    proto = ex.ConductanceProtocol(duration=0.01)
    bad = Trace(grid, np.full(grid.n_steps, 1.5), Unit.DIMENSIONLESS)
    with pytest.raises(ProtocolError):
        ex.run_conductance_experiment(params, bad, proto.trains(params))
    coarse = proto.da_schedule(TimeGrid.from_duration(0.01, 2e-6))
    with pytest.raises(ProtocolError):
        ex.run_conductance_experiment(params, coarse, proto.trains(params))
