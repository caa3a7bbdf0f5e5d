"""Sampled signals, spike trains and circuit component values.

Every block in the simulator reads and writes samples on a shared uniform
:class:`TimeGrid`.  Sample ``k`` sits at ``t_start + k * dt``; times are never
accumulated as a running sum, so long runs do not drift.

Sign convention for spike lags: a positive :class:`DeltaT` means the
pre-synaptic spike precedes the post-synaptic one.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

# Relative slack (in units of dt) used when snapping event times to grid points.
GRID_EPS = 1e-9


class Unit(str, enum.Enum):
    VOLT = "volt"
    SIEMENS = "siemens"
    DIMENSIONLESS = "dimensionless"


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    dt: float
    n_steps: int

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError(f"dt must be positive and finite, got {self.dt!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ConfigurationError(f"n_steps must be an integer >= 1, got {self.n_steps!r}")
        if not math.isfinite(self.t_start):
            raise ConfigurationError("t_start must be finite")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @classmethod
    def from_duration(cls, duration: float, dt: float, t_start: float = 0.0) -> "TimeGrid":
        """Grid covering ``[t_start, t_start + duration)``."""
        if not duration > 0:
            raise ConfigurationError(f"duration must be positive, got {duration!r}")
        n = int(math.ceil(duration / dt - GRID_EPS))
        return cls(t_start, dt, max(n, 1))

    @property
    def t_end(self) -> float:
        """Time one step past the last sample."""
        return self.t_start + self.n_steps * self.dt

    def time(self, k: int) -> float:
        return self.t_start + k * self.dt

    def times(self) -> np.ndarray:
        return self.t_start + np.arange(self.n_steps) * self.dt

    def index_at_or_after(self, t: float) -> int:
        """Smallest ``k`` with ``time(k) >= t``, tolerating float noise."""
        return int(math.ceil((t - self.t_start) / self.dt - GRID_EPS))

    def index_at_or_before(self, t: float) -> int:
        """Largest ``k`` with ``time(k) <= t``, tolerating float noise."""
        return int(math.floor((t - self.t_start) / self.dt + GRID_EPS))

    def contains(self, t: float) -> bool:
        return self.t_start <= t < self.t_end


@dataclass(frozen=True, eq=False)
class Trace:
    """A signal sampled on a :class:`TimeGrid`. Values are stored read-only."""

    grid: TimeGrid
    values: np.ndarray
    unit: Unit = Unit.VOLT

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or len(values) != self.grid.n_steps:
            raise ConfigurationError(
                f"trace has {values.size} samples but grid has {self.grid.n_steps}"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("trace samples must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "unit", Unit(self.unit))

    def __len__(self):
        return len(self.values)

    def times(self) -> np.ndarray:
        return self.grid.times()

    def equals(self, other: "Trace") -> bool:
        """Bit-exact comparison of grid, unit and samples."""
        return (
            self.grid == other.grid
            and self.unit == other.unit
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True)
class SpikeTrain:
    spike_times: tuple = ()
    pulse_width: float = 100e-6
    amplitude: float = 5.0

    def __post_init__(self):
        times = tuple(float(t) for t in self.spike_times)
        object.__setattr__(self, "spike_times", times)
        if not self.pulse_width > 0:
            raise ConfigurationError("pulse_width must be positive")
        for a, b in zip(times, times[1:]):
            if not b > a:
                raise ConfigurationError("spike times must be strictly increasing")
            if b - a < self.pulse_width * (1 - GRID_EPS):
                raise ConfigurationError(
                    f"spikes at {a} and {b} closer than the pulse width {self.pulse_width}"
                )

    @classmethod
    def periodic(cls, first: float, period: float, stop: float, **kwargs) -> "SpikeTrain":
        """Regular train with spikes at ``first + n * period`` strictly before ``stop``."""
        if not period > 0:
            raise ConfigurationError("period must be positive")
        n = int(math.ceil((stop - first) / period - GRID_EPS))
        return cls(tuple(first + i * period for i in range(max(n, 0))), **kwargs)


@dataclass(frozen=True)
class DeltaT:
    """Pre/post spike lag in seconds; positive when pre fires first."""

    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ConfigurationError("delta t must be finite")

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class ComponentValues:
    """Passive component values and op-amp parameters of the neuron board.

    ``r4``/``c1`` set the spike integrators, ``c3``/``r11``/``r8``/``r9`` the
    one-shot width.  The remaining fields describe stages the schematic leaves
    unlabelled and are free design parameters.
    """

    r4: float = 50e3
    c1: float = 100e-9
    c3: float = 10e-9
    r8: float = 10e3
    r9: float = 10e3
    r11: float = 47e3
    mod_pot_total: float = 50e3
    mod_wiper: float = 1.0
    v_rail: float = 12.0
    v_threshold_oneshot: float = 0.05
    v_high_oneshot: float = 5.0
    tau_inhibitor: float = 1e-3
    tau_output: float = 100e-6
    learning_gain: float = 20.0
    inhibitory_gain: float = 20.0
    key_threshold: float = 2.5

    def __post_init__(self):
        for name in ("r4", "c1", "c3", "r8", "r9", "r11", "mod_pot_total",
                     "tau_inhibitor", "tau_output"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigurationError(f"{name} must be positive, got {value!r}")
        if not 0.0 <= self.mod_wiper <= 1.0:
            raise ConfigurationError(f"mod_wiper must lie in [0, 1], got {self.mod_wiper!r}")
        if not self.v_rail > 0:
            raise ConfigurationError("v_rail must be positive")
        if not 0 < self.v_high_oneshot <= self.v_rail:
            raise ConfigurationError("v_high_oneshot must lie in (0, v_rail]")

    @property
    def tau_integrator(self) -> float:
        return self.r4 * self.c1


def trace_at(trace: Trace, t: float) -> float:
    """Zero-order-hold read: the sample at the nearest grid point at or below ``t``."""
    grid = trace.grid
    if not (grid.t_start <= t < grid.t_end):
        raise IndexError(f"t={t!r} outside grid span [{grid.t_start}, {grid.t_end})")
    k = min(max(grid.index_at_or_before(t), 0), grid.n_steps - 1)
    return float(trace.values[k])


def spike_train_to_trace(train: SpikeTrain, grid: TimeGrid) -> Trace:
    """Render rectangular pulses ``[t, t + pulse_width)`` onto ``grid``.

    Pulses falling partly or wholly outside the grid are clipped.
    """
    values = np.zeros(grid.n_steps)
    for t in train.spike_times:
        lo = max(grid.index_at_or_after(t), 0)
        hi = min(grid.index_at_or_after(t + train.pulse_width), grid.n_steps)
        if hi > lo:
            values[lo:hi] = train.amplitude
    return Trace(grid, values, Unit.VOLT)


def constant_trace(grid: TimeGrid, value: float, unit: Unit = Unit.VOLT) -> Trace:
    return Trace(grid, np.full(grid.n_steps, float(value)), unit)
