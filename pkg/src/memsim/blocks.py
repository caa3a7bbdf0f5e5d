"""Behavioral models of the op-amp stages on the neuron board.

Op-amps are ideal apart from symmetric saturation at ``±v_rail``.  Stateful
stages (integrators, the one-shot) expose a scalar ``*_step`` function used by
the step-wise engine and a whole-trace runner used when the graph has no
feedback; both compute exactly the same floating point sequence.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import ConfigurationError
from .signals import GRID_EPS, Trace, Unit

DEFAULT_V_RAIL = 12.0


def clamp(x: float, v_rail: float) -> float:
    return min(max(x, -v_rail), v_rail)


def lag_alpha(tau: float, dt: float) -> float:
    """Per-step blend factor of an exactly discretised first-order lag."""
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt!r}")
    if dt > tau / 10 * (1 + GRID_EPS):
        raise ConfigurationError(
            f"step {dt!r} s too coarse for time constant {tau!r} s (need dt <= tau/10)"
        )
    return -math.expm1(-dt / tau)


# --------------------------------------------------------------------------
# Integrators (U2, U6, U7, U11)

@dataclass(frozen=True)
class IntegratorState:
    y: float = 0.0
    tau: float = 1e-3

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigurationError("integrator tau must be positive")


def integrator_step(state: IntegratorState, x: float, dt: float,
                    v_rail: float = DEFAULT_V_RAIL) -> IntegratorState:
    """Advance ``y`` toward ``x`` by one step of the exact first-order lag solution.

    For an input held constant over the step the result is exact, so refining
    ``dt`` never changes values at shared grid points.
    """
    alpha = lag_alpha(state.tau, dt)
    return replace(state, y=clamp(state.y + (x - state.y) * alpha, v_rail))


def integrate(x: np.ndarray, tau: float, dt: float, v_rail: float = DEFAULT_V_RAIL,
              y0: float = 0.0) -> np.ndarray:
    """Run :func:`integrator_step` over a whole input array."""
    alpha = lag_alpha(tau, dt)
    return _kernels.lag_filter(np.ascontiguousarray(x, dtype=np.float64),
                               float(y0), alpha, float(v_rail))


# --------------------------------------------------------------------------
# One-shot multivibrators (U3, U5)

def one_shot_duration(c3: float, r11: float, r8: float, r9: float) -> float:
    """Pulse width of the monostable: ``C3 * R11 * ln(1 + R8/R9)``."""
    for name, value in (("c3", c3), ("r11", r11), ("r8", r8), ("r9", r9)):
        if not value > 0:
            raise ConfigurationError(f"{name} must be positive, got {value!r}")
    return c3 * r11 * math.log1p(r8 / r9)


class Phase(str, enum.Enum):
    IDLE = "idle"
    FIRING = "firing"


@dataclass(frozen=True)
class OneShotState:
    """Monostable state.

    The trigger is edge-sensitive: after a pulse the input must drop below
    ``v_threshold`` before another pulse can start (``armed`` tracks this).
    """

    pulse_width: float
    v_high: float = 5.0
    v_threshold: float = 0.05
    phase: Phase = Phase.IDLE
    time_remaining: float = 0.0
    armed: bool = True

    def __post_init__(self):
        if not self.pulse_width > 0:
            raise ConfigurationError("pulse_width must be positive")
        if not 0 <= self.time_remaining <= self.pulse_width * (1 + GRID_EPS):
            raise ConfigurationError("time_remaining outside [0, pulse_width]")
        if self.phase is Phase.IDLE and self.time_remaining != 0:
            raise ConfigurationError("idle one-shot must have time_remaining == 0")


def one_shot_step(state: OneShotState, x: float, dt: float) -> tuple[OneShotState, float]:
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    phase, remaining, armed = state.phase, state.time_remaining, state.armed
    if phase is Phase.IDLE:
        if x < state.v_threshold:
            armed = True
        elif armed:
            armed = False
            phase, remaining = Phase.FIRING, state.pulse_width
    if phase is Phase.IDLE:
        return replace(state, armed=armed), 0.0
    # re-snap to whole steps each time so long pulses do not accumulate error
    steps_left = _kernels.steps_for(remaining, dt) - 1
    if steps_left > 0:
        new = replace(state, phase=Phase.FIRING, time_remaining=min(steps_left * dt, state.pulse_width),
                      armed=armed)
    else:
        new = replace(state, phase=Phase.IDLE, time_remaining=0.0, armed=armed)
    return new, state.v_high


def run_one_shot(x: np.ndarray, dt: float, pulse_width: float, v_high: float,
                 v_threshold: float) -> np.ndarray:
    """Whole-trace version of :func:`one_shot_step` starting idle and armed."""
    if pulse_width < dt * (1 - GRID_EPS):
        raise ConfigurationError("one-shot pulse_width shorter than one step")
    out, _, _ = _kernels.one_shot(np.ascontiguousarray(x, dtype=np.float64),
                                  float(v_threshold), float(v_high),
                                  _kernels.steps_for(pulse_width, dt), True, 0)
    return out


# --------------------------------------------------------------------------
# Memoryless stages (U1, U8, U9, U10, keys)

def inverting_adder(inputs, gains, v_rail: float = DEFAULT_V_RAIL) -> float:
    """``clamp(-sum(g_i * x_i))``. Works elementwise on arrays too."""
    if len(inputs) != len(gains) or not len(inputs):
        raise ConfigurationError("inverting adder needs equal, nonempty inputs and gains")
    total = 0.0
    for g, x in zip(gains, inputs):
        total = total + g * x
    return np.clip(-total, -v_rail, v_rail) if isinstance(total, np.ndarray) else clamp(-total, v_rail)


def controlled_inverter(x, control, control_threshold: float = 2.5,
                        v_rail: float = DEFAULT_V_RAIL):
    """Inverting amplifier whose non-inverting input is released by a key.

    With the key open (``control`` below threshold) the non-inverting input is
    grounded and the stage inverts; with the key closed it is a unity follower.
    """
    if isinstance(x, np.ndarray) or isinstance(control, np.ndarray):
        out = np.where(np.asarray(control) >= control_threshold, x, -np.asarray(x))
        return np.clip(out, -v_rail, v_rail)
    return clamp(x if control >= control_threshold else -x, v_rail)


def analog_key(x, control, threshold: float = 2.5):
    """Transistor switch: passes ``x`` while ``control`` is at or above threshold, else 0."""
    if isinstance(x, np.ndarray) or isinstance(control, np.ndarray):
        return np.where(np.asarray(control) >= threshold, x, 0.0)
    return x if control >= threshold else 0.0


# --------------------------------------------------------------------------
# Dopamine modulation stage (U12/U13)

class ModMode(str, enum.Enum):
    LINEAR = "linear"
    SOMBRERO = "sombrero"


@dataclass(frozen=True)
class ModStageConfig:
    mode: ModMode = ModMode.LINEAR
    wiper: float = 1.0
    gain_min: float = 0.2
    gain_max: float = 2.0
    sombrero_center: float = 0.5
    sombrero_width: float = 0.25

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", ModMode(self.mode))
        except ValueError:
            raise ConfigurationError(f"unknown modulation mode {self.mode!r}") from None
        if not 0.0 <= self.wiper <= 1.0:
            raise ConfigurationError(f"wiper must lie in [0, 1], got {self.wiper!r}")
        if not self.gain_min >= 0:
            raise ConfigurationError("gain_min must be >= 0")
        if not self.gain_max > self.gain_min:
            raise ConfigurationError("gain_max must exceed gain_min")
        if not self.sombrero_width > 0:
            raise ConfigurationError("sombrero_width must be positive")


def modulation_gain(cfg: ModStageConfig, wiper=None):
    """Gain of the modulation stage at the potentiometer setting.

    ``wiper`` overrides ``cfg.wiper`` and may be an array (a dopamine schedule).
    """
    w = cfg.wiper if wiper is None else wiper
    span = cfg.gain_max - cfg.gain_min
    if cfg.mode is ModMode.LINEAR:
        return cfg.gain_min + w * span
    z = (w - cfg.sombrero_center) / cfg.sombrero_width
    return cfg.gain_min + span * np.exp(-z * z)


def apply_modulation(learning_pulse: Trace, cfg: ModStageConfig,
                     v_rail: float = DEFAULT_V_RAIL) -> Trace:
    if learning_pulse.unit is not Unit.VOLT:
        raise ConfigurationError("modulation expects a voltage trace")
    gain = float(modulation_gain(cfg))
    values = np.clip(learning_pulse.values * gain, -v_rail, v_rail)
    return Trace(learning_pulse.grid, values, Unit.VOLT)
