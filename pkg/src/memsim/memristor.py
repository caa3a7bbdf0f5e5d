"""Threshold memristor with a quadratic window.

The conductance ``g`` only moves while the applied voltage lies outside
``[v_th_reset, v_th_set]``::

    dg/dt = mu * (v - v_th) * w(g),   w(g) = (g_max - g)(g - g_min) / ((g_max - g_min)/2)^2

where ``v_th`` is whichever threshold was crossed.  ``w`` equals 1 at the
midpoint and vanishes at both bounds.  With the drive held constant over a
step this is a logistic equation, and each step uses its closed-form solution,
so ``g`` never leaves ``[g_min, g_max]``.  The bounds themselves are only
reached once the normalised state rounds to 0 or 1 in floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import ConfigurationError
from .signals import Trace, Unit


@dataclass(frozen=True)
class MemristorState:
    g: float = 505e-6
    g_min: float = 10e-6
    g_max: float = 1e-3
    v_th_set: float = 0.5
    v_th_reset: float = -0.5
    mu: float = 1e-4

    def __post_init__(self):
        if not 0 < self.g_min < self.g_max:
            raise ConfigurationError("need 0 < g_min < g_max")
        if not self.g_min <= self.g <= self.g_max:
            raise ConfigurationError(f"g={self.g!r} outside [g_min, g_max]")
        if not self.v_th_set > 0 > self.v_th_reset:
            raise ConfigurationError("need v_th_set > 0 > v_th_reset")
        if not self.mu > 0:
            raise ConfigurationError("mu must be positive")

    @classmethod
    def at_midpoint(cls, **kwargs) -> "MemristorState":
        g_min = kwargs.get("g_min", cls.g_min)
        g_max = kwargs.get("g_max", cls.g_max)
        return cls(g=(g_min + g_max) / 2, **kwargs)

    def window(self, g=None):
        g = self.g if g is None else g
        half = (self.g_max - self.g_min) / 2
        return (self.g_max - g) * (g - self.g_min) / (half * half)


def memristor_step(state: MemristorState, v: float, dt: float) -> MemristorState:
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    if v > state.v_th_set:
        drive = v - state.v_th_set
    elif v < state.v_th_reset:
        drive = v - state.v_th_reset
    else:
        return state
    span = state.g_max - state.g_min
    u = (state.g - state.g_min) / span
    r = 4.0 * state.mu * drive * dt / span
    if r >= 0.0:
        u = u / (u + (1.0 - u) * math.exp(-r))
    else:
        e = math.exp(r)
        u = u * e / (u * e + (1.0 - u))
    return replace(state, g=state.g_min + u * span)


def memristor_drive(state: MemristorState, pulse_trace: Trace) -> tuple[MemristorState, Trace]:
    """Fold :func:`memristor_step` over a voltage trace.

    Returns the final state and the conductance after every step.
    """
    if pulse_trace.unit is not Unit.VOLT:
        raise ConfigurationError("memristor drive expects a voltage trace")
    g = _kernels.memristor_fold(
        np.ascontiguousarray(pulse_trace.values), state.g, state.g_min, state.g_max,
        state.v_th_set, state.v_th_reset, state.mu, pulse_trace.grid.dt,
    )
    return replace(state, g=float(g[-1])), Trace(pulse_trace.grid, g, Unit.SIEMENS)
