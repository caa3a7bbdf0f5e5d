"""Independent reference models used by several test modules."""
import math

import numpy as np


def euler_memristor(v, g0, g_min, g_max, v_set, v_reset, mu, dt, substeps=100):
    """Forward Euler on the window ODE, ``substeps`` sub-steps per sample.

    ``v`` may be one train of shape (n,) or a batch of shape (m, n) with one
    ``g0`` per row.
    """
    v = np.asarray(v, dtype=float)
    half = (g_max - g_min) / 2
    h = dt / substeps
    g = np.array(g0, dtype=float)
    drive = np.where(v > v_set, v - v_set, np.where(v < v_reset, v - v_reset, 0.0))
    out = np.empty_like(v)
    for k in range(v.shape[-1]):
        d = drive[..., k]
        if np.any(d):
            for _ in range(substeps):
                g = g + h * mu * d * (g_max - g) * (g - g_min) / (half * half)
        out[..., k] = g
    return out


def random_pulse_train(rng, n=400):
    """Rectangular pulses of random sign, height and width on a zero baseline."""
    v = np.zeros(n)
    k = int(rng.integers(0, 20))
    while k < n:
        width = int(rng.integers(1, 30))
        v[k:k + width] = rng.choice([-1, 1]) * rng.uniform(0.6, 5.0)
        k += width + int(rng.integers(5, 40))
    return v


def step_response(k, dt, tau):
    return 1.0 - math.exp(-(k + 1) * dt / tau)
