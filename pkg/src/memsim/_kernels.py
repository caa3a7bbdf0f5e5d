"""Compiled inner loops for the sequential blocks.

Each kernel mirrors the scalar step function of the same block in
:mod:`memsim.blocks` / :mod:`memsim.memristor` operation for operation, so the
block-wise and step-wise engine paths agree bit for bit.
"""
import math

import numpy as np
from numba import njit

from .signals import GRID_EPS


@njit(cache=True)
def lag_filter(x, y0, alpha, v_rail):
    out = np.empty_like(x)
    y = y0
    for k in range(x.shape[0]):
        y = y + (x[k] - y) * alpha
        if y > v_rail:
            y = v_rail
        elif y < -v_rail:
            y = -v_rail
        out[k] = y
    return out


@njit(cache=True)
def one_shot(x, v_threshold, v_high, n_fire, armed0, left0):
    out = np.empty_like(x)
    armed = armed0
    left = left0
    for k in range(x.shape[0]):
        if left == 0:
            if x[k] < v_threshold:
                armed = True
            elif armed:
                armed = False
                left = n_fire
        if left > 0:
            out[k] = v_high
            left -= 1
        else:
            out[k] = 0.0
    return out, armed, left


@njit(cache=True)
def memristor_fold(v, g0, g_min, g_max, v_th_set, v_th_reset, mu, dt):
    out = np.empty_like(v)
    g = g0
    span = g_max - g_min
    for k in range(v.shape[0]):
        vk = v[k]
        if vk > v_th_set:
            drive = vk - v_th_set
        elif vk < v_th_reset:
            drive = vk - v_th_reset
        else:
            drive = 0.0
        if drive != 0.0:
            u = (g - g_min) / span
            r = 4.0 * mu * drive * dt / span
            if r >= 0.0:
                u = u / (u + (1.0 - u) * math.exp(-r))
            else:
                e = math.exp(r)
                u = u * e / (u * e + (1.0 - u))
            g = g_min + u * span
        out[k] = g
    return out


def steps_for(duration, dt):
    """Whole steps needed to cover ``duration`` (at least one)."""
    return max(int(math.ceil(duration / dt - GRID_EPS)), 1)
