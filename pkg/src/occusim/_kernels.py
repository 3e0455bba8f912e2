"""Hot numeric kernels, numba-jitted by default.

Set OCCUSIM_NO_NUMBA=1 to run the pure-Python/numpy fallback instead (also
used automatically when numba is not importable). Both paths execute the same
source, so results are identical; see benchmarks/bench_kernels.py for the
speed difference.
"""

from __future__ import annotations

import os

import numpy as np


def _rc_thermostat_steps_impl(t_out, heat_sp, cool_sp, dt, r, c, heat_cap, cool_cap, t_init):
    """Explicit per-step RC update with an ideal bounded thermostat.

    T[i+1] = T[i] + (dt/C) * ((T_out[i] - T[i]) / R + Q[i]); Q holds the next
    temperature exactly on the violated setpoint when capacity allows,
    saturates at the capacity otherwise, and is zero strictly inside the band.
    Band edges count as active so a room parked on a setpoint is held there
    exactly (no sag/reheat limit cycle). Returns (temps at step start, thermal
    power per step, final temperature).
    """
    n = t_out.shape[0]
    temps = np.empty(n, dtype=np.float64)
    q = np.empty(n, dtype=np.float64)
    a = dt / c
    t = t_init
    for i in range(n):
        temps[i] = t
        free_flux = (t_out[i] - t) / r
        if t <= heat_sp[i]:
            qi = (heat_sp[i] - t) / a - free_flux
            if qi < 0.0:
                qi = 0.0
            elif qi > heat_cap:
                qi = heat_cap
        elif t >= cool_sp[i]:
            qi = (cool_sp[i] - t) / a - free_flux
            if qi > 0.0:
                qi = 0.0
            elif qi < -cool_cap:
                qi = -cool_cap
        else:
            qi = 0.0
        q[i] = qi
        t = t + a * (free_flux + qi)
    return temps, q, t


rc_thermostat_steps_py = _rc_thermostat_steps_impl

_flag = os.environ.get("OCCUSIM_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag in ("1", "true", "yes")

rc_thermostat_steps_jit = None
if not NUMBA_DISABLED:
    try:
        from numba import njit

        rc_thermostat_steps_jit = njit(cache=True, nogil=True)(_rc_thermostat_steps_impl)
    except ImportError:
        rc_thermostat_steps_jit = None

rc_thermostat_steps = rc_thermostat_steps_jit if rc_thermostat_steps_jit is not None else rc_thermostat_steps_py
USING_NUMBA = rc_thermostat_steps is not rc_thermostat_steps_py
