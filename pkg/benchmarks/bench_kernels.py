"""Benchmark the RC thermostat kernel: numba @njit vs pure-Python/numpy fallback.

Run:
    python benchmarks/bench_kernels.py

The same comparison can be forced package-wide with OCCUSIM_NO_NUMBA=1.
"""

import time

import numpy as np

from occusim._kernels import rc_thermostat_steps_jit, rc_thermostat_steps_py

N_STEPS = 288 * 28  # one month at 5-minute steps
N_ROOMS = 20
REPEATS = 5


def make_inputs(rng):
    t_out = 4.0 + 4.0 * np.sin(np.linspace(0, 56 * np.pi, N_STEPS)) + rng.normal(0, 1, N_STEPS)
    conditioned = rng.random(N_STEPS) < 0.3
    heat_sp = np.where(conditioned, 20.0, 14.0)
    cool_sp = np.where(conditioned, 24.0, 30.0)
    return t_out, heat_sp, cool_sp


def run(fn, inputs):
    t_out, heat_sp, cool_sp = inputs
    for _ in range(N_ROOMS):
        fn(t_out, heat_sp, cool_sp, 300.0, 0.02, 2.0e6, 8000.0, 8000.0, 20.0)


def main():
    rng = np.random.default_rng(0)
    inputs = make_inputs(rng)

    variants = [("numpy fallback", rc_thermostat_steps_py)]
    if rc_thermostat_steps_jit is not None:
        run(rc_thermostat_steps_jit, inputs)  # trigger JIT compile outside timing
        variants.append(("numba @njit", rc_thermostat_steps_jit))
    else:
        print("numba unavailable; timing only the fallback")

    times = {}
    for name, fn in variants:
        best = min(_timed(fn, inputs) for _ in range(REPEATS))
        times[name] = best
        rate = N_STEPS * N_ROOMS / best / 1e6
        print(f"{name:16s} {best * 1e3:9.2f} ms  ({rate:7.1f} M steps/s)")
    if len(times) == 2:
        print(f"speedup: {times['numpy fallback'] / times['numba @njit']:.1f}x")

    # both paths must agree
    if rc_thermostat_steps_jit is not None:
        t_out, heat_sp, cool_sp = inputs
        a = rc_thermostat_steps_py(t_out, heat_sp, cool_sp, 300.0, 0.02, 2.0e6, 8000.0, 8000.0, 20.0)
        b = rc_thermostat_steps_jit(t_out, heat_sp, cool_sp, 300.0, 0.02, 2.0e6, 8000.0, 8000.0, 20.0)
        assert np.allclose(a[0], b[0], rtol=0, atol=1e-12) and abs(a[2] - b[2]) < 1e-12
        print("paths agree")


def _timed(fn, inputs):
    start = time.perf_counter()
    run(fn, inputs)
    return time.perf_counter() - start


if __name__ == "__main__":
    main()
