#!/usr/bin/env python3
"""Time the compiled stepper against the vectorized fallback.

Usage: python benchmarks/bench_step.py [n_cells] [n_steps]
"""

import math
import sys
import time

import numpy as np

from fluxcomb import _step_numpy
from fluxcomb import backend


def make_args(n, n_steps):
    dz = 10e-6
    dt = 4.6e-12
    l0 = 3.29105976e-10
    c_cell = 8.2426e-9 * dz
    omega = 2 * math.pi * 3e9
    a = dt / (0.5 * c_cell * 63.19)
    return dict(
        v=np.zeros(n + 1), flux=np.zeros(n), i_work=np.zeros(n),
        # rf at zero: same arithmetic per step, but no parametric gain, so
        # long timing runs cannot trip the blowup ceiling
        mod_phase=3681.55 * (np.arange(n) + 0.5) * dz,
        phi_dc=0.6, phi_rf=0.0, omega_s=omega, dt=dt,
        inv_l0=1.0 / l0, dt_over_c=dt / c_cell,
        dt_over_cend=dt / (0.5 * c_cell), a_left=a, a_right=a,
        src_kind=backend.SRC_CW, src_port=backend.PORT_LEFT,
        src_amp=1e-6, src_omega=omega, src_t_center=0.0, src_t_width=0.0,
        src_ramp=1e-9, ceiling=1.0, t_index0=0, n_steps=n_steps)


def bench(step_block, n, n_steps, repeats=5):
    best = math.inf
    for _ in range(repeats):
        kw = make_args(n, n_steps)
        t0 = time.perf_counter()
        bad = step_block(*kw.values())
        dt = time.perf_counter() - t0
        assert bad == -1
        best = min(best, dt)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 512
    n_steps = int(sys.argv[2]) if len(sys.argv) > 2 else 20000
    print(f"{n} cells x {n_steps} steps, best of 5")

    t_py = bench(_step_numpy.step_block, n, n_steps)
    print(f"  python fallback : {t_py:8.3f} s  "
          f"({n_steps / t_py:10.0f} steps/s)")

    if backend.BACKEND == "cython":
        from fluxcomb import _step_cy
        t_cy = bench(_step_cy.step_block, n, n_steps)
        print(f"  compiled        : {t_cy:8.3f} s  "
              f"({n_steps / t_cy:10.0f} steps/s)")
        print(f"  speedup         : {t_py / t_cy:8.2f}x")
    else:
        print("  compiled stepper not available in this install")


if __name__ == "__main__":
    main()
