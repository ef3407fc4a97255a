"""Pure-numpy time stepper for the modulated ladder line.

This file and _step_cy.pyx implement the *same* update to the letter; any
change here must be mirrored there or backend equivalence breaks. One step
from voltage time t to t+dt:

  1. th = (k + 1/2) dt
  2. flux[j] += dt * (v[j] - v[j+1])                 (branch flux, half grid)
  3. i[j] = flux[j] * cos(arg_j(th)) / l0            (current through cell j)
  4. interior v[j] += (dt/C_cell) * (i[j-1] - i[j])
  5. boundary nodes: semi-implicit resistor update with C_end = C_cell/2,
     v = (v + a*Vs - (dt/C_end)*i_adj) / (1 + a), a = dt/(C_end Z)
  6. blowup check on max|v| (a NaN also trips it), probe currents recorded
     at th

arg_j(t) = phi_dc + phi_rf * sin(mod_phase[j] - omega_s * t) with
mod_phase[j] = kappa_s * z_j + phase baked in by the caller.
"""

from __future__ import annotations

import math

import numpy as np

SRC_CW = 0
SRC_PULSE = 1
PORT_LEFT = 0
PORT_RIGHT = 1


def _source_value(kind: int, t: float, amp: float, omega: float,
                  t_center: float, t_width: float, ramp: float) -> float:
    if kind == SRC_CW:
        if t < ramp:
            a = amp * 0.5 * (1.0 - math.cos(math.pi * t / ramp))
        else:
            a = amp
        return a * math.sin(omega * t)
    # gaussian pulse
    x = (t - t_center) / t_width
    return amp * math.exp(-0.5 * x * x) * math.sin(omega * (t - t_center))


def step_block(v, flux, i_work, mod_phase,
               phi_dc, phi_rf, omega_s, dt,
               inv_l0, dt_over_c, dt_over_cend, a_left, a_right,
               src_kind, src_port, src_amp, src_omega,
               src_t_center, src_t_width, src_ramp,
               ceiling, t_index0, n_steps,
               probe_idx=None, probe_rec=None) -> int:
    """Advance n_steps in place. Returns -1, or the absolute step index at
    which max|v| left the ceiling (state is then as of that failed step)."""
    record = probe_idx is not None and len(probe_idx) > 0
    for s in range(n_steps):
        k = t_index0 + s
        th = (k + 0.5) * dt

        flux += dt * (v[:-1] - v[1:])
        arg = phi_dc + phi_rf * np.sin(mod_phase - omega_s * th)
        np.multiply(flux, np.cos(arg), out=i_work)
        i_work *= inv_l0

        if record:
            for p, b in enumerate(probe_idx):
                probe_rec[s, p] = i_work[b]

        v[1:-1] += dt_over_c * (i_work[:-1] - i_work[1:])

        vs_l = _source_value(src_kind, th, src_amp, src_omega,
                             src_t_center, src_t_width, src_ramp) \
            if src_port == PORT_LEFT else 0.0
        vs_r = _source_value(src_kind, th, src_amp, src_omega,
                             src_t_center, src_t_width, src_ramp) \
            if src_port == PORT_RIGHT else 0.0
        v[0] = (v[0] + a_left * vs_l - dt_over_cend * i_work[0]) \
            / (1.0 + a_left)
        v[-1] = (v[-1] + a_right * vs_r + dt_over_cend * i_work[-1]) \
            / (1.0 + a_right)

        m = float(np.max(np.abs(v)))
        if not (m <= ceiling):
            return k
    return -1
