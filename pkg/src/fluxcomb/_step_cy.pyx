# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of _step_numpy.step_block. The update order and arithmetic
must match that file exactly; it is the contract the equivalence tests pin
down. No -ffast-math: IEEE semantics are part of the contract."""

from libc.math cimport cos, exp, fabs, sin

import numpy as np

SRC_CW = 0
SRC_PULSE = 1
PORT_LEFT = 0
PORT_RIGHT = 1

DEF PI = 3.141592653589793


cdef inline double _source_value(int kind, double t, double amp, double omega,
                                 double t_center, double t_width,
                                 double ramp) nogil:
    cdef double a, x
    if kind == 0:  # continuous wave with raised-cosine turn-on
        if t < ramp:
            a = amp * 0.5 * (1.0 - cos(PI * t / ramp))
        else:
            a = amp
        return a * sin(omega * t)
    x = (t - t_center) / t_width
    return amp * exp(-0.5 * x * x) * sin(omega * (t - t_center))


def step_block(double[::1] v, double[::1] flux, double[::1] i_work,
               double[::1] mod_phase,
               double phi_dc, double phi_rf, double omega_s, double dt,
               double inv_l0, double dt_over_c, double dt_over_cend,
               double a_left, double a_right,
               int src_kind, int src_port, double src_amp, double src_omega,
               double src_t_center, double src_t_width, double src_ramp,
               double ceiling, long t_index0, long n_steps,
               probe_idx=None, probe_rec=None):
    cdef long n = flux.shape[0]
    cdef long s, k, j, p, n_probes = 0
    cdef double th, w, arg, vs_l, vs_r
    cdef long[::1] pidx
    cdef double[:, ::1] prec
    cdef bint record = probe_idx is not None and len(probe_idx) > 0
    if record:
        pidx = probe_idx
        prec = probe_rec
        n_probes = pidx.shape[0]

    for s in range(n_steps):
        k = t_index0 + s
        th = (k + 0.5) * dt
        w = omega_s * th

        for j in range(n):
            flux[j] += dt * (v[j] - v[j + 1])
            arg = phi_dc + phi_rf * sin(mod_phase[j] - w)
            i_work[j] = flux[j] * cos(arg) * inv_l0

        if record:
            for p in range(n_probes):
                prec[s, p] = i_work[pidx[p]]

        for j in range(1, n):
            v[j] += dt_over_c * (i_work[j - 1] - i_work[j])

        vs_l = _source_value(src_kind, th, src_amp, src_omega,
                             src_t_center, src_t_width, src_ramp) \
            if src_port == 0 else 0.0
        vs_r = _source_value(src_kind, th, src_amp, src_omega,
                             src_t_center, src_t_width, src_ramp) \
            if src_port == 1 else 0.0
        v[0] = (v[0] + a_left * vs_l - dt_over_cend * i_work[0]) \
            / (1.0 + a_left)
        v[n] = (v[n] + a_right * vs_r + dt_over_cend * i_work[n - 1]) \
            / (1.0 + a_right)

        # any |v| beyond the ceiling, NaN included, aborts the block
        for j in range(n + 1):
            if not (fabs(v[j]) <= ceiling):
                return k
    return -1
