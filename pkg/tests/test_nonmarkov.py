"""Memory-kernel relaxation and dephasing-spectroscopy tests.

The kernel solver is checked against an independent quadrature of the
integro-differential form (written before the solver, different scheme,
different state variables), the Markov limit, and the analytic backflow
geometry of the underdamped regime.
"""

import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from fluxcomb import nonmarkov as nm
from fluxcomb.errors import ConfigError, ConvergenceError, NumericalError

TWO_PI = 2.0 * np.pi


def quadrature_population(kernel, t_grid):
    """Independent check: integrate c'(t) = -(A/2) I(t) with
    I(t) = int_0^t exp(-Gamma (t - tau)) c(tau) dtau directly, using a
    trapezoid predictor-corrector and an exponentially-updated running
    integral. O(h^2); no auxiliary (c, w) embedding.
    """
    t = np.asarray(t_grid, dtype=float)
    a_half = 0.5 * kernel.amplitude_a
    gm = kernel.gamma_memory
    c = 1.0
    integ = 0.0
    out = np.empty(t.size)
    out[0] = c * c
    for k in range(t.size - 1):
        h = t[k + 1] - t[k]
        decay = np.exp(-gm * h)
        c_pred = c + h * (-a_half * integ)
        i_pred = decay * (integ + 0.5 * h * c) + 0.5 * h * c_pred
        c_new = c + 0.5 * h * (-a_half * integ - a_half * i_pred)
        integ = decay * (integ + 0.5 * h * c) + 0.5 * h * c_new
        c = c_new
        out[k + 1] = c * c
    return out


class TestStatesAndSpecs:
    def test_excited_state_population(self):
        assert nm.excited_state().population == 1.0
        assert nm.excited_state(0.3).population == pytest.approx(0.3)

    def test_state_validation(self):
        with pytest.raises(ConfigError):
            nm.TwoLevelState(np.eye(3, dtype=complex))
        with pytest.raises(ConfigError):
            nm.TwoLevelState(np.array([[0.5, 0.2], [0.3, 0.5]], complex))
        with pytest.raises(ConfigError):
            nm.TwoLevelState(np.diag([0.7, 0.7]).astype(complex))
        # unit trace but an eigenvalue below zero
        with pytest.raises(ConfigError):
            nm.TwoLevelState(np.diag([1.2, -0.2]).astype(complex))
        with pytest.raises(ConfigError):
            nm.excited_state(1.5)

    def test_kernel_spec_validation(self):
        with pytest.raises(ConfigError):
            nm.KernelSpec(kind="fancy")
        with pytest.raises(ConfigError):
            nm.KernelSpec(kind="exponential-kernel", amplitude_a=-1.0,
                          gamma_memory=1.0)
        with pytest.raises(ConfigError):
            nm.KernelSpec(kind="exponential-kernel", amplitude_a=1.0,
                          gamma_memory=0.0)

    def test_default_kernel_frozen(self):
        k = nm.default_kernel()
        gm = TWO_PI * 5e6
        assert k.gamma_memory == pytest.approx(gm)
        assert k.amplitude_a == pytest.approx(4.0 * gm ** 2)
        assert k.markovian_gamma == pytest.approx(gm / 100.0)

    def test_grid_validation(self):
        st = nm.excited_state()
        with pytest.raises(ConfigError):
            nm.evolve_markovian(st, 1e6, [1e-9, 2e-9])   # no t=0
        with pytest.raises(ConfigError):
            nm.evolve_markovian(st, 1e6, [0.0, 2e-9, 1e-9])
        with pytest.raises(ConfigError):
            nm.evolve_markovian(st, 1e6, [0.0])
        with pytest.raises(ConfigError):
            nm.evolve_markovian(st, -1e6, [0.0, 1e-9])
        with pytest.raises(ConfigError):
            nm.evolve_markovian(st, 1e6, [0.0, 1e-9], method="euler")


class TestMarkovianEvolution:
    def test_exact_closed_form(self):
        t = np.linspace(0.0, 4e-6, 101)
        p = nm.evolve_markovian(nm.excited_state(0.8), 1e6, t)
        np.testing.assert_allclose(p, 0.8 * np.exp(-1e6 * t), rtol=1e-14)

    def test_rk4_matches_exact(self):
        gamma = TWO_PI * 1e6
        t = np.linspace(0.0, 3.0 / gamma, 3001)
        st = nm.excited_state()
        p_ex = nm.evolve_markovian(st, gamma, t)
        p_rk = nm.evolve_markovian(st, gamma, t, method="rk4")
        assert np.abs(p_rk - p_ex).max() < 1e-8


class TestKernelEvolution:
    def test_against_quadrature(self):
        # the O(h^2) quadrature needs the fine grid, not the RK4 solver
        kernel = nm.default_kernel()
        t = np.linspace(0.0, 400e-9, 16001)
        p = nm.evolve_kernel(nm.excited_state(), kernel, t)
        p_ref = quadrature_population(kernel, t)
        assert np.abs(p - p_ref).max() < 1e-6

    def test_markov_limit(self):
        # fast memory: Gamma = 100 gamma, A = gamma Gamma collapses to
        # plain exponential decay at rate gamma
        gamma = TWO_PI * 5e4
        kernel = nm.KernelSpec(kind="exponential-kernel",
                               amplitude_a=gamma * (100.0 * gamma),
                               gamma_memory=100.0 * gamma)
        t = np.linspace(0.0, 2.0 / gamma, 4001)
        p = nm.evolve_kernel(nm.excited_state(), kernel, t)
        p_m = np.exp(-gamma * t)
        mask = p_m > 1e-3
        rel = np.abs(p[mask] - p_m[mask]) / p_m[mask]
        assert rel.max() < 1.2e-2

    def test_population_stays_physical(self):
        t = np.linspace(0.0, 400e-9, 4001)
        p = nm.evolve_kernel(nm.excited_state(), nm.default_kernel(), t)
        assert p.min() >= -1e-6 and p.max() <= 1.0 + 1e-6

    def test_coarse_grid_raises(self):
        t = np.linspace(0.0, 400e-9, 5)
        with pytest.raises(NumericalError):
            nm.evolve_kernel(nm.excited_state(), nm.default_kernel(), t)

    def test_markovian_kind_rejected(self):
        k = nm.KernelSpec(kind="markovian", markovian_gamma=1e4)
        with pytest.raises(ConfigError):
            nm.evolve_kernel(nm.excited_state(), k, [0.0, 1e-9])


class TestEffectiveRate:
    def test_exponential_trace_gives_constant_rate(self):
        gamma = 3e5
        t = np.linspace(0.0, 5e-6, 501)
        g = nm.gamma_eff(t, np.exp(-gamma * t))
        # ln p is linear so every stencil is exact to roundoff
        assert np.abs(g - gamma).max() / gamma < 1e-10
        assert np.std(g) / np.mean(g) < 1e-3

    def test_constant_trace_gives_zero(self):
        t = np.linspace(0.0, 1e-6, 101)
        g = nm.gamma_eff(t, np.full(101, 0.42))
        # roundoff in ln p is amplified by 1/h in the stencil
        assert np.abs(g).max() < 1e-7

    def test_backflow_interval_geometry(self):
        # underdamped kernel: c'' + Gamma c' + (A/2) c = 0 with
        # Omega = sqrt(A/2 - Gamma^2/4); negative-rate windows open at
        # each zero of c and repeat every pi/Omega
        kernel = nm.default_kernel()
        t = np.linspace(0.0, 400e-9, 4001)
        p = nm.evolve_kernel(nm.excited_state(), kernel, t)
        g = nm.gamma_eff(t, np.maximum(p, 1e-300))
        neg = g < 0.0
        edges = np.flatnonzero(np.diff(neg.astype(int)) == 1)
        starts = t[edges + 1]
        assert starts.size >= 3
        omega = np.sqrt(0.5 * kernel.amplitude_a
                        - 0.25 * kernel.gamma_memory ** 2)
        t_star = (np.pi - np.arctan(2.0 * omega / kernel.gamma_memory)) \
            / omega
        assert abs(starts[0] - t_star) < 1e-9
        spacing = np.diff(starts[:3])
        np.testing.assert_allclose(spacing, np.pi / omega, rtol=0.02)

    def test_rate_integrates_back_to_trace(self):
        # before the first population zero the rate and the trace are
        # mutual inverses
        t = np.linspace(0.0, 40e-9, 2001)
        p = nm.evolve_kernel(nm.excited_state(), nm.default_kernel(), t)
        g = nm.gamma_eff(t, p)
        chi = cumulative_trapezoid(g, t, initial=0.0)
        np.testing.assert_allclose(np.exp(-chi), p, atol=1e-4)

    def test_validation(self):
        t = np.linspace(0.0, 1e-6, 101)
        p = np.exp(-1e5 * t)
        with pytest.raises(ConfigError):
            nm.gamma_eff(t[:4], p[:4])
        with pytest.raises(ConfigError):
            nm.gamma_eff(t, -p)
        with pytest.raises(ConfigError):
            nm.gamma_eff(np.geomspace(1e-9, 1e-6, 101), p)
        with pytest.raises(ConfigError):
            nm.gamma_eff(t, p, smoothing_window=4)
        with pytest.raises(ConfigError):
            nm.gamma_eff(t, p, smoothing_window=3)

    def test_smoothing_preserves_shape(self):
        t = np.linspace(0.0, 1e-6, 201)
        p = np.exp(-2e5 * t)
        g = nm.gamma_eff(t, p, smoothing_window=11)
        assert g.shape == t.shape
        assert np.abs(g - 2e5).max() / 2e5 < 1e-6


class TestNoiseSynthesis:
    def test_model_validation(self):
        with pytest.raises(ConfigError):
            nm.NoiseModel(kind="pink", amplitude=1.0)
        with pytest.raises(ConfigError):
            nm.NoiseModel(kind="one-over-f", amplitude=-1.0)
        with pytest.raises(ConfigError):
            nm.NoiseModel(kind="one-over-f", amplitude=1.0, f_min=1e5,
                          f_max=1e3)
        with pytest.raises(ConfigError):
            nm.NoiseModel(kind="one-over-f", amplitude=1.0,
                          n_components=50)

    def test_spectral_density_shapes(self):
        m1 = nm.NoiseModel(kind="one-over-f", amplitude=2e9)
        f = np.geomspace(1e3, 3e5, 50)
        np.testing.assert_allclose(nm.spectral_density(m1, f), 2e9 / f)
        mf = nm.NoiseModel(kind="filtered", amplitude=2e9,
                           filter_center=3e3, filter_depth=30.0)
        s = nm.spectral_density(mf, np.array([3e3]))[0]
        suppression_db = 10.0 * np.log10((2e9 / 3e3) / s)
        assert suppression_db >= 27.0   # full depth minus tolerance
        with pytest.raises(ConfigError):
            nm.spectral_density(m1, np.array([0.0, 1e3]))

    def test_synthesis_deterministic(self):
        m = nm.NoiseModel(kind="one-over-f", amplitude=1e10)
        x1 = nm.synthesize_noise(m, 1e-3, 1e-6, seed=5)
        x2 = nm.synthesize_noise(m, 1e-3, 1e-6, seed=5)
        np.testing.assert_array_equal(x1, x2)
        x3 = nm.synthesize_noise(m, 1e-3, 1e-6, seed=6)
        assert np.abs(x1 - x3).max() > 0.0

    def test_zero_amplitude_is_silent(self):
        m = nm.NoiseModel(kind="one-over-f", amplitude=0.0)
        assert np.abs(nm.synthesize_noise(m, 1e-4, 1e-6, seed=0)).max() \
            == 0.0
        tau = np.linspace(0.0, 1e-5, 11)
        np.testing.assert_allclose(nm.ramsey(m, tau, 200, 0), 1.0,
                                   atol=1e-12)

    def test_phase_integral_matches_trapezoid(self):
        m = nm.NoiseModel(kind="one-over-f", amplitude=1e9, f_max=1e5,
                          n_components=128)
        f_k, amp_k, phi_k = nm._components(m, np.random.default_rng(3))
        dt = 2e-8
        t = np.arange(0.0, 20e-6 + dt, dt)
        x = (amp_k[:, None] * np.cos(
            TWO_PI * f_k[:, None] * t[None, :]
            + phi_k[:, None])).sum(axis=0)
        acc = cumulative_trapezoid(x, t, initial=0.0)
        for tau in (5e-6, 1e-5, 2e-5):
            idx = int(round(tau / dt))
            exact = nm._phase_integral(f_k, amp_k, phi_k,
                                       np.array([tau]))[0]
            assert abs(acc[idx] - exact) < 1e-3 * max(1.0, abs(exact))

    def test_spectrum_slope(self):
        m = nm.NoiseModel(kind="one-over-f", amplitude=5.4e11,
                          n_components=1024)
        dt, dur = 1e-6, 2e-3
        psa = None
        for k in range(10):
            x = nm.synthesize_noise(m, dur, dt, seed=400 + k)
            f = np.fft.rfftfreq(x.size, dt)
            p = np.abs(np.fft.rfft(x - x.mean())) ** 2 * dt / x.size
            psa = p if psa is None else psa + p
        band = (f > 3e3) & (f < 1e5)
        slope = np.polyfit(np.log10(f[band]),
                           np.log10(psa[band] / 10.0), 1)[0]
        assert abs(slope + 1.0) < 0.25

    def test_ensemble_validation(self):
        m = nm.NoiseModel(kind="one-over-f", amplitude=1e10)
        with pytest.raises(ConfigError):
            nm.ramsey(m, np.linspace(0.0, 1e-5, 5), 100, 0)
        with pytest.raises(ConfigError):
            nm.hahn_echo(m, np.array([-1e-6, 1e-6]), 200, 0)


class TestDecayFits:
    def test_exponential_exact(self):
        t = np.linspace(0.1e-6, 8e-6, 25)
        fit = nm.fit_decay(t, np.exp(-t / 2.5e-6), kind="exponential")
        assert fit.beta == 1.0
        assert fit.timescale == pytest.approx(2.5e-6, rel=1e-12)
        assert fit.residual < 1e-12

    def test_stretched_recovers_known_exponents(self):
        t = np.linspace(0.1e-6, 8e-6, 40)
        for beta_true in (1.0, 2.0, 3.0):
            y = np.exp(-(t / 2.0e-6) ** beta_true)
            y = np.clip(y, 1e-280, 1.0)
            fit = nm.fit_decay(t, y)
            assert fit.beta == pytest.approx(beta_true, abs=0.02)
            assert fit.timescale == pytest.approx(2.0e-6, rel=0.01)

    def test_stretched_tolerates_noise(self):
        rng = np.random.default_rng(11)
        t = np.linspace(0.1e-6, 6e-6, 40)
        y = np.exp(-(t / 2.0e-6) ** 2) + rng.normal(0.0, 0.01, t.size)
        y = np.clip(y, 1e-6, 1.0)
        fit = nm.fit_decay(t, y)
        assert fit.beta == pytest.approx(2.0, abs=0.1)

    def test_fit_validation(self):
        t = np.linspace(0.1e-6, 8e-6, 25)
        y = np.exp(-t / 2e-6)
        with pytest.raises(ConfigError):
            nm.fit_decay(t[:5], y[:5])
        with pytest.raises(ConfigError):
            nm.fit_decay(t, y - 1.0)
        with pytest.raises(ConfigError):
            nm.fit_decay(t, y, kind="biexponential")
        with pytest.raises(ConvergenceError):
            nm.fit_decay(t, np.ones(25), kind="exponential")
        with pytest.raises(ConvergenceError):
            nm.fit_decay(t, np.ones(25))


class TestSpectroscopyProtocol:
    """Light version of the frozen dephasing protocol; the full
    500-realization run lives with the acceptance checks."""

    def test_echo_never_below_ramsey(self):
        m = nm.NoiseModel(kind="one-over-f", amplitude=5.4e11,
                          n_components=1024)
        tau = np.geomspace(0.3e-6, 12e-6, 30)
        e = nm.hahn_echo(m, tau, 250, 42)
        r = nm.ramsey(m, tau, 250, 42)
        mask = r > 0.15
        assert np.all(e[mask] >= r[mask] - 0.01)

    def test_exponent_separation_smoke(self):
        tau = np.geomspace(0.3e-6, 12e-6, 60)

        def fit_window(y):
            m = (y > 0.25) & (y < 0.85)
            return nm.fit_decay(tau[m], np.minimum(y[m], 1.0))

        m1 = nm.NoiseModel(kind="one-over-f", amplitude=5.4e11,
                           n_components=1024)
        mf = nm.NoiseModel(kind="filtered", amplitude=6e10,
                           filter_center=3e3, filter_depth=30.0,
                           n_components=1024)
        b1 = fit_window(nm.hahn_echo(m1, tau, 250, 42)).beta
        bf = fit_window(nm.hahn_echo(mf, tau, 250, 42)).beta
        assert 2.3 < b1 < 3.9
        assert 1.3 < bf < 2.7
        assert b1 > bf
