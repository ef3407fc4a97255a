"""Open-system dynamics of a single decaying two-level system: Lindblad
relaxation, an exponential-memory kernel with information backflow, the
effective decoherence rate, and Monte Carlo dephasing spectroscopy
(Ramsey / Hahn echo under synthesized classical frequency noise).

Population convention: rho00 labels the DECAYING (excited) population
throughout, so evolve_* traces start at rho00(0) and relax toward 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter

from .errors import ConfigError, ConvergenceError, NumericalError

TWO_PI = 2.0 * math.pi


@dataclass
class TwoLevelState:
    rho: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rho, dtype=complex)
        if r.shape != (2, 2):
            raise ConfigError("rho must be 2x2")
        if np.abs(r - r.conj().T).max() > 1e-12:
            raise ConfigError("rho must be Hermitian")
        if abs(r.trace() - 1.0) > 1e-12:
            raise ConfigError("rho must have unit trace")
        if np.linalg.eigvalsh(r).min() < -1e-10:
            raise ConfigError("rho must be positive semidefinite")
        self.rho = r

    @property
    def population(self) -> float:
        """The decaying population rho00."""
        return float(self.rho[0, 0].real)


def excited_state(p0: float = 1.0) -> TwoLevelState:
    if not 0.0 <= p0 <= 1.0:
        raise ConfigError("p0 must lie in [0, 1]")
    return TwoLevelState(np.diag([p0, 1.0 - p0]).astype(complex))


@dataclass(frozen=True)
class KernelSpec:
    kind: str                        # "markovian" | "exponential-kernel"
    amplitude_a: float = 0.0         # kernel amplitude A [1/s^2]
    gamma_memory: float = 0.0        # memory decay rate Gamma [1/s]
    markovian_gamma: float = 0.0     # gamma for the memoryless kind [1/s]

    def __post_init__(self):
        if self.kind not in ("markovian", "exponential-kernel"):
            raise ConfigError(f"unknown kernel kind {self.kind!r}")
        if min(self.amplitude_a, self.gamma_memory,
               self.markovian_gamma) < 0.0:
            raise ConfigError("rates must be nonnegative")
        if self.kind == "exponential-kernel" and self.gamma_memory <= 0.0:
            raise ConfigError("exponential kernel needs gamma_memory > 0")


def default_kernel() -> KernelSpec:
    """Memory regime calibrated so the decay rate transiently turns
    negative within the first 100 ns, then frozen."""
    gamma_mem = TWO_PI * 5e6
    return KernelSpec(kind="exponential-kernel",
                      amplitude_a=4.0 * gamma_mem ** 2,
                      gamma_memory=gamma_mem,
                      markovian_gamma=gamma_mem / 100.0)


def _check_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ConfigError("t_grid must be 1-D with at least 2 points")
    if t[0] != 0.0:
        raise ConfigError("t_grid must start at 0")
    if np.any(np.diff(t) <= 0.0):
        raise ConfigError("t_grid must be strictly increasing")
    return t


def evolve_markovian(state: TwoLevelState, gamma: float, t_grid,
                     method: str = "exact") -> np.ndarray:
    """Population trace under plain relaxation at rate gamma (H = 0,
    collapse operator sigma-minus). "exact" evaluates the closed form;
    "rk4" integrates the Bloch components and exists as a cross-check."""
    t = _check_grid(t_grid)
    if gamma < 0.0:
        raise ConfigError("gamma must be nonnegative")
    p0 = state.population
    if method == "exact":
        return p0 * np.exp(-gamma * t)
    if method != "rk4":
        raise ConfigError(f"unknown method {method!r}")

    # Bloch z with z = 2p - 1; relaxation pulls z toward -1 at rate gamma
    def deriv(y):
        x, yy, z = y
        return np.array([-0.5 * gamma * x, -0.5 * gamma * yy,
                         -gamma * (z + 1.0)])

    y = np.array([2.0 * state.rho[0, 1].real, -2.0 * state.rho[0, 1].imag,
                  2.0 * p0 - 1.0])
    out = np.empty(t.size)
    out[0] = p0
    for k in range(t.size - 1):
        h = t[k + 1] - t[k]
        k1 = deriv(y)
        k2 = deriv(y + 0.5 * h * k1)
        k3 = deriv(y + 0.5 * h * k2)
        k4 = deriv(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = 0.5 * (1.0 + y[2])
    return out


def evolve_kernel(state: TwoLevelState, kernel: KernelSpec,
                  t_grid) -> np.ndarray:
    """Population trace under the exponential memory kernel
    K(t - tau) = A exp(-Gamma (t - tau)).

    Solved at the amplitude level: the excited amplitude c obeys
    c'(t) = -integral K(t-tau)/2 c(tau) dtau, embedded exactly as
        c' = -w,   w' = -Gamma w + (A/2) c,
    and p = c^2. This keeps the state physical through the backflow
    regime (a population-level embedding of the same kernel swings
    negative once A/Gamma^2 is of order 1, which no valid density matrix
    can do); the memoryless limit recovers the rate gamma = A/Gamma.
    """
    if kernel.kind != "exponential-kernel":
        raise ConfigError("evolve_kernel needs an exponential-kernel spec")
    t = _check_grid(t_grid)
    a_half = 0.5 * kernel.amplitude_a
    gm = kernel.gamma_memory
    c = math.sqrt(state.population)
    w = 0.0
    out = np.empty(t.size)
    out[0] = c * c
    for k in range(t.size - 1):
        h = t[k + 1] - t[k]
        # RK4 on the linear pair (c, w)
        k1c, k1w = -w, -gm * w + a_half * c
        c2, w2 = c + 0.5 * h * k1c, w + 0.5 * h * k1w
        k2c, k2w = -w2, -gm * w2 + a_half * c2
        c3, w3 = c + 0.5 * h * k2c, w + 0.5 * h * k2w
        k3c, k3w = -w3, -gm * w3 + a_half * c3
        c4, w4 = c + h * k3c, w + h * k3w
        k4c, k4w = -w4, -gm * w4 + a_half * c4
        c += (h / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
        w += (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        out[k + 1] = c * c
    if out.max() > 1.0 + 1e-6 or out.min() < -1e-6:
        raise NumericalError(
            "population left [0, 1]; decrease the grid spacing")
    return out


def gamma_eff(t_grid, trace, smoothing_window: int | None = None
              ) -> np.ndarray:
    """Instantaneous decay rate -d/dt ln p via a 5-point central stencil
    (one-sided at the ends), optionally smoothed by a local quadratic
    (odd window >= 5)."""
    t = np.asarray(t_grid, dtype=float)
    p = np.asarray(trace, dtype=float)
    if t.shape != p.shape or t.ndim != 1 or t.size < 5:
        raise ConfigError("need matching 1-D grids with >= 5 points")
    if np.any(p <= 0.0):
        raise ConfigError("gamma_eff needs a strictly positive trace")
    h = np.diff(t)
    if np.abs(h - h[0]).max() > 1e-9 * h[0]:
        raise ConfigError("gamma_eff needs a uniform grid")
    h = h[0]
    f = np.log(p)
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d[0] = (f[1] - f[0]) / h
    d[1] = (f[2] - f[0]) / (2.0 * h)
    d[-2] = (f[-1] - f[-3]) / (2.0 * h)
    d[-1] = (f[-1] - f[-2]) / h
    g = -d
    if smoothing_window is not None:
        if smoothing_window < 5 or smoothing_window % 2 == 0:
            raise ConfigError("smoothing_window must be odd and >= 5")
        g = savgol_filter(g, smoothing_window, 2)
    return g


@dataclass(frozen=True)
class NoiseModel:
    kind: str                        # "one-over-f" | "filtered"
    amplitude: float                 # S(f) = amplitude / f  [(rad/s)^2/Hz]
    f_min: float = 1e3               # [Hz]
    f_max: float = 3e5               # [Hz]
    filter_center: float = 3e3       # [Hz]
    filter_depth: float = 30.0       # [dB]
    n_components: int = 256

    def __post_init__(self):
        if self.kind not in ("one-over-f", "filtered"):
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if not 0.0 < self.f_min < self.f_max:
            raise ConfigError("need 0 < f_min < f_max")
        if self.n_components < 100:
            raise ConfigError("n_components must be >= 100")
        if self.amplitude < 0.0:
            raise ConfigError("amplitude must be nonnegative")


def spectral_density(model: NoiseModel, f) -> np.ndarray:
    """One-sided S(f) of the frequency noise, [(rad/s)^2/Hz]. The
    filtered kind carves a Gaussian notch (in log10 f, half-decade sigma)
    of filter_depth dB at filter_center."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0.0):
        raise ConfigError("spectral density needs f > 0")
    s = model.amplitude / f
    if model.kind == "filtered":
        logdist = np.log10(f / model.filter_center)
        s = s * 10.0 ** (-(model.filter_depth / 10.0)
                         * np.exp(-logdist ** 2 / (2.0 * 0.5 ** 2)))
    return s


def _components(model: NoiseModel, rng):
    """Log-spaced tones with variances integrating S(f) per bin, and
    uniform random phases: the trajectory is
    sum_k sqrt(2 var_k) cos(2 pi f_k t + phi_k)."""
    edges = np.geomspace(model.f_min, model.f_max, model.n_components + 1)
    f_k = np.sqrt(edges[:-1] * edges[1:])
    var_k = spectral_density(model, f_k) * np.diff(edges)
    phi_k = rng.uniform(0.0, TWO_PI, size=model.n_components)
    return f_k, np.sqrt(2.0 * var_k), phi_k


def synthesize_noise(model: NoiseModel, duration: float, dt: float,
                     seed: int) -> np.ndarray:
    """One realization of the frequency-noise trajectory delta-omega(t)
    [rad/s] on a uniform grid; deterministic under seed."""
    if duration <= 0.0 or dt <= 0.0 or dt >= duration:
        raise ConfigError("need 0 < dt < duration")
    f_k, amp_k, phi_k = _components(model, np.random.default_rng(seed))
    t = np.arange(0.0, duration, dt)
    return (amp_k[:, None] * np.cos(
        TWO_PI * f_k[:, None] * t[None, :] + phi_k[:, None])).sum(axis=0)


def _phase_integral(f_k, amp_k, phi_k, tau):
    """Exact integral of the tone sum from 0 to each tau: accumulated
    dephasing phase Phi(tau) [rad]."""
    w = TWO_PI * f_k
    return ((amp_k / w)[None, :] * (
        np.sin(np.outer(tau, w) + phi_k[None, :])
        - np.sin(phi_k)[None, :])).sum(axis=1)


def _ensemble(model, tau_grid, n_realizations, seed, echo):
    tau = np.asarray(tau_grid, dtype=float)
    if np.any(tau < 0.0):
        raise ConfigError("tau grid must be nonnegative")
    if n_realizations < 200:
        raise ConfigError("need at least 200 realizations")
    acc = np.zeros(tau.size, dtype=complex)
    for r in range(n_realizations):
        f_k, amp_k, phi_k = _components(
            model, np.random.default_rng((seed, r)))
        if echo:
            phase = 2.0 * _phase_integral(f_k, amp_k, phi_k, 0.5 * tau) \
                - _phase_integral(f_k, amp_k, phi_k, tau)
        else:
            phase = _phase_integral(f_k, amp_k, phi_k, tau)
        acc += np.exp(1j * phase)
    return np.abs(acc) / n_realizations


def ramsey(model: NoiseModel, tau_grid, n_realizations: int,
           seed: int) -> np.ndarray:
    """Free-induction contrast |<exp(i Phi(tau))>| over the ensemble."""
    return _ensemble(model, tau_grid, n_realizations, seed, echo=False)


def hahn_echo(model: NoiseModel, tau_grid, n_realizations: int,
              seed: int) -> np.ndarray:
    """Echo amplitude with a refocusing flip at tau/2, same ensemble
    construction (paired seeds make echo >= Ramsey comparisons exact)."""
    return _ensemble(model, tau_grid, n_realizations, seed, echo=True)


@dataclass
class DecayFit:
    model: str                       # "exponential" | "stretched-exponential"
    timescale: float                 # [s]
    beta: float
    residual: float                  # rms in linear space


def fit_decay(t, y, kind: str = "stretched-exponential") -> DecayFit:
    """Fit y = exp(-(t/T)^beta) by damped Gauss-Newton on log residuals,
    seeded by a log-log line through the usable points. The exponential
    kind pins beta = 1 (closed-form least squares)."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size != y.size or t.size < 8:
        raise ConfigError("need >= 8 samples")
    if np.any(y <= 0.0) or np.any(y > 1.0):
        raise ConfigError("samples must lie in (0, 1]")
    if kind not in ("exponential", "stretched-exponential"):
        raise ConfigError(f"unknown decay model {kind!r}")

    ln_y = np.log(y)
    if kind == "exponential":
        # minimize sum (ln y + t/T)^2 in 1/T
        denom = float(np.sum(t * ln_y))
        if denom >= 0.0:
            raise ConvergenceError("samples do not decay")
        timescale = -float(np.sum(t * t)) / denom
        resid = float(np.sqrt(np.mean((y - np.exp(-t / timescale)) ** 2)))
        return DecayFit("exponential", timescale, 1.0, resid)

    usable = (t > 0.0) & (y < 1.0)
    if usable.sum() < 4:
        raise ConvergenceError("too few decaying samples to seed the fit")
    u = np.log(-ln_y[usable])
    v = np.log(t[usable])
    beta, intercept = np.polyfit(v, u, 1)
    ln_t0 = -intercept / beta

    theta = np.array([ln_t0, beta])
    def residuals(th):
        return ln_y + np.exp(th[1] * (np.log(np.maximum(t, 1e-300))
                                      - th[0]))

    r = residuals(theta)
    cost = float(r @ r)
    for _ in range(60):
        # Jacobian of exp(beta (ln t - ln T)) wrt (ln T, beta)
        with np.errstate(divide="ignore"):
            lt = np.log(np.maximum(t, 1e-300))
        core = np.exp(theta[1] * (lt - theta[0]))
        jac = np.column_stack([-theta[1] * core, (lt - theta[0]) * core])
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        lam = 1.0
        for _ in range(20):
            trial = theta + lam * step
            rt = residuals(trial)
            ct = float(rt @ rt)
            if ct < cost:
                theta, r, cost = trial, rt, ct
                break
            lam *= 0.5
        else:
            break
        if np.abs(lam * step).max() < 1e-12:
            break
    timescale, beta = math.exp(theta[0]), float(theta[1])
    if not (0.0 < beta <= 4.0) or not np.isfinite(timescale):
        raise ConvergenceError(
            f"fit left the admissible region (beta = {beta:.3f})")
    resid = float(np.sqrt(np.mean(
        (y - np.exp(-(t / timescale) ** beta)) ** 2)))
    return DecayFit("stretched-exponential", timescale, beta, resid)
