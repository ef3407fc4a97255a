"""Classical wave propagation on a ladder transmission line whose Josephson
inductance is modulated in space and time, plus the analysis operations:
harmonic spectra, forward/backward isolation, and wavepacket tracking.

Discretization: voltages live on integer nodes and integer time steps, branch
flux on half nodes and half steps (flux is the leapfrog state because the
inductance varies in time; current is derived as flux/L). Cell k occupies
[k*dz, (k+1)*dz] with its branch at (k+1/2)*dz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import backend
from .errors import ConfigError, NumericalError

# magnetic flux quantum [Wb]
PHI0 = 2.067833848e-15

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class FluxDrive:
    """Modulation knobs defining the inductance law
    L = l0 * sec(phi_dc + phi_rf * sin(kappa_s z - omega_s t + phase))."""

    phi_dc_tilde: float          # DC flux bias, 2*pi*Phi_dc/Phi0 [rad]
    phi_rf_tilde: float          # rf flux amplitude [rad]
    kappa_s: float               # spatial modulation wavenumber [rad/m]
    omega_s: float               # modulation angular frequency [rad/s]
    phase: float = 0.0           # spatial phase offset [rad]
    margin: float = 0.05         # keep-out from the secant singularity [rad]

    def __post_init__(self):
        if self.phi_rf_tilde < 0.0:
            raise ConfigError("phi_rf_tilde must be nonnegative")
        if self.margin <= 0.0:
            raise ConfigError("margin must be positive")
        reach = abs(self.phi_dc_tilde) + self.phi_rf_tilde
        if reach >= HALF_PI - self.margin:
            raise ConfigError(
                f"flux excursion {reach:.4f} rad reaches within {self.margin} "
                "of the secant singularity at pi/2")


@dataclass(frozen=True)
class LineGeometry:
    n_cells: int = 512
    dz: float = 10e-6            # cell length [m]
    c_per_length: float = 8.2426e-9   # shunt capacitance [F/m]
    i0: float = 1e-6             # junction critical current [A]
    phi0: float = PHI0           # flux quantum [Wb]

    def __post_init__(self):
        if self.n_cells < 16:
            raise ConfigError("n_cells must be >= 16")
        if self.dz <= 0 or self.c_per_length <= 0 or self.i0 <= 0:
            raise ConfigError("dz, c_per_length, i0 must be positive")

    @property
    def length(self) -> float:
        return self.n_cells * self.dz

    @property
    def l0(self) -> float:
        """Unmodulated inductance per cell [H]."""
        return self.phi0 / (2.0 * math.pi * self.i0)

    @property
    def c_cell(self) -> float:
        return self.c_per_length * self.dz


@dataclass(frozen=True)
class SourceSpec:
    kind: str                    # "continuous-wave" | "gaussian-pulse"
    omega: float                 # carrier angular frequency [rad/s]
    amplitude: float             # [V]
    t_center: float = 0.0        # pulse center [s]
    t_width: float = 0.0         # pulse sigma [s]
    port: str = "left"
    ramp_periods: float = 3.0    # cw turn-on length, in carrier periods

    def __post_init__(self):
        if self.kind not in ("continuous-wave", "gaussian-pulse"):
            raise ConfigError(f"unknown source kind {self.kind!r}")
        if self.port not in ("left", "right"):
            raise ConfigError(f"unknown port {self.port!r}")
        if self.amplitude <= 0.0:
            raise ConfigError("amplitude must be positive")
        if self.omega <= 0.0:
            raise ConfigError("omega must be positive")
        if self.kind == "gaussian-pulse" and self.t_width <= 0.0:
            raise ConfigError("gaussian pulse needs t_width > 0")


@dataclass
class LineState:
    t: float                     # [s], voltage time
    v: np.ndarray                # [V], nodes 0..n
    flux: np.ndarray             # [Wb], branches, at t - dt/2
    i: np.ndarray                # [A], branch currents, at t - dt/2
    step_index: int


@dataclass
class SpectrumReport:
    harmonic_index: list
    power_dbc: list              # dB relative to n = 1
    absolute_power: list         # arbitrary units
    probe_position: float | None # [m]; None for spatial spectra


@dataclass
class WavepacketMetrics:
    t: float                     # [s]
    centroid: float              # [m]
    rms_width: float             # [m]
    spectral_centroid: float     # [rad/m]
    peak_velocity: float | None  # [m/s]; None for the first entry


def inductance_at(drive: FluxDrive, geom: LineGeometry, z: float,
                  t: float) -> float:
    """Henries per cell at (z, t); domain error inside the guard margin."""
    if not 0.0 <= z <= geom.length:
        raise ConfigError(f"z = {z} outside [0, {geom.length}]")
    arg = drive.phi_dc_tilde + drive.phi_rf_tilde * math.sin(
        drive.kappa_s * z - drive.omega_s * t + drive.phase)
    if abs(arg) >= HALF_PI - drive.margin:
        raise ConfigError(
            f"secant argument {arg:.4f} inside the guard margin")
    return geom.l0 / math.cos(arg)


def default_drive(phi_dc: float, phi_rf: float,
                  geom: LineGeometry | None = None,
                  omega_m: float = 2.0 * math.pi * 3e9,
                  n_periods: float = 3.0) -> FluxDrive:
    """Convenience constructor: kappa_s set to n_periods modulation periods
    along the line, omega_s equal to the excitation tone."""
    geom = geom or LineGeometry()
    return FluxDrive(
        phi_dc_tilde=phi_dc, phi_rf_tilde=phi_rf,
        kappa_s=2.0 * math.pi * n_periods / geom.length,
        omega_s=omega_m)


class Simulator:
    """Single line run; not shareable mid-run. Use build_line() to construct;
    independent instances may run concurrently."""

    def __init__(self, geom: LineGeometry, drive: FluxDrive,
                 source: SourceSpec, dt: float, blowup_factor: float = 1e6):
        self.geom = geom
        self.drive = drive
        self.source = source
        self.dt = dt
        n = geom.n_cells
        self.v = np.zeros(n + 1)
        self.flux = np.zeros(n)
        self._i = np.zeros(n)
        self.t_index = 0

        z_branch = (np.arange(n) + 0.5) * geom.dz
        self._mod_phase = drive.kappa_s * z_branch + drive.phase

        # matched termination at the dc operating point (rf off)
        l_dc_per_len = geom.l0 / math.cos(drive.phi_dc_tilde) / geom.dz
        self.z_term = math.sqrt(l_dc_per_len / geom.c_per_length)
        self.v_dc = 1.0 / math.sqrt(l_dc_per_len * geom.c_per_length)

        c_end = 0.5 * geom.c_cell
        self._a_end = dt / (c_end * self.z_term)
        self._dt_over_cend = dt / c_end
        self._dt_over_c = dt / geom.c_cell
        self._inv_l0 = 1.0 / geom.l0
        self.ceiling = blowup_factor * source.amplitude

        self._src_kind = backend.SRC_CW if source.kind == "continuous-wave" \
            else backend.SRC_PULSE
        self._src_port = backend.PORT_LEFT if source.port == "left" \
            else backend.PORT_RIGHT
        self._src_ramp = source.ramp_periods * 2.0 * math.pi / source.omega

    @property
    def t(self) -> float:
        return self.t_index * self.dt

    def state(self) -> LineState:
        return LineState(t=self.t, v=self.v.copy(), flux=self.flux.copy(),
                         i=self._i.copy(), step_index=self.t_index)

    def _advance(self, n_steps: int, probe_idx=None):
        if n_steps <= 0:
            return None
        rec = None
        if probe_idx is not None:
            probe_idx = np.asarray(probe_idx, dtype=np.int64)
            rec = np.empty((n_steps, probe_idx.size))
        src = self.source
        bad = backend.step_block(
            self.v, self.flux, self._i, self._mod_phase,
            self.drive.phi_dc_tilde, self.drive.phi_rf_tilde,
            self.drive.omega_s, self.dt,
            self._inv_l0, self._dt_over_c, self._dt_over_cend,
            self._a_end, self._a_end,
            self._src_kind, self._src_port, src.amplitude, src.omega,
            src.t_center, src.t_width, self._src_ramp,
            self.ceiling, self.t_index, n_steps,
            probe_idx, rec)
        if bad >= 0:
            self.t_index = bad + 1
            raise NumericalError(
                f"field blowup at step {bad} (t = {bad * self.dt:.3e} s): "
                f"|v| exceeded {self.ceiling:.3e} V")
        self.t_index += n_steps
        return rec

    def step(self) -> LineState:
        self._advance(1)
        return self.state()

    def run_until(self, t_end: float, snapshot_times=()) -> list[LineState]:
        """Advance to t_end, returning states at the steps nearest the
        requested snapshot times (actual time recorded in each state)."""
        if t_end <= self.t:
            raise ConfigError("t_end must be ahead of the current time")
        times = list(snapshot_times)
        if any(times[k] > times[k + 1] for k in range(len(times) - 1)):
            raise ConfigError("snapshot times must be sorted")
        end_step = int(round(t_end / self.dt))
        steps = []
        for ts in times:
            if not (self.t < ts <= t_end):
                raise ConfigError(
                    f"snapshot time {ts} outside (t_now, t_end]")
            steps.append(min(max(int(round(ts / self.dt)), self.t_index + 1),
                             end_step))
        out = []
        for s in steps:
            self._advance(s - self.t_index)
            out.append(self.state())
        self._advance(end_step - self.t_index)
        return out

    def record_probe(self, branch_indices, n_steps: int) -> np.ndarray:
        """Advance n_steps recording branch currents each half step;
        shape (n_steps, n_probes)."""
        return self._advance(n_steps, probe_idx=branch_indices)

    def stored_energy(self) -> float:
        """Sum of capacitive and inductive energy, evaluated with the
        inductance at the flux's own half step."""
        g = self.geom
        th = (self.t_index - 0.5) * self.dt
        arg = self.drive.phi_dc_tilde + self.drive.phi_rf_tilde * np.sin(
            self._mod_phase - self.drive.omega_s * th)
        e_cap = 0.5 * g.c_cell * float(np.sum(self.v[1:-1] ** 2)) \
            + 0.25 * g.c_cell * (self.v[0] ** 2 + self.v[-1] ** 2)
        e_ind = float(np.sum(self.flux ** 2 * np.cos(arg))) / (2.0 * g.l0)
        return e_cap + e_ind


def cfl_bound(geom: LineGeometry, drive: FluxDrive) -> float:
    """Largest stable dt: dz * sqrt(L'_min * C') with L' at the secant
    minimum over the drive's reachable arguments."""
    arg_min = max(0.0, abs(drive.phi_dc_tilde) - drive.phi_rf_tilde)
    l_min_per_len = geom.l0 / math.cos(arg_min) / geom.dz
    return geom.dz * math.sqrt(l_min_per_len * geom.c_per_length)


def build_line(geom: LineGeometry, drive: FluxDrive, source: SourceSpec,
               dt: float | None = None, cfl_safety: float = 0.9,
               blowup_factor: float = 1e6) -> Simulator:
    """Initialized simulator with zeroed fields; dt defaults to cfl_safety
    times the CFL bound, an explicit dt beyond the bound is rejected."""
    bound = cfl_bound(geom, drive)
    if dt is None:
        dt = cfl_safety * bound
    elif dt <= 0.0:
        raise ConfigError("dt must be positive")
    elif dt > bound:
        raise ConfigError(
            f"dt = {dt:.3e} s violates the CFL bound {bound:.3e} s")
    return Simulator(geom, drive, source, dt, blowup_factor)


def _probe_branch(geom: LineGeometry, probe: float) -> int:
    if not 0.0 <= probe <= geom.length:
        raise ConfigError(f"probe {probe} m outside the line")
    b = int(round(probe / geom.dz - 0.5))
    return min(max(b, 0), geom.n_cells - 1)


def _binned_power(x: np.ndarray, dt: float, f_targets, half_width: int = 0):
    """Hann-tapered DFT power at the bins nearest each target frequency,
    optionally summed over a small band of bins."""
    n = x.size
    w = np.hanning(n)
    spec = np.fft.rfft(x * w)
    freqs = np.fft.rfftfreq(n, dt)
    scale = 2.0 / np.sum(w)
    out = []
    for f in f_targets:
        b = int(np.argmin(np.abs(freqs - f)))
        lo, hi = max(b - half_width, 0), min(b + half_width, spec.size - 1)
        amp2 = np.abs(spec[lo:hi + 1] * scale) ** 2
        out.append(0.5 * float(np.sum(amp2)))
    return out


def harmonic_spectrum(sim: Simulator, probe: float, window,
                      n_max: int = 6) -> SpectrumReport:
    """Advance the simulator over `window` = (t0, t1), recording the current
    at `probe`, and bin Hann-tapered spectral power at the harmonics of the
    source tone. dBc values are relative to n = 1."""
    t0, t1 = window
    period = 2.0 * math.pi / sim.source.omega
    if t1 - t0 < 8.0 * period:
        raise ConfigError(
            f"window {t1 - t0:.3e} s shorter than 8 source periods")
    if t0 < sim.t:
        raise ConfigError("window starts before the current simulator time")
    b = _probe_branch(sim.geom, probe)
    sim._advance(int(round(t0 / sim.dt)) - sim.t_index)
    n_rec = int(round(t1 / sim.dt)) - sim.t_index
    rec = sim.record_probe([b], n_rec)[:, 0]

    f1 = sim.source.omega / (2.0 * math.pi)
    powers = _binned_power(rec, sim.dt, [n * f1 for n in range(1, n_max + 1)])
    p1 = powers[0]
    if p1 <= 0.0:
        raise NumericalError("no power at the fundamental; cannot form dBc")
    dbc = [10.0 * math.log10(max(p / p1, 1e-300)) for p in powers]
    dbc[0] = 0.0
    return SpectrumReport(
        harmonic_index=list(range(1, n_max + 1)),
        power_dbc=dbc,
        absolute_power=powers,
        probe_position=(b + 0.5) * sim.geom.dz)


def spatial_harmonics(state: LineState, geom: LineGeometry, drive: FluxDrive,
                      source_omega: float, n_max: int = 6) -> SpectrumReport:
    """Spatial-spectrum analogue of harmonic_spectrum, for one snapshot.

    The fundamental wavenumber is predicted from the dc phase velocity,
    kappa_1 = omega / v_dc, and each harmonic bin takes the strongest bin
    within +-2 of the prediction (dispersion and the modulation shift the
    peaks slightly off the rigid comb)."""
    n = geom.n_cells
    w = np.hanning(n)
    spec = np.fft.rfft(state.i * w)
    kappas = 2.0 * math.pi * np.fft.rfftfreq(n, geom.dz)
    l_dc_per_len = geom.l0 / math.cos(drive.phi_dc_tilde) / geom.dz
    v_dc = 1.0 / math.sqrt(l_dc_per_len * geom.c_per_length)
    k1 = source_omega / v_dc
    scale = 2.0 / np.sum(w)
    powers = []
    for h in range(1, n_max + 1):
        b = int(np.argmin(np.abs(kappas - h * k1)))
        lo, hi = max(b - 2, 1), min(b + 2, spec.size - 1)
        band = 0.5 * np.abs(spec[lo:hi + 1] * scale) ** 2
        powers.append(float(np.max(band)))
    p1 = powers[0]
    if p1 <= 0.0:
        raise NumericalError("no spatial power at the fundamental")
    dbc = [10.0 * math.log10(max(p / p1, 1e-300)) for p in powers]
    dbc[0] = 0.0
    return SpectrumReport(
        harmonic_index=list(range(1, n_max + 1)),
        power_dbc=dbc, absolute_power=powers, probe_position=None)


def harmonic_fraction(state: LineState, geom: LineGeometry, drive: FluxDrive,
                      source_omega: float, n_max: int = 6) -> float:
    """Fraction of binned spatial power sitting above the fundamental."""
    rep = spatial_harmonics(state, geom, drive, source_omega, n_max)
    total = sum(rep.absolute_power)
    return sum(rep.absolute_power[1:]) / total if total > 0.0 else 0.0


def harmonic_band_power(state: LineState, geom: LineGeometry,
                        drive: FluxDrive, source_omega: float,
                        n_max: int = 6, half_width: int = 2) -> float:
    """Total spatial power summed over the bands around harmonics 2..n_max.

    Band sums (not per-band maxima) so the value tracks converted energy
    smoothly in time; used for development-rate comparisons."""
    n = geom.n_cells
    w = np.hanning(n)
    spec = np.fft.rfft(state.i * w)
    kappas = 2.0 * math.pi * np.fft.rfftfreq(n, geom.dz)
    l_dc_per_len = geom.l0 / math.cos(drive.phi_dc_tilde) / geom.dz
    v_dc = 1.0 / math.sqrt(l_dc_per_len * geom.c_per_length)
    k1 = source_omega / v_dc
    scale = 2.0 / np.sum(w)
    total = 0.0
    for h in range(2, n_max + 1):
        b = int(np.argmin(np.abs(kappas - h * k1)))
        lo, hi = max(b - half_width, 1), min(b + half_width, spec.size - 1)
        total += 0.5 * float(np.sum(np.abs(spec[lo:hi + 1] * scale) ** 2))
    return total


def isolation_report(geom: LineGeometry, drive: FluxDrive,
                     source_omega: float, harmonics=(1, 2, 3),
                     amplitude: float = 1e-6, n_periods_window: int = 16,
                     probe_offset: int = 8) -> dict[int, float]:
    """Forward/backward transmission asymmetry per harmonic, in dB.

    Two runs: source at the left port with a probe near the right end, then
    the mirror image. Positive values mean forward-favoring nonreciprocity.
    The window is placed after the slower of (transit + ramp) so both runs
    are compared in steady state; band power sums 3 bins around each
    harmonic.
    """
    if amplitude <= 0.0:
        raise ConfigError("isolation needs a nonzero source amplitude")
    period = 2.0 * math.pi / source_omega
    powers = {}
    n = geom.n_cells
    for tag, port in (("fwd", "left"), ("bwd", "right")):
        src = SourceSpec(kind="continuous-wave", omega=source_omega,
                         amplitude=amplitude, port=port)
        sim = build_line(geom, drive, src)
        transit = geom.length / sim.v_dc
        t0 = 1.5 * transit + 3.0 * period
        t1 = t0 + n_periods_window * period
        far = n - probe_offset if port == "left" else probe_offset - 1
        sim._advance(int(round(t0 / sim.dt)))
        n_rec = int(round(t1 / sim.dt)) - sim.t_index
        rec = sim.record_probe([far], n_rec)[:, 0]
        f_targets = [h * source_omega / (2.0 * math.pi) for h in harmonics]
        powers[tag] = _binned_power(rec, sim.dt, f_targets, half_width=1)
    out = {}
    for k, h in enumerate(harmonics):
        pf, pb = powers["fwd"][k], powers["bwd"][k]
        if pf <= 0.0 or pb <= 0.0:
            raise NumericalError(f"no band power at harmonic {h}")
        out[h] = 10.0 * math.log10(pf / pb)
    return out


def wavepacket_metrics(states, geom: LineGeometry,
                       u_floor: float = 1e-30) -> list[WavepacketMetrics]:
    """Centroid, rms width, spectral centroid, and centroid velocity of the
    current-energy profile u = i^2 for each snapshot."""
    z = (np.arange(geom.n_cells) + 0.5) * geom.dz
    out = []
    prev = None
    for st in states:
        u = st.i ** 2
        total = float(np.sum(u))
        if total <= u_floor:
            raise NumericalError(
                f"wavepacket energy {total:.3e} below the floor at "
                f"t = {st.t:.3e} s")
        centroid = float(np.sum(z * u) / total)
        width = math.sqrt(float(np.sum((z - centroid) ** 2 * u) / total))
        mag = np.abs(np.fft.rfft(st.i))[1:]       # kappa > 0 only
        kappas = 2.0 * math.pi * np.fft.rfftfreq(geom.n_cells, geom.dz)[1:]
        sc = float(np.sum(kappas * mag) / np.sum(mag))
        vel = None
        if prev is not None and st.t > prev.t:
            vel = (centroid - prev.centroid) / (st.t - prev.t)
        m = WavepacketMetrics(t=st.t, centroid=centroid, rms_width=width,
                              spectral_centroid=sc, peak_velocity=vel)
        out.append(m)
        prev = m
    return out
