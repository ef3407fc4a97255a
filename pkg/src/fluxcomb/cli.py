"""Command-line front end.

    fluxcomb <scenario> [--config FILE] [--set key.path=value ...]
                        [--out DIR] [--seed N]

Every scenario starts from the packaged defaults (data/defaults.json),
deep-merges the user config over them (unknown keys are rejected, with
their dotted path), applies --set overrides, and writes CSV tables plus
a manifest.json with sha256 checksums into --out.

Exit codes: 0 success, 1 at least one sweep point failed, 2 bad
configuration, 3 numerical failure, 4 filesystem trouble.
"""

import argparse
import importlib.resources
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import budget, io, line, nonmarkov, transmon
from .backend import BACKEND
from .errors import ConfigError, NumericalError, SimulationError

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------- config

def load_defaults() -> dict:
    ref = importlib.resources.files("fluxcomb") / "data" / "defaults.json"
    return json.loads(ref.read_text())


def merge_config(base: dict, user: dict, path: str = "") -> dict:
    """Deep merge, rejecting keys that do not exist in the defaults."""
    out = dict(base)
    for key, value in user.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {here!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{here!r} must be an object")
            out[key] = merge_config(base[key], value, here)
        else:
            if isinstance(value, dict):
                raise ConfigError(f"{here!r} does not take an object")
            out[key] = value
    return out


def apply_override(config: dict, assignment: str):
    if "=" not in assignment:
        raise ConfigError(f"--set needs key.path=value, got {assignment!r}")
    dotted, raw = assignment.split("=", 1)
    keys = dotted.split(".")
    node = config
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"unknown config key {dotted!r}")
        node = node[key]
    leaf = keys[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(f"unknown config key {dotted!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    if isinstance(node[leaf], dict):
        raise ConfigError(f"{dotted!r} is an object; set its fields")
    node[leaf] = value


def resolve_config(scenario: str, config_path, overrides, seed) -> dict:
    defaults = load_defaults()
    config = defaults[scenario]
    if config_path is not None:
        try:
            with open(config_path) as fh:
                user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        config = merge_config(config, user)
    for assignment in overrides or ():
        apply_override(config, assignment)
    if seed is not None:
        config["seed"] = seed
    return config


def _grid(spec: dict, what: str) -> np.ndarray:
    n = int(spec["n"])
    if n < 1:
        raise ConfigError(f"{what} grid needs n >= 1")
    return np.linspace(float(spec["start"]), float(spec["stop"]), n)


# ------------------------------------------------------------- scenarios

def run_line_sim(config: dict, out_dir: Path):
    geom = line.LineGeometry(
        n_cells=int(config["geometry"]["n_cells"]),
        dz=float(config["geometry"]["dz_m"]),
        c_per_length=float(config["geometry"]["c_per_length_f_per_m"]),
        i0=float(config["geometry"]["i0_amps"]))
    dcfg = config["drive"]
    drive = line.FluxDrive(
        phi_dc_tilde=float(dcfg["phi_dc"]),
        phi_rf_tilde=float(dcfg["phi_rf"]),
        kappa_s=TWO_PI * float(dcfg["spatial_periods"]) / geom.length,
        omega_s=TWO_PI * float(dcfg["modulation_freq_hz"]),
        phase=float(dcfg["phase_rad"]))
    scfg = config["source"]
    source = line.SourceSpec(
        kind=scfg["kind"],
        omega=TWO_PI * float(scfg["freq_hz"]),
        amplitude=float(scfg["amplitude_amps"]),
        t_center=float(scfg["t_center_s"]),
        t_width=float(scfg["t_width_s"]),
        port=scfg["port"],
        ramp_periods=float(scfg["ramp_periods"]))
    rcfg = config["run"]
    sim = line.build_line(geom, drive, source,
                          cfl_safety=float(rcfg["cfl_safety"]),
                          blowup_factor=float(rcfg["blowup_factor"]))

    spectrum_mode = rcfg["spectrum"]
    if spectrum_mode not in ("spatial", "temporal", "none"):
        raise ConfigError(f"unknown spectrum mode {spectrum_mode!r}")
    snap_times = [float(t) for t in rcfg["snapshot_times_s"]]
    t_end = float(rcfg["t_end_s"])
    states = sim.run_until(t_end, snap_times)
    final = sim.state()

    files = []
    z_mid = (np.arange(geom.n_cells) + 0.5) * geom.dz
    for k, st in enumerate(states):
        v_mid = 0.5 * (st.v[:-1] + st.v[1:])
        rows = zip(z_mid, v_mid, st.i)
        files.append(io.write_csv(out_dir / f"snapshot_{k:03d}.csv",
                                  "z_m,v_volts,i_amps", rows))

    n_max = int(rcfg["n_harmonics"])
    f_src = source.omega / TWO_PI
    if spectrum_mode == "spatial":
        report = line.spatial_harmonics(final, geom, drive, source.omega,
                                        n_max=n_max)
    elif spectrum_mode == "temporal":
        report = line.harmonic_spectrum(
            sim, float(rcfg["probe_m"]),
            (float(rcfg["window_start_s"]), float(rcfg["window_end_s"])),
            n_max=n_max)
    if spectrum_mode != "none":
        rows = ((n, n * f_src, dbc, pw) for n, dbc, pw in
                zip(report.harmonic_index, report.power_dbc,
                    report.absolute_power))
        files.append(io.write_csv(out_dir / "spectrum.csv",
                                  "n,freq_hz,power_dbc,power_abs", rows))

    if rcfg["wavepacket"]:
        if len(states) < 2:
            raise ConfigError("wavepacket metrics need >= 2 snapshots")
        metrics = line.wavepacket_metrics(states, geom)
        rows = ((m.t, m.centroid, m.rms_width, m.spectral_centroid,
                 m.peak_velocity) for m in metrics[1:])
        files.append(io.write_csv(
            out_dir / "wavepacket.csv",
            "t_s,centroid_m,rms_width_m,spectral_centroid_radpm,"
            "peak_velocity_mps", rows))
    return files, 0


def run_flux_sweep(config: dict, out_dir: Path):
    omega_m = TWO_PI * float(config["modulation_freq_hz"])
    idx = tuple(int(n) for n in config["harmonic_indices"])
    array = budget.QubitArraySpec(n_qubits=len(idx), omega_m=omega_m,
                                  harmonic_indices=idx)
    qubits = transmon.default_comb_qubits(omega_m, idx,
                                          ec=float(config["ec_hz"]))
    dc_grid = _grid(config["phi_dc"], "phi_dc")
    rf_grid = _grid(config["phi_rf"], "phi_rf")
    n_workers = int(config["n_workers"])
    if n_workers < 1:
        raise ConfigError("n_workers must be >= 1")

    def point(k):
        amap = transmon.addressing_map(array, dc_grid[k:k + 1], rf_grid,
                                       qubits=qubits)
        if not np.all(np.isfinite(amap.score)):
            raise NumericalError(f"non-finite score at phi_dc index {k}")
        return amap.score[0]

    results = {}
    failures = 0
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        futures = {pool.submit(point, k): k for k in range(dc_grid.size)}
        for fut, k in futures.items():
            try:
                results[k] = fut.result()
            except SimulationError as exc:
                failures += 1
                print(f"warning: phi_dc = {dc_grid[k]:.4f} failed: {exc}",
                      file=sys.stderr)

    rows = []
    for k in sorted(results):
        score = results[k]
        for j, rf in enumerate(rf_grid):
            for q in range(len(idx)):
                rows.append((dc_grid[k], rf, q, score[j, q]))
    files = [io.write_csv(out_dir / "addressing_map.csv",
                          "phi_dc,phi_rf,qubit_index,score", rows)]
    return files, failures


def run_addressing(config: dict, out_dir: Path):
    omega_m = TWO_PI * float(config["modulation_freq_hz"])
    bias = float(config["bias_phi_dc"])
    spec = transmon.default_comb_qubits(
        omega_m, (int(config["harmonic_index"]),),
        ec=float(config["ec_hz"]), bias_targets=[bias])[0]
    ej = transmon.ej_time_averaged(spec.ej_max, bias,
                                   float(config["phi_rf"]))
    spectrum = transmon.diagonalize(spec, ej,
                                    n_levels=int(config["n_levels"]))
    rows = ((k, f) for k, f in enumerate(spectrum.levels))
    files = [io.write_csv(out_dir / "levels.csv", "level,freq_hz", rows)]
    return files, 0


def _array_from_config(acfg: dict) -> budget.QubitArraySpec:
    return budget.QubitArraySpec(
        n_qubits=int(acfg["n_qubits"]),
        omega_m=TWO_PI * float(acfg["modulation_freq_hz"]),
        t1_intrinsic=float(acfg["t1_intrinsic_s"]),
        t2_intrinsic=float(acfg["t2_intrinsic_s"]),
        g_coupling=TWO_PI * float(acfg["g_coupling_hz"]),
        kappa_bus=TWO_PI * float(acfg["kappa_bus_hz"]),
        t_gate=float(acfg["t_gate_s"]),
        lambda_c=float(acfg["lambda_c_m"]))


def _bus_model(kind: str, omega_m: float) -> budget.BusIsolationModel:
    if kind == "reciprocal":
        return budget.reciprocal_bus(omega_m)
    if kind == "nonreciprocal":
        return budget.nonreciprocal_bus(omega_m)
    raise ConfigError(f"unknown bus model {kind!r}")


def run_error_budget(config: dict, out_dir: Path):
    array = _array_from_config(config["array"])
    model = _bus_model(config["bus"], array.omega_m)
    result = budget.full_budget(array, model)
    rows = ((q, result.omega[q] / array.omega_m, result.t1_eff[q],
             result.t2_eff[q], result.e_relax[q], result.e_dephase[q],
             result.e_crosstalk[q], result.e_total[q])
            for q in range(array.n_qubits))
    files = [io.write_csv(
        out_dir / "budget.csv",
        "qubit,omega_over_omega_m,t1_s,t2_s,e_relax,e_dephase,"
        "e_crosstalk,e_total", rows)]
    return files, 0


def run_scalability(config: dict, out_dir: Path):
    array = _array_from_config(config["array"])
    n_min, n_max = int(config["n_min"]), int(config["n_max"])
    if not 1 <= n_min <= n_max:
        raise ConfigError("need 1 <= n_min <= n_max")
    n_range = range(n_min, n_max + 1)
    rows = []
    for kind in config["models"]:
        model = _bus_model(kind, array.omega_m)
        worst = budget.scalability_sweep(array, model, n_range)
        rows.extend((n, w, kind) for n, w in zip(n_range, worst))
    files = [io.write_csv(out_dir / "scalability.csv",
                          "n,worst_case_error,model", rows)]
    return files, 0


def run_nonmarkov(config: dict, out_dir: Path):
    kcfg = config["kernel"]
    gm = TWO_PI * float(kcfg["gamma_memory_hz"])
    ratio = float(kcfg["amplitude_over_gamma_sq"])
    markov_ratio = float(kcfg["markovian_ratio"])
    kernel = nonmarkov.KernelSpec(
        kind="exponential-kernel", amplitude_a=ratio * gm * gm,
        gamma_memory=gm, markovian_gamma=markov_ratio * gm)
    n_points = int(config["n_points"])
    if n_points < 5:
        raise ConfigError("n_points must be >= 5")
    t = np.linspace(0.0, float(config["t_end_s"]), n_points)
    state = nonmarkov.excited_state()
    p = nonmarkov.evolve_kernel(state, kernel, t)
    files = [io.write_csv(out_dir / "population.csv", "t_s,rho00",
                          zip(t, p))]
    if config["compare_markovian"]:
        p_m = nonmarkov.evolve_markovian(state, kernel.markovian_gamma, t)
        files.append(io.write_csv(out_dir / "population_markovian.csv",
                                  "t_s,rho00", zip(t, p_m)))
    window = int(config["smoothing_window"]) or None
    g = nonmarkov.gamma_eff(t, np.maximum(p, 1e-300),
                            smoothing_window=window)
    files.append(io.write_csv(out_dir / "gamma_eff.csv",
                              "t_s,gamma_eff_hz", zip(t, g)))
    return files, 0


def _noise_model(kind: str, cfg: dict) -> nonmarkov.NoiseModel:
    common = dict(amplitude=float(cfg["amplitude_rad2_per_s2"]),
                  f_min=float(cfg["f_min_hz"]),
                  f_max=float(cfg["f_max_hz"]),
                  n_components=int(cfg["n_components"]))
    if kind == "filtered":
        common.update(filter_center=float(cfg["filter_center_hz"]),
                      filter_depth=float(cfg["filter_depth_db"]))
    return nonmarkov.NoiseModel(kind=kind, **common)


def run_spectroscopy(config: dict, out_dir: Path):
    seed = int(config["seed"])
    n_real = int(config["n_realizations"])
    tcfg = config["tau"]
    n_tau = int(tcfg["n"])
    if n_tau < 2:
        raise ConfigError("tau grid needs n >= 2")
    tau = np.geomspace(float(tcfg["start_s"]), float(tcfg["stop_s"]),
                       n_tau)
    m_1f = _noise_model("one-over-f", config["one_over_f"])
    m_filt = _noise_model("filtered", config["filtered"])

    files = [
        io.write_csv(out_dir / "ramsey.csv", "tau_s,contrast",
                     zip(tau, nonmarkov.ramsey(m_1f, tau, n_real, seed))),
        io.write_csv(out_dir / "echo_one_over_f.csv", "tau_s,echo",
                     zip(tau, nonmarkov.hahn_echo(m_1f, tau, n_real,
                                                  seed))),
        io.write_csv(out_dir / "echo_filtered.csv", "tau_s,echo",
                     zip(tau, nonmarkov.hahn_echo(m_filt, tau, n_real,
                                                  seed))),
    ]

    pcfg = config["spectrum"]
    dt, dur = float(pcfg["dt_s"]), float(pcfg["duration_s"])
    psa = None
    for k in range(int(pcfg["n_avg"])):
        x = nonmarkov.synthesize_noise(m_1f, dur, dt, seed=seed + k)
        f = np.fft.rfftfreq(x.size, dt)
        pw = np.abs(np.fft.rfft(x - x.mean())) ** 2 * dt / x.size
        psa = pw if psa is None else psa + pw
    psa /= int(pcfg["n_avg"])
    files.append(io.write_csv(out_dir / "spectrum.csv", "f_hz,s_omega",
                              zip(f[1:], psa[1:])))
    return files, 0


SCENARIOS = {
    "line-sim": run_line_sim,
    "flux-sweep": run_flux_sweep,
    "addressing": run_addressing,
    "error-budget": run_error_budget,
    "scalability": run_scalability,
    "nonmarkov": run_nonmarkov,
    "spectroscopy": run_spectroscopy,
}


# ------------------------------------------------------------------ main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxcomb",
        description="Space-time-modulated line and frequency-comb qubit "
                    "simulations")
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None,
                       help="JSON config merged over the defaults")
        p.add_argument("--set", dest="overrides", action="append",
                       metavar="KEY.PATH=VALUE",
                       help="override a single config entry")
        p.add_argument("--out", type=Path, default=Path("."),
                       help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args.scenario, args.config,
                                args.overrides, args.seed)
        out_dir = args.out
        out_dir.mkdir(parents=True, exist_ok=True)
        files, failures = SCENARIOS[args.scenario](config, out_dir)
        manifest = io.write_manifest(out_dir, args.scenario, config,
                                     config.get("seed"), files, BACKEND)
        for path in [*files, manifest]:
            print(f"wrote {path}")
        if failures:
            print(f"warning: {failures} sweep point(s) failed",
                  file=sys.stderr)
            return 1
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"filesystem error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
