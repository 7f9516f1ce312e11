"""Batch scenario runner: subcommand per experiment, CSV/JSON artifacts.

Every run writes its outputs plus a manifest (config echo, package version,
checksums) into the output directory.  Exit codes: 0 success, 1 config
error, 2 numerical invariant violation.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import copy
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, checks
from . import evolution as ev
from . import response as rs
from . import schwinger as sw
from .lattice import LatticeConfig, build_basis
from .operators import continuity_pair_residual
from .vacua import VacuumSpec

FLOAT_FORMAT = "{:.17e}"

KICK_RECIPES = {
    # config tokens accepted for kick construction recipes
    "density_rate": "density_rate",
    "eq39": "density_rate",
    "continuity_rate": "continuity_rate",
    "eq42": "continuity_rate",
}


class ConfigError(ValueError):
    pass


class InvariantError(RuntimeError):
    pass


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT.format(float(value))
    return str(value)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload: dict):
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, default=float)
        handle.write("\n")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_dir: Path, command: str, config: dict, seed: int,
                    files: list[Path]):
    manifest = {
        "command": command,
        "config": config,
        "package": "diracsea",
        "version": __version__,
        "seed": seed,
        "files": {f.name: _sha256(f) for f in sorted(files)},
    }
    _write_json(out_dir / "manifest.json", manifest)


def _load_config(path: str | None) -> dict:
    if path is None:
        raise ConfigError("--config is required for this subcommand")
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _basis_from(config: dict):
    try:
        lattice = LatticeConfig.from_dict(config["lattice"])
    except KeyError:
        raise ConfigError("config must contain a 'lattice' section")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return build_basis(lattice)


def _vacuum_from(config: dict) -> VacuumSpec:
    try:
        return VacuumSpec.from_dict(config)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid vacuum spec: {exc}") from exc


def _default_dt(basis) -> float:
    return 0.01 * 2.0 * np.pi / basis.max_energy


# ----------------------------------------------------------------- check-basis

def run_check_basis(config: dict, out_dir: Path, seed: int) -> list[Path]:
    basis = _basis_from(config)
    rng = np.random.default_rng(seed)
    report = {
        "orthonormality_max_err": checks.orthonormality_defect(basis),
        "completeness_max_err": checks.completeness_defect(basis),
        "eigenrelation_max_err": checks.eigenrelation_defect(basis),
        "hermiticity_max_err": checks.hermiticity_defect(basis, rng),
        "continuity_pair_max_err": continuity_pair_residual(basis),
    }
    path = out_dir / "check_basis.json"
    _write_json(path, report)
    if max(report.values()) > 1e-12:
        raise InvariantError(
            f"basis invariant exceeded 1e-12: {json.dumps(report)}")
    return [path]


# ------------------------------------------------------------------- schwinger

def run_schwinger(config: dict, out_dir: Path, seed: int) -> list[Path]:
    del seed
    basis = _basis_from(config)
    spec = _vacuum_from(config)
    cfg = basis.config
    if spec.kind == "band":
        kernel = sw.schwinger_band(basis, spec)
        width = spec.band_width
    elif spec.kind == "standard":
        kernel = sw.schwinger_standard(basis)
        width = ""
    else:
        raise ConfigError("schwinger requires vacuum 'standard' or 'band'")
    values = kernel.values
    divergence = sw.divergence_of_kernel(kernel)

    grid = cfg.grid
    rows = []
    for j in range(cfg.site_count):
        for k in range(cfg.site_count):
            rows.append((j, k, grid[j], grid[k],
                         values[j, k].real, values[j, k].imag,
                         divergence[j, k].real, divergence[j, k].imag,
                         spec.kind, cfg.site_count, cfg.mass, cfg.charge,
                         width))
    csv_path = out_dir / "schwinger.csv"
    _write_csv(csv_path, ["j", "k", "x", "y", "re_I", "im_I", "re_divI",
                          "im_divI", "vacuum", "N", "m", "q", "delta_Ew"], rows)

    summary = {
        "re_I_max": float(np.abs(values.real).max()),
        "abs_I_max": float(np.abs(values).max()),
        "div_I_diag_imag": float(np.diag(divergence).imag.min()),
    }
    if spec.kind == "standard":
        closed = sw.divergence_diag_closed_form(basis)
        summary["div_I_diag_imag_closed_form"] = float(closed[0].imag)
        summary["div_paths_rel_err"] = float(
            np.abs(np.diag(divergence) - closed).max() / np.abs(closed[0]))
    else:
        summary["I_diag_abs_max"] = float(np.abs(np.diag(values)).max())
        summary["f2_residual"] = sw.f2_identity_check(basis, spec)
    summary_path = out_dir / "schwinger_summary.json"
    _write_json(summary_path, summary)

    if summary["re_I_max"] > 1e-12:
        raise InvariantError("kernel developed a real part above 1e-12")
    if spec.kind == "standard":
        if cfg.charge != 0 and summary["div_I_diag_imag"] >= 0:
            raise InvariantError("coincident-point divergence lost its sign")
        if summary["div_paths_rel_err"] > 1e-10:
            raise InvariantError("divergence paths disagree beyond 1e-10")
    else:
        if summary["I_diag_abs_max"] > 1e-12:
            raise InvariantError("band kernel nonzero at coincident points")
        if summary["f2_residual"] > 1e-12:
            raise InvariantError("intra-band identity residual above 1e-12")
    return [csv_path, summary_path]


# ---------------------------------------------------------------------- evolve

def _packet_from(config: dict, state):
    packet = config.get("packet")
    if packet is None:
        return state
    try:
        return ev.excite_wavepacket(state, float(packet["p_center"]),
                                    float(packet["sigma"]))
    except KeyError as exc:
        raise ConfigError(f"packet config missing key {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _window_from(config: dict, basis):
    t_start = float(config.get("t_a", 0.0))
    t_stop = float(config.get("t_b", t_start + 10.0 * _default_dt(basis) * 100))
    if t_stop <= t_start:
        raise ConfigError("need t_b > t_a")
    dt = float(config.get("dt", _default_dt(basis)))
    return t_start, t_stop, dt


def _trajectory_files(out_dir: Path, tag: str, traj, potential) -> list[Path]:
    rate_series = ev.rate_identity_series(traj, potential)
    snap_rows = []
    grid = traj.basis.config.grid
    for i, t in enumerate(traj.times):
        for j, x in enumerate(grid):
            snap_rows.append((t, x, traj.density[i, j], traj.current[i, j]))
    run_rows = [
        (t, traj.free_energy[i], rate_series[i],
         float(np.abs(traj.residual[i]).max()))
        for i, t in enumerate(traj.times)
    ]
    snap_path = out_dir / f"{tag}_snapshots.csv"
    run_path = out_dir / f"{tag}_series.csv"
    _write_csv(snap_path, ["t", "x", "rho_e", "J_e"], snap_rows)
    _write_csv(run_path, ["t", "xi0", "rate_residual", "max_L"], run_rows)
    return [snap_path, run_path]


def run_evolve(config: dict, out_dir: Path, seed: int) -> list[Path]:
    del seed
    basis = _basis_from(config)
    spec = _vacuum_from(config)
    t_start, t_stop, dt = _window_from(config, basis)
    state = _packet_from(config, ev.vacuum_state(basis, spec, time=t_start))
    stride = int(config.get("sample_stride", 1))

    kick = config.get("kick")
    if kick is None:
        potential = ev.ZeroPotential(basis.config)
    else:
        recipe = KICK_RECIPES.get(kick.get("recipe", "density_rate"))
        if recipe is None:
            raise ConfigError(f"unknown kick recipe {kick.get('recipe')!r}")
        try:
            strength = float(kick["f"])
        except KeyError as exc:
            raise ConfigError(f"kick config missing key {exc}") from exc
        free_traj, _ = ev.run_trajectory(state, ev.ZeroPotential(basis.config),
                                         t_stop, dt, stride)
        gauge = ev.build_kick_chi(free_traj, recipe, strength, t_start, t_stop)
        potential = ev.PureGaugePotential(gauge)

    traj, final = ev.run_trajectory(state, potential, t_stop, dt, stride)
    if final.gram_defect() > 1e-10:
        raise InvariantError("orbital orthonormality drifted above 1e-10")
    return _trajectory_files(out_dir, "evolve", traj, potential)


# -------------------------------------------------------------- extract-energy

def run_extract_energy(config: dict, out_dir: Path, seed: int) -> list[Path]:
    del seed
    basis = _basis_from(config)
    spec = _vacuum_from(config)
    t_start, t_stop, dt = _window_from(config, basis)
    state = _packet_from(config, ev.vacuum_state(basis, spec, time=t_start))
    if state.orbital_count == len(state.reference):
        raise ConfigError("extract-energy needs a packet on top of the vacuum")
    stride = int(config.get("sample_stride", 1))
    kick = config.get("kick", {})
    recipe = KICK_RECIPES.get(kick.get("recipe", "density_rate"))
    if recipe is None:
        raise ConfigError(f"unknown kick recipe {kick.get('recipe')!r}")
    strengths = [float(f) for f in kick.get(
        "f", [0.0, 0.01, 0.02, 0.03, 0.04])]

    free_traj, _ = ev.run_trajectory(state, ev.ZeroPotential(basis.config),
                                     t_stop, dt, stride)
    i_stop = free_traj.index_of(t_stop)
    rate_profile = free_traj.density_rate[i_stop]
    a = basis.config.spacing
    slope_predicted = -a * float(np.sum(rate_profile**2))
    if abs(slope_predicted) < 1e-14:
        raise InvariantError(
            "density rate vanishes at t_b; the kick has nothing to extract")

    rows = []
    for strength in strengths:
        if strength == 0.0:
            rows.append((0.0, free_traj.free_energy[i_stop],
                         free_traj.free_energy[i_stop],
                         free_traj.free_energy[i_stop], 0.0, 0.0, 0.0))
            continue
        gauge = ev.build_kick_chi(free_traj, recipe, strength, t_start, t_stop)
        report = ev.gauge_pair_experiment(state, gauge, t_start, t_stop, dt,
                                          stride)
        rows.append((strength, report.free_energy_free_tb,
                     report.free_energy_gauge_tb, report.predicted_gauge_tb,
                     report.max_density_deviation,
                     report.max_current_deviation,
                     report.predicted_gauge_tb
                     - report.predicted_gauge_tb_branch2))
    csv_path = out_dir / "extract_energy.csv"
    _write_csv(csv_path, ["f", "xi0_1_tb", "xi0_2_tb", "xi0_2_predicted",
                          "max_rho_dev", "max_J_dev", "prediction_gap"], rows)

    strengths_arr = np.array([r[0] for r in rows])
    energies = np.array([r[2] for r in rows])
    # regress only over the small-f head of the sweep; large strengths leave
    # the linear-response regime by design (the saturation diagnostic)
    small_count = int(config.get("small_f_count", 5))
    order = np.argsort(strengths_arr)
    head = order[:max(2, min(small_count, len(order)))]
    slope_measured = float(np.polyfit(strengths_arr[head], energies[head], 1)[0])
    occ_energies = np.sort(basis.lam * basis.energy)
    floor = float(np.sum(occ_energies[:state.orbital_count])
                  - state.subtractions.xi)
    summary = {
        "slope_measured": slope_measured,
        "slope_predicted": slope_predicted,
        "slope_rel_err": abs(slope_measured - slope_predicted)
                         / abs(slope_predicted),
        "small_f_values": [float(strengths_arr[i]) for i in head],
        "monotone_decreasing_small_f": bool(
            np.all(np.diff(energies[order][:len(head)]) < 0)),
        "free_energy_floor": floor,
        "min_free_energy": float(energies.min()),
    }
    summary_path = out_dir / "extract_energy_summary.json"
    _write_json(summary_path, summary)
    return [csv_path, summary_path]


# -------------------------------------------------------------------- response

def run_response(config: dict, out_dir: Path, seed: int) -> list[Path]:
    del seed
    basis = _basis_from(config)
    spec = _vacuum_from(config)
    if spec.kind == "bare":
        raise ConfigError("response requires a filled-sea or band vacuum")
    chi_cfg = config.get("chi", {"k": 1, "amplitude": 0.3})
    harmonic = int(chi_cfg.get("k", 1))
    amplitude = float(chi_cfg.get("amplitude", 0.3))
    t_start, t_stop, _ = _window_from(config, basis)
    n_times = int(config.get("n_times", 5))
    smearing = config.get("smearing", "fourier")

    cfg = basis.config
    profile = amplitude * np.cos(2.0 * np.pi * harmonic * cfg.grid
                                 / cfg.box_length)
    gauge = ev.GaugeFunction.ramped_profile(cfg, profile, 1.0, t_start, t_stop,
                                            "fixed")
    potential = ev.PureGaugePotential(gauge)
    kernel = rs.vacuum_response_kernel(basis, spec)

    times = np.linspace(t_start, t_stop, n_times + 1)[1:]
    rows = []
    worst = 0.0
    width = spec.band_width if spec.kind == "band" else ""
    for t in times:
        direct = rs.first_order_current(kernel, potential, t, t_start,
                                        smearing=smearing)
        contraction = rs.gauge_variation_response(basis, spec, gauge, t)
        worst = max(worst, float(np.abs(direct - contraction).max()))
        for j, x in enumerate(cfg.grid):
            rows.append((t, x, direct[j], contraction[j], spec.kind,
                         cfg.site_count, width))
    csv_path = out_dir / "response.csv"
    _write_csv(csv_path, ["t", "x", "J1_direct", "J1_gauge_variation",
                          "vacuum", "N", "delta_Ew"], rows)
    summary_path = out_dir / "response_summary.json"
    _write_json(summary_path, {"max_path_difference": worst,
                               "smearing": smearing})
    return [csv_path, summary_path]


# ---------------------------------------------------------------------- verify

def run_verify(config: dict, out_dir: Path, seed: int) -> list[Path]:
    del config
    results = checks.run_verification(seed=seed)
    lines = [r.line() for r in results]
    for line in lines:
        print(line)
    path = out_dir / "verify.json"
    _write_json(path, {
        "checks": [
            {"name": r.name, "value": r.value, "tolerance": r.tolerance,
             "passed": r.passed}
            for r in results
        ]
    })
    failed = [r for r in results if not r.passed]
    if failed:
        raise InvariantError(f"{len(failed)} verification checks failed")
    return [path]


# ----------------------------------------------------------------------- sweep

RUNNERS = {}


def _set_by_path(config: dict, dotted: str, value):
    keys = dotted.split(".")
    node = config
    for key in keys[:-1]:
        node = node.setdefault(key, {})
    node[keys[-1]] = value


def _sweep_point(args):
    experiment, config, out_dir, seed = args
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    files = RUNNERS[experiment](config, out_path, seed)
    _write_manifest(out_path, experiment, config, seed, files)
    return str(out_path)


def run_sweep(config: dict, out_dir: Path, seed: int, jobs: int) -> list[Path]:
    try:
        sweep = config["sweep"]
        experiment = sweep["experiment"]
        parameter = sweep["parameter"]
        values = sweep["values"]
    except KeyError as exc:
        raise ConfigError(f"sweep config missing key {exc}") from exc
    if experiment not in RUNNERS or experiment == "sweep":
        raise ConfigError(f"cannot sweep unknown experiment {experiment!r}")

    tasks = []
    for i, value in enumerate(values):
        point = copy.deepcopy(config)
        point.pop("sweep", None)
        _set_by_path(point, parameter, value)
        point_dir = out_dir / f"point_{i:03d}"
        tasks.append((experiment, point, str(point_dir), seed))

    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_sweep_point, tasks))
    else:
        for task in tasks:
            _sweep_point(task)

    index_path = out_dir / "sweep_index.json"
    _write_json(index_path, {
        "experiment": experiment,
        "parameter": parameter,
        "values": list(values),
        "points": [t[2] for t in tasks],
    })
    return [index_path]


RUNNERS.update({
    "check-basis": run_check_basis,
    "schwinger": run_schwinger,
    "evolve": run_evolve,
    "extract-energy": run_extract_energy,
    "response": run_response,
    "verify": run_verify,
})


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diracsea",
        description="Batch experiments on Dirac sea vacua: mode-basis checks, "
                    "commutator kernels, gauge-kick evolution, linear response.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("check-basis", "verify mode-basis identities for a lattice config"),
        ("schwinger", "emit the commutator kernel and its divergence as CSV"),
        ("evolve", "run one evolution branch and emit observables"),
        ("extract-energy", "run the gauge-kick energy-extraction sweep"),
        ("response", "compare the two first-order response paths"),
        ("verify", "run the oracle verification suite"),
        ("sweep", "run any experiment over a parameter grid"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="JSON scenario config")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel sweep points")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized test vectors")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = Path(args.out)
    try:
        config = {} if args.command == "verify" and args.config is None \
            else _load_config(args.config)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "sweep":
            files = run_sweep(config, out_dir, args.seed, args.jobs)
        else:
            files = RUNNERS[args.command](config, out_dir, args.seed)
        _write_manifest(out_dir, args.command, config, args.seed, files)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "exit_code": 1}), file=sys.stderr)
        return 1
    except InvariantError as exc:
        print(json.dumps({"error": str(exc), "exit_code": 2}), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
