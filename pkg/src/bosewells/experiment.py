"""Experiment orchestration: prepare the initial state, run the
requested back-ends against it, and write a reproducible artifact set.

Every run emits per-backend observable CSVs, a combined comparison CSV,
a metrics summary, and a manifest holding the full configuration text,
seeds, and realized preparation values, sufficient to reproduce the
outputs byte for byte (``bosewells run manifest.json``).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, classical, exact, hk, metrics, model, twa
from .config import ExperimentConfig, time_grid

FMT = "%.17g"


class NumericFailure(RuntimeError):
    """A backend failed numerically; partial outputs were kept."""


def fmt(x: float) -> str:
    return FMT % (x,)


def output_root() -> Path:
    return Path(os.environ.get("BOSEWELLS_OUTPUT_ROOT", "outputs"))


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = len(columns[0])
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for k in range(rows):
            f.write(",".join(fmt(float(c[k])) for c in columns) + "\n")


@dataclass
class Prepared:
    """Initial state shared by all back-ends of one experiment."""

    basis: object
    h_evolve: np.ndarray
    psi0: exact.QuantumState
    init: twa.GaussianInitialState
    delta: float
    realized: dict[str, float] = field(default_factory=dict)


def prepare(config: ExperimentConfig) -> Prepared:
    params = config.model
    basis = model.build_fock_basis(params.modes, params.n_total)
    if config.delta is not None:
        delta = config.delta
    else:
        delta = exact.tilt_for_target_imbalance(params, basis,
                                                config.j_target)
    h_tilt = model.build_hamiltonian(params.with_tilt(delta), basis)
    psi0, e0 = exact.ground_state(h_tilt, basis)
    init = twa.fit_gaussian_to_ground_state(psi0)
    realized = {
        "delta": delta,
        "ground_state_energy": e0,
        "fit_residual": init.fit_residual,
        "omega_p": model.plasma_frequency(params),
        "regime": model.classify_regime(params),
        "lambda": params.lam,
    }
    if params.modes == 2:
        realized["j0_realized"] = exact.imbalance_expectation(psi0)
    else:
        for w in (1, 2, 3):
            realized[f"n{w}_realized"] = exact.occupation_expectation(psi0, w)
    for k, g in enumerate(init.gamma):
        realized[f"gamma_{k}"] = float(g)
    return Prepared(basis=basis,
                    h_evolve=model.build_hamiltonian(params, basis),
                    psi0=psi0, init=init, delta=delta, realized=realized)


def observable_name(params: model.ModelParams) -> str:
    return "mean_imbalance" if params.modes == 2 else "mean_n1"


def run_experiment(config: ExperimentConfig, out_dir: Path | None = None
                   ) -> tuple[Path, dict]:
    """Execute all requested back-ends; returns (directory, manifest)."""
    params = config.model
    times = time_grid(config)
    out = out_dir if out_dir is not None else output_root() / config.output
    out.mkdir(parents=True, exist_ok=True)

    manifest: dict = {
        "package": "bosewells",
        "version": __version__,
        "config_text": config.config_text,
        "backends": {},
        "files": [],
        "flags": [],
    }
    prep = prepare(config)
    manifest["realized"] = {k: (v if isinstance(v, str) else float(v))
                            for k, v in prep.realized.items()}
    omega_p = prep.realized["omega_p"]
    t_plasma = times * omega_p / (2 * math.pi)
    obs_name = observable_name(params)

    series: dict[str, np.ndarray] = {}
    exit_code = 0

    def emit(name: str, header: list[str], cols: list[np.ndarray]) -> None:
        write_csv(out / name, header, cols)
        manifest["files"].append(name)

    try:
        if "exact" in config.backends:
            amps = exact.evolve(prep.h_evolve, prep.psi0, times)
            if params.modes == 2:
                obs = exact.imbalance_series(prep.basis, amps)
            else:
                obs = exact.occupation_series(prep.basis, amps, 1)
            series["exact"] = obs
            emit("exact.csv", ["t", "t_plasma_periods", obs_name],
                 [times, t_plasma, obs])
            manifest["backends"]["exact"] = {"status": "ok"}
            if config.grids_wavefunction:
                _emit_wavefunction_exact(config, prep, times, amps, emit)

        if "classical" in config.backends:
            res = twa.run_mean_field(params, prep.init, times)
            series["classical"] = res.mean_observable
            emit("classical.csv", ["t", "t_plasma_periods", obs_name],
                 [times, t_plasma, res.mean_observable])
            manifest["backends"]["classical"] = {
                "status": "ok", "escaped_fraction": res.escaped_fraction}

        if "twa" in config.backends:
            res = twa.run_twa(params, prep.init, times, config.twa_samples,
                              config.twa_seed, workers=config.workers)
            series["twa"] = res.mean_observable
            emit("twa.csv",
                 ["t", "t_plasma_periods", obs_name, "stderr", "alive_count"],
                 [times, t_plasma, res.mean_observable, res.stderr,
                  res.alive_count.astype(float)])
            manifest["backends"]["twa"] = {
                "status": "flagged" if res.flagged else "ok",
                "samples": config.twa_samples, "seed": config.twa_seed,
                "escaped_fraction": res.escaped_fraction}
            if res.flagged:
                manifest["flags"].append(
                    f"twa: escaped fraction {res.escaped_fraction:.3f} "
                    "exceeds 0.05")
                exit_code = 4

        if "hk" in config.backends:
            gamma = None
            if config.hk_gamma_override is not None:
                gamma = np.full(prep.init.dof, config.hk_gamma_override)
            hk_config = hk.HKConfig(
                sample_count=config.hk_samples, seed=config.hk_seed,
                gamma=gamma, prefactor_cutoff=config.hk_prefactor_cutoff,
                renormalize=config.hk_renormalize, workers=config.workers)
            wf, res = hk.run_hk(params, prep.init, times, hk_config)
            series["hk"] = res.mean_observable
            emit("hk.csv",
                 ["t", "t_plasma_periods", obs_name, "raw_norm",
                  "filtered_fraction"],
                 [times, t_plasma, res.mean_observable, wf.raw_norm,
                  wf.filtered_fraction])
            manifest["backends"]["hk"] = {
                "status": "flagged" if wf.flagged else "ok",
                "samples": config.hk_samples, "seed": config.hk_seed,
                "escaped_fraction": wf.escaped_fraction,
                "max_filtered_fraction": float(np.max(wf.filtered_fraction)),
                "raw_norm_min": float(np.min(wf.raw_norm)),
                "raw_norm_max": float(np.max(wf.raw_norm))}
            if wf.flagged:
                manifest["flags"].append(
                    "hk: filtered fraction reached "
                    f"{np.max(wf.filtered_fraction):.3f} (>= 0.1); result "
                    "unreliable")
                exit_code = 4
            if config.grids_wavefunction:
                _emit_wavefunction_hk(config, times, wf, emit)

        if config.grids_wigner:
            _emit_wigner(config, prep, emit, manifest)
    except (hk.NormCollapseError, hk.BranchAmbiguityError,
            exact.EigensolverError) as err:
        manifest["error"] = str(err)
        _finish(out, manifest, config, series, times, t_plasma, obs_name)
        raise NumericFailure(str(err)) from err

    _finish(out, manifest, config, series, times, t_plasma, obs_name)
    manifest["exit_code"] = exit_code
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
    return out, manifest


def _finish(out, manifest, config, series, times, t_plasma, obs_name):
    if series:
        names = [b for b in ("exact", "classical", "twa", "hk")
                 if b in series]
        write_csv(out / "comparison.csv",
                  ["t", "t_plasma_periods"] + names,
                  [times, t_plasma] + [series[b] for b in names])
        manifest["files"].append("comparison.csv")
    if "exact" in series and len(series) > 1:
        summary = {}
        for b, obs in series.items():
            if b == "exact":
                continue
            summary[b] = metrics.compare_metrics(
                times, obs, series["exact"], window=config.metrics_window)
        summary["exact"] = {"dominant_frequency":
                            metrics.dominant_frequency(times,
                                                       series["exact"])}
        with open(out / "metrics.json", "w") as f:
            json.dump(summary, f, indent=1, sort_keys=True)
        manifest["files"].append("metrics.json")


def _emit_wavefunction_exact(config, prep, times, amps, emit):
    stride = config.grids_stride
    occ = prep.basis.occupations()
    prob = np.abs(amps) ** 2
    if config.model.modes == 2:
        jvals = prep.basis.imbalance_values()
        rows_t, rows_j, rows_p, rows_re, rows_im = [], [], [], [], []
        for k in range(0, len(times), stride):
            rows_t.append(np.full(len(jvals), times[k]))
            rows_j.append(jvals)
            rows_p.append(prob[k])
            rows_re.append(amps[k].real)
            rows_im.append(amps[k].imag)
        emit("wavefunction_exact.csv", ["t", "j", "prob", "re", "im"],
             [np.concatenate(c) for c in
              (rows_t, rows_j, rows_p, rows_re, rows_im)])
    else:
        n1, n2 = occ[:, 0].astype(float), occ[:, 1].astype(float)
        cols = [[], [], [], [], [], []]
        for k in range(0, len(times), stride):
            cols[0].append(np.full(len(n1), times[k]))
            cols[1].append(n1)
            cols[2].append(n2)
            cols[3].append(prob[k])
            cols[4].append(amps[k].real)
            cols[5].append(amps[k].imag)
        emit("wavefunction_exact.csv", ["t", "n1", "n2", "prob", "re", "im"],
             [np.concatenate(c) for c in cols])


def _emit_wavefunction_hk(config, times, wf, emit):
    stride = config.grids_stride
    prob = wf.probability()
    if config.model.modes == 2:
        grid = wf.grids[0]
        cols = [[], [], [], [], []]
        for k in range(0, len(times), stride):
            cols[0].append(np.full(len(grid), times[k]))
            cols[1].append(grid)
            cols[2].append(prob[k])
            cols[3].append(wf.psi[k].real)
            cols[4].append(wf.psi[k].imag)
        emit("wavefunction_hk.csv", ["t", "j", "prob", "re", "im"],
             [np.concatenate(c) for c in cols])
    else:
        g1, g2 = wf.grids
        n1m, n2m = np.meshgrid(g1, g2, indexing="ij")
        keep = (n1m + n2m) <= config.model.n_total
        cols = [[], [], [], [], [], []]
        for k in range(0, len(times), stride):
            cols[0].append(np.full(int(keep.sum()), times[k]))
            cols[1].append(n1m[keep])
            cols[2].append(n2m[keep])
            cols[3].append(prob[k][keep])
            cols[4].append(wf.psi[k].real[keep])
            cols[5].append(wf.psi[k].imag[keep])
        emit("wavefunction_hk.csv", ["t", "n1", "n2", "prob", "re", "im"],
             [np.concatenate(c) for c in cols])


def _emit_wigner(config, prep, emit, manifest):
    """Initial-state Wigner density on a (phi, j) mesh with the classical
    energy surface, for phase-space portraits."""
    params = config.model
    n = params.n_total
    phis = np.linspace(-math.pi, math.pi, 201)
    js = np.linspace(-n / 2 + 1e-3 * n, n / 2 - 1e-3 * n, 201)
    pm, jm = np.meshgrid(phis, js, indexing="ij")
    w = twa.wigner_density(prep.init, pm, jm)
    h = np.empty_like(pm)
    for i in range(pm.shape[0]):
        for k in range(pm.shape[1]):
            h[i, k] = classical.hamiltonian_value(
                params, classical.PhaseSpacePoint([pm[i, k]], [jm[i, k]]))
    emit("wigner.csv", ["phi", "j", "w", "h"],
         [pm.ravel(), jm.ravel(), w.ravel(), h.ravel()])
    manifest["realized"]["h_separatrix"] = classical.separatrix_energy(params)
