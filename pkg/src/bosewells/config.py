"""Experiment configuration: INI-style files with typed sections.

The grammar is flat ``key = value`` entries under the sections shown by
``bosewells dump-config-schema``.  Every stochastic backend requires an
explicit seed; there are no nondeterministic defaults.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .model import ModelParams, ParameterError

BACKENDS = ("exact", "classical", "twa", "hk")

PRESET_NAMES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


#: key -> (type, default, help); defaults of None mean required (or
#: conditionally required, see the parser).
SCHEMA: dict[str, dict[str, tuple[str, str | None, str]]] = {
    "model": {
        "modes": ("int", None, "number of wells, 2 or 3"),
        "n_total": ("int", None, "total particle number N"),
        "tunneling": ("float", None, "hopping amplitude T (energy units)"),
        "interaction": ("float", "0.0", "on-site interaction U"),
    },
    "preparation": {
        "j_target": ("float", None,
                     "double well only: tilt is solved so the ground state "
                     "has <j> = j_target"),
        "delta": ("float", None,
                  "explicit preparation tilt, applied as delta (n1 - n2)"),
    },
    "time": {
        "t_max": ("float", None, "window length in raw 1/energy units"),
        "t_max_plasma_periods": ("float", None,
                                 "window length in plasma periods "
                                 "2 pi / (2 T sqrt(1 + Lambda))"),
        "num_points": ("int", None, "output grid size (includes t = 0)"),
    },
    "run": {
        "backends": ("str", None,
                     "comma list from: exact, classical, twa, hk"),
        "output": ("str", None, "output directory name (default: config "
                                "file stem) under the output root"),
        "workers": ("int", "1", "worker processes for trajectory ensembles"),
    },
    "twa": {
        "samples": ("int", None, "Wigner sample count"),
        "seed": ("int", None, "RNG seed (required when twa runs)"),
    },
    "hk": {
        "samples": ("int", None, "trajectory count"),
        "seed": ("int", None, "RNG seed (required when hk runs)"),
        "gamma_override": ("float", None,
                           "propagator width override (default: fitted "
                           "initial-state width)"),
        "prefactor_cutoff": ("float", "1000.0",
                             "drop a trajectory once |R| exceeds this"),
        "renormalize": ("bool", "true",
                        "rescale each time slice to unit norm"),
    },
    "grids": {
        "wavefunction": ("bool", "false",
                         "emit wavefunction grid files for exact and hk"),
        "stride": ("int", "10", "time stride of wavefunction grid files"),
        "wigner": ("bool", "false",
                   "emit the initial-state Wigner phase-space grid "
                   "(double well only)"),
    },
    "metrics": {
        "window_start": ("float", None, "metrics window start (raw units)"),
        "window_end": ("float", None, "metrics window end (raw units)"),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelParams
    j_target: float | None
    delta: float | None
    t_max: float | None
    t_max_plasma_periods: float | None
    num_points: int
    backends: tuple[str, ...]
    output: str
    workers: int
    twa_samples: int | None
    twa_seed: int | None
    hk_samples: int | None
    hk_seed: int | None
    hk_gamma_override: float | None
    hk_prefactor_cutoff: float
    hk_renormalize: bool
    grids_wavefunction: bool
    grids_stride: int
    grids_wigner: bool
    metrics_window: tuple[float, float] | None
    config_text: str = field(repr=False, default="")


def _get(parser, section, key):
    kind, default, _ = SCHEMA[section][key]
    if parser.has_option(section, key):
        raw = parser.get(section, key).strip()
        if raw == "":
            raw = default
    else:
        raw = default
    if raw is None:
        return None
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "yes", "1", "on"):
                return True
            if raw.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} "
                          f"as {kind}") from exc


def parse_config(text: str, default_output: str = "run") -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from exc
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
    for required_section in ("model", "time", "run"):
        if not parser.has_section(required_section):
            raise ConfigError(f"missing section [{required_section}]")

    try:
        model = ModelParams(
            modes=_get(parser, "model", "modes"),
            n_total=_get(parser, "model", "n_total"),
            tunneling=_get(parser, "model", "tunneling"),
            interaction=_get(parser, "model", "interaction"))
    except (ParameterError, TypeError) as exc:
        raise ConfigError(f"[model]: {exc}") from exc

    j_target = _get(parser, "preparation", "j_target") \
        if parser.has_section("preparation") else None
    delta = _get(parser, "preparation", "delta") \
        if parser.has_section("preparation") else None
    if j_target is None and delta is None:
        raise ConfigError("[preparation] needs j_target or delta")
    if j_target is not None and delta is not None:
        raise ConfigError("[preparation] j_target and delta are exclusive")
    if j_target is not None and model.modes != 2:
        raise ConfigError("[preparation] j_target requires modes = 2")

    t_max = _get(parser, "time", "t_max")
    t_per = _get(parser, "time", "t_max_plasma_periods")
    if (t_max is None) == (t_per is None):
        raise ConfigError("[time] needs exactly one of t_max / "
                          "t_max_plasma_periods")
    num_points = _get(parser, "time", "num_points")
    if num_points is None or num_points < 2:
        raise ConfigError("[time] num_points must be >= 2")

    backends_raw = _get(parser, "run", "backends")
    if not backends_raw:
        raise ConfigError("[run] backends is required")
    backends = tuple(b.strip() for b in backends_raw.split(",") if b.strip())
    for b in backends:
        if b not in BACKENDS:
            raise ConfigError(f"unknown backend {b!r}")
    if not backends:
        raise ConfigError("at least one backend is required")

    twa_samples = _get(parser, "twa", "samples") if parser.has_section("twa") else None
    twa_seed = _get(parser, "twa", "seed") if parser.has_section("twa") else None
    if "twa" in backends and (twa_samples is None or twa_seed is None):
        raise ConfigError("[twa] samples and seed are required when the "
                          "twa backend runs")
    hk_samples = _get(parser, "hk", "samples") if parser.has_section("hk") else None
    hk_seed = _get(parser, "hk", "seed") if parser.has_section("hk") else None
    if "hk" in backends and (hk_samples is None or hk_seed is None):
        raise ConfigError("[hk] samples and seed are required when the hk "
                          "backend runs")

    has_hk = parser.has_section("hk")
    has_grids = parser.has_section("grids")
    has_metrics = parser.has_section("metrics")
    w0 = _get(parser, "metrics", "window_start") if has_metrics else None
    w1 = _get(parser, "metrics", "window_end") if has_metrics else None
    if (w0 is None) != (w1 is None):
        raise ConfigError("[metrics] window_start and window_end go together")

    output = (_get(parser, "run", "output") or default_output)
    wigner = _get(parser, "grids", "wigner") if has_grids else False
    if wigner and model.modes != 2:
        raise ConfigError("[grids] wigner output is double-well only")

    return ExperimentConfig(
        model=model, j_target=j_target, delta=delta, t_max=t_max,
        t_max_plasma_periods=t_per, num_points=num_points,
        backends=backends, output=output,
        workers=_get(parser, "run", "workers"),
        twa_samples=twa_samples, twa_seed=twa_seed,
        hk_samples=hk_samples, hk_seed=hk_seed,
        hk_gamma_override=_get(parser, "hk", "gamma_override") if has_hk else None,
        hk_prefactor_cutoff=_get(parser, "hk", "prefactor_cutoff")
        if has_hk else 1000.0,
        hk_renormalize=_get(parser, "hk", "renormalize") if has_hk else True,
        grids_wavefunction=_get(parser, "grids", "wavefunction")
        if has_grids else False,
        grids_stride=_get(parser, "grids", "stride") if has_grids else 10,
        grids_wigner=wigner,
        metrics_window=(w0, w1) if w0 is not None else None,
        config_text=text)


def load_config(path: str) -> ExperimentConfig:
    from pathlib import Path
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if p.suffix == ".json":
        # a manifest: re-run from its embedded config
        import json
        try:
            text = json.loads(text)["config_text"]
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{path} is not a manifest with embedded "
                              f"config_text: {exc}") from exc
    return parse_config(text, default_output=p.stem)


def load_preset(name: str) -> ExperimentConfig:
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; choose from "
                          f"{', '.join(PRESET_NAMES)}")
    text = resources.files("bosewells.presets").joinpath(f"{name}.ini") \
        .read_text()
    return parse_config(text, default_output=name)


def time_grid(config: ExperimentConfig) -> np.ndarray:
    from .model import plasma_frequency
    if config.t_max is not None:
        t_max = config.t_max
    else:
        t_max = config.t_max_plasma_periods * 2 * np.pi / \
            plasma_frequency(config.model)
    return np.linspace(0.0, t_max, config.num_points)


def schema_text() -> str:
    buf = io.StringIO()
    buf.write("Configuration grammar: INI sections, 'key = value' lines,\n"
              "';' or '#' inline comments.  Types and defaults:\n\n")
    for section, keys in SCHEMA.items():
        buf.write(f"[{section}]\n")
        for key, (kind, default, help_) in keys.items():
            d = "required/conditional" if default is None else f"default {default}"
            buf.write(f"  {key:22s} {kind:6s} {d}\n      {help_}\n")
        buf.write("\n")
    buf.write("Environment: BOSEWELLS_OUTPUT_ROOT sets the output root "
              "directory\n(default ./outputs).\n")
    return buf.getvalue()
