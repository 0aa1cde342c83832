"""Experiment configuration files.

A run is described by a single YAML document with sections for the system,
time stepping, noise sources, grid, scheme selection, and sweeps.  Defaults
come from the published experiment presets for the chosen system, so a
minimal file only has to name the system.  Unknown keys anywhere are hard
errors, reported with their full key path.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import yaml

from .errors import ConfigError
from .experiment import (
    ExperimentConfig,
    linear_paper_config,
    lorenz_setup1_config,
    lorenz_setup2_config,
)

__all__ = ["parse_config", "DEFAULT_SWEEP_LAMBDAS", "DEFAULT_SWEEP_INTERVALS"]

DEFAULT_SWEEP_LAMBDAS = (0.1, 5.0, 50.0, 1000.0)
DEFAULT_SWEEP_INTERVALS = (2, 5, 10, 20)

_SCHEMA = {
    "system": None,
    "seed": None,
    "ensemble": {"size"},
    "time": {"dt", "steps", "assimilation_interval", "spin_up_steps"},
    "model": {"transition", "x0", "sigma", "rho", "beta"},
    "noise": {
        "model": {"bias", "variance"},
        "observation": {"bias", "variance"},
        "reference": {"mode", "variance", "variance_scale", "samples"},
        "init": {"perturbation_variance"},
    },
    "grid": {"size", "span_sigmas"},
    "scheme": {"schemes", "lambda"},
    "metrics": {"spin_up_fraction"},
    "sweep": {"lambdas", "intervals"},
}


def _check_keys(doc: dict, schema, path: str = ""):
    for key, value in doc.items():
        where = f"{path}.{key}" if path else str(key)
        if isinstance(schema, dict):
            if key not in schema:
                raise ConfigError(f"unknown config key {where!r}")
            sub = schema[key]
        else:
            if key not in schema:
                raise ConfigError(f"unknown config key {where!r}")
            sub = None
        if isinstance(value, dict):
            if not isinstance(sub, (dict, set)):
                raise ConfigError(f"config key {where!r} does not take a mapping")
            _check_keys(value, sub, where)


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def _number(doc: dict, section: str, key: str, kind=float):
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key {section}.{key!r} must be a number")
    return kind(value)


def parse_config(path) -> tuple[ExperimentConfig, dict]:
    """Load and validate a config file.

    Returns the experiment configuration and a sweep dict with ``lambdas``
    and ``intervals`` (defaults filled).  Raises :class:`ConfigError` with
    the offending key path on any schema or invariant violation.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("config file must contain a mapping at top level")
    _check_keys(doc, _SCHEMA)

    system = doc.get("system")
    _require(system in ("linear", "lorenz63"), "config key 'system' must be 'linear' or 'lorenz63'")

    ref = doc.get("noise", {}).get("reference", {})
    mode = ref.get("mode")
    if mode is not None and mode not in ("per_cycle", "climatological"):
        raise ConfigError("config key 'noise.reference.mode' must be 'per_cycle' or 'climatological'")
    if system == "linear":
        base = linear_paper_config()
        _require(mode in (None, "per_cycle"), "the linear experiment uses a per-cycle reference")
    elif mode == "climatological":
        base = lorenz_setup2_config()
    else:
        base = lorenz_setup1_config()

    updates: dict = {}
    if "seed" in doc:
        updates["master_seed"] = _number(doc, "", "seed", int)
    if "ensemble" in doc and "size" in doc["ensemble"]:
        updates["ensemble_size"] = _number(doc["ensemble"], "ensemble", "size", int)

    time_sec = doc.get("time", {})
    for key, name in (
        ("dt", "dt"),
        ("steps", "n_steps"),
        ("assimilation_interval", "assimilation_interval"),
        ("spin_up_steps", "spin_up_steps"),
    ):
        if key in time_sec:
            kind = float if key == "dt" else int
            updates[name] = _number(time_sec, "time", key, kind)

    model_sec = doc.get("model", {})
    for key in ("transition", "sigma", "rho", "beta"):
        if key in model_sec:
            updates[key] = _number(model_sec, "model", key)
    if "x0" in model_sec:
        x0 = model_sec["x0"]
        if not isinstance(x0, (list, tuple)):
            raise ConfigError("config key 'model.x0' must be a list of numbers")
        updates["x0"] = tuple(float(v) for v in x0)

    noise = doc.get("noise", {})
    if "model" in noise:
        if "bias" in noise["model"]:
            updates["model_bias"] = _number(noise["model"], "noise.model", "bias")
        if "variance" in noise["model"]:
            updates["model_variance"] = _number(noise["model"], "noise.model", "variance")
    if "observation" in noise:
        if "bias" in noise["observation"]:
            updates["obs_bias"] = _number(noise["observation"], "noise.observation", "bias")
        if "variance" in noise["observation"]:
            updates["obs_variance"] = _number(noise["observation"], "noise.observation", "variance")
    if "variance" in ref and "variance_scale" in ref:
        raise ConfigError("give either 'noise.reference.variance' or 'noise.reference.variance_scale', not both")
    if "variance" in ref:
        updates["reference_variance"] = _number(ref, "noise.reference", "variance")
    if "samples" in ref:
        updates["n_reference_samples"] = _number(ref, "noise.reference", "samples", int)
    if mode is not None:
        updates["reference_mode"] = mode
    if "init" in noise and "perturbation_variance" in noise["init"]:
        updates["init_perturbation_variance"] = _number(noise["init"], "noise.init", "perturbation_variance")

    grid = doc.get("grid", {})
    if "size" in grid:
        updates["grid_size"] = _number(grid, "grid", "size", int)
    if "span_sigmas" in grid:
        updates["grid_span_sigmas"] = _number(grid, "grid", "span_sigmas")

    scheme = doc.get("scheme", {})
    if "schemes" in scheme:
        schemes = scheme["schemes"]
        if not isinstance(schemes, (list, tuple)) or not schemes:
            raise ConfigError("config key 'scheme.schemes' must be a nonempty list")
        updates["schemes"] = tuple(str(s) for s in schemes)
    if "lambda" in scheme:
        lams = scheme["lambda"]
        if isinstance(lams, (int, float)) and not isinstance(lams, bool):
            lams = [lams]
        if not isinstance(lams, (list, tuple)):
            raise ConfigError("config key 'scheme.lambda' must be a number or list")
        lams = tuple(float(l) for l in lams)
        if any(l < 0 for l in lams):
            raise ConfigError("config key 'scheme.lambda' must be >= 0")
        updates["lambdas"] = lams

    if "metrics" in doc and "spin_up_fraction" in doc["metrics"]:
        updates["spin_up_fraction"] = _number(doc["metrics"], "metrics", "spin_up_fraction")

    config = replace(base, **updates)
    if "variance_scale" in ref:
        scale = _number(ref, "noise.reference", "variance_scale")
        _require(scale >= 0, "config key 'noise.reference.variance_scale' must be >= 0")
        config = replace(config, reference_variance=scale * config.model_variance)
    # re-validate after all overrides (dataclass __post_init__ runs on replace,
    # but the lambda/dim pairing depends on the combined values)
    config = replace(config)

    sweep_sec = doc.get("sweep", {})
    lambdas = sweep_sec.get("lambdas", list(DEFAULT_SWEEP_LAMBDAS))
    intervals = sweep_sec.get("intervals", list(DEFAULT_SWEEP_INTERVALS))
    if not isinstance(lambdas, (list, tuple)) or not lambdas:
        raise ConfigError("config key 'sweep.lambdas' must be a nonempty list")
    if any((isinstance(l, bool) or not isinstance(l, (int, float)) or l < 0) for l in lambdas):
        raise ConfigError("config key 'sweep.lambdas' must be numbers >= 0")
    if not isinstance(intervals, (list, tuple)) or not intervals:
        raise ConfigError("config key 'sweep.intervals' must be a nonempty list")
    if any((isinstance(i, bool) or not isinstance(i, int) or i < 1) for i in intervals):
        raise ConfigError("config key 'sweep.intervals' must be integers >= 1")
    sweep = {
        "lambdas": tuple(float(l) for l in lambdas),
        "intervals": tuple(int(i) for i in intervals),
    }
    return config, sweep
