import json
import os

from typing import Any, Dict, Optional, Tuple

from logzero import logger

from . import errors
from .constants import CONFIG_ENV_VAR, SCHEMA_VERSION

DEFAULT_LOCATION = "~/.vartn_config"
NoneType = type(None)

RUN_CONFIG_SCHEMA: Dict[str, Tuple[Any, Any]] = {
    "schema_version": (int, SCHEMA_VERSION),
    "seed": (int, 0),
    "n_modes": (int, 3),
    "squeeze_max": (float, 0.5),
    "covariance_file": ((str, NoneType), None),
    "loss": (float, 0.0),
    "kappa": (float, 0.0),
    "cutoff": (int, 6),
    "basis": (str, "fock"),
    "local_dim": ((int, NoneType), None),
    "local_dim_rule": (str, "uniform"),
    "eps_target": (float, 1e-6),
    "chi_max": (int, 16),
    "dmrg_mode": (str, "two-site"),
    "sweeps": (int, 12),
    "tol_energy": (float, 1e-10),
    "eig_tol": (float, 1e-9),
    "eig_maxiter": (int, 200),
    "max_total_photons": (int, 4),
    "oracle": (bool, False),
    "oracle_cap": (int, 4096),
    "resource_cap": (int, 1_000_000),
    "cutoff_tol": (float, 1e-10),
    "cutoff_max": (int, 256),
    "instances": (int, 1),
    "samples": (int, 1000),
    "plbo_fd_step": (float, 1e-5),
    "plbo_learn_rate": (float, 1e-2),
    "plbo_beta1": (float, 0.9),
    "plbo_beta2": (float, 0.999),
    "plbo_steps_per_site": (int, 10),
    "plbo_backtracks": (int, 8),
    "plbo_sweeps": (int, 4),
    "plbo_warmup_chi": ((int, NoneType), None),
    "validate_level": (str, "fast"),
    "fit_input": ((str, NoneType), None),
}

CHOICES = {
    "basis": ("fock", "olb", "plbo"),
    "local_dim_rule": ("uniform", "threshold"),
    "dmrg_mode": ("one-site", "two-site"),
    "validate_level": ("fast", "full"),
}

POSITIVE = (
    "n_modes",
    "cutoff",
    "chi_max",
    "sweeps",
    "eig_maxiter",
    "oracle_cap",
    "resource_cap",
    "cutoff_max",
    "instances",
    "samples",
)


def get_default_config() -> Dict[str, Any]:
    return {k: v for k, (_, v) in RUN_CONFIG_SCHEMA.items()}


def config_location(config_file: Optional[str] = None) -> str:
    return os.path.expanduser(config_file or os.environ.get(CONFIG_ENV_VAR) or DEFAULT_LOCATION)


def read_config(config_file: Optional[str] = None) -> Any:
    """User defaults from the dotfile; an absent file means no defaults."""
    path = config_location(config_file)

    if not os.path.exists(path):
        return {}

    with open(path, mode="r", encoding="utf-8") as f:
        return json.load(f)


def coerce(key: str, value: Any) -> Any:
    """Converts a command-line string to the schema type of `key`."""
    if key not in RUN_CONFIG_SCHEMA:
        raise errors.ConfigError(f"Unknown configuration key: {key}")
    _type, _ = RUN_CONFIG_SCHEMA[key]
    if not isinstance(value, str):
        return value
    if value.lower() in ("null", "none") and isinstance(_type, tuple):
        return None
    target = _type[0] if isinstance(_type, tuple) else _type
    if target is bool:
        if value.lower() not in ("true", "false"):
            raise errors.ConfigError(f"'{key}' expects true or false, got '{value}'.")
        return value.lower() == "true"
    try:
        return target(value)
    except ValueError as e:
        raise errors.ConfigError(f"'{key}' expects {target.__name__}, got '{value}'.") from e


def write_config(config: Dict[str, Any], config_file: Optional[str] = None) -> None:
    path = config_location(config_file)
    for key in config.keys():
        if key in RUN_CONFIG_SCHEMA:
            config[key] = coerce(key, config[key])

    with open(path, mode="w", encoding="utf-8") as f:
        json.dump(config, f, indent=4, sort_keys=True)


def _check_type(key: str, value: Any) -> Any:
    _type, _ = RUN_CONFIG_SCHEMA[key]
    accepted = _type if isinstance(_type, tuple) else (_type,)
    if float in accepted and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, bool) and bool not in accepted:
        raise errors.ConfigError(f"'{key}' must not be a boolean.")
    if not isinstance(value, accepted):
        names = " or ".join("null" if t is NoneType else t.__name__ for t in accepted)
        raise errors.ConfigError(f"'{key}' must be {names}, got {type(value).__name__}.")
    return value


def validate_run_config(
    raw: Dict[str, Any], user_defaults: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    """Applies precedence run config > dotfile > schema default and checks every value.

    Raises:
        ConfigError: unknown keys, wrong types, wrong schema version or values
            outside their allowed range.
    """

    unknown = sorted(set(raw) - set(RUN_CONFIG_SCHEMA))
    if unknown:
        raise errors.ConfigError(f"Unknown configuration keys: {', '.join(unknown)}")

    config = get_default_config()
    for k, v in (user_defaults or {}).items():
        if k not in RUN_CONFIG_SCHEMA:
            logger.warning("Ignoring unknown key '%s' in the user config file.", k)
            continue
        config[k] = _check_type(k, v)
    for k, v in raw.items():
        config[k] = _check_type(k, v)

    if config["schema_version"] != SCHEMA_VERSION:
        raise errors.ConfigError(
            f"Unsupported schema_version {config['schema_version']} (expected {SCHEMA_VERSION})."
        )
    for key, choices in CHOICES.items():
        if config[key] not in choices:
            raise errors.ConfigError(f"'{key}' must be one of {', '.join(choices)}.")
    for key in POSITIVE:
        if config[key] < 1:
            raise errors.ConfigError(f"'{key}' must be positive.")
    if config["cutoff"] < 2:
        raise errors.ConfigError("'cutoff' must be at least 2.")
    if config["squeeze_max"] < 0:
        raise errors.ConfigError("'squeeze_max' must be non-negative.")
    if not 0.0 <= config["loss"] < 1.0:
        raise errors.ConfigError("'loss' must lie in [0, 1).")
    if config["local_dim"] is None:
        config["local_dim"] = config["cutoff"]
    if config["plbo_warmup_chi"] is None:
        config["plbo_warmup_chi"] = config["cutoff"]
    if config["local_dim"] > config["cutoff"]:
        raise errors.ConfigError("'local_dim' cannot exceed 'cutoff'.")
    return config


def load_run_config(path: str, config_file: Optional[str] = None) -> Dict[str, Any]:
    path = os.path.expanduser(path)
    if not os.path.exists(path):
        raise errors.ConfigError(f"Run configuration {path} does not exist.")
    with open(path, mode="r", encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise errors.ConfigError(f"Run configuration {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise errors.ConfigError("A run configuration must be a JSON object.")
    return validate_run_config(raw, read_config(config_file))
