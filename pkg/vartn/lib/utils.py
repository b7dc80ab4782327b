import hashlib
import json
import os

from typing import Any, Dict, Optional

import numpy as np
from logzero import logger

from . import errors
from .constants import THREADS_ENV_VAR


def jsonable(obj: Any) -> Any:
    """Recursively converts numpy scalars, arrays and complex numbers to JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))


def config_hash(config: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON of a run configuration."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def write_json(data: Any, path: str) -> None:
    with open(os.path.expanduser(path), mode="w", encoding="utf-8") as f:
        json.dump(jsonable(data), f, indent=2, sort_keys=True)


def ensure_dir(path: str) -> str:
    path = os.path.expanduser(path)
    os.makedirs(path, exist_ok=True)
    return path


def thread_count(default: Optional[int] = None) -> int:
    """Worker count from VARTN_THREADS, falling back to the CPU count."""
    value = os.environ.get(THREADS_ENV_VAR)
    if value is None:
        return default or os.cpu_count() or 1
    try:
        count = int(value)
    except ValueError as e:
        raise errors.ConfigError(f"{THREADS_ENV_VAR} must be an integer, got '{value}'.") from e
    if count < 1:
        raise errors.ConfigError(f"{THREADS_ENV_VAR} must be positive, got {count}.")
    logger.debug("Using %d workers from %s.", count, THREADS_ENV_VAR)
    return count
