"""Power-law fits y = prefactor * x^exponent on log-log data."""

import csv
import json
import os

from dataclasses import asdict, dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from logzero import logger
from scipy import stats

from . import errors


@dataclass(frozen=True)
class FitResult:
    prefactor: float
    exponent: float
    r_squared: float
    points: int

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def fit_power_law(pairs: Sequence[Tuple[float, float]]) -> FitResult:
    """Least squares line through (log x, log y); non-positive pairs are dropped."""
    data = np.asarray(pairs, dtype=float).reshape(-1, 2)
    keep = (data[:, 0] > 0) & (data[:, 1] > 0)
    if not keep.all():
        logger.warning("Dropping %d pairs with non-positive entries.", int((~keep).sum()))
    data = data[keep]
    if data.shape[0] < 2 or np.ptp(data[:, 0]) == 0:
        raise errors.ConfigError("A power-law fit needs at least two distinct positive x values.")

    fit = stats.linregress(np.log(data[:, 0]), np.log(data[:, 1]))
    return FitResult(
        prefactor=float(np.exp(fit.intercept)),
        exponent=float(fit.slope),
        r_squared=float(fit.rvalue**2),
        points=int(data.shape[0]),
    )


def load_pairs(path: str) -> List[Tuple[float, float]]:
    """Reads (x, y) pairs from a two-column CSV (header optional) or a JSON list."""
    path = os.path.expanduser(path)
    if not os.path.exists(path):
        raise errors.ConfigError(f"Fit input {path} does not exist.")

    if path.endswith(".json"):
        with open(path, mode="r", encoding="utf-8") as f:
            data = json.load(f)
        if isinstance(data, dict):
            data = list(zip(data["x"], data["y"]))
        return [(float(x), float(y)) for x, y in data]

    pairs = []
    with open(path, mode="r", encoding="utf-8", newline="") as f:
        for row in csv.reader(f):
            if not row:
                continue
            try:
                pairs.append((float(row[0]), float(row[1])))
            except ValueError:
                # header
                continue
    return pairs
