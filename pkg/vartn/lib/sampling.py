"""Two-stage noisy photon-number sampling.

A mixed covariance is split into a pure part Q and classical noise C. Each
sample draws a displacement from N(0, C), displaces a copy of the pure-state
MPS and samples occupations mode by mode from conditional marginals.
"""

import csv
import os

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from logzero import logger
from numpy.typing import NDArray
from scipy import linalg

from . import errors
from .fock import gate_matrix
from .gaussian import split_noise
from .mps import MPS, apply_site_matrices

PSD_FLOOR = -1e-10
LEAK_WARNING = 1e-3


@dataclass
class SampleBatch:
    samples: NDArray[np.int64]
    displacements: NDArray[np.float64]
    leaked: NDArray[np.float64]
    seed: int

    @property
    def count(self) -> int:
        return int(self.samples.shape[0])


def _generator(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def draw_displacements(C: NDArray[np.float64], count: int, seed: int) -> NDArray[np.float64]:
    """count x 2N zero-mean Gaussian draws with covariance C."""
    C = np.asarray(C, dtype=float)
    w, Q = linalg.eigh((C + C.T) / 2)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    if w.size and w.min() < PSD_FLOOR * scale:
        raise errors.NonPSD(f"Noise covariance has eigenvalue {w.min():.3e} < 0.")
    root = Q @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ Q.T
    normals = _generator(seed).standard_normal((count, C.shape[0]))
    return normals @ root


def _right_canonical(mps: MPS) -> Tuple[List[NDArray[np.complex128]], float]:
    """Cores of a normalized right-canonical copy, with the norm it had before."""
    work = mps.copy()
    work.canonicalize(0)
    norm = work.norm()
    work.normalize()
    return work.cores, norm


def _sample_one(cores: Sequence[NDArray[np.complex128]], rng: np.random.Generator) -> List[int]:
    occupation = []
    vec = np.ones(1, dtype=complex)
    for core in cores:
        branches = np.einsum("a,anb->nb", vec, core)
        probs = np.sum(np.abs(branches) ** 2, axis=1)
        probs = probs / probs.sum()
        n = int(rng.choice(probs.size, p=probs))
        occupation.append(n)
        vec = branches[n] / np.linalg.norm(branches[n])
    return occupation


def sample_pnr(mps: MPS, count: int, seed: int) -> NDArray[np.int64]:
    """Chain-rule sampling of count occupation vectors from |<n|psi>|^2."""
    cores, _ = _right_canonical(mps)
    children = np.random.SeedSequence(seed).spawn(count)
    return np.array([_sample_one(cores, _generator(child)) for child in children], dtype=np.int64).reshape(
        count, mps.n_sites
    )


def displacement_matrices(d: NDArray[np.float64], phys_dims: Sequence[int]) -> List[NDArray[np.complex128]]:
    """Per-mode displacement gates for a quadrature shift d = (d_x..., d_p...)."""
    n = len(phys_dims)
    return [
        gate_matrix("displacement", (d[k] / np.sqrt(2), d[n + k] / np.sqrt(2)), D).data
        for k, D in enumerate(phys_dims)
    ]


def noisy_sample(
    V_mixed: NDArray[np.float64],
    mps_pure: MPS,
    count: int,
    seed: int,
    C: Optional[NDArray[np.float64]] = None,
) -> SampleBatch:
    """Samples the mixed state V_mixed = Q + C given the MPS of its pure part Q.

    Args:
        V_mixed (NDArray): mixed covariance.
        mps_pure (MPS): state of the pure part.
        count (int): number of samples.
        seed (int): seed of the displacement draws and of the per-sample streams.
        C (NDArray, optional): precomputed noise covariance. Defaults to split_noise(V_mixed).C.

    Returns:
        SampleBatch: occupations, displacements and the weight lost to truncation per sample.
    """

    if C is None:
        C = split_noise(V_mixed).C
    displacements = draw_displacements(C, count, seed)
    children = np.random.SeedSequence(seed).spawn(count)
    pure_cores, pure_norm = _right_canonical(mps_pure)

    samples, leaked = [], []
    for d, child in zip(displacements, children):
        if np.any(d):
            displaced = apply_site_matrices(mps_pure, displacement_matrices(d, mps_pure.phys_dims))
            cores, norm = _right_canonical(displaced)
            leak = max(0.0, 1.0 - (norm / pure_norm) ** 2)
        else:
            cores, leak = pure_cores, 0.0
        samples.append(_sample_one(cores, _generator(child)))
        leaked.append(leak)

    leaked_arr = np.asarray(leaked)
    if leaked_arr.size and leaked_arr.max() > LEAK_WARNING:
        logger.warning(
            "Displacements leaked up to %.3e of the weight out of the cutoff.", leaked_arr.max()
        )
    return SampleBatch(
        samples=np.asarray(samples, dtype=np.int64).reshape(count, mps_pure.n_sites),
        displacements=displacements,
        leaked=leaked_arr,
        seed=seed,
    )


def empirical_mean_photons(samples: NDArray[np.int64]) -> NDArray[np.float64]:
    return np.asarray(samples, dtype=float).mean(axis=0)


def write_samples_csv(batch: SampleBatch, path: str) -> None:
    n = batch.samples.shape[1]
    with open(os.path.expanduser(path), mode="w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["seed_index"] + [f"n_{k + 1}" for k in range(n)] + ["leaked_weight"])
        for i, (occ, leak) in enumerate(zip(batch.samples, batch.leaked)):
            writer.writerow([i] + [int(x) for x in occ] + [repr(float(leak))])


def write_displacements_csv(batch: SampleBatch, path: str) -> None:
    size = batch.displacements.shape[1]
    with open(os.path.expanduser(path), mode="w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["seed_index"] + [f"d_{k + 1}" for k in range(size)])
        for i, d in enumerate(batch.displacements):
            writer.writerow([i] + [repr(float(x)) for x in d])
