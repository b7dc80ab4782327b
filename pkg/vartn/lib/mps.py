"""Matrix product states: compression, canonical forms, contractions and I/O.

Cores have index order (left bond, physical, right bond).
"""

import json
import os

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from logzero import logger
from numpy.typing import NDArray
from scipy import linalg

from . import errors
from .fock import CMatrix
from .mpo import MPO

SVD_ZERO = 1e-14
IMAG_TOL = 1e-9


@dataclass
class CompressionReport:
    """Normalized squared singular values kept and discarded at every cut."""

    kept: List[NDArray[np.float64]] = field(default_factory=list)
    discarded: List[NDArray[np.float64]] = field(default_factory=list)

    @property
    def discarded_weights(self) -> List[float]:
        return [float(d.sum()) for d in self.discarded]

    @property
    def eps_chi_surrogate(self) -> float:
        return float(sum(1.0 - k.sum() for k in self.kept))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps_chi_surrogate": self.eps_chi_surrogate,
            "discarded_weights": self.discarded_weights,
            "bond_dims": [int(k.size) for k in self.kept],
        }


@dataclass(frozen=True)
class EnergyReport:
    energy: float
    variance: float

    @property
    def sigma_H(self) -> float:
        return float(np.sqrt(self.variance))

    def to_dict(self) -> Dict[str, float]:
        return {"energy": self.energy, "variance": self.variance, "sigma_H": self.sigma_H}


def svd_truncate(
    M: CMatrix, chi_max: int, zero: float = SVD_ZERO
) -> Tuple[CMatrix, NDArray[np.float64], CMatrix, NDArray[np.float64], NDArray[np.float64]]:
    """Truncated SVD with a fixed gauge.

    Singular values are kept in descending order, at most chi_max of them and
    none below zero * s[0]. The first nonzero entry of every kept left
    singular vector is made real-positive.

    Returns:
        (U, s, Vh, kept_weights, discarded_weights), weights normalized to sum to 1.
    """

    U, s, Vh = linalg.svd(M, full_matrices=False, lapack_driver="gesvd")
    total = float(np.sum(s**2))
    nonzero = int(np.sum(s > zero * s[0])) if s.size and s[0] > 0 else 1
    keep = max(1, min(chi_max, nonzero))

    U, Vh = U[:, :keep].copy(), Vh[:keep].copy()
    for j in range(keep):
        column = U[:, j]
        lead = column[np.abs(column) > 1e-12]
        if lead.size:
            phase = np.conj(lead[0]) / abs(lead[0])
            U[:, j] *= phase
            Vh[j] *= np.conj(phase)

    weights = s**2 / total if total > 0 else np.zeros_like(s)
    return U, s[:keep], Vh, weights[:keep], weights[keep:]


@dataclass
class MPS:
    cores: List[CMatrix]
    center: Optional[int] = None

    def __post_init__(self) -> None:
        self.cores = [np.asarray(c, dtype=complex) for c in self.cores]
        if not self.cores:
            raise errors.ShapeMismatch("An MPS needs at least one core.")
        if self.cores[0].shape[0] != 1 or self.cores[-1].shape[2] != 1:
            raise errors.ShapeMismatch("MPS boundary bonds must have dimension 1.")
        for k in range(1, len(self.cores)):
            if self.cores[k - 1].shape[2] != self.cores[k].shape[0]:
                raise errors.ShapeMismatch(f"MPS bond mismatch at cut {k}.")

    @property
    def n_sites(self) -> int:
        return len(self.cores)

    @property
    def phys_dims(self) -> List[int]:
        return [c.shape[1] for c in self.cores]

    @property
    def bond_dims(self) -> List[int]:
        return [c.shape[2] for c in self.cores[:-1]]

    def copy(self) -> "MPS":
        return MPS([c.copy() for c in self.cores], self.center)

    @classmethod
    def product_state(cls, vectors: Sequence[NDArray[np.complex128]]) -> "MPS":
        cores = [np.asarray(v, dtype=complex).reshape(1, -1, 1) for v in vectors]
        return cls(cores, center=None)

    @classmethod
    def basis_state(cls, occupation: Sequence[int], phys_dims: Sequence[int]) -> "MPS":
        vectors = []
        for n, d in zip(occupation, phys_dims):
            v = np.zeros(d, dtype=complex)
            v[n] = 1.0
            vectors.append(v)
        return cls.product_state(vectors)

    @classmethod
    def random(cls, phys_dims: Sequence[int], chi: int, seed: int) -> "MPS":
        """Random normalized MPS, right-canonical with center 0."""
        rng = np.random.Generator(np.random.Philox(seed))
        n = len(phys_dims)
        bonds = [1] + [
            int(min(chi, np.prod(phys_dims[:k]), np.prod(phys_dims[k:]))) for k in range(1, n)
        ] + [1]
        cores = []
        for k, d in enumerate(phys_dims):
            shape = (bonds[k], d, bonds[k + 1])
            cores.append(rng.normal(size=shape) + 1j * rng.normal(size=shape))
        mps = cls(cores)
        mps.canonicalize(0)
        mps.normalize()
        return mps

    def norm(self) -> float:
        if self.center is not None:
            return float(np.linalg.norm(self.cores[self.center]))
        return float(np.sqrt(abs(overlap(self, self))))

    def normalize(self) -> "MPS":
        norm = self.norm()
        if norm == 0:
            raise errors.IntegrityError("Cannot normalize an MPS with zero norm.")
        site = self.center if self.center is not None else 0
        self.cores[site] = self.cores[site] / norm
        return self

    def canonicalize(self, center: int) -> "MPS":
        """Moves the orthogonality center to `center` in place by QR sweeps."""
        if not 0 <= center < self.n_sites:
            raise IndexError(f"Center {center} out of range for {self.n_sites} sites.")
        start = 0 if self.center is None else min(self.center, center)
        stop = self.n_sites - 1 if self.center is None else max(self.center, center)

        for k in range(start, center):
            bl, d, br = self.cores[k].shape
            Q, R = linalg.qr(self.cores[k].reshape(bl * d, br), mode="economic")
            self.cores[k] = Q.reshape(bl, d, -1)
            self.cores[k + 1] = np.tensordot(R, self.cores[k + 1], axes=([1], [0]))
        for k in range(stop, center, -1):
            bl, d, br = self.cores[k].shape
            Q, R = linalg.qr(self.cores[k].reshape(bl, d * br).T, mode="economic")
            self.cores[k] = Q.T.reshape(-1, d, br)
            self.cores[k - 1] = np.tensordot(self.cores[k - 1], R.T, axes=([2], [0]))
        self.center = center
        return self

    def isometry_residuals(self) -> List[float]:
        """Deviation from left (right) isometry for sites left (right) of the center."""
        if self.center is None:
            return []
        residuals = []
        for k, core in enumerate(self.cores):
            bl, d, br = core.shape
            if k < self.center:
                M = core.reshape(bl * d, br)
                residuals.append(float(np.max(np.abs(M.conj().T @ M - np.eye(br)))))
            elif k > self.center:
                M = core.reshape(bl, d * br)
                residuals.append(float(np.max(np.abs(M @ M.conj().T - np.eye(bl)))))
        return residuals

    def to_dense(self) -> CMatrix:
        T = self.cores[0][0]
        for core in self.cores[1:]:
            T = np.tensordot(T, core, axes=([-1], [0]))
        return T.reshape(-1)

    def amplitude(self, occupation: Sequence[int]) -> complex:
        if len(occupation) != self.n_sites:
            raise errors.ShapeMismatch(f"Expected {self.n_sites} occupations, got {len(occupation)}.")
        vec = np.ones(1, dtype=complex)
        for core, n in zip(self.cores, occupation):
            if not 0 <= n < core.shape[1]:
                raise IndexError(f"Occupation {n} outside local dimension {core.shape[1]}.")
            vec = vec @ core[:, n, :]
        return complex(vec[0])

    def amplitudes_upto(self, max_total: int) -> List[Tuple[Tuple[int, ...], complex]]:
        """All amplitudes with total photon number <= max_total, in lexicographic order."""
        return list(self._walk(max_total))

    def _walk(self, max_total: int) -> Iterator[Tuple[Tuple[int, ...], complex]]:
        def visit(site: int, prefix: Tuple[int, ...], vec: CMatrix, budget: int):
            if site == self.n_sites:
                yield prefix, complex(vec[0])
                return
            core = self.cores[site]
            for n in range(min(core.shape[1] - 1, budget) + 1):
                yield from visit(site + 1, prefix + (n,), vec @ core[:, n, :], budget - n)

        yield from visit(0, (), np.ones(1, dtype=complex), max_total)

    def probability_table(self, max_total: int) -> List[Tuple[Tuple[int, ...], float]]:
        norm2 = self.norm() ** 2
        return [(occ, abs(amp) ** 2 / norm2) for occ, amp in self._walk(max_total)]

    def bond_singular_values(self, cut: int) -> NDArray[np.float64]:
        """Schmidt values across the cut between sites cut-1 and cut."""
        work = self.copy()
        work.canonicalize(cut - 1)
        bl, d, br = work.cores[cut - 1].shape
        s = linalg.svdvals(work.cores[cut - 1].reshape(bl * d, br))
        return s / np.linalg.norm(s)


def from_dense(
    state_vector: CMatrix, phys_dims: Sequence[int], chi_max: int
) -> Tuple[MPS, CompressionReport]:
    """Sequential left-to-right SVD compression of a dense state.

    Args:
        state_vector (CMatrix): amplitudes in lexicographic Fock order.
        phys_dims (Sequence[int]): local dimensions.
        chi_max (int): largest kept bond dimension.

    Returns:
        Tuple[MPS, CompressionReport]: the compressed state (center on the last
        site, norm equal to the kept norm) and the per-cut weights.
    """

    psi = np.asarray(state_vector, dtype=complex).reshape(-1)
    if psi.size != int(np.prod(phys_dims)):
        raise errors.ShapeMismatch(f"State of size {psi.size} does not fit dims {list(phys_dims)}.")
    psi = psi / np.linalg.norm(psi)

    report = CompressionReport()
    cores = []
    rest = psi.reshape(1, -1)
    for d in phys_dims[:-1]:
        bl = rest.shape[0]
        U, s, Vh, kept, discarded = svd_truncate(rest.reshape(bl * d, -1), chi_max)
        cores.append(U.reshape(bl, d, -1))
        report.kept.append(kept)
        report.discarded.append(discarded)
        rest = s[:, None] * Vh
    cores.append(rest.reshape(rest.shape[0], phys_dims[-1], 1))
    logger.debug("Compressed dense state, surrogate %.3e.", report.eps_chi_surrogate)
    return MPS(cores, center=len(cores) - 1), report


def compress(mps: MPS, chi_max: int) -> Tuple[MPS, CompressionReport]:
    """SVD compression of an MPS to chi_max, sweeping left to right from a right-canonical form."""
    work = mps.copy()
    work.canonicalize(0)
    norm = work.norm()
    work.cores[0] = work.cores[0] / norm
    report = CompressionReport()
    for k in range(work.n_sites - 1):
        bl, d, br = work.cores[k].shape
        U, s, Vh, kept, discarded = svd_truncate(work.cores[k].reshape(bl * d, br), chi_max)
        work.cores[k] = U.reshape(bl, d, -1)
        work.cores[k + 1] = np.tensordot(s[:, None] * Vh, work.cores[k + 1], axes=([1], [0]))
        report.kept.append(kept)
        report.discarded.append(discarded)
    work.center = work.n_sites - 1
    return work, report


def apply_site_matrices(mps: MPS, mats: Sequence[CMatrix]) -> MPS:
    """Applies one (D_out x d) matrix per site; bond dimensions are unchanged."""
    if len(mats) != mps.n_sites:
        raise errors.ShapeMismatch(f"Expected {mps.n_sites} site matrices, got {len(mats)}.")
    cores = []
    for k, (core, mat) in enumerate(zip(mps.cores, mats)):
        mat = np.asarray(mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[1] != core.shape[1]:
            raise errors.ShapeMismatch(
                f"Site {k}: matrix {mat.shape} does not act on local dimension {core.shape[1]}."
            )
        cores.append(np.einsum("od,adb->aob", mat, core))
    return MPS(cores, center=None)


def overlap(a: MPS, b: MPS) -> complex:
    """<a|b> by transfer-matrix contraction."""
    if a.phys_dims != b.phys_dims:
        raise errors.ShapeMismatch(f"Incompatible local dimensions {a.phys_dims} vs {b.phys_dims}.")
    E = np.ones((1, 1), dtype=complex)
    for A, B in zip(a.cores, b.cores):
        E = np.einsum("xy,xiX,yiY->XY", E, A.conj(), B, optimize=True)
    return complex(E[0, 0])


def normalized_fidelity(a: MPS, b: MPS) -> float:
    """|<a|b>|^2 / (<a|a> <b|b>)."""
    num = abs(overlap(a, b)) ** 2
    return float(num / (overlap(a, a).real * overlap(b, b).real))


def expectation(mps: MPS, mpo: MPO) -> complex:
    if mps.phys_dims != mpo.phys_dims:
        raise errors.ShapeMismatch(f"MPS dims {mps.phys_dims} do not match MPO dims {mpo.phys_dims}.")
    E = np.ones((1, 1, 1), dtype=complex)
    for A, W in zip(mps.cores, mpo.cores):
        E = np.einsum("xwy,xoX,woiW,yiY->XWY", E, A.conj(), W, A, optimize=True)
    return complex(E[0, 0, 0])


def apply_mpo(mps: MPS, mpo: MPO, cap: Optional[int] = None) -> MPS:
    """Exact MPO-MPS product; bond dimensions multiply."""
    if mps.phys_dims != mpo.phys_dims:
        raise errors.ShapeMismatch(f"MPS dims {mps.phys_dims} do not match MPO dims {mpo.phys_dims}.")
    if cap is not None:
        largest = max([a * w for a, w in zip(mps.bond_dims, mpo.bond_dims)], default=1)
        if largest > cap:
            raise errors.ResourceLimit(f"MPO application needs bond {largest} > cap {cap}.")
    cores = []
    for A, W in zip(mps.cores, mpo.cores):
        core = np.einsum("woiW,aib->awobW", W, A, optimize=True)
        a, w, o, b, w2 = core.shape
        cores.append(core.reshape(a * w, o, b * w2))
    return MPS(cores)


def energy_report(mps: MPS, mpo: MPO, cap: Optional[int] = None) -> EnergyReport:
    """<H> and the variance <H^2> - <H>^2 for the normalized state."""
    norm2 = overlap(mps, mps).real
    energy = expectation(mps, mpo) / norm2
    if abs(energy.imag) > IMAG_TOL * max(1.0, abs(energy.real)):
        logger.warning("Energy has imaginary part %.3e.", energy.imag)
    H_psi = apply_mpo(mps, mpo, cap)
    h2 = overlap(H_psi, H_psi).real / norm2
    variance = max(h2 - energy.real**2, 0.0)
    return EnergyReport(energy=float(energy.real), variance=float(variance))


def save_checkpoint(mps: MPS, path: str) -> None:
    """JSON header at `path` plus a little-endian float64 re/im payload next to it."""
    path = os.path.expanduser(path)
    payload = os.path.splitext(path)[0] + ".bin"
    header = {
        "n_sites": mps.n_sites,
        "phys_dims": mps.phys_dims,
        "bond_dims": mps.bond_dims,
        "center": mps.center,
        "payload": os.path.basename(payload),
    }
    with open(payload, "wb") as f:
        for core in mps.cores:
            f.write(np.stack([core.real, core.imag], axis=-1).astype("<f8").tobytes())
    with open(path, mode="w", encoding="utf-8") as f:
        json.dump(header, f, indent=4)


def load_checkpoint(path: str) -> MPS:
    path = os.path.expanduser(path)
    with open(path, mode="r", encoding="utf-8") as f:
        header = json.load(f)
    payload = os.path.join(os.path.dirname(path), header["payload"])
    raw = np.fromfile(payload, dtype="<f8")

    bonds = [1] + list(header["bond_dims"]) + [1]
    cores, offset = [], 0
    for k, d in enumerate(header["phys_dims"]):
        shape = (bonds[k], d, bonds[k + 1])
        size = 2 * int(np.prod(shape))
        if offset + size > raw.size:
            raise errors.IntegrityError(f"Checkpoint payload {payload} is truncated.")
        pairs = raw[offset : offset + size].reshape(shape + (2,))
        cores.append(pairs[..., 0] + 1j * pairs[..., 1])
        offset += size
    if offset != raw.size or len(cores) != header["n_sites"]:
        raise errors.IntegrityError(f"Checkpoint payload {payload} does not match its header.")
    return MPS(cores, center=header["center"])
