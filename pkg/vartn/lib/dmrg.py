"""Finite-size DMRG ground-state search on an MPO.

Environments are cached per cut: `left[k]` contracts sites 0..k-1 and
`right[k]` contracts sites k..N-1, each with index order (bra, mpo, ket).
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from logzero import logger
from scipy import linalg
from scipy.sparse import linalg as sparse_linalg

from . import errors
from .fock import CMatrix
from .mpo import MPO
from .mps import MPS, EnergyReport, energy_report, svd_truncate

DMRG_MODES = ("one-site", "two-site")
DENSE_SOLVE_LIMIT = 64
GROWTH_NOISE = 1e-8
ITERATION_BASE = 25


@dataclass
class DmrgOptions:
    mode: str = "two-site"
    sweeps: int = 12
    tol_energy: float = 1e-10
    eig_tol: float = 1e-9
    eig_maxiter: int = 200
    seed: int = 0
    chi_start: int = 2
    resource_cap: Optional[int] = None
    strict: bool = False

    def __post_init__(self) -> None:
        if self.mode not in DMRG_MODES:
            raise errors.ConfigError(f"DMRG mode must be one of {', '.join(DMRG_MODES)}.")
        if self.sweeps < 1:
            raise errors.ConfigError("At least one sweep is required.")
        if self.tol_energy <= 0 or self.eig_tol <= 0 or self.eig_maxiter < 1:
            raise errors.ConfigError("DMRG tolerances must be positive.")


@dataclass
class DmrgResult:
    mps: MPS
    report: EnergyReport
    trace: List[float] = field(default_factory=list)
    converged: bool = False

    @property
    def energy(self) -> float:
        return self.report.energy


def chi_schedule(chi_start: int, chi_max: int, sweeps: int) -> List[int]:
    """Bond dimension per sweep: chi_start, doubled every second sweep, capped at chi_max."""
    chis, chi = [], min(chi_start, chi_max)
    for sweep in range(sweeps):
        chis.append(chi)
        if sweep % 2 == 1:
            chi = min(2 * chi, chi_max)
    return chis


def iteration_cap(sweep: int, eig_maxiter: int) -> int:
    """Early sweeps solve loosely; the cap doubles every sweep up to eig_maxiter."""
    return int(min(eig_maxiter, ITERATION_BASE * 2**sweep))


def update_left(env: CMatrix, A: CMatrix, W: CMatrix) -> CMatrix:
    return np.einsum("xwy,xoX,woiW,yiY->XWY", env, A.conj(), W, A, optimize=True)


def update_right(env: CMatrix, B: CMatrix, W: CMatrix) -> CMatrix:
    return np.einsum("XWY,xoX,woiW,yiY->xwy", env, B.conj(), W, B, optimize=True)


def one_site_matvec(L: CMatrix, W: CMatrix, R: CMatrix, v: CMatrix) -> CMatrix:
    t = np.tensordot(L, v, axes=([2], [0]))
    t = np.tensordot(t, W, axes=([1, 2], [0, 2]))
    return np.tensordot(t, R, axes=([1, 3], [2, 1]))


def two_site_matvec(L: CMatrix, W1: CMatrix, W2: CMatrix, R: CMatrix, v: CMatrix) -> CMatrix:
    t = np.tensordot(L, v, axes=([2], [0]))
    t = np.tensordot(t, W1, axes=([1, 2], [0, 2]))
    t = np.tensordot(t, W2, axes=([4, 1], [0, 2]))
    return np.tensordot(t, R, axes=([1, 4], [2, 1]))


def lowest_eigenpair(matvec, v0: CMatrix, tol: float, maxiter: int) -> Tuple[float, CMatrix]:
    """Smallest eigenpair of a Hermitian map, warm-started from v0."""
    shape = v0.shape
    size = v0.size

    def apply(x: CMatrix) -> CMatrix:
        return matvec(x.reshape(shape)).reshape(-1)

    if size <= DENSE_SOLVE_LIMIT:
        H = np.column_stack([apply(e) for e in np.eye(size, dtype=complex)])
        w, v = linalg.eigh((H + H.conj().T) / 2)
        return float(w[0]), v[:, 0].reshape(shape)

    op = sparse_linalg.LinearOperator((size, size), matvec=apply, dtype=complex)
    start = v0.reshape(-1)
    try:
        w, v = sparse_linalg.eigsh(op, k=1, which="SA", v0=start, tol=tol, maxiter=maxiter)
    except sparse_linalg.ArpackNoConvergence as e:
        if e.eigenvalues.size == 0:
            energy = float(np.vdot(start, apply(start)).real / np.vdot(start, start).real)
            return energy, v0
        w, v = e.eigenvalues, e.eigenvectors
    return float(w[0]), v[:, 0].reshape(shape)


class DmrgEngine:
    """Sweeping state: working MPS, MPO cores and environment caches."""

    def __init__(self, mpo: MPO, mps: MPS, opts: DmrgOptions):
        if mps.phys_dims != mpo.phys_dims:
            raise errors.ShapeMismatch(
                f"MPS dims {mps.phys_dims} do not match MPO dims {mpo.phys_dims}."
            )
        self.opts = opts
        self.mpo = mpo
        self.mps = mps.copy()
        self.mps.canonicalize(0)
        self.mps.normalize()

        n = self.mps.n_sites
        ones = np.ones((1, 1, 1), dtype=complex)
        self.left: List[Optional[CMatrix]] = [ones] + [None] * n
        self.right: List[Optional[CMatrix]] = [None] * n + [ones]
        for k in range(n - 1, 0, -1):
            self.right[k] = update_right(self.right[k + 1], self.mps.cores[k], mpo.cores[k])

    @property
    def n_sites(self) -> int:
        return self.mps.n_sites

    def focus(self, site: int) -> None:
        """Moves the center to `site` and rebuilds the environments it needs."""
        self.mps.canonicalize(site)
        for k in range(site):
            self.left[k + 1] = update_left(self.left[k], self.mps.cores[k], self.mpo.cores[k])
        for k in range(self.n_sites - 1, site, -1):
            self.right[k] = update_right(self.right[k + 1], self.mps.cores[k], self.mpo.cores[k])

    def set_core(self, site: int, core: CMatrix) -> None:
        """Swaps one MPO core; environments touching it are rebuilt on the next pass."""
        self.mpo = self.mpo.with_core(site, core)

    def site_energy(self, site: int, core: Optional[CMatrix] = None) -> float:
        """<psi|H|psi> with the center at `site`, optionally with a trial MPO core there."""
        if self.mps.center != site:
            raise errors.IntegrityError(f"Canonical center is {self.mps.center}, not {site}.")
        W = self.mpo.cores[site] if core is None else core
        A = self.mps.cores[site]
        Hv = one_site_matvec(self.left[site], W, self.right[site + 1], A)
        return float(np.vdot(A, Hv).real / np.vdot(A, A).real)

    def solve_one_site(self, site: int, maxiter: int) -> float:
        L, R = self.left[site], self.right[site + 1]
        W = self.mpo.cores[site]
        energy, v = lowest_eigenpair(
            lambda x: one_site_matvec(L, W, R, x), self.mps.cores[site], self.opts.eig_tol, maxiter
        )
        self.mps.cores[site] = v / np.linalg.norm(v)
        logger.debug("site %d: E=%.12g", site, energy)
        return energy

    def solve_two_site(self, site: int, chi: int, maxiter: int, moving_right: bool) -> float:
        L, R = self.left[site], self.right[site + 2]
        W1, W2 = self.mpo.cores[site], self.mpo.cores[site + 1]
        A, B = self.mps.cores[site], self.mps.cores[site + 1]
        theta = np.tensordot(A, B, axes=([2], [0]))
        energy, v = lowest_eigenpair(
            lambda x: two_site_matvec(L, W1, W2, R, x), theta, self.opts.eig_tol, maxiter
        )
        bl, d1, d2, br = v.shape
        U, s, Vh, _, discarded = svd_truncate(v.reshape(bl * d1, d2 * br), chi)
        s = s / np.linalg.norm(s)
        if moving_right:
            self.mps.cores[site] = U.reshape(bl, d1, -1)
            self.mps.cores[site + 1] = (s[:, None] * Vh).reshape(-1, d2, br)
            self.mps.center = site + 1
            self.left[site + 1] = update_left(self.left[site], self.mps.cores[site], W1)
        else:
            self.mps.cores[site] = (U * s[None, :]).reshape(bl, d1, -1)
            self.mps.cores[site + 1] = Vh.reshape(-1, d2, br)
            self.mps.center = site
            self.right[site + 1] = update_right(self.right[site + 2], self.mps.cores[site + 1], W2)
        logger.debug("sites %d,%d: E=%.12g discarded=%.3e", site, site + 1, energy, discarded.sum())
        return energy

    def _max_bond(self, cut: int) -> int:
        dims = self.mps.phys_dims
        return int(min(np.prod(dims[:cut]), np.prod(dims[cut:])))

    def move_center(self, site: int, moving_right: bool, chi: int) -> None:
        """Shifts the center one site, growing the bond towards chi with zero-weight directions."""
        rng = np.random.Generator(np.random.Philox(self.opts.seed + site))
        A = self.mps.cores[site]
        bl, d, br = A.shape
        if moving_right:
            B = self.mps.cores[site + 1]
            grow = max(0, min(chi, self._max_bond(site + 1), bl * d) - br)
            if grow:
                A = np.concatenate([A, GROWTH_NOISE * rng.normal(size=(bl, d, grow))], axis=2)
                B = np.concatenate([B, np.zeros((grow,) + B.shape[1:], dtype=complex)], axis=0)
            Q, R = linalg.qr(A.reshape(bl * d, -1), mode="economic")
            self.mps.cores[site] = Q.reshape(bl, d, -1)
            self.mps.cores[site + 1] = np.tensordot(R, B, axes=([1], [0]))
            self.mps.center = site + 1
            self.left[site + 1] = update_left(
                self.left[site], self.mps.cores[site], self.mpo.cores[site]
            )
        else:
            B = self.mps.cores[site - 1]
            grow = max(0, min(chi, self._max_bond(site), d * br) - bl)
            if grow:
                A = np.concatenate([A, GROWTH_NOISE * rng.normal(size=(grow, d, br))], axis=0)
                B = np.concatenate([B, np.zeros(B.shape[:2] + (grow,), dtype=complex)], axis=2)
            Q, R = linalg.qr(A.reshape(A.shape[0], d * br).T, mode="economic")
            self.mps.cores[site] = Q.T.reshape(-1, d, br)
            self.mps.cores[site - 1] = np.tensordot(B, R.T, axes=([2], [0]))
            self.mps.center = site - 1
            self.right[site] = update_right(
                self.right[site + 1], self.mps.cores[site], self.mpo.cores[site]
            )

    def sweep_one_site(self, sweep: int, chi: int) -> float:
        maxiter = iteration_cap(sweep, self.opts.eig_maxiter)
        n = self.n_sites
        energy = 0.0
        for site in range(n):
            energy = self.solve_one_site(site, maxiter)
            if site < n - 1:
                self.move_center(site, True, chi)
        for site in range(n - 1, -1, -1):
            energy = self.solve_one_site(site, maxiter)
            if site > 0:
                self.move_center(site, False, chi)
        return energy

    def sweep_two_site(self, sweep: int, chi: int) -> float:
        maxiter = iteration_cap(sweep, self.opts.eig_maxiter)
        n = self.n_sites
        energy = 0.0
        for site in range(n - 1):
            energy = self.solve_two_site(site, chi, maxiter, moving_right=True)
        for site in range(n - 2, -1, -1):
            energy = self.solve_two_site(site, chi, maxiter, moving_right=False)
        return energy

    def sweep(self, sweep: int, chi: int) -> float:
        if self.opts.mode == "one-site" or self.n_sites == 1:
            return self.sweep_one_site(sweep, chi)
        return self.sweep_two_site(sweep, chi)

    def result(self, trace: List[float], converged: bool) -> DmrgResult:
        mps = self.mps.copy()
        mps.normalize()
        report = energy_report(mps, self.mpo, self.opts.resource_cap)
        return DmrgResult(mps=mps, report=report, trace=trace, converged=converged)


def dmrg(mpo: MPO, chi_max: int, opts: Optional[DmrgOptions] = None, initial: Optional[MPS] = None) -> DmrgResult:
    """Ground-state search.

    Args:
        mpo (MPO): Hermitian Hamiltonian.
        chi_max (int): largest bond dimension.
        opts (DmrgOptions, optional): sweep settings. Defaults to DmrgOptions().
        initial (MPS, optional): warm start; a random MPS from opts.seed otherwise.

    Returns:
        DmrgResult: normalized state, energy report, per-sweep energy trace.

    Raises:
        NoConvergence: only with opts.strict, when the sweep budget runs out.
    """

    opts = opts or DmrgOptions()
    if chi_max < 1:
        raise errors.ConfigError(f"chi_max must be positive, got {chi_max}.")
    if initial is None:
        initial = MPS.random(mpo.phys_dims, min(opts.chi_start, chi_max), opts.seed)
    engine = DmrgEngine(mpo, initial, opts)

    if opts.mode == "one-site":
        chis = chi_schedule(opts.chi_start, chi_max, opts.sweeps)
    else:
        chis = [chi_max] * opts.sweeps

    trace: List[float] = []
    converged = False
    for sweep, chi in enumerate(chis):
        energy = engine.sweep(sweep, chi)
        trace.append(energy)
        logger.info("DMRG sweep %d (chi=%d): E=%.12g", sweep + 1, chi, energy)
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) < opts.tol_energy and chi == chi_max:
            converged = True
            break

    result = engine.result(trace, converged)
    if not converged:
        message = f"DMRG did not converge in {opts.sweeps} sweeps (E={result.energy:.6g})."
        if opts.strict:
            raise errors.NoConvergence(message, result)
        logger.warning(message)
    return result
