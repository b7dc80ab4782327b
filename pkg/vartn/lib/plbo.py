"""Parameterized local basis optimization.

Each site carries BasisParams for the unitary D S R P2 P3 K. The Hamiltonian
is written in the learned bases through the transformed ladder operator, so
changing one site's parameters only rebuilds that site's MPO core.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from logzero import logger

from . import errors
from .dmrg import DmrgEngine, DmrgOptions, DmrgResult, chi_schedule, dmrg, iteration_cap
from .fock import BasisParams, effective_cutoff
from .mpo import (
    MPO,
    HamiltonianSpec,
    LocalBasis,
    apply_basis,
    full_hamiltonian_core,
    full_hamiltonian_mpo,
    plbo_local_operators,
)
from .mps import MPS, EnergyReport, energy_report

FALLBACK_SLACK = 1e-9
ADAM_EPS = 1e-8
GRADIENT_FLOOR = 1e-6


@dataclass(frozen=True)
class PlboConfig:
    local_dim: int = 6
    fd_step: float = 1e-5
    learn_rate: float = 1e-2
    moment_decays: Tuple[float, float] = (0.9, 0.999)
    steps_per_site: int = 10
    backtracks: int = 8
    sweeps: int = 4
    warmup_chi: int = 6
    final_chi: int = 16
    seed: int = 0
    cutoff_tol: float = 1e-10
    cutoff_max: int = 256
    dmrg: DmrgOptions = field(default_factory=DmrgOptions)

    def __post_init__(self) -> None:
        if not 0 < self.fd_step <= 1e-2:
            raise errors.ConfigError(f"fd_step must lie in (0, 1e-2], got {self.fd_step}.")
        if not all(0 < b < 1 for b in self.moment_decays):
            raise errors.ConfigError(f"Moment decays must lie in (0, 1), got {self.moment_decays}.")
        if self.learn_rate <= 0 or self.steps_per_site < 0 or self.sweeps < 0 or self.backtracks < 0:
            raise errors.ConfigError("learn_rate must be positive, step, backtrack and sweep counts non-negative.")
        if self.local_dim < 2 or self.warmup_chi < 1 or self.final_chi < 1:
            raise errors.ConfigError("local_dim must be at least 2 and bond dimensions positive.")


@dataclass
class PlboResult:
    params: List[BasisParams]
    mps: MPS
    report: EnergyReport
    effective_cutoffs: List[int]
    fock_energy: float = float("nan")
    phase_energies: Dict[str, float] = field(default_factory=dict)
    fell_back: bool = False
    converged: bool = True

    def mpo(self, spec: HamiltonianSpec, local_dim: int) -> MPO:
        return plbo_mpo(spec, self.params, local_dim)

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.report.to_dict(),
            "fock_energy": self.fock_energy,
            "phase_energies": self.phase_energies,
            "fell_back": self.fell_back,
            "effective_cutoffs": self.effective_cutoffs,
            "params": [p.to_dict() for p in self.params],
        }


def plbo_mpo(spec: HamiltonianSpec, params_all: Sequence[BasisParams], local_dim: int) -> MPO:
    local_ops = apply_basis(spec, LocalBasis("plbo", params=list(params_all)), local_dim)
    return full_hamiltonian_mpo(spec, local_ops)


def site_core(spec: HamiltonianSpec, params: BasisParams, site: int, local_dim: int) -> np.ndarray:
    return full_hamiltonian_core(spec, plbo_local_operators(params, local_dim), site)


def site_energy(
    spec: HamiltonianSpec, params_all: Sequence[BasisParams], mps: MPS, site: int
) -> float:
    """<psi|H(params)|psi> evaluated through the environments of `site`."""
    if mps.center != site:
        raise errors.IntegrityError(f"Canonical center is {mps.center}, not {site}.")
    local_dim = mps.phys_dims[site]
    engine = DmrgEngine(plbo_mpo(spec, params_all, local_dim), mps, DmrgOptions())
    engine.focus(site)
    return engine.site_energy(site)


def site_gradient(
    energy, params: BasisParams, fd_step: float
) -> Tuple[np.ndarray, float]:
    """Central finite differences with step fd_step * max(1, |p|) per parameter."""
    p = params.as_array()
    grad = np.zeros_like(p)
    for j in range(p.size):
        h = fd_step * max(1.0, abs(p[j]))
        up, down = p.copy(), p.copy()
        up[j] += h
        down[j] -= h
        grad[j] = (energy(BasisParams.from_array(up)) - energy(BasisParams.from_array(down))) / (2 * h)
    return grad, float(np.linalg.norm(grad))


def optimize_site(
    spec: HamiltonianSpec,
    params_all: Sequence[BasisParams],
    mps: MPS,
    site: int,
    cfg: PlboConfig,
    engine: Optional[DmrgEngine] = None,
) -> BasisParams:
    """Adaptive-moment descent of one site's BasisParams at fixed MPS.

    Each step backtracks, halving the step until the energy drops; the site
    stops after a step that no halving rescues.

    Args:
        spec (HamiltonianSpec): problem instance.
        params_all (Sequence[BasisParams]): current parameters of every site.
        mps (MPS): current state, center at `site`.
        site (int): site to optimize.
        cfg (PlboConfig): optimizer settings.
        engine (DmrgEngine, optional): engine whose environments are reused.

    Returns:
        BasisParams: the best parameters seen; never worse than the input.
    """

    local_dim = mps.phys_dims[site]
    if engine is None:
        engine = DmrgEngine(plbo_mpo(spec, params_all, local_dim), mps, cfg.dmrg)
        engine.focus(site)

    def energy(params: BasisParams) -> float:
        return engine.site_energy(site, site_core(spec, params, site, local_dim))  # type: ignore[union-attr]

    start = params_all[site]
    best, best_energy = start, energy(start)
    p = start.as_array()
    m, v = np.zeros_like(p), np.zeros_like(p)
    beta1, beta2 = cfg.moment_decays
    scale = 1.0

    for step in range(1, cfg.steps_per_site + 1):
        grad, norm = site_gradient(energy, best, cfg.fd_step)
        if not np.all(np.isfinite(grad)):
            logger.warning("Non-finite gradient at site %d; keeping its parameters.", site)
            return start
        if norm == 0.0:
            break
        # finite-difference noise
        grad[np.abs(grad) <= GRADIENT_FLOOR * norm] = 0.0
        m = beta1 * m + (1 - beta1) * grad
        v = beta2 * v + (1 - beta2) * grad**2
        m_hat = m / (1 - beta1**step)
        v_hat = v / (1 - beta2**step)
        direction = m_hat / (np.sqrt(v_hat) + ADAM_EPS)

        accepted = False
        for _ in range(cfg.backtracks + 1):
            trial = BasisParams.from_array(p - cfg.learn_rate * scale * direction)
            trial_energy = energy(trial)
            if np.isfinite(trial_energy) and trial_energy < best_energy:
                accepted = True
                break
            scale /= 2
        logger.debug(
            "site %d step %d: E=%.12g |g|=%.3e scale=%.3g accepted=%s",
            site, step, trial_energy, norm, scale, accepted,
        )
        if not accepted:
            break
        best, best_energy = trial, trial_energy
        p = best.as_array()
        scale = min(1.0, 2 * scale)
    return best


def _cutoffs(params_all: Sequence[BasisParams], cfg: PlboConfig) -> List[int]:
    cutoffs = []
    for k, params in enumerate(params_all):
        try:
            cutoffs.append(effective_cutoff(params, cfg.local_dim, cfg.cutoff_tol, cfg.cutoff_max))
        except errors.CutoffNotReached:
            logger.warning("Site %d: effective cutoff exceeds %d.", k, cfg.cutoff_max)
            cutoffs.append(cfg.cutoff_max)
    return cutoffs


def _learn_bases(spec: HamiltonianSpec, start: MPS, cfg: PlboConfig) -> Tuple[List[BasisParams], MPS]:
    """Sweeps alternating basis optimization and one-site DMRG updates at warmup_chi."""
    n, D = spec.n_modes, cfg.local_dim
    params = [BasisParams() for _ in range(n)]
    engine = DmrgEngine(plbo_mpo(spec, params, D), start, cfg.dmrg)
    order = list(range(n)) + list(range(n - 1, -1, -1))

    for sweep in range(cfg.sweeps):
        maxiter = iteration_cap(sweep, cfg.dmrg.eig_maxiter)
        energy = float("nan")
        for position, site in enumerate(order):
            moving_right = position < n
            params[site] = optimize_site(spec, params, engine.mps, site, cfg, engine)
            engine.set_core(site, site_core(spec, params[site], site, D))
            energy = engine.solve_one_site(site, maxiter)
            if moving_right and site < n - 1:
                engine.move_center(site, True, cfg.warmup_chi)
            elif not moving_right and site > 0:
                engine.move_center(site, False, cfg.warmup_chi)
        logger.info("pLBO sweep %d: E=%.12g", sweep + 1, energy)

    mps = engine.mps.copy()
    mps.normalize()
    return params, mps


def _fock_warmup(fock_mpo: MPO, warmup_chi: int, opts: DmrgOptions) -> DmrgResult:
    """Fock-basis DMRG grown through the chi_schedule stages up to warmup_chi."""
    stages = sorted(set(chi_schedule(opts.chi_start, warmup_chi, opts.sweeps)) | {warmup_chi})
    warm = dmrg(fock_mpo, stages[0], opts)
    for chi in stages[1:]:
        warm = dmrg(fock_mpo, chi, opts, initial=warm.mps)
    return warm


def run_plbo(spec: HamiltonianSpec, cfg: PlboConfig) -> PlboResult:
    """Three phases: Fock-basis warmup, basis learning, final DMRG in the learned basis.

    Raises:
        NoConvergence: with cfg.dmrg.strict when the final DMRG does not converge;
            carries the best result.
    """

    D = cfg.local_dim
    opts = replace(cfg.dmrg, seed=cfg.seed, strict=False, chi_start=min(2, cfg.warmup_chi))
    fock_mpo = plbo_mpo(spec, [BasisParams()] * spec.n_modes, D)

    warm = _fock_warmup(fock_mpo, cfg.warmup_chi, opts)
    logger.info("pLBO phase 1 (Fock warmup): E=%.12g", warm.energy)
    fock = dmrg(fock_mpo, cfg.final_chi, opts, initial=warm.mps)

    params, learned_mps = _learn_bases(spec, warm.mps, cfg)
    learned_mpo = plbo_mpo(spec, params, D)
    learned_energy = energy_report(learned_mps, learned_mpo, opts.resource_cap).energy
    logger.info("pLBO phase 2 (basis learning): E=%.12g", learned_energy)

    final: DmrgResult = dmrg(learned_mpo, cfg.final_chi, opts, initial=learned_mps)
    logger.info("pLBO phase 3 (learned basis): E=%.12g", final.energy)

    phases = {"warmup": warm.energy, "learning": learned_energy, "final": final.energy}
    if final.energy > fock.energy + FALLBACK_SLACK:
        logger.warning(
            "pLBO energy %.6g above the Fock-basis energy %.6g; keeping the Fock result.",
            final.energy,
            fock.energy,
        )
        result = PlboResult(
            params=[BasisParams() for _ in range(spec.n_modes)],
            mps=fock.mps,
            report=fock.report,
            effective_cutoffs=[D] * spec.n_modes,
            fock_energy=fock.energy,
            phase_energies=phases,
            fell_back=True,
            converged=fock.converged,
        )
    else:
        result = PlboResult(
            params=params,
            mps=final.mps,
            report=final.report,
            effective_cutoffs=_cutoffs(params, cfg),
            fock_energy=fock.energy,
            phase_energies=phases,
            converged=final.converged,
        )

    if not result.converged and cfg.dmrg.strict:
        raise errors.NoConvergence("pLBO final DMRG did not converge.", result)
    return result
