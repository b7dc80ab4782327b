"""Simulation pipelines behind the gbs, nongauss and sample subcommands.

Every instance runs single-threaded and deterministically from the run
configuration and its instance index; `run_pipeline` fans the instances out
over the worker pool and returns reports in instance order.
"""

import csv
import os
import time

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from logzero import logger

import vartn

from . import batch, constants, errors, utils
from .dmrg import DmrgOptions, dmrg
from .fock import CMatrix, plbo_unitary_matrix
from .gaussian import (
    CovarianceState,
    apply_loss,
    load_covariance,
    photon_number_stats,
    random_pure_covariance,
    split_noise,
)
from .lbo import LocalBasisPlan, plan_optimal_basis, truncation_bound_check
from .mpo import HamiltonianSpec, LocalBasis, apply_basis, full_hamiltonian_mpo
from .mps import MPS, EnergyReport, apply_site_matrices, compress, save_checkpoint
from .oracle import dense_ground, dense_hamiltonian
from .plbo import PlboConfig, PlboResult, run_plbo
from .reporting import format_float, seconds_to_text
from .sampling import (
    SampleBatch,
    empirical_mean_photons,
    noisy_sample,
    write_displacements_csv,
    write_samples_csv,
)

PIPELINES = ("gbs", "nongauss", "sample")

Amplitude = Tuple[Tuple[int, ...], complex]


@dataclass
class Solution:
    """Variational ground state in its local basis plus the maps back to Fock space."""

    mps: MPS
    report: EnergyReport
    converged: bool
    trace: List[float]
    to_fock: Optional[List[CMatrix]]
    effective_cutoffs: List[int]
    plan: Optional[LocalBasisPlan] = None
    plbo: Optional[PlboResult] = None

    def fock_mps(self) -> MPS:
        if self.to_fock is None:
            return self.mps
        return apply_site_matrices(self.mps, self.to_fock)


@dataclass
class SimulationReport:
    kind: str
    instance: int
    seed: int
    config: Dict[str, Any]
    n_modes: int
    basis: str
    kappa: float
    energy: float
    variance: float
    converged: bool
    trace: List[float]
    local_dims: List[int]
    effective_cutoffs: List[int]
    eps_chi_surrogate: float
    amplitudes: List[Amplitude] = field(default_factory=list)
    plan: Optional[Dict[str, Any]] = None
    plbo: Optional[Dict[str, Any]] = None
    eps_D: Optional[float] = None
    eps_ratio: Optional[float] = None
    oracle_energy: Optional[float] = None
    fidelity_oracle: Optional[float] = None
    sampling: Optional[Dict[str, Any]] = None
    seconds: float = 0.0
    samples: Optional[SampleBatch] = None
    state: Optional[MPS] = None

    @property
    def sigma_H(self) -> float:
        return float(np.sqrt(max(self.variance, 0.0)))

    @property
    def config_hash(self) -> str:
        return utils.config_hash(self.config)

    def to_dict(self) -> Dict[str, Any]:
        return utils.jsonable(
            {
                "kind": self.kind,
                "instance": self.instance,
                "seed": self.seed,
                "version": vartn.__version__,
                "config_hash": self.config_hash,
                "config": self.config,
                "n_modes": self.n_modes,
                "basis": self.basis,
                "kappa": self.kappa,
                "energy": self.energy,
                "variance": self.variance,
                "sigma_H": self.sigma_H,
                "converged": self.converged,
                "trace": self.trace,
                "local_dims": self.local_dims,
                "effective_cutoffs": self.effective_cutoffs,
                "eps_chi_surrogate": self.eps_chi_surrogate,
                "eps_D": self.eps_D,
                "eps_ratio": self.eps_ratio,
                "oracle_energy": self.oracle_energy,
                "fidelity_oracle": self.fidelity_oracle,
                "plan": self.plan,
                "plbo": self.plbo,
                "sampling": self.sampling,
                "amplitudes": [
                    {"n": list(occ), "re": amp.real, "im": amp.imag, "prob": abs(amp) ** 2}
                    for occ, amp in self.amplitudes
                ],
                "timing": {"seconds": self.seconds, "text": seconds_to_text(self.seconds)},
            }
        )

    def summary_row(self) -> Dict[str, Any]:
        return {
            "Instance": self.instance,
            "Basis": self.basis,
            "Modes": self.n_modes,
            "Energy": format_float(self.energy),
            "Sigma H": format_float(self.sigma_H, 4),
            "Eps Chi": format_float(self.eps_chi_surrogate, 4),
            "Eps D": format_float(self.eps_D, 4),
            "Fidelity": format_float(self.fidelity_oracle),
            "Converged": self.converged,
            "Time": seconds_to_text(self.seconds),
        }


def instance_seed(config: Dict[str, Any], instance: int) -> int:
    return int(config["seed"]) + instance


def build_state(config: Dict[str, Any], instance: int) -> CovarianceState:
    """Covariance of one instance: loaded from file or drawn at random, then lossy if requested."""
    if config["covariance_file"]:
        state = load_covariance(config["covariance_file"])
    else:
        state = random_pure_covariance(
            config["n_modes"], config["squeeze_max"], instance_seed(config, instance)
        )
    if config["loss"] > 0:
        state = apply_loss(state, 1.0 - config["loss"])
    return state


def pure_part(state: CovarianceState) -> CovarianceState:
    if state.is_pure():
        return state
    logger.info("Target is mixed; simulating the pure part of its noise split.")
    return split_noise(state.V, state.mean).Q


def dmrg_options(config: Dict[str, Any], seed: int) -> DmrgOptions:
    return DmrgOptions(
        mode=config["dmrg_mode"],
        sweeps=config["sweeps"],
        tol_energy=config["tol_energy"],
        eig_tol=config["eig_tol"],
        eig_maxiter=config["eig_maxiter"],
        seed=seed,
        resource_cap=config["resource_cap"],
    )


def plbo_config(config: Dict[str, Any], seed: int) -> PlboConfig:
    return PlboConfig(
        local_dim=config["local_dim"],
        fd_step=config["plbo_fd_step"],
        learn_rate=config["plbo_learn_rate"],
        moment_decays=(config["plbo_beta1"], config["plbo_beta2"]),
        steps_per_site=config["plbo_steps_per_site"],
        backtracks=config["plbo_backtracks"],
        sweeps=config["plbo_sweeps"],
        warmup_chi=config["plbo_warmup_chi"],
        final_chi=config["chi_max"],
        seed=seed,
        cutoff_tol=config["cutoff_tol"],
        cutoff_max=config["cutoff_max"],
        dmrg=dmrg_options(config, seed),
    )


def solve(spec: HamiltonianSpec, config: Dict[str, Any], seed: int) -> Solution:
    """Ground state of the sampling Hamiltonian in the configured local basis.

    Args:
        spec (HamiltonianSpec): pure target and CZ strength.
        config (Dict): validated run configuration.
        seed (int): instance seed.

    Returns:
        Solution: the state plus the D x d maps to Fock amplitudes at `cutoff`.
    """

    basis, D, d = config["basis"], config["cutoff"], config["local_dim"]
    n = spec.n_modes

    if basis == "fock":
        mpo = full_hamiltonian_mpo(spec, apply_basis(spec, LocalBasis("fock"), D))
        result = dmrg(mpo, config["chi_max"], dmrg_options(config, seed))
        return Solution(result.mps, result.report, result.converged, result.trace, None, [D] * n)

    if basis == "olb":
        plan = plan_optimal_basis(
            spec.state,
            d,
            config["local_dim_rule"],
            config["eps_target"],
            config["cutoff_tol"],
            config["cutoff_max"],
        )
        mpo = full_hamiltonian_mpo(spec, apply_basis(spec, plan.local_basis(), plan.dims))
        result = dmrg(mpo, config["chi_max"], dmrg_options(config, seed))
        return Solution(
            result.mps,
            result.report,
            result.converged,
            result.trace,
            [m.matrix(D) for m in plan.modes],
            plan.effective_cutoffs,
            plan=plan,
        )

    plbo = run_plbo(spec, plbo_config(config, seed))
    return Solution(
        plbo.mps,
        plbo.report,
        plbo.converged,
        list(plbo.phase_energies.values()),
        [plbo_unitary_matrix(p, D, d) for p in plbo.params],
        plbo.effective_cutoffs,
        plbo=plbo,
    )


def oracle_extras(
    spec: HamiltonianSpec, solution: Solution, config: Dict[str, Any]
) -> Dict[str, Optional[float]]:
    """Fidelity against the dense ground state and, for olb on Gaussian targets, eps_D."""
    D, n, cap = config["cutoff"], spec.n_modes, config["oracle_cap"]
    if D**n > cap:
        logger.warning("Skipping the dense oracle: %d^%d exceeds oracle_cap=%d.", D, n, cap)
        return {}

    energy, ground = dense_ground(dense_hamiltonian(spec, D, cap))
    psi = solution.fock_mps().to_dense()
    fidelity = abs(np.vdot(ground.amplitudes, psi)) ** 2 / np.vdot(psi, psi).real
    extras: Dict[str, Optional[float]] = {
        "oracle_energy": energy,
        "fidelity_oracle": float(fidelity),
    }
    if solution.plan is not None and spec.kappa == 0:
        eps_D, _, ratio = truncation_bound_check(spec.state, solution.plan, D, cap)
        extras.update(eps_D=eps_D, eps_ratio=ratio)
    logger.info("Oracle: E=%.12g F=%.12g", energy, fidelity)
    return extras


def run_instance(task: Tuple[str, Dict[str, Any], int]) -> SimulationReport:
    """One instance of a pipeline; module-level so worker processes can pickle it."""
    kind, config, instance = task
    if kind not in PIPELINES:
        raise errors.ConfigError(f"Unknown pipeline: {kind}")

    start = time.perf_counter()
    seed = instance_seed(config, instance)
    state = build_state(config, instance)

    kappa = config["kappa"] if kind == "nongauss" else 0.0
    if kind != "nongauss" and config["kappa"] != 0:
        logger.warning("Ignoring kappa=%g in the %s pipeline.", config["kappa"], kind)
    spec = HamiltonianSpec(pure_part(state), kappa=kappa)

    logger.info("Instance %d: %s pipeline, %d modes, basis %s.", instance, kind, spec.n_modes, config["basis"])
    solution = solve(spec, config, seed)
    _, compression = compress(solution.mps, config["chi_max"])

    report = SimulationReport(
        kind=kind,
        instance=instance,
        seed=seed,
        config=config,
        n_modes=spec.n_modes,
        basis=config["basis"],
        kappa=kappa,
        energy=solution.report.energy,
        variance=solution.report.variance,
        converged=solution.converged,
        trace=solution.trace,
        local_dims=solution.mps.phys_dims,
        effective_cutoffs=solution.effective_cutoffs,
        eps_chi_surrogate=compression.eps_chi_surrogate,
        plan=None if solution.plan is None else solution.plan.to_dict(),
        plbo=None if solution.plbo is None else solution.plbo.to_dict(),
        state=solution.mps,
    )

    if config["oracle"]:
        for key, value in oracle_extras(spec, solution, config).items():
            setattr(report, key, value)

    fock = solution.fock_mps()
    if kind == "sample":
        split = split_noise(state.V, state.mean)
        samples = noisy_sample(state.V, fock, config["samples"], seed, C=split.C)
        report.samples = samples
        report.sampling = {
            "count": samples.count,
            "mean_photons": empirical_mean_photons(samples.samples),
            "predicted_total_photons": photon_number_stats(state)[0],
            "max_leaked_weight": float(samples.leaked.max()) if samples.count else 0.0,
        }
    else:
        report.amplitudes = fock.amplitudes_upto(config["max_total_photons"])

    report.seconds = time.perf_counter() - start
    return report


async def run_pipeline(
    kind: str, config: Dict[str, Any], workers: Optional[int] = None
) -> List[SimulationReport]:
    tasks = [(kind, config, k) for k in range(config["instances"])]
    return await batch.map_instances(run_instance, tasks, workers)


def _instance_file(name: str, instance: int, many: bool) -> str:
    if not many:
        return name
    stem, ext = os.path.splitext(name)
    return f"{stem}_{instance}{ext}"


def write_amplitudes_csv(amplitudes: List[Amplitude], n_modes: int, path: str) -> None:
    with open(os.path.expanduser(path), mode="w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([f"n_{k + 1}" for k in range(n_modes)] + ["re", "im", "prob"])
        for occ, amp in amplitudes:
            writer.writerow(
                list(occ) + [repr(amp.real), repr(amp.imag), repr(abs(amp) ** 2)]
            )


def write_outputs(reports: List[SimulationReport], out_dir: str) -> List[str]:
    """Writes report.json, the per-instance amplitude or sample files and state checkpoints.

    Returns:
        List[str]: paths written.
    """

    out_dir = utils.ensure_dir(out_dir)
    many = len(reports) > 1
    written = [os.path.join(out_dir, constants.REPORT_FILE)]
    utils.write_json([r.to_dict() for r in reports], written[0])

    for r in reports:
        if r.samples is not None:
            samples = os.path.join(out_dir, _instance_file(constants.SAMPLES_FILE, r.instance, many))
            shifts = os.path.join(out_dir, _instance_file(constants.DISPLACEMENTS_FILE, r.instance, many))
            write_samples_csv(r.samples, samples)
            write_displacements_csv(r.samples, shifts)
            written += [samples, shifts]
        else:
            path = os.path.join(out_dir, _instance_file(constants.AMPLITUDES_FILE, r.instance, many))
            write_amplitudes_csv(r.amplitudes, r.n_modes, path)
            written.append(path)
        if r.state is not None:
            checkpoint = os.path.join(out_dir, _instance_file(constants.CHECKPOINT_FILE, r.instance, many))
            save_checkpoint(r.state, checkpoint)
            written.append(checkpoint)

    for path in written:
        logger.info("Wrote %s", path)
    return written
