"""Dense-oracle cross-checks run by `vartn validate`.

Each suite builds small instances, compares the tensor-network machinery
with the dense oracle and returns a CheckResult. Level "fast" runs a few
instances per suite, "full" runs the counts the acceptance gate asks for.
"""

from dataclasses import asdict, dataclass
from math import comb
from typing import Callable, Dict, List, Sequence

import numpy as np
from logzero import logger

from . import errors
from .dmrg import DmrgOptions, dmrg
from .fock import BasisParams, ladder_arrays, plbo_unitary_matrix, transformed_ladder_array
from .gaussian import CovarianceState, random_pure_covariance
from .lbo import plan_optimal_basis, truncation_bound_check
from .mpo import MPO, HamiltonianSpec, fock_operators, full_hamiltonian_mpo
from .mps import MPS, from_dense
from .oracle import (
    DenseState,
    dense_expectation,
    dense_ground,
    dense_hamiltonian,
    interlacing_residual,
)
from .plbo import site_energy, site_gradient

LEVELS = ("fast", "full")
MPO_TOL = 1e-8
SPECTRUM_TOL = 1e-10
INTERLACING_TOL = 1e-10
COMPRESSION_SLACK = 1e-12
LADDER_TOL = 1e-6
GRADIENT_ABS_TOL = 1e-5
GRADIENT_REL_TOL = 1e-3
FIDELITY_SLACK = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def random_spec(n_modes: int, seed: int, kappa: float = 0.0, squeeze_max: float = 0.4) -> HamiltonianSpec:
    """Random pure target with a small random displacement."""
    state = random_pure_covariance(n_modes, squeeze_max, seed)
    mean = _generator(seed + 7919).normal(scale=0.3, size=2 * n_modes)
    return HamiltonianSpec(CovarianceState(n_modes, state.V, mean), kappa=kappa)


def hamiltonian_mpo(spec: HamiltonianSpec, D: int) -> MPO:
    return full_hamiltonian_mpo(spec, fock_operators(spec, D))


def check_mpo_equivalence(level: str, seed: int = 0) -> CheckResult:
    cases = [(n, D, kappa) for kappa in (0.0, 0.1, 0.3) for n in (2, 3) for D in (3, 4, 5)]
    cases = [c for c in cases if c[1] ** c[0] <= 125]
    if level == "fast":
        cases = cases[::3]
    else:
        cases = (cases * 2)[:20]

    worst = 0.0
    for k, (n, D, kappa) in enumerate(cases):
        spec = random_spec(n, seed + k, kappa)
        err = float(np.max(np.abs(hamiltonian_mpo(spec, D).to_dense() - dense_hamiltonian(spec, D).toarray())))
        logger.debug("mpo_equivalence N=%d D=%d kappa=%g: %.3e", n, D, kappa, err)
        worst = max(worst, err)
    return CheckResult("mpo_equivalence", worst < MPO_TOL, f"max error {worst:.3e} over {len(cases)} instances")


def check_harmonic_spectrum(level: str, seed: int = 0) -> CheckResult:  # pylint: disable=unused-argument
    """Vacuum spectrum below the truncation edge is 0, 1, 2, ... with multinomial degeneracies."""
    cases = [(2, 4)] if level == "fast" else [(2, 4), (2, 6), (3, 3)]
    worst = 0.0
    for n, D in cases:
        vacuum = HamiltonianSpec(CovarianceState(n, np.eye(2 * n) / 2))
        H = hamiltonian_mpo(vacuum, D).to_dense()
        w = np.sort(np.linalg.eigvalsh((H + H.conj().T) / 2))
        expected = np.concatenate([np.full(comb(m + n - 1, n - 1), float(m)) for m in range(D)])
        worst = max(worst, float(np.max(np.abs(w[: expected.size] - expected))))
    return CheckResult("harmonic_spectrum", worst < SPECTRUM_TOL, f"max deviation {worst:.3e}")


def check_interlacing(level: str, seed: int = 0) -> CheckResult:
    count = 2 if level == "fast" else 5
    worst = 0.0
    for k in range(count):
        spec = random_spec(2, seed + 100 + k)
        worst = max(worst, interlacing_residual(spec, 4, 5))
    return CheckResult("interlacing", worst <= INTERLACING_TOL, f"max violation {worst:.3e}")


def check_truncation_bound(level: str, seed: int = 0) -> CheckResult:
    n, D, dims = (3, 5, (1, 2)) if level == "fast" else (4, 6, (1, 2, 3))
    ratios = []
    for k in range(2 if level == "fast" else 3):
        state = random_pure_covariance(n, 0.3, seed + 200 + k)
        for d in dims:
            plan = plan_optimal_basis(state, d)
            try:
                eps_D, eps, ratio = truncation_bound_check(state, plan, D)
            except errors.BoundViolation as e:
                return CheckResult("truncation_bound", False, str(e))
            logger.debug("truncation_bound N=%d d=%d: eps=%.3e eps_D=%.3e", n, d, eps, eps_D)
            ratios.append(ratio)
    low = min(ratios)
    return CheckResult(
        "truncation_bound",
        low >= 1.0 / n - 1e-9,
        f"{len(ratios)} points, eps/eps_D in [{low:.3f}, {max(ratios):.3f}]",
    )


def check_compression_bound(level: str, seed: int = 0) -> CheckResult:
    count = 10 if level == "fast" else 50
    rng = _generator(seed + 300)
    worst = -np.inf
    for _ in range(count):
        psi = rng.normal(size=64) + 1j * rng.normal(size=64)
        psi /= np.linalg.norm(psi)
        mps, report = from_dense(psi, [4, 4, 4], 2)
        error = float(np.linalg.norm(psi - mps.to_dense()) ** 2)
        worst = max(worst, error - report.eps_chi_surrogate)
    return CheckResult(
        "compression_bound",
        worst <= COMPRESSION_SLACK,
        f"max(error - surrogate) = {worst:.3e} over {count} states",
    )


def check_fidelity_bound(level: str, seed: int = 0) -> CheckResult:
    """F >= 1 - <H> for converged DMRG states with <H> < 1, against the dense ground state."""
    count, cutoffs, chis = (2, (3, 4), (1, 2)) if level == "fast" else (10, (3, 4, 5), (1, 2, 3, 4))
    worst, checked = -np.inf, 0
    for k in range(count):
        spec = random_spec(3, seed + 600 + k)
        for D in cutoffs:
            _, ground = dense_ground(dense_hamiltonian(spec, D))
            H = hamiltonian_mpo(spec, D)
            for chi in chis:
                result = dmrg(H, chi, DmrgOptions(seed=seed + k))
                if not result.converged or result.energy >= 1:
                    continue
                psi = result.mps.to_dense()
                fidelity = abs(np.vdot(ground.amplitudes, psi)) ** 2 / np.vdot(psi, psi).real
                worst = max(worst, (1 - result.energy) - fidelity)
                checked += 1
    return CheckResult(
        "fidelity_bound",
        checked > 0 and worst <= FIDELITY_SLACK,
        f"max(1 - E - F) = {worst:.3e} over {checked} converged runs",
    )


def _random_params(rng: np.random.Generator, scale: float = 0.2) -> BasisParams:
    values = rng.uniform(-scale, scale, size=len(BasisParams.names()))
    # keep the non-Gaussian gates gentle so the dense reference stays exact
    values[-2:] *= 0.25
    return BasisParams.from_array(values)


def check_ladder_consistency(level: str, seed: int = 0) -> CheckResult:
    count = 5 if level == "fast" else 20
    D, D_big = 8, 48
    rng = _generator(seed + 400)
    a = ladder_arrays(D_big)["a"]
    worst = 0.0
    for _ in range(count):
        params = _random_params(rng)
        # columns below D must be resolved well inside D_big
        U = plbo_unitary_matrix(params, D_big, D)
        conjugated = U.conj().T @ a @ U
        worst = max(worst, float(np.max(np.abs(conjugated - transformed_ladder_array(params, D)))))
    return CheckResult("ladder_consistency", worst < LADDER_TOL, f"max error {worst:.3e}")


def _with_site(params_all: Sequence[BasisParams], site: int, params: BasisParams) -> List[BasisParams]:
    updated = list(params_all)
    updated[site] = params
    return updated


def check_gradient(level: str, seed: int = 0) -> CheckResult:
    D = 4 if level == "fast" else 6
    rng = _generator(seed + 500)
    spec = random_spec(2, seed + 500, kappa=0.1, squeeze_max=0.3)
    params_all = [_random_params(rng, 0.1) for _ in range(2)]
    mps = MPS.random([D, D], 2, seed + 500)
    mps.canonicalize(0)
    mps.normalize()
    dense_state = DenseState((D, D), mps.to_dense())

    site = 0

    def energy(params: BasisParams) -> float:
        return site_energy(spec, _with_site(params_all, site, params), mps, site)

    def dense_energy(params: BasisParams) -> float:
        op = dense_hamiltonian(spec, D, basis_params=_with_site(params_all, site, params))
        return dense_expectation(op, dense_state)

    grad, norm = site_gradient(energy, params_all[site], 1e-5)
    reference, _ = site_gradient(dense_energy, params_all[site], 1e-4)
    tol = max(GRADIENT_ABS_TOL, GRADIENT_REL_TOL * norm)
    worst = float(np.max(np.abs(grad - reference))) / tol
    return CheckResult("gradient_check", worst <= 1.0, f"max error / tolerance = {worst:.3f}")


SUITES: Dict[str, Callable[[str, int], CheckResult]] = {
    "mpo_equivalence": check_mpo_equivalence,
    "harmonic_spectrum": check_harmonic_spectrum,
    "interlacing": check_interlacing,
    "truncation_bound": check_truncation_bound,
    "compression_bound": check_compression_bound,
    "fidelity_bound": check_fidelity_bound,
    "ladder_consistency": check_ladder_consistency,
    "gradient_check": check_gradient,
}


def run_validation(level: str = "fast", seed: int = 0, suites: Sequence[str] = ()) -> List[CheckResult]:
    """Runs the named suites (all by default). A suite that raises counts as failed."""
    if level not in LEVELS:
        raise errors.ConfigError(f"Validation level must be one of {', '.join(LEVELS)}.")
    names = list(suites) or list(SUITES)
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise errors.ConfigError(f"Unknown validation suites: {', '.join(unknown)}")

    results = []
    for name in names:
        try:
            result = SUITES[name](level, seed)
        except errors.VartnError as e:
            result = CheckResult(name, False, str(e))
        logger.info("%s: %s (%s)", name, "passed" if result.passed else "FAILED", result.detail)
        results.append(result)
    return results


def assert_passed(results: Sequence[CheckResult]) -> None:
    for result in results:
        if not result.passed:
            raise errors.InvariantViolation(result.name, result.detail)
