"""Optimal local basis for Gaussian targets.

The reduced state of mode i is G_i tau(nbar_i) G_i^dag with tau thermal, so
its eigenvectors are G_i|m> with weights nbar^m / (nbar+1)^(m+1). G_i is a
displacement followed by rotation-squeeze-rotation read off the Williamson
decomposition of the 2x2 marginal.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from logzero import logger
from numpy.typing import NDArray
from scipy import linalg

from . import errors
from .fock import BasisParams, CMatrix, effective_cutoff, isometry_residual, plbo_unitary_matrix
from .gaussian import CovarianceState, reduced_covariance, reduced_mean, williamson
from .mpo import HamiltonianSpec, LocalBasis
from .oracle import DEFAULT_CAP, dense_ground, dense_hamiltonian

LOCAL_DIM_RULES = ("uniform", "threshold")
BOUND_SLACK = 1e-9
ISOMETRY_TOL = 1e-9


@dataclass(frozen=True)
class ModeBasis:
    mode: int
    S: NDArray[np.float64]
    nbar: float
    d: int
    params: BasisParams
    effective_cutoff: int
    phases: NDArray[np.complex128]

    @property
    def offset(self) -> Tuple[float, float]:
        return float(np.sqrt(2) * self.params.alpha_x), float(np.sqrt(2) * self.params.alpha_p)

    def matrix(self, D_out: int) -> CMatrix:
        """<n|G|m> for n < D_out, m < d, in the gauge fixed by `phases`."""
        return plbo_unitary_matrix(self.params, D_out, self.d) * self.phases[None, :]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "nbar": self.nbar,
            "d": self.d,
            "effective_cutoff": self.effective_cutoff,
            "S": self.S.tolist(),
        }


@dataclass(frozen=True)
class LocalBasisPlan:
    modes: List[ModeBasis]
    eps: float

    @property
    def dims(self) -> List[int]:
        return [m.d for m in self.modes]

    @property
    def effective_cutoffs(self) -> List[int]:
        return [m.effective_cutoff for m in self.modes]

    def local_basis(self) -> LocalBasis:
        return LocalBasis(
            kind="olb",
            symplectics=[m.S for m in self.modes],
            offsets=[m.offset for m in self.modes],
            phases=[m.phases for m in self.modes],
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"eps": self.eps, "modes": [m.to_dict() for m in self.modes]}


def singular_weights(nbar: float, count: int) -> NDArray[np.float64]:
    """Squared Schmidt weights nbar^k / (nbar+1)^(k+1) for k < count."""
    k = np.arange(count)
    return nbar**k / (nbar + 1) ** (k + 1)


def choose_local_dims(
    nbars: Sequence[float],
    rule: str = "uniform",
    d: Optional[int] = None,
    eps_target: float = 1e-6,
    d_cap: Optional[int] = None,
) -> List[int]:
    """Kept local dimension per mode.

    "uniform" keeps d everywhere; "threshold" keeps the smallest d_i whose
    discarded tail nbar^d / (nbar+1)^d is at most eps_target, capped at d_cap.
    """

    if rule == "uniform":
        if d is None or d < 1:
            raise errors.ConfigError("The uniform rule needs a positive local dimension.")
        return [int(d)] * len(nbars)
    if rule != "threshold":
        raise errors.ConfigError(f"Local dimension rule must be one of {', '.join(LOCAL_DIM_RULES)}.")
    if not 0 < eps_target < 1:
        raise errors.ConfigError(f"eps_target must lie in (0, 1), got {eps_target}.")

    dims = []
    for nbar in nbars:
        if nbar <= 0:
            di = 1
        else:
            di = int(np.ceil(np.log(eps_target) / np.log(nbar / (nbar + 1))))
        dims.append(max(1, min(di, d_cap) if d_cap else di))
    return dims


def decompose_mode_symplectic(S: NDArray[np.float64]) -> Tuple[float, float, float]:
    """S = Rot(theta1) diag(e^-r, e^r) Rot(theta2) with Rot(t) = [[cos t, -sin t], [sin t, cos t]]."""
    U, sigma, Vt = linalg.svd(S)
    if linalg.det(U) < 0:
        U[:, 1] *= -1
        Vt[1] *= -1
    theta1 = float(np.arctan2(U[1, 0], U[0, 0]))
    theta2 = float(np.arctan2(Vt[1, 0], Vt[0, 0]))
    return theta1, float(-np.log(sigma[0])), theta2


def mode_params(S: NDArray[np.float64], mean: Sequence[float]) -> BasisParams:
    """BasisParams of G = D(alpha) R(theta1) S(r) R(theta2) = D(alpha) S(r e^{2i theta1}) R(theta1 + theta2)."""
    theta1, r, theta2 = decompose_mode_symplectic(S)
    return BasisParams(
        alpha_x=mean[0] / np.sqrt(2),
        alpha_p=mean[1] / np.sqrt(2),
        r=r,
        phi=2 * theta1,
        theta=theta1 + theta2,
    )


def _column_phases(U: CMatrix) -> NDArray[np.complex128]:
    pivots = U[np.argmax(np.abs(U), axis=0), np.arange(U.shape[1])]
    return np.conj(pivots) / np.abs(pivots)


def plan_optimal_basis(
    state: CovarianceState,
    d: Union[int, Sequence[int]],
    rule: str = "uniform",
    eps_target: float = 1e-6,
    cutoff_tol: float = 1e-10,
    cutoff_max: int = 256,
) -> LocalBasisPlan:
    """Per-mode Williamson of the marginals, kept dimensions and basis-change data.

    Args:
        state (CovarianceState): pure or mixed Gaussian target.
        d (int or Sequence[int]): uniform local dimension, the cap for the
            threshold rule, or explicit per-mode dimensions.
        rule (str): "uniform" or "threshold".
        eps_target (float): kept-weight target of the threshold rule.
        cutoff_tol (float): isometry tolerance of the effective cutoff.
        cutoff_max (int): largest searched cutoff.

    Returns:
        LocalBasisPlan: per-mode bases and the averaged discarded weight eps.
    """

    n = state.n_modes
    marginals = [williamson(reduced_covariance(state, k)) for k in range(n)]
    nbars = [max(float(w.nu[0]) - 0.5, 0.0) for w in marginals]

    if np.isscalar(d):
        dims = choose_local_dims(nbars, rule, int(d), eps_target, d_cap=int(d))  # type: ignore[arg-type]
    else:
        dims = [int(x) for x in d]  # type: ignore[union-attr]
        if len(dims) != n:
            raise errors.ShapeMismatch(f"Expected {n} local dimensions, got {len(dims)}.")

    modes, kept = [], 0.0
    for k, (marginal, nbar, dk) in enumerate(zip(marginals, nbars, dims)):
        params = mode_params(marginal.S, reduced_mean(state, k))
        cutoff = effective_cutoff(params, dk, cutoff_tol, cutoff_max)
        phases = _column_phases(plbo_unitary_matrix(params, cutoff, dk))
        modes.append(ModeBasis(k, marginal.S, nbar, dk, params, cutoff, phases))
        kept += float(singular_weights(nbar, dk).sum())
        logger.debug("mode %d: nbar=%.6g d=%d effective cutoff=%d", k, nbar, dk, cutoff)

    eps = float(np.clip(1 - kept / n, 0.0, 1.0))
    logger.info("Optimal local basis: dims=%s eps=%.3e", dims, eps)
    return LocalBasisPlan(modes, eps)


def rotated_state(state: CovarianceState, plan: LocalBasisPlan) -> CovarianceState:
    """The target written in the local bases: covariance T V T^T with T = blockdiag(S_i^-1), zero mean."""
    n = state.n_modes
    T = np.zeros((2 * n, 2 * n))
    for m in plan.modes:
        idx = [m.mode, n + m.mode]
        T[np.ix_(idx, idx)] = linalg.inv(m.S)
    V = T @ state.V @ T.T
    return CovarianceState(n, (V + V.T) / 2)


def truncation_bound_check(
    state: CovarianceState, plan: LocalBasisPlan, D: int, cap: int = DEFAULT_CAP
) -> Tuple[float, float, float]:
    """Dense check of eps <= eps_D <= N eps for a pure target.

    The target is rewritten in the local bases, its dense ground state at
    cutoff D is projected onto the kept dimensions, and eps_D is the lost weight.

    Returns:
        Tuple[float, float, float]: (eps_D, eps, eps / eps_D).

    Raises:
        BoundViolation: when either side of the bound fails.
    """

    if not state.is_pure():
        raise errors.ConfigError("The truncation bound is checked on pure targets only.")
    if D < max(plan.dims):
        raise errors.ConfigError(f"Oracle cutoff {D} is below the kept dimension {max(plan.dims)}.")

    _, ground = dense_ground(dense_hamiltonian(HamiltonianSpec(rotated_state(state, plan)), D, cap))
    probs = ground.probabilities()
    kept = probs[tuple(slice(0, d) for d in plan.dims)].sum()
    eps_D = float(max(1.0 - kept, 0.0))
    eps, n = plan.eps, state.n_modes

    if eps > eps_D + BOUND_SLACK or eps_D > n * eps + BOUND_SLACK:
        raise errors.BoundViolation(
            f"Truncation bound failed: eps={eps:.3e}, eps_D={eps_D:.3e}, N*eps={n * eps:.3e}."
        )
    ratio = 1.0 if eps_D <= BOUND_SLACK else eps / eps_D
    return eps_D, eps, float(ratio)


def inverse_basis_matrices(plan: LocalBasisPlan, D_out: int) -> List[CMatrix]:
    """Per-mode D_out x d_i maps from local-basis amplitudes back to Fock amplitudes."""
    mats = []
    for m in plan.modes:
        U = m.matrix(D_out)
        residual = isometry_residual(U)
        if D_out < m.effective_cutoff and residual >= ISOMETRY_TOL:
            raise errors.CutoffNotReached(D_out, residual)
        mats.append(U)
    return mats
