"""Covariance-matrix machinery for Gaussian problem instances.

Quadratures are ordered (X_1..X_N, P_1..P_N), hbar = 1 and the vacuum
covariance is I/2.
"""

import json
import os

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from logzero import logger
from numpy.typing import NDArray
from scipy import linalg
from scipy.stats import unitary_group

from . import errors

SYMMETRY_TOL = 1e-12
PHYSICALITY_TOL = 1e-10
PURITY_TOL = 1e-9
PD_FLOOR = 1e-12
PSD_FLOOR = -1e-10


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class CovarianceState:
    """A Gaussian state given by its covariance matrix and mean vector."""

    n_modes: int
    V: NDArray[np.float64]
    mean: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        V = np.array(self.V, dtype=float)
        size = 2 * self.n_modes
        if self.n_modes < 1 or V.shape != (size, size):
            raise errors.ShapeMismatch(
                f"Covariance for {self.n_modes} modes must be {size}x{size}, got {V.shape}."
            )
        mean = np.zeros(size) if self.mean is None else np.array(self.mean, dtype=float)
        if mean.shape != (size,):
            raise errors.ShapeMismatch(f"Mean must have length {size}, got {mean.shape}.")
        scale = max(1.0, float(np.max(np.abs(V))))
        if np.max(np.abs(V - V.T)) > SYMMETRY_TOL * scale:
            raise errors.IntegrityError("Covariance matrix is not symmetric.")
        V = (V + V.T) / 2
        V.flags.writeable = False
        mean.flags.writeable = False
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "mean", mean)

    @property
    def mean_x(self) -> NDArray[np.float64]:
        return self.mean[: self.n_modes]

    @property
    def mean_p(self) -> NDArray[np.float64]:
        return self.mean[self.n_modes :]

    def validate(self) -> None:
        """Raises IntegrityError unless V + (i/2)Omega is positive semidefinite."""
        nu = symplectic_eigenvalues(self.V)
        if nu.min() < 0.5 - PHYSICALITY_TOL:
            raise errors.IntegrityError(
                f"Not a quantum covariance: smallest symplectic eigenvalue {nu.min():.6g} < 1/2."
            )

    def is_pure(self, tol: float = PURITY_TOL) -> bool:
        return bool(np.all(np.abs(symplectic_eigenvalues(self.V) - 0.5) < tol))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_modes": self.n_modes,
            "V": self.V.tolist(),
            "mean": self.mean.tolist(),
        }


@dataclass(frozen=True)
class WilliamsonResult:
    S: NDArray[np.float64]
    nu: NDArray[np.float64]

    def reconstruct(self) -> NDArray[np.float64]:
        return self.S @ np.diag(np.concatenate([self.nu, self.nu])) @ self.S.T


@dataclass(frozen=True)
class NoiseSplit:
    Q: CovarianceState
    C: NDArray[np.float64]


def symplectic_eigenvalues(V: NDArray[np.float64]) -> NDArray[np.float64]:
    """Sorted symplectic eigenvalues (moduli of the spectrum of Omega V)."""
    n = V.shape[0] // 2
    moduli = np.sort(np.abs(np.linalg.eigvals(symplectic_form(n) @ V).imag))
    return moduli[::2]


def williamson(V: NDArray[np.float64]) -> WilliamsonResult:
    """Williamson decomposition V = S diag(nu, nu) S^T.

    Built from the inverse square root of V and the real Schur form of the
    antisymmetric matrix V^{-1/2} Omega V^{-1/2}. The symplectic eigenvalues
    come out ascending and each mode's columns are sign-fixed so that the
    leading nonzero entry of its X column is positive.

    Args:
        V (NDArray): real symmetric positive definite 2N x 2N matrix.

    Returns:
        WilliamsonResult: symplectic S and symplectic eigenvalues nu.
    """

    V = np.asarray(V, dtype=float)
    size = V.shape[0]
    if V.ndim != 2 or V.shape != (size, size) or size % 2:
        raise errors.ShapeMismatch(f"Expected an even square matrix, got {V.shape}.")
    n = size // 2

    w, Q = linalg.eigh((V + V.T) / 2)
    if w.min() <= PD_FLOOR:
        raise errors.NonPositiveDefinite(
            f"Covariance matrix is not positive definite (min eigenvalue {w.min():.3e})."
        )
    sqrt_v = Q @ np.diag(np.sqrt(w)) @ Q.T
    inv_sqrt_v = Q @ np.diag(1 / np.sqrt(w)) @ Q.T

    T, Z = linalg.schur(inv_sqrt_v @ symplectic_form(n) @ inv_sqrt_v, output="real")
    x_cols, p_cols, t = [], [], []
    for k in range(n):
        block = T[2 * k, 2 * k + 1]
        if block > 0:
            x_cols.append(Z[:, 2 * k])
            p_cols.append(Z[:, 2 * k + 1])
        else:
            x_cols.append(Z[:, 2 * k + 1])
            p_cols.append(Z[:, 2 * k])
        t.append(abs(block))

    K = np.column_stack(x_cols + p_cols)
    nu = 1 / np.asarray(t)
    S = sqrt_v @ K @ np.diag(np.concatenate([nu, nu]) ** -0.5)

    order = np.argsort(nu, kind="stable")
    nu = nu[order]
    S = S[:, np.concatenate([order, order + n])]

    for k in range(n):
        column = S[:, k]
        leading = column[np.abs(column) > 1e-12]
        if leading.size and leading[0] < 0:
            S[:, k] *= -1
            S[:, n + k] *= -1

    return WilliamsonResult(S=S, nu=nu)


def passive_symplectic(U: NDArray[np.complex128]) -> NDArray[np.float64]:
    """Real orthogonal symplectic form of the interferometer a -> U a."""
    U = np.atleast_2d(U)
    return np.block([[U.real, -U.imag], [U.imag, U.real]])


def squeezing_symplectic(r: Sequence[float]) -> NDArray[np.float64]:
    r = np.atleast_1d(np.asarray(r, dtype=float))
    return np.diag(np.concatenate([np.exp(-r), np.exp(r)]))


def covariance_from_symplectic(
    S: NDArray[np.float64], nu: Optional[Sequence[float]] = None
) -> NDArray[np.float64]:
    n = S.shape[0] // 2
    diag = np.full(n, 0.5) if nu is None else np.asarray(nu, dtype=float)
    return S @ np.diag(np.concatenate([diag, diag])) @ S.T


def random_pure_covariance(
    n_modes: int,
    squeeze_max: float,
    seed: int,
    squeezing: Optional[Sequence[float]] = None,
    interferometer: Optional[NDArray[np.complex128]] = None,
) -> CovarianceState:
    """Random pure state: squeezed vacua sent through a Haar-random interferometer.

    Args:
        n_modes (int): number of modes N.
        squeeze_max (float): squeezing parameters are drawn uniformly in [0, squeeze_max].
        seed (int): seed for the counter-based generator.
        squeezing (Sequence[float], optional): fixed squeezing parameters instead of random ones.
        interferometer (NDArray, optional): fixed N x N unitary instead of a Haar draw.

    Returns:
        CovarianceState: V = O D^2 O^T / 2 with zero means.
    """

    rng = np.random.Generator(np.random.Philox(seed))
    if squeezing is None:
        r = rng.uniform(0.0, squeeze_max, size=n_modes)
    else:
        r = np.asarray(squeezing, dtype=float)

    if interferometer is not None:
        U = np.asarray(interferometer, dtype=complex)
    elif n_modes == 1:
        U = np.exp(2j * np.pi * rng.uniform(size=(1, 1)))
    else:
        U = unitary_group.rvs(n_modes, random_state=rng)

    O = passive_symplectic(U)
    D = squeezing_symplectic(r)
    V = O @ D @ D @ O.T / 2
    logger.debug("Drew pure covariance for %d modes (r=%s).", n_modes, np.round(r, 4))
    return CovarianceState(n_modes=n_modes, V=V)


def two_mode_squeezed_covariance(r: float) -> CovarianceState:
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    V = np.array(
        [[c, s, 0, 0], [s, c, 0, 0], [0, 0, c, -s], [0, 0, -s, c]], dtype=float
    )
    return CovarianceState(n_modes=2, V=V / 2)


def thermal_covariance(nbar: Sequence[float]) -> CovarianceState:
    nbar = np.atleast_1d(np.asarray(nbar, dtype=float))
    diag = np.concatenate([nbar, nbar]) + 0.5
    return CovarianceState(n_modes=len(nbar), V=np.diag(diag))


def apply_loss(state: CovarianceState, eta: float) -> CovarianceState:
    """Pure-loss channel with transmissivity eta on every mode."""
    if not 0.0 <= eta <= 1.0:
        raise errors.ConfigError(f"Transmissivity must lie in [0, 1], got {eta}.")
    V = eta * state.V + (1 - eta) * np.eye(2 * state.n_modes) / 2
    return CovarianceState(state.n_modes, V, np.sqrt(eta) * state.mean)


def reduced_covariance(state: CovarianceState, mode: int) -> NDArray[np.float64]:
    if not 0 <= mode < state.n_modes:
        raise IndexError(f"Mode {mode} out of range for {state.n_modes} modes.")
    idx = [mode, state.n_modes + mode]
    return state.V[np.ix_(idx, idx)].copy()


def reduced_mean(state: CovarianceState, mode: int) -> NDArray[np.float64]:
    if not 0 <= mode < state.n_modes:
        raise IndexError(f"Mode {mode} out of range for {state.n_modes} modes.")
    return state.mean[[mode, state.n_modes + mode]].copy()


def mean_photon(state: CovarianceState, mode: int) -> float:
    """Thermal occupation nu - 1/2 of the mode's marginal, clipped at zero."""
    nu = williamson(reduced_covariance(state, mode)).nu[0]
    return max(float(nu) - 0.5, 0.0)


def photon_number_stats(state: CovarianceState) -> Tuple[float, float]:
    """Total mean photon number and the root of the summed per-mode variances."""
    total_mean, total_var = 0.0, 0.0
    for mode in range(state.n_modes):
        V = reduced_covariance(state, mode)
        m = reduced_mean(state, mode)
        total_mean += (np.trace(V) - 1) / 2 + m @ m / 2
        total_var += (2 * np.trace(V @ V) - 1) / 4 + m @ V @ m
    return float(total_mean), float(np.sqrt(max(total_var, 0.0)))


def split_noise(V_mixed: NDArray[np.float64], mean: Optional[NDArray[np.float64]] = None) -> NoiseSplit:
    """Splits a mixed covariance into a pure part Q and classical noise C with V = Q + C."""
    V_mixed = np.asarray(V_mixed, dtype=float)
    n = V_mixed.shape[0] // 2
    result = williamson(V_mixed)
    excess = np.clip(result.nu - 0.5, 0.0, None)
    Q = result.S @ result.S.T / 2
    C = result.S @ np.diag(np.concatenate([excess, excess])) @ result.S.T
    C = (C + C.T) / 2
    return NoiseSplit(Q=CovarianceState(n, (Q + Q.T) / 2, mean), C=C)


def load_covariance(path: str) -> CovarianceState:
    path = os.path.expanduser(path)
    with open(path, mode="r", encoding="utf-8") as f:
        data = json.load(f)

    missing = [k for k in ("n_modes", "V") if k not in data]
    if missing:
        raise errors.ConfigError(f"Covariance file {path} is missing {', '.join(missing)}.")
    state = CovarianceState(int(data["n_modes"]), np.asarray(data["V"]), data.get("mean"))
    state.validate()
    return state


def dump_covariance(state: CovarianceState, path: str) -> None:
    with open(os.path.expanduser(path), mode="w", encoding="utf-8") as f:
        json.dump(state.to_dict(), f, indent=4)
