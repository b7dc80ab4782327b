"""Dense reference implementations for small instances.

The Hamiltonian here is assembled as the quadratic form
1/2 sum_ij M_ij Y_i Y_j - N/2 over the CZ-conjugated, mean-shifted
quadratures, term by term through Kronecker products. It shares no assembly
code with the MPO builder.
"""

from dataclasses import dataclass
from functools import reduce
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from logzero import logger
from numpy.typing import NDArray
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

from . import errors
from .constants import POLY_PAD
from .fock import (
    GATE_KINDS,
    BasisParams,
    CMatrix,
    beamsplitter_matrix,
    gate_matrix,
    ladder_arrays,
    transformed_ladder_array,
)
from .gaussian import CovarianceState, williamson
from .mpo import HamiltonianSpec

DEFAULT_CAP = 4096
DENSE_EIGH_LIMIT = 2048
HARMONIC_TOL = 0.2

# a term is a coefficient and a word of quadrature letters per mode
Term = Tuple[complex, Dict[int, str]]


@dataclass
class DenseState:
    dims: Tuple[int, ...]
    amplitudes: CMatrix

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.size != int(np.prod(self.dims)):
            raise errors.ShapeMismatch(f"State of size {self.amplitudes.size} for dims {self.dims}.")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def normalized(self) -> bool:
        return abs(self.norm - 1) < 1e-12

    def tensor(self) -> CMatrix:
        return self.amplitudes.reshape(self.dims)

    def probabilities(self) -> NDArray[np.float64]:
        return (np.abs(self.tensor()) ** 2) / self.norm**2


@dataclass
class DenseOperator:
    dims: Tuple[int, ...]
    matrix: sparse.csr_matrix
    hamiltonian: bool = True

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def toarray(self) -> CMatrix:
        return self.matrix.toarray()

    def hermiticity_residual(self) -> float:
        diff = self.matrix - self.matrix.getH()
        return float(abs(diff).max()) if diff.nnz else 0.0


@dataclass
class SpectralWeights:
    weights: NDArray[np.float64]
    overflow: float
    harmonic: bool
    mean_energy: float


def _check_cap(dims: Sequence[int], cap: int) -> None:
    size = int(np.prod(dims))
    if size > cap:
        raise errors.ResourceLimit(f"Dense dimension {size} exceeds the oracle cap {cap}.")


def _letters(D: int, params: Optional[BasisParams]) -> Dict[str, CMatrix]:
    """Padded single-mode X and P, exact on the leading D + POLY_PAD - 2 block."""
    dim = D + POLY_PAD
    if params is None:
        ops = ladder_arrays(dim)
        return {"x": ops["x"], "p": ops["p"], "1": ops["1"]}
    A = transformed_ladder_array(params, dim)
    Ad = A.conj().T
    return {
        "x": (A + Ad) / np.sqrt(2),
        "p": (A - Ad) / (1j * np.sqrt(2)),
        "1": np.eye(dim, dtype=complex),
    }


def _word_matrix(letters: Dict[str, CMatrix], word: str, D: int) -> CMatrix:
    full = reduce(np.matmul, [letters[c] for c in word], letters["1"])
    return full[:D, :D]


def _quadratures(spec: HamiltonianSpec) -> List[List[Term]]:
    """Mean-shifted quadratures after the CZ conjugation P_i -> P_i + kappa prod_{n!=i} X_n."""
    n = spec.n_modes
    Y: List[List[Term]] = []
    for i in range(n):
        Y.append([(1.0, {i: "x"}), (-spec.mu[i], {})])
    for i in range(n):
        terms: List[Term] = [(1.0, {i: "p"}), (-spec.nu[i], {})]
        if spec.kappa != 0:
            terms.append((spec.kappa, {k: "x" for k in range(n) if k != i}))
        Y.append(terms)
    return Y


def _multiply(left: Term, right: Term) -> Term:
    word = dict(left[1])
    for mode, letters in right[1].items():
        word[mode] = word.get(mode, "") + letters
    return left[0] * right[0], word


def hamiltonian_terms(spec: HamiltonianSpec) -> List[Term]:
    """The sampling Hamiltonian as a flat list of (coefficient, per-mode word) terms."""
    n = spec.n_modes
    M = np.block([[spec.alpha, spec.gamma], [spec.gamma.T, spec.beta]])
    Y = _quadratures(spec)
    terms: List[Term] = [(-n / 2, {})]
    for i, j in product(range(2 * n), repeat=2):
        if M[i, j] == 0:
            continue
        for left, right in product(Y[i], Y[j]):
            coef, word = _multiply(left, right)
            if coef != 0:
                terms.append((M[i, j] / 2 * coef, word))
    return terms


def dense_hamiltonian(
    spec: HamiltonianSpec,
    D: int,
    cap: int = DEFAULT_CAP,
    basis_params: Optional[Sequence[BasisParams]] = None,
) -> DenseOperator:
    """Dense truncated Hamiltonian, optionally written in a parameterized local basis."""
    n = spec.n_modes
    dims = (D,) * n
    _check_cap(dims, cap)
    per_mode = [
        _letters(D, None if basis_params is None else basis_params[k]) for k in range(n)
    ]
    cache: Dict[Tuple[int, str], CMatrix] = {}

    def factor(mode: int, word: str) -> sparse.csr_matrix:
        key = (mode, word)
        if key not in cache:
            cache[key] = sparse.csr_matrix(_word_matrix(per_mode[mode], word, D))
        return cache[key]

    size = int(np.prod(dims))
    H = sparse.csr_matrix((size, size), dtype=complex)
    for coef, word in hamiltonian_terms(spec):
        factors = [factor(k, word.get(k, "")) for k in range(n)]
        H = H + coef * reduce(lambda a, b: sparse.kron(a, b, format="csr"), factors)
    H.eliminate_zeros()
    logger.debug("Assembled dense Hamiltonian of dimension %d (nnz=%d).", size, H.nnz)
    return DenseOperator(dims, H.tocsr())


def dense_ground(op: DenseOperator) -> Tuple[float, DenseState]:
    """Smallest eigenpair; the largest-magnitude amplitude is made real-positive."""
    if op.size <= DENSE_EIGH_LIMIT:
        w, v = linalg.eigh(op.toarray())
        energy, vec = float(w[0]), v[:, 0]
    else:
        w, v = sparse_linalg.eigsh(op.matrix, k=1, which="SA", tol=1e-12)
        energy, vec = float(w[0]), v[:, 0]
    pivot = vec[np.argmax(np.abs(vec))]
    vec = vec * np.conj(pivot) / abs(pivot)
    return energy, DenseState(op.dims, vec / np.linalg.norm(vec))


def dense_expectation(op: DenseOperator, state: DenseState) -> float:
    psi = state.amplitudes
    return float(np.real(np.vdot(psi, op.matrix @ psi)) / np.vdot(psi, psi).real)


def sorted_spectrum(op: DenseOperator) -> NDArray[np.float64]:
    return np.sort(linalg.eigvalsh(op.toarray()))


def interlacing_residual(spec: HamiltonianSpec, D_small: int, D_large: int, cap: int = DEFAULT_CAP) -> float:
    """Largest violation of lambda_k(D_small) >= lambda_k(D_large) over the shared range."""
    small = sorted_spectrum(dense_hamiltonian(spec, D_small, cap))
    large = sorted_spectrum(dense_hamiltonian(spec, D_large, cap))
    return float(max(np.max(large[: small.size] - small), 0.0))


def _apply_mode_matrix(psi: CMatrix, U: CMatrix, mode: int) -> CMatrix:
    out = np.tensordot(U, psi, axes=([1], [mode]))
    return np.moveaxis(out, 0, mode)


def _global_cz(psi: CMatrix, kappa: float, D: int, pad: int) -> CMatrix:
    n = psi.ndim
    dim = D + pad
    x = sparse.csr_matrix(ladder_arrays(dim)["x"])
    generator = reduce(lambda a, b: sparse.kron(a, b, format="csr"), [x] * n)
    padded = np.zeros((dim,) * n, dtype=complex)
    padded[(slice(0, D),) * n] = psi
    out = sparse_linalg.expm_multiply(-1j * kappa * generator, padded.reshape(-1))
    return out.reshape((dim,) * n)[(slice(0, D),) * n]


CircuitOp = Tuple[str, Sequence[float], Sequence[int]]


def dense_circuit(
    ops: Sequence[CircuitOp], n_modes: int, D: int, cap: int = DEFAULT_CAP, pad: Optional[int] = None
) -> DenseState:
    """Applies truncated gates to the vacuum.

    Args:
        ops (Sequence[CircuitOp]): (kind, params, modes) triples. Kinds are the
            single-mode GATE_KINDS, "beamsplitter" (theta, phi) on two modes and
            "cz" (kappa,) on all modes.
        n_modes (int): number of modes.
        D (int): cutoff.
        cap (int, optional): largest allowed D^N. Defaults to DEFAULT_CAP.
        pad (int, optional): padding of gate exponentials. Defaults to D.

    Returns:
        DenseState: the (unnormalized after truncation) output vector.
    """

    dims = (D,) * n_modes
    _check_cap(dims, cap)
    if pad is None:
        pad = D
    psi = np.zeros(dims, dtype=complex)
    psi[(0,) * n_modes] = 1.0

    for kind, params, modes in ops:
        if kind in GATE_KINDS:
            U = gate_matrix(kind, params, D, pad=max(pad, 2 * D)).data
            for mode in modes:
                psi = _apply_mode_matrix(psi, U, mode)
        elif kind == "beamsplitter":
            m1, m2 = modes
            U = beamsplitter_matrix(params[0], params[1], D, pad).reshape(D, D, D, D)
            psi = np.tensordot(U, psi, axes=([2, 3], [m1, m2]))
            psi = np.moveaxis(psi, [0, 1], [m1, m2])
        elif kind == "cz":
            _check_cap(((D + pad),) * n_modes, cap * 2**n_modes)
            psi = _global_cz(psi, params[0], D, pad)
        else:
            raise ValueError(f"Unknown circuit operation: {kind}")
    return DenseState(dims, psi)


def spectral_weights(state: DenseState, op: DenseOperator, m_max: int) -> SpectralWeights:
    """Weights of the state on the integer eigenvalue bands 0..m_max of op."""
    w, v = linalg.eigh(op.toarray())
    psi = state.amplitudes / state.norm
    c2 = np.abs(v.conj().T @ psi) ** 2
    bands = np.rint(w).astype(int)

    weights = np.zeros(m_max + 1)
    for band, weight in zip(bands, c2):
        if 0 <= band <= m_max:
            weights[band] += weight
    overflow = float(c2[bands > m_max].sum())

    retained = w <= m_max + 0.5
    harmonic = bool(np.all(np.abs(w[retained] - bands[retained]) <= HARMONIC_TOL))
    if not harmonic:
        logger.warning("Spectrum is not harmonic below m=%d; band weights are approximate.", m_max)
    return SpectralWeights(weights, overflow, harmonic, float(np.dot(w, c2)))


def purified_covariance(state: CovarianceState) -> CovarianceState:
    """Pure 2N-mode state whose first N modes reduce to `state`."""
    n = state.n_modes
    result = williamson(state.V)
    nu = np.maximum(result.nu, 0.5)
    c = 2 * nu
    s = np.sqrt(np.maximum(c**2 - 1, 0.0))

    size = 4 * n
    sys_idx = np.concatenate([np.arange(n), 2 * n + np.arange(n)])
    anc_idx = np.concatenate([n + np.arange(n), 3 * n + np.arange(n)])
    V = np.zeros((size, size))
    for k in range(n):
        xs, xa, ps, pa = k, n + k, 2 * n + k, 3 * n + k
        V[xs, xs] = V[xa, xa] = V[ps, ps] = V[pa, pa] = c[k] / 2
        V[xs, xa] = V[xa, xs] = s[k] / 2
        V[ps, pa] = V[pa, ps] = -s[k] / 2

    S_big = np.eye(size)
    S_big[np.ix_(sys_idx, sys_idx)] = result.S
    V = S_big @ V @ S_big.T

    mean = np.zeros(size)
    mean[sys_idx] = state.mean
    return CovarianceState(2 * n, (V + V.T) / 2, mean)


def mixed_photon_distribution(
    state: CovarianceState, D: int, cap: int = DEFAULT_CAP, pad: Optional[int] = None
) -> NDArray[np.float64]:
    """Fock distribution (shape (D,)*N) of a mixed Gaussian state via a purification.

    The purification is solved at D + pad levels per mode (pad defaults to D)
    and only then restricted to n < D, so the entries are not renormalized:
    they fall short of one by the weight at or above D.
    """

    n = state.n_modes
    if pad is None:
        pad = D
    pure = purified_covariance(state)
    _, ground = dense_ground(dense_hamiltonian(HamiltonianSpec(pure), D + pad, cap))
    probs = ground.probabilities()
    probs = probs.sum(axis=tuple(range(n, 2 * n)))
    return probs[(slice(0, D),) * n]
