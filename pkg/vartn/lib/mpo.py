"""Algebraic MPO construction of the sampling Hamiltonian.

The Hamiltonian is a block-diagonal direct sum of a Gaussian block and (for
kappa != 0) four non-Gaussian blocks. Every block is written down core by
core: left cores collect operator strings, the middle core at
N_m = floor((N+1)/2) joins the two halves and right cores emit the remaining
strings. Cores have index order (left bond, out, in, right bond).
"""

from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np
from logzero import logger
from numpy.typing import NDArray
from scipy import linalg

from . import errors
from .constants import POLY_PAD
from .fock import BasisParams, CMatrix, transformed_ladder_array
from .gaussian import CovarianceState

NON_GAUSSIAN_BLOCKS = ("purple_p", "purple_x2", "blue", "magenta")
INTEGRITY_TOL = 1e-10


@dataclass
class MPO:
    cores: List[CMatrix]

    def __post_init__(self) -> None:
        if not self.cores:
            raise errors.ShapeMismatch("An MPO needs at least one core.")
        if self.cores[0].shape[0] != 1 or self.cores[-1].shape[3] != 1:
            raise errors.ShapeMismatch("MPO boundary bonds must have dimension 1.")
        for k, core in enumerate(self.cores):
            if core.ndim != 4 or core.shape[1] != core.shape[2]:
                raise errors.ShapeMismatch(f"MPO core {k} has shape {core.shape}.")
            if k and self.cores[k - 1].shape[3] != core.shape[0]:
                raise errors.ShapeMismatch(f"MPO bond mismatch at cut {k}.")

    @property
    def n_sites(self) -> int:
        return len(self.cores)

    @property
    def phys_dims(self) -> List[int]:
        return [core.shape[1] for core in self.cores]

    @property
    def bond_dims(self) -> List[int]:
        return [core.shape[3] for core in self.cores[:-1]]

    def with_core(self, site: int, core: CMatrix) -> "MPO":
        cores = list(self.cores)
        cores[site] = core
        return MPO(cores)

    def to_dense(self, cap: Optional[int] = None) -> CMatrix:
        """Contracts the chain into a (prod d) x (prod d) matrix."""
        size = int(np.prod(self.phys_dims))
        if cap is not None and size > cap:
            raise errors.ResourceLimit(f"Dense MPO of dimension {size} exceeds cap {cap}.")
        T = self.cores[0][0]
        for W in self.cores[1:]:
            T = np.tensordot(T, W, axes=([2], [0]))
            rows, cols, out, inn, bond = T.shape
            T = T.transpose(0, 2, 1, 3, 4).reshape(rows * out, cols * inn, bond)
        return T[:, :, 0]

    def hermiticity_residual(self, cap: Optional[int] = None) -> float:
        H = self.to_dense(cap)
        return float(np.max(np.abs(H - H.conj().T)))


def direct_sum_cores(cores: Sequence[CMatrix], site: int, n_sites: int) -> CMatrix:
    """Site core of the direct sum of several MPOs sharing physical dimensions."""
    if n_sites == 1:
        return sum(cores[1:], cores[0])
    if site == 0:
        return np.concatenate(cores, axis=3)
    if site == n_sites - 1:
        return np.concatenate(cores, axis=0)

    left = sum(c.shape[0] for c in cores)
    right = sum(c.shape[3] for c in cores)
    d = cores[0].shape[1]
    out = np.zeros((left, d, d, right), dtype=complex)
    i = j = 0
    for c in cores:
        out[i : i + c.shape[0], :, :, j : j + c.shape[3]] = c
        i += c.shape[0]
        j += c.shape[3]
    return out


def direct_sum(mpos: Sequence[MPO]) -> MPO:
    n_sites = mpos[0].n_sites
    if any(m.n_sites != n_sites or m.phys_dims != mpos[0].phys_dims for m in mpos):
        raise errors.ShapeMismatch("Direct sum needs MPOs with identical physical dimensions.")
    return MPO(
        [direct_sum_cores([m.cores[s] for m in mpos], s, n_sites) for s in range(n_sites)]
    )


@dataclass(frozen=True)
class HamiltonianSpec:
    """Problem instance plus the coefficient matrices read off V^{-1}."""

    state: CovarianceState
    kappa: float = 0.0
    alpha: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]
    beta: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]
    gamma: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]
    b: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        expected = self._coefficients(self.state)
        for name, value in expected.items():
            given = getattr(self, name)
            if given is None:
                object.__setattr__(self, name, value)
            elif np.max(np.abs(np.asarray(given) - value)) > INTEGRITY_TOL:
                raise errors.IntegrityError(f"Coefficient matrix {name} does not match V^-1.")

    @staticmethod
    def _coefficients(state: CovarianceState) -> Dict[str, NDArray[np.float64]]:
        n = state.n_modes
        try:
            inv = linalg.inv(state.V)
        except linalg.LinAlgError as e:
            raise errors.NonPositiveDefinite(f"Covariance matrix is singular: {e}") from e
        inv = (inv + inv.T) / 2
        beta = inv[n:, n:] / 2
        return {
            "alpha": inv[:n, :n] / 2,
            "beta": beta,
            "gamma": inv[:n, n:] / 2,
            "b": beta / 2,
        }

    @property
    def n_modes(self) -> int:
        return self.state.n_modes

    @property
    def mu(self) -> NDArray[np.float64]:
        return self.state.mean_x

    @property
    def nu(self) -> NDArray[np.float64]:
        return self.state.mean_p


@dataclass(frozen=True)
class LocalOperators:
    """Quadratures of one site at a padded dimension; products truncate to `dim`."""

    x_pad: CMatrix
    p_pad: CMatrix
    dim: int

    @property
    def _eye(self) -> CMatrix:
        return np.eye(self.x_pad.shape[0], dtype=complex)

    def _truncate(self, M: CMatrix) -> CMatrix:
        return M[: self.dim, : self.dim]

    def identity(self) -> CMatrix:
        return np.eye(self.dim, dtype=complex)

    def x(self, shift: float = 0.0) -> CMatrix:
        return self._truncate(self.x_pad - shift * self._eye)

    def p(self, shift: float = 0.0) -> CMatrix:
        return self._truncate(self.p_pad - shift * self._eye)

    def x2(self) -> CMatrix:
        return self._truncate(self.x_pad @ self.x_pad)

    def shifted_x_times_x(self, mu: float) -> CMatrix:
        """(X - mu) X, a Gaussian quadrature times the X coming from xi."""
        return self._truncate((self.x_pad - mu * self._eye) @ self.x_pad)

    def anticommutator_xp(self, nu: float) -> CMatrix:
        """X (P - nu) + (P - nu) X."""
        p = self.p_pad - nu * self._eye
        return self._truncate(self.x_pad @ p + p @ self.x_pad)

    def quadratic(self, a: float, b: float, g: float, mu: float, nu: float) -> CMatrix:
        """a/2 (X-mu)^2 + b/2 (P-nu)^2 + g/2 {X-mu, P-nu} - 1/2."""
        x = self.x_pad - mu * self._eye
        p = self.p_pad - nu * self._eye
        full = a / 2 * x @ x + b / 2 * p @ p + g / 2 * (x @ p + p @ x) - 0.5 * self._eye
        return self._truncate(full)


@dataclass(frozen=True)
class LocalBasis:
    """Which local basis the Hamiltonian is written in.

    kind "fock" needs nothing else, "olb" needs one 2x2 symplectic per mode
    (optionally a quadrature offset and a phase vector per mode), "plbo" needs
    BasisParams per mode.
    """

    kind: str = "fock"
    symplectics: Optional[Sequence[NDArray[np.float64]]] = None
    offsets: Optional[Sequence[Tuple[float, float]]] = None
    phases: Optional[Sequence[NDArray[np.complex128]]] = None
    params: Optional[Sequence[BasisParams]] = None


def _quadratures(A: CMatrix) -> Tuple[CMatrix, CMatrix]:
    Ad = A.conj().T
    return (A + Ad) / np.sqrt(2), (A - Ad) / (1j * np.sqrt(2))


def plbo_local_operators(params: BasisParams, dim: int) -> LocalOperators:
    x, p = _quadratures(transformed_ladder_array(params, dim + POLY_PAD))
    return LocalOperators(x, p, dim)


def apply_basis(
    spec: HamiltonianSpec, basis: LocalBasis, D: Union[int, Sequence[int]]
) -> List[LocalOperators]:
    """Per-site local operators for the requested basis.

    Args:
        spec (HamiltonianSpec): problem instance (fixes the number of sites).
        basis (LocalBasis): fock, olb or plbo description.
        D (int or Sequence[int]): local dimension, uniform or per site.

    Returns:
        List[LocalOperators]: one entry per site.
    """

    n = spec.n_modes
    dims = [int(D)] * n if np.isscalar(D) else [int(d) for d in D]  # type: ignore[arg-type]
    if len(dims) != n:
        raise errors.ShapeMismatch(f"Expected {n} local dimensions, got {len(dims)}.")

    if basis.kind == "fock":
        return [plbo_local_operators(BasisParams(), d) for d in dims]

    if basis.kind == "plbo":
        if basis.params is None or len(basis.params) != n:
            raise errors.ShapeMismatch("plbo basis needs BasisParams for every mode.")
        return [plbo_local_operators(bp, d) for bp, d in zip(basis.params, dims)]

    if basis.kind == "olb":
        if basis.symplectics is None or len(basis.symplectics) != n:
            raise errors.ShapeMismatch("olb basis needs a 2x2 symplectic for every mode.")
        ops = []
        for site, (S, d) in enumerate(zip(basis.symplectics, dims)):
            base = plbo_local_operators(BasisParams(), d)
            x = S[0, 0] * base.x_pad + S[0, 1] * base.p_pad
            p = S[1, 0] * base.x_pad + S[1, 1] * base.p_pad
            if basis.offsets is not None:
                eye = np.eye(x.shape[0])
                x = x + basis.offsets[site][0] * eye
                p = p + basis.offsets[site][1] * eye
            if basis.phases is not None:
                phases = np.ones(x.shape[0], dtype=complex)
                phases[:d] = basis.phases[site][:d]
                phase = np.diag(phases)
                x = phase.conj().T @ x @ phase
                p = phase.conj().T @ p @ phase
            ops.append(LocalOperators(x, p, d))
        return ops

    raise errors.ConfigError(f"Unknown basis kind: {basis.kind}")


def fock_operators(spec: HamiltonianSpec, D: int) -> List[LocalOperators]:
    return apply_basis(spec, LocalBasis("fock"), D)


def middle_site(n_sites: int) -> int:
    """0-based index of N_m = floor((N+1)/2)."""
    return (n_sites + 1) // 2 - 1


Channel = Hashable


def _left_channels(cut: int, paired: Sequence[Hashable], closed: bool) -> List[Channel]:
    """States on a cut left of the middle site: 'id', one channel per open string, 'done'."""
    states: List[Channel] = ["id"]
    states += [(t, k) for k in range(cut) for t in paired]
    if closed:
        states.append("done")
    return states


def _right_channels(
    cut: int, n_sites: int, paired: Sequence[Hashable], open_: bool
) -> List[Channel]:
    """States on a cut right of the middle site: 'done', pending channels, 'open'."""
    states: List[Channel] = ["done"]
    states += [(t, k) for k in range(cut, n_sites) for t in paired]
    if open_:
        states.append("open")
    return states


class _CoreBuilder:
    """Fills a core from (left state, right state) -> operator assignments."""

    def __init__(self, left: Sequence[Channel], right: Sequence[Channel], dim: int):
        self.left = {s: i for i, s in enumerate(left)}
        self.right = {s: i for i, s in enumerate(right)}
        self.core = np.zeros((len(left), dim, dim, len(right)), dtype=complex)

    def set(self, src: Channel, dst: Channel, op: CMatrix) -> None:
        if src in self.left and dst in self.right:
            self.core[self.left[src], :, :, self.right[dst]] += op


def _cut_states(
    cut: int, n_sites: int, paired: Sequence[Hashable], min_closed: int
) -> List[Channel]:
    """Channel list on cut `cut` (number of sites to its left)."""
    m0 = middle_site(n_sites)
    if cut <= m0:
        return _left_channels(cut, paired, cut >= min_closed)
    return _right_channels(cut, n_sites, paired, n_sites - cut >= min_closed)


def gaussian_core(spec: HamiltonianSpec, ops: LocalOperators, site: int) -> CMatrix:
    """Core `site` of the Gaussian block 1/2 Y^T [[alpha, gamma], [gamma^T, beta]] Y - N/2."""
    n, m0 = spec.n_modes, middle_site(spec.n_modes)
    al, be, ga = spec.alpha, spec.beta, spec.gamma
    mu, nu = spec.mu[site], spec.nu[site]
    X, P, eye = ops.x(mu), ops.p(nu), ops.identity()
    S = ops.quadratic(al[site, site], be[site, site], ga[site, site], mu, nu)

    def with_x(other: int) -> CMatrix:
        return al[site, other] * X + ga[other, site] * P

    def with_p(other: int) -> CMatrix:
        return be[site, other] * P + ga[site, other] * X

    quads = ("x", "p")
    left = _cut_states(site, n, quads, 1)
    right = _cut_states(site + 1, n, quads, 1)
    cb = _CoreBuilder(left, right, ops.dim)

    if site < m0:
        cb.set("id", "id", eye)
        cb.set("id", ("x", site), X)
        cb.set("id", ("p", site), P)
        cb.set("id", "done", S)
        cb.set("done", "done", eye)
        for k in range(site):
            cb.set(("x", k), ("x", k), eye)
            cb.set(("p", k), ("p", k), eye)
            cb.set(("x", k), "done", with_x(k))
            cb.set(("p", k), "done", with_p(k))
    elif site == m0:
        cb.set("done", "done", eye)
        cb.set("id", "done", S)
        cb.set("id", "open", eye)
        for k in range(site):
            cb.set(("x", k), "done", with_x(k))
            cb.set(("p", k), "done", with_p(k))
            for j in range(site + 1, n):
                cb.set(("x", k), ("x", j), al[k, j] * eye)
                cb.set(("x", k), ("p", j), ga[k, j] * eye)
                cb.set(("p", k), ("x", j), ga[j, k] * eye)
                cb.set(("p", k), ("p", j), be[k, j] * eye)
        for j in range(site + 1, n):
            cb.set("id", ("x", j), with_x(j))
            cb.set("id", ("p", j), with_p(j))
    else:
        cb.set("done", "done", eye)
        cb.set(("x", site), "done", X)
        cb.set(("p", site), "done", P)
        cb.set("open", "open", eye)
        cb.set("open", "done", S)
        for j in range(site + 1, n):
            cb.set(("x", j), ("x", j), eye)
            cb.set(("p", j), ("p", j), eye)
            cb.set("open", ("x", j), with_x(j))
            cb.set("open", ("p", j), with_p(j))
    return cb.core


def _insertion_core(op: CMatrix, filler: CMatrix, site: int, n_sites: int) -> CMatrix:
    """Core of sum_i op_i prod_{n != i} filler_n (two-state automaton)."""
    left = ["pending"] if site == 0 else ["pending", "placed"]
    right = ["placed"] if site == n_sites - 1 else ["pending", "placed"]
    cb = _CoreBuilder(left, right, op.shape[0])
    cb.set("pending", "pending", filler)
    cb.set("pending", "placed", op)
    cb.set("placed", "placed", filler)
    return cb.core


def _product_core(op: CMatrix, scale: complex, site: int) -> CMatrix:
    return ((scale if site == 0 else 1.0) * op)[None, :, :, None]


PairTerm = Tuple[CMatrix, CMatrix, NDArray[np.float64]]


def _pair_core(
    terms: Sequence[PairTerm], filler: CMatrix, site: int, n_sites: int
) -> CMatrix:
    """Core of sum_{k<s} sum_t c_t[k, s] L_t(k) R_t(s) prod_{other n} filler_n.

    `terms` lists (L_t, R_t, c_t) with L_t, R_t this site's operators and c_t
    the coefficient matrix shared by all sites.
    """

    m0 = middle_site(n_sites)
    types = list(range(len(terms)))
    left = _cut_states(site, n_sites, types, 2)
    right = _cut_states(site + 1, n_sites, types, 2)
    # pair automaton uses 'none'/'F' in place of 'id'/'done'
    left = ["none" if s == "id" else ("F" if s == "done" and site > m0 else s) for s in left]
    right = ["none" if s == "id" else ("F" if s == "done" and site + 1 > m0 else s) for s in right]
    cb = _CoreBuilder(left, right, filler.shape[0])

    if site < m0:
        cb.set("none", "none", filler)
        cb.set("done", "done", filler)
        for t, (L, R, c) in enumerate(terms):
            cb.set("none", (t, site), L)
            for k in range(site):
                cb.set((t, k), (t, k), filler)
                cb.set((t, k), "done", c[k, site] * R)
    elif site == m0:
        cb.set("done", "F", filler)
        cb.set("none", "open", filler)
        for t, (L, R, c) in enumerate(terms):
            for k in range(site):
                cb.set((t, k), "F", c[k, site] * R)
                for j in range(site + 1, n_sites):
                    cb.set((t, k), (t, j), c[k, j] * filler)
            for j in range(site + 1, n_sites):
                cb.set("none", (t, j), c[site, j] * L)
    else:
        cb.set("F", "F", filler)
        cb.set("open", "open", filler)
        for t, (L, R, c) in enumerate(terms):
            cb.set((t, site), "F", R)
            for j in range(site + 1, n_sites):
                cb.set((t, j), (t, j), filler)
                cb.set("open", (t, j), c[site, j] * L)
    return cb.core


def _blue_terms(spec: HamiltonianSpec, ops: LocalOperators, site: int) -> List[PairTerm]:
    mu, nu, eye = spec.mu[site], spec.nu[site], ops.identity()
    xx = ops.shifted_x_times_x(mu)
    xp = ops.anticommutator_xp(nu)
    g, b = spec.gamma, spec.b
    return [
        (xx, eye, g),
        (xp, eye, b),
        (eye, xx, g.T),
        (eye, xp, b.T),
    ]


def non_gaussian_cores(
    spec: HamiltonianSpec, ops: LocalOperators, site: int
) -> Dict[str, CMatrix]:
    """Cores of the four non-Gaussian blocks at `site`, keyed by NON_GAUSSIAN_BLOCKS."""

    n, kappa = spec.n_modes, spec.kappa
    mu, nu = spec.mu[site], spec.nu[site]
    x, x2, eye = ops.x(), ops.x2(), ops.identity()

    purple_op = kappa * (spec.beta[site, site] * ops.p(nu) - spec.gamma[site, site] * mu * eye)
    purple_p = _insertion_core(purple_op, x, site, n)
    purple_x2 = _insertion_core(kappa**2 * spec.b[site, site] * eye, x2, site, n)

    trace = _product_core(x, kappa * np.trace(spec.gamma), site)
    if n > 1:
        scaled = [(L, R, kappa * c) for L, R, c in _blue_terms(spec, ops, site)]
        pairs = _pair_core(scaled, x, site, n)
        magenta = _pair_core([(x, x, kappa**2 * spec.beta)], x2, site, n)
    else:
        pairs = np.zeros((1, ops.dim, ops.dim, 1), dtype=complex)
        magenta = np.zeros((1, ops.dim, ops.dim, 1), dtype=complex)
    blue = direct_sum_cores([pairs, trace], site, n)

    return {"purple_p": purple_p, "purple_x2": purple_x2, "blue": blue, "magenta": magenta}


def gaussian_mpo(spec: HamiltonianSpec, local_ops: Sequence[LocalOperators]) -> MPO:
    mpo = MPO([gaussian_core(spec, ops, s) for s, ops in enumerate(local_ops)])
    logger.debug("Gaussian MPO bond dims: %s", mpo.bond_dims)
    return mpo


def cz_diagonal_mpos(spec: HamiltonianSpec, local_ops: Sequence[LocalOperators]) -> List[MPO]:
    """The four non-Gaussian blocks, in NON_GAUSSIAN_BLOCKS order."""
    per_site = [non_gaussian_cores(spec, ops, s) for s, ops in enumerate(local_ops)]
    return [MPO([cores[name] for cores in per_site]) for name in NON_GAUSSIAN_BLOCKS]


def full_hamiltonian_core(spec: HamiltonianSpec, ops: LocalOperators, site: int) -> CMatrix:
    """Core `site` of the full Hamiltonian MPO; depends only on this site's operators."""
    cores = [gaussian_core(spec, ops, site)]
    if spec.kappa != 0:
        blocks = non_gaussian_cores(spec, ops, site)
        cores += [blocks[name] for name in NON_GAUSSIAN_BLOCKS]
    return direct_sum_cores(cores, site, spec.n_modes)


def full_hamiltonian_mpo(spec: HamiltonianSpec, local_ops: Sequence[LocalOperators]) -> MPO:
    if len(local_ops) != spec.n_modes:
        raise errors.ShapeMismatch(f"Expected {spec.n_modes} local operator sets.")
    mpo = MPO([full_hamiltonian_core(spec, ops, s) for s, ops in enumerate(local_ops)])
    logger.debug("Full MPO bond dims: %s (kappa=%s)", mpo.bond_dims, spec.kappa)
    return mpo
