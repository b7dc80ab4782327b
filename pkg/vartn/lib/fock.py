"""Truncated Fock-space operator algebra.

Matrices follow a|n> = sqrt(n)|n-1>, so `a` carries sqrt(n+1) at (n, n+1).
Products are built at a padded dimension and truncated afterwards so every
retained entry equals the infinite-dimensional matrix element.
"""

from dataclasses import asdict, dataclass, fields
from functools import reduce
from typing import Callable, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from . import errors
from .constants import POLY_PAD

CMatrix = NDArray[np.complex128]

# ladder degree of each symbol
SYMBOL_DEGREE = {"1": 0, "a": 1, "ad": 1, "x": 1, "p": 1, "n": 2}
MAX_DEGREE = 4


@dataclass(frozen=True)
class TruncatedOperator:
    data: CMatrix
    label: str = ""

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] < 2:
            raise errors.ShapeMismatch(f"Operator '{self.label}' must be square with dim >= 2.")
        if not np.all(np.isfinite(data)):
            raise errors.IntegrityError(f"Operator '{self.label}' has non-finite entries.")
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return int(self.data.shape[0])


class Ladder(NamedTuple):
    a: TruncatedOperator
    adag: TruncatedOperator
    x: TruncatedOperator
    p: TruncatedOperator
    n: TruncatedOperator


@dataclass(frozen=True)
class BasisParams:
    """Single-mode basis parameters; the all-zero set is the Fock basis."""

    alpha_x: float = 0.0
    alpha_p: float = 0.0
    r: float = 0.0
    phi: float = 0.0
    theta: float = 0.0
    s: float = 0.0
    gamma: float = 0.0
    kappa: float = 0.0

    def __post_init__(self) -> None:
        for f in fields(self):
            value = float(getattr(self, f.name))
            if not np.isfinite(value):
                raise errors.IntegrityError(f"Basis parameter {f.name} is not finite.")
            object.__setattr__(self, f.name, value)

    @classmethod
    def names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "BasisParams":
        return cls(*[float(v) for v in values])

    def as_array(self) -> NDArray[np.float64]:
        return np.array([getattr(self, name) for name in self.names()])

    def is_identity(self) -> bool:
        return not np.any(self.as_array())

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_x, self.alpha_p)


def ladder_arrays(dim: int) -> Dict[str, CMatrix]:
    """Raw ladder matrices at `dim`, keyed by symbol. Not padded."""
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    ad = a.conj().T
    return {
        "1": np.eye(dim, dtype=complex),
        "a": a,
        "ad": ad,
        "x": (a + ad) / np.sqrt(2),
        "p": (a - ad) / (1j * np.sqrt(2)),
        "n": np.diag(np.arange(dim)).astype(complex),
    }


def ladder(D: int) -> Ladder:
    if D < 2:
        raise errors.ShapeMismatch(f"Cutoff must be at least 2, got {D}.")
    ops = ladder_arrays(D)
    return Ladder(
        a=TruncatedOperator(ops["a"], "a"),
        adag=TruncatedOperator(ops["ad"], "ad"),
        x=TruncatedOperator(ops["x"], "x"),
        p=TruncatedOperator(ops["p"], "p"),
        n=TruncatedOperator(ops["n"], "n"),
    )


def _degree(factors: Sequence[str]) -> int:
    unknown = [f for f in factors if f not in SYMBOL_DEGREE]
    if unknown:
        raise ValueError(f"Unknown ladder symbols: {', '.join(unknown)}")
    return sum(SYMBOL_DEGREE[f] for f in factors)


def padded_array(dim: int, factors: Sequence[str], pad: int = POLY_PAD) -> CMatrix:
    """Product of ladder symbols exact on the leading `dim` block."""
    if _degree(factors) > MAX_DEGREE:
        raise errors.DegreeTooHigh(
            f"Product {' '.join(factors)} exceeds ladder degree {MAX_DEGREE}."
        )
    ops = ladder_arrays(dim + pad)
    product = reduce(np.matmul, [ops[f] for f in factors], ops["1"])
    return product[:dim, :dim]


def padded_product(D: int, factors: Sequence[str], pad: int = POLY_PAD) -> TruncatedOperator:
    return TruncatedOperator(padded_array(D, factors, pad), " ".join(factors) or "1")


def padded_polynomial(
    D: int, terms: Sequence[Tuple[complex, Sequence[str]]], pad: int = POLY_PAD
) -> TruncatedOperator:
    """Sum of coefficient-weighted padded products, e.g. [(1, "xp"), (1, "px")]."""
    data = sum(
        (coef * padded_array(D, list(word), pad) for coef, word in terms),
        np.zeros((D, D), dtype=complex),
    )
    label = " + ".join(f"{coef}*{''.join(word)}" for coef, word in terms)
    return TruncatedOperator(data, label)


def _param(params: Sequence[float], index: int) -> float:
    return float(params[index]) if len(params) > index else 0.0


def _generator(kind: str, params: Sequence[float], dim: int) -> CMatrix:
    if kind == "displacement":
        alpha = complex(_param(params, 0), _param(params, 1))
        ops = ladder_arrays(dim)
        return alpha * ops["ad"] - np.conj(alpha) * ops["a"]
    if kind == "squeeze":
        z = _param(params, 0) * np.exp(1j * _param(params, 1))
        return (np.conj(z) * padded_array(dim, "aa") - z * padded_array(dim, ["ad", "ad"])) / 2
    if kind == "rotation":
        return 1j * _param(params, 0) * np.diag(np.arange(dim)).astype(complex)
    if kind == "quadratic_phase":
        return 1j * _param(params, 0) / 2 * padded_array(dim, "xx")
    if kind == "cubic_phase":
        return 1j * np.sqrt(2) * _param(params, 0) / 3 * padded_array(dim, "xxx")
    if kind == "kerr":
        return 1j * _param(params, 0) * np.diag(np.arange(dim) ** 2).astype(complex)
    raise ValueError(f"Unknown gate kind: {kind}")


GATE_KINDS = ("displacement", "squeeze", "rotation", "quadratic_phase", "cubic_phase", "kerr")


def gate_matrix(
    kind: str, params: Sequence[float], D: int, pad: Optional[int] = None
) -> TruncatedOperator:
    """Single-mode gate exp(G) built at D + pad and truncated to D.

    Args:
        kind (str): one of GATE_KINDS.
        params (Sequence[float]): displacement (alpha_x, alpha_p), squeeze (r, phi),
                                  rotation (theta,), quadratic_phase (s,),
                                  cubic_phase (gamma,), kerr (kappa,).
        D (int): retained dimension.
        pad (int, optional): extra dimension for the exponential. Defaults to 2 * D.

    Returns:
        TruncatedOperator: the truncated gate.
    """

    if pad is None:
        pad = 2 * D
    dim = D + pad
    U = linalg.expm(_generator(kind, params, dim))
    return TruncatedOperator(U[:D, :D], kind)


def beamsplitter_matrix(theta: float, phi: float, D: int, pad: Optional[int] = None) -> CMatrix:
    """Two-mode exp(theta (e^{i phi} a1 a2^dag - h.c.)) on the D x D product space."""
    if pad is None:
        pad = D
    dim = D + pad
    ops = ladder_arrays(dim)
    a1ad2 = np.kron(ops["a"], ops["ad"])
    G = theta * (np.exp(1j * phi) * a1ad2 - np.exp(-1j * phi) * a1ad2.conj().T)
    U = linalg.expm(G).reshape(dim, dim, dim, dim)
    return U[:D, :D, :D, :D].reshape(D * D, D * D)


# composition order of the parameterized basis unitary, outermost first
PLBO_GATES: Tuple[Tuple[str, Callable[[BasisParams], Tuple[float, ...]]], ...] = (
    ("displacement", lambda b: (b.alpha_x, b.alpha_p)),
    ("squeeze", lambda b: (b.r, b.phi)),
    ("rotation", lambda b: (b.theta,)),
    ("quadratic_phase", lambda b: (b.s,)),
    ("cubic_phase", lambda b: (b.gamma,)),
    ("kerr", lambda b: (b.kappa,)),
)


def plbo_unitary_matrix(
    params: BasisParams, D_out: int, d_in: int, pad: Optional[int] = None
) -> CMatrix:
    """Matrix elements <n|U|m> of U = D S R P2 P3 K for n < D_out, m < d_in."""
    if D_out < d_in:
        raise errors.ShapeMismatch(f"D_out={D_out} must be at least d_in={d_in}.")
    if pad is None:
        pad = 2 * D_out
    dim = D_out + pad
    U = reduce(
        np.matmul,
        [gate_matrix(kind, get(params), dim, pad=0).data for kind, get in PLBO_GATES],
    )
    return U[:D_out, :d_in]


def transformed_ladder_array(params: BasisParams, dim: int) -> CMatrix:
    """U^dag a U for the parameterized basis unitary, exact on the leading `dim` block."""
    ops = ladder_arrays(dim + POLY_PAD)
    n = np.arange(dim + POLY_PAD)
    kerr_1 = np.diag(np.exp(1j * params.kappa * (2 * n - 1)))
    kerr_4 = np.diag(np.exp(4j * params.kappa * (n - 1)))

    ch, sh = np.cosh(params.r), np.sinh(params.r)
    e_theta = np.exp(1j * params.theta)
    e_phi = np.exp(1j * (params.phi - params.theta))
    c1 = (1 + 0.5j * params.s) * e_theta * ch + 0.5j * params.s * e_phi * sh
    c2 = (1 - 0.5j * params.s) * e_phi * sh - 0.5j * params.s * e_theta * ch
    cubic = 0.5j * params.gamma * (e_theta * ch + e_phi * sh)

    a, ad = ops["a"], ops["ad"]
    A = (
        c1 * (a @ kerr_1)
        - c2 * (kerr_1.conj() @ ad)
        + cubic * (2 * ops["n"] + ops["1"] + a @ a @ kerr_4 + kerr_4.conj() @ ad @ ad)
        + params.alpha * ops["1"]
    )
    return A[:dim, :dim]


def transformed_ladder(params: BasisParams, D: int) -> TruncatedOperator:
    return TruncatedOperator(transformed_ladder_array(params, D), "A")


def isometry_residual(U: CMatrix) -> float:
    """Max-abs deviation of U^dag U from the identity."""
    gram = U.conj().T @ U
    return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


def search_cutoff(
    build: Callable[[int], CMatrix], d: int, tol: float, d_max: int
) -> int:
    """Smallest D for which build(D) is an isometry within tol.

    Doubles D from d until the residual drops below tol, then bisects on the
    rows of the last (passing) matrix.
    """

    D, previous = d, d
    U = build(D)
    residual = isometry_residual(U)
    while residual >= tol:
        if D >= d_max:
            raise errors.CutoffNotReached(d_max, residual)
        previous, D = D, min(2 * D, d_max)
        U = build(D)
        residual = isometry_residual(U)

    if D == d:
        return d

    lo, hi = previous, D
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if isometry_residual(U[:mid]) < tol:
            hi = mid
        else:
            lo = mid
    return hi


def effective_cutoff(params: BasisParams, d: int, tol: float = 1e-10, d_max: int = 256) -> int:
    if not 0 < tol < 1:
        raise errors.ConfigError(f"Cutoff tolerance must lie in (0, 1), got {tol}.")
    return search_cutoff(lambda D: plbo_unitary_matrix(params, D, d), d, tol, d_max)
