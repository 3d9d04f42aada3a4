"""
Operator core
Dense complex Hermitian linear algebra on bipartite spaces: partial
transpose, eigensystems, positive parts, norms and entropies (bits).

All functions are pure; inputs are never modified.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.special import entr
from scipy.stats import entropy as scipy_entropy
from scipy.stats import unitary_group

from .config import EIG_CUTOFF, HERMITIAN_TOL, PROBABILITY_TOL, TRACE_TOL
from .errors import (
    DimensionMismatchError,
    NotAStateError,
    NotHermitianError,
    ParameterRangeError,
)
from .utils import setup_logger


logger = setup_logger("locinfo.operator_core", "operator_core.log")

LN2 = np.log(2.0)

ArrayLike = Union[np.ndarray, Sequence[Sequence[complex]]]


@dataclass(frozen=True)
class BipartiteDims:
    """Local dimensions (dA, dB) of a bipartite Hilbert space."""
    dA: int
    dB: int

    def __post_init__(self):
        for name, value in (("dA", self.dA), ("dB", self.dB)):
            if int(value) != value or value < 1:
                raise DimensionMismatchError(f"{name} must be a positive integer, got {value}")

    @property
    def dim(self) -> int:
        return self.dA * self.dB

    @property
    def is_square(self) -> bool:
        return self.dA == self.dB

    @classmethod
    def square(cls, d: int) -> "BipartiteDims":
        return cls(d, d)

    @classmethod
    def infer(cls, operator: np.ndarray) -> "BipartiteDims":
        """d ⊗ d split of a d²×d² operator."""
        n = np.asarray(operator).shape[0]
        d = int(round(np.sqrt(n)))
        if d * d != n:
            raise DimensionMismatchError(
                f"cannot infer a d⊗d split for dimension {n}; pass dims explicitly")
        return cls(d, d)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues in descending order with matching orthonormal eigenvector columns."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True)
class OperatorNorms:
    op_norm: float
    trace_norm: float
    lambda_max: float
    max_abs_eig: float


# --- validation helpers ---

def as_operator(A: ArrayLike) -> np.ndarray:
    """Return A as a square complex ndarray."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {M.shape}")
    return M


def hermiticity_gap(A: np.ndarray) -> float:
    """Largest elementwise deviation |A_ij - conj(A_ji)|."""
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A - A.conj().T)))


def check_hermitian(A: ArrayLike, tol: float = HERMITIAN_TOL) -> np.ndarray:
    M = as_operator(A)
    gap = hermiticity_gap(M)
    if gap > tol:
        raise NotHermitianError(f"operator is not Hermitian (max deviation {gap:.3e} > {tol:.0e})")
    return M


def hermitize(A: ArrayLike) -> np.ndarray:
    M = as_operator(A)
    return 0.5 * (M + M.conj().T)


def check_dims(A: np.ndarray, dims: BipartiteDims) -> None:
    if A.shape[0] != dims.dim:
        raise DimensionMismatchError(
            f"operator dimension {A.shape[0]} does not match dims {dims.dA}x{dims.dB}")


def check_state(rho: ArrayLike,
                psd_tol: float = EIG_CUTOFF,
                trace_tol: float = TRACE_TOL) -> np.ndarray:
    """
    Validate a density matrix.

    Returns:
        The operator as a complex ndarray

    Raises:
        NotHermitianError: If rho is not Hermitian
        NotAStateError: If rho has an eigenvalue below -psd_tol or trace off by more than trace_tol
    """
    M = check_hermitian(rho)
    trace = float(np.real(np.trace(M)))
    if abs(trace - 1.0) > trace_tol:
        raise NotAStateError(f"trace is {trace:.12g}, expected 1 (tolerance {trace_tol:.0e})")
    lam_min = float(linalg.eigvalsh(M)[0])
    if lam_min < -psd_tol:
        raise NotAStateError(f"operator is not positive semidefinite (min eigenvalue {lam_min:.3e})")
    return M


# --- partial transpose and spectra ---

def partial_transpose(A: ArrayLike, dims: Optional[BipartiteDims] = None) -> np.ndarray:
    """
    Transpose the second tensor factor of a bipartite operator.

    Args:
        A: dA·dB square operator
        dims: local dimensions (d⊗d inferred when omitted)

    Returns:
        A^Γ as a new array
    """
    M = as_operator(A)
    dims = dims or BipartiteDims.infer(M)
    check_dims(M, dims)
    dA, dB = dims.dA, dims.dB
    return M.reshape(dA, dB, dA, dB).transpose(0, 3, 2, 1).reshape(dims.dim, dims.dim)


def hermitian_eigvals(A: ArrayLike) -> np.ndarray:
    """Eigenvalues of a Hermitian operator in descending order."""
    return linalg.eigvalsh(check_hermitian(A))[::-1]


def hermitian_eigensystem(A: ArrayLike) -> EigenSystem:
    M = check_hermitian(A)
    w, v = linalg.eigh(M)
    return EigenSystem(eigenvalues=w[::-1].copy(), eigenvectors=v[:, ::-1].copy())


def clamp_noise(eigenvalues: np.ndarray, cutoff: float = EIG_CUTOFF) -> np.ndarray:
    """Zero eigenvalues in (-cutoff, 0)."""
    out = np.array(eigenvalues, dtype=float)
    out[(out < 0) & (out > -cutoff)] = 0.0
    return out


def positive_part(H: ArrayLike) -> np.ndarray:
    """H_+ = sum of positive spectral components of H."""
    es = hermitian_eigensystem(H)
    v = es.eigenvectors
    return (v * np.clip(es.eigenvalues, 0.0, None)) @ v.conj().T


def negative_part(H: ArrayLike) -> np.ndarray:
    """H_- with H = H_+ - H_-, both positive semidefinite."""
    es = hermitian_eigensystem(H)
    v = es.eigenvectors
    return (v * np.clip(-es.eigenvalues, 0.0, None)) @ v.conj().T


def trace_positive_part(H: ArrayLike) -> float:
    """Tr H_+ (sum of positive eigenvalues)."""
    w = hermitian_eigvals(H)
    return float(np.sum(w[w > 0]))


def operator_norms(A: ArrayLike) -> OperatorNorms:
    w = hermitian_eigvals(A)
    if w.size == 0:
        return OperatorNorms(0.0, 0.0, 0.0, 0.0)
    abs_w = np.abs(w)
    max_abs = float(abs_w.max())
    return OperatorNorms(
        op_norm=max_abs,
        trace_norm=float(abs_w.sum()),
        lambda_max=float(w[0]),
        max_abs_eig=max_abs,
    )


# --- entropies (bits) ---

def _entropy_of_spectrum(eigenvalues: np.ndarray) -> float:
    return float(np.sum(entr(clamp_noise(eigenvalues))) / LN2)


def von_neumann_entropy(rho: ArrayLike) -> float:
    """-Tr ρ log2 ρ with 0·log 0 = 0."""
    M = check_state(rho)
    return _entropy_of_spectrum(linalg.eigvalsh(M))


def cross_entropy(rho: ArrayLike, sigma: ArrayLike) -> float:
    """
    -Tr ρ log2 σ evaluated in σ's eigenbasis.

    Returns float('inf') when ρ puts weight above EIG_CUTOFF on the kernel of σ.
    """
    R = check_state(rho)
    S = check_state(sigma)
    if R.shape != S.shape:
        raise DimensionMismatchError(f"shape mismatch {R.shape} vs {S.shape}")
    s, w = linalg.eigh(S)
    weights = np.real(np.einsum("ij,ik,kj->j", w.conj(), R, w))
    kernel = s <= EIG_CUTOFF
    if np.any(weights[kernel] > EIG_CUTOFF):
        logger.debug("support of rho not contained in support of sigma")
        return float("inf")
    support = ~kernel
    return float(-np.sum(weights[support] * np.log2(s[support])))


def relative_entropy(rho: ArrayLike, sigma: ArrayLike) -> float:
    """S(ρ|σ) = Tr ρ log2 ρ - Tr ρ log2 σ (bits, +inf on support violation)."""
    cross = cross_entropy(rho, sigma)
    if np.isinf(cross):
        return cross
    return cross - von_neumann_entropy(rho)


def binary_entropy(p: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """H2(p) in bits; accepts scalars or arrays with entries in [0, 1]."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr < -PROBABILITY_TOL) or np.any(arr > 1.0 + PROBABILITY_TOL):
        raise ParameterRangeError(f"binary entropy needs p in [0, 1], got {p}")
    arr = np.clip(arr, 0.0, 1.0)
    h = (entr(arr) + entr(1.0 - arr)) / LN2
    return float(h) if h.ndim == 0 else h


def shannon_entropy(probabilities: Sequence[float]) -> float:
    """Shannon entropy (bits) of a probability vector."""
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ParameterRangeError("distribution must be a non-empty 1-D sequence")
    if np.any(p < -PROBABILITY_TOL) or np.any(p > 1.0 + PROBABILITY_TOL):
        raise ParameterRangeError(f"probabilities must lie in [0, 1], got {p.tolist()}")
    if abs(p.sum() - 1.0) > PROBABILITY_TOL:
        raise ParameterRangeError(f"probabilities sum to {p.sum():.12g}, expected 1")
    return float(scipy_entropy(np.clip(p, 0.0, None), base=2))


def binary_and_shannon_entropy(p: Union[float, Sequence[float]]) -> float:
    """Binary entropy for a scalar, Shannon entropy for a distribution."""
    if np.ndim(p) == 0:
        return binary_entropy(float(p))
    return shannon_entropy(p)


# --- reduced states and copies ---

def partial_trace_b(rho: ArrayLike, dims: Optional[BipartiteDims] = None) -> np.ndarray:
    M = as_operator(rho)
    dims = dims or BipartiteDims.infer(M)
    check_dims(M, dims)
    return np.einsum("ijkj->ik", M.reshape(dims.dA, dims.dB, dims.dA, dims.dB))


def partial_trace_a(rho: ArrayLike, dims: Optional[BipartiteDims] = None) -> np.ndarray:
    M = as_operator(rho)
    dims = dims or BipartiteDims.infer(M)
    check_dims(M, dims)
    return np.einsum("ijil->jl", M.reshape(dims.dA, dims.dB, dims.dA, dims.dB))


def tensor_power(A: ArrayLike, dims: BipartiteDims, n: int) -> Tuple[np.ndarray, BipartiteDims]:
    """
    A^{⊗n} regrouped as (A1..An)|(B1..Bn).

    Returns:
        (operator, dims) where dims = (dA^n, dB^n)
    """
    M = as_operator(A)
    check_dims(M, dims)
    if n < 1:
        raise ParameterRangeError(f"number of copies must be >= 1, got {n}")
    full = M
    for _ in range(n - 1):
        full = np.kron(full, M)
    if n == 1:
        return full.copy(), dims
    # row axes (a1, b1, a2, b2, ...), column axes follow
    local = [dims.dA, dims.dB] * n
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    perm = order + [2 * n + k for k in order]
    out_dims = BipartiteDims(dims.dA ** n, dims.dB ** n)
    regrouped = full.reshape(local + local).transpose(perm).reshape(out_dims.dim, out_dims.dim)
    return regrouped, out_dims


# --- random operators (tests, dual banks, measurement bases) ---

def random_density_matrix(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Ginibre-distributed density matrix of the given rank (full rank by default)."""
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = hermitize(rho)
    return rho / np.real(np.trace(rho))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (g + g.conj().T) / np.sqrt(dim)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(d, random_state=rng)


def basis_projectors(unitary: np.ndarray) -> List[np.ndarray]:
    """Rank-1 projectors onto the columns of a unitary."""
    U = np.asarray(unitary, dtype=complex)
    return [np.outer(U[:, k], U[:, k].conj()) for k in range(U.shape[1])]


def computational_basis(d: int) -> List[np.ndarray]:
    return basis_projectors(np.eye(d))
