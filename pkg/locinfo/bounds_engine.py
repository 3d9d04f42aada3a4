"""
Bounds engine
Upper bounds B1, B2 on the localisable-information rate, the dual
fidelity bounds behind them, the one-way measure-and-send protocol
lower bound r_P, and the deficit bounds delta_B / delta_P.

All quantities are in bits. Family points are addressed as
(family, d, param) with family in {"werner", "isotropic"}.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.optimize import minimize_scalar
from scipy.special import xlogy

from .config import (
    B2_GRID_STEP,
    B2_PARAM_TOL,
    DEFICIT_NOISE_TOL,
    DUAL_BANK_SIZE,
    MARGINAL_TOL,
    R_PROTOCOL_RANDOM_BASES,
    RANDOM_SEED,
)
from .entanglement_measures import measure_point
from .errors import (
    DimensionMismatchError,
    InfeasibleProblemError,
    InvalidMeasurementError,
    MarginalNotMaximallyMixedError,
    ParameterRangeError,
    UnsupportedFamilyError,
)
from .operator_core import (
    LN2,
    BipartiteDims,
    as_operator,
    basis_projectors,
    check_dims,
    check_hermitian,
    check_state,
    computational_basis,
    haar_unitary,
    hermitian_eigvals,
    operator_norms,
    partial_trace_b,
    partial_transpose,
    random_hermitian,
    relative_entropy,
    tensor_power,
    trace_positive_part,
    von_neumann_entropy,
)
from .state_families import (
    IsotropicParam,
    StateSpec,
    WernerParam,
    build_state,
    detect_family,
    family_range,
    isotropic,
    isotropic_fidelity,
    structural_operators,
    werner,
    werner_eigenvalues,
    werner_parameter_from_state,
)
from .utils import setup_logger


logger = setup_logger("locinfo.bounds_engine", "bounds_engine.log")

CLOSED_FORM_TOL = 1e-6


@dataclass
class RateParams:
    """
    Trace budget of the primal fidelity problem.

    K = 2^{n(log2(dA dB) - r)} for local-only distillation; with a singlet
    rate r_s the budget is K = 2^{n(log2(dA dB) - r - 2 r_s)} and K_s = 2^{n r_s}.
    """
    n: int
    r: float
    dims: BipartiteDims
    r_s: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterRangeError(f"number of copies must be >= 1, got {self.n}")
        if self.r < 0 or self.r_s < 0:
            raise ParameterRangeError(f"rates must be non-negative, got r={self.r}, r_s={self.r_s}")

    @property
    def total_information(self) -> float:
        return float(np.log2(self.dims.dim))

    @property
    def K(self) -> float:
        return float(2.0 ** (self.n * (self.total_information - self.r - 2.0 * self.r_s)))

    @property
    def Ks(self) -> float:
        return float(2.0 ** (self.n * self.r_s))


def rate_from_trace_budget(K: float, dims: BipartiteDims, n: int = 1) -> float:
    """Inverse of RateParams.K for r_s = 0."""
    if K <= 0:
        raise ParameterRangeError(f"trace budget must be positive, got {K}")
    return float(np.log2(dims.dim) - np.log2(K) / n)


@dataclass
class B2Optimum:
    value: float
    sigma_family: str
    sigma_param: float
    info_content: float

    @property
    def excess(self) -> float:
        return self.value - self.info_content

    def describe(self) -> str:
        key = "alpha" if self.sigma_family == "werner" else "mu"
        return f"{self.sigma_family}({key}={self.sigma_param:.12g})"


@dataclass
class ClosedFormBounds:
    b1: float
    b2: float
    r_protocol: float


@dataclass
class DeficitBounds:
    delta_b: Optional[float]
    delta_p: Optional[float]


@dataclass
class BoundReport:
    state: str
    dims: BipartiteDims
    info_content: float
    b1: float
    b2: float
    sigma_star: str
    r_protocol: Optional[float]
    delta_b: float
    delta_p: Optional[float]
    family: Optional[str] = None
    d: Optional[int] = None
    param: Optional[float] = None
    er: Optional[float] = None
    ef: Optional[float] = None
    notes: List[str] = field(default_factory=list)


@dataclass
class ProtocolOptimum:
    value: float
    basis_index: int  # 0 = computational basis
    n_bases: int


# --- general-state bounds ---

def _state_and_dims(rho, dims: Optional[BipartiteDims]) -> Tuple[np.ndarray, BipartiteDims]:
    R = check_state(rho)
    dims = dims or BipartiteDims.infer(R)
    check_dims(R, dims)
    return R, dims


def info_content(rho: np.ndarray, dims: Optional[BipartiteDims] = None) -> float:
    """I = log2(dA dB) - S(ρ)."""
    R, dims = _state_and_dims(rho, dims)
    return float(np.log2(dims.dim) - von_neumann_entropy(R))


def b1_general(rho: np.ndarray, dims: Optional[BipartiteDims] = None) -> float:
    """B1 = log2(dA dB) + log2 max|eig(ρ^Γ)|."""
    R, dims = _state_and_dims(rho, dims)
    norms = operator_norms(partial_transpose(R, dims))
    return float(np.log2(dims.dim) + np.log2(norms.max_abs_eig))


def b2_general(rho: np.ndarray, sigma: np.ndarray, dims: Optional[BipartiteDims] = None) -> float:
    """B2(ρ, σ) = log2(dA dB) + S(ρ|σ) + log2 ||σ^Γ||_op; +inf propagates."""
    R, dims = _state_and_dims(rho, dims)
    S = check_state(sigma)
    if S.shape != R.shape:
        raise DimensionMismatchError(f"rho is {R.shape}, sigma is {S.shape}")
    rel = relative_entropy(R, S)
    if np.isinf(rel):
        return rel
    return float(np.log2(dims.dim) + rel + np.log2(operator_norms(partial_transpose(S, dims)).op_norm))


# --- spectral B2 excess over the symmetric sigma-families ---

def werner_entropy(d: int, beta: float) -> float:
    """S(ρ_W) from its two-level spectrum."""
    r_plus, r_minus = werner_eigenvalues(d, beta)
    n_s, n_a = d * (d + 1) / 2, d * (d - 1) / 2
    return float(-(n_s * xlogy(r_plus, r_plus) + n_a * xlogy(r_minus, r_minus)) / LN2)


def isotropic_entropy(d: int, lam: float) -> float:
    f = isotropic_fidelity(d, lam)
    rest = (1.0 - lam) / (d * d)
    return float(-(xlogy(f, f) + (d * d - 1) * xlogy(rest, rest)) / LN2)


def family_entropy(family: str, d: int, param: float) -> float:
    if family == "werner":
        return werner_entropy(d, WernerParam(d, param).beta)
    if family == "isotropic":
        return isotropic_entropy(d, IsotropicParam(d, param).lam)
    raise UnsupportedFamilyError(f"unknown family '{family}'")


def family_info_content(family: str, d: int, param: float) -> float:
    return float(2.0 * np.log2(d) - family_entropy(family, d, param))


def _werner_weights(d: int, beta: float) -> Tuple[float, float]:
    """(Tr ρ_W P_S, Tr ρ_W P_A)."""
    r_plus, _ = werner_eigenvalues(d, beta)
    a = float(np.clip(d * (d + 1) / 2 * r_plus, 0.0, 1.0))
    return a, 1.0 - a


def werner_b2_excess(d: int, beta: float, alpha) -> np.ndarray:
    """
    B2(ρ_W(β), σ_W(α)) - I(ρ_W(β)), vectorised over α:
    -a·log2(1+α) - b·log2(1-α) + log2 max(|1+dα|, 1).
    """
    alpha = np.asarray(alpha, dtype=float)
    a, b = _werner_weights(d, beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (-xlogy(a, 1.0 + alpha) - xlogy(b, 1.0 - alpha)
               + np.log(np.maximum(np.abs(1.0 + d * alpha), 1.0))) / LN2
    return out


def isotropic_b2_excess(d: int, lam: float, mu) -> np.ndarray:
    """B2(ρ_iso(λ), σ_iso(μ)) - I(ρ_iso(λ)), vectorised over μ."""
    mu = np.asarray(mu, dtype=float)
    f = float(np.clip(isotropic_fidelity(d, lam), 0.0, 1.0))
    n = d * d
    g = (1.0 + mu * (n - 1)) / n
    rest = (1.0 - mu) / n
    pt_norm = np.maximum(np.abs(1.0 + mu * (d - 1)), np.abs(1.0 - mu * (d + 1))) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (-xlogy(f, g) - xlogy(1.0 - f, rest) + np.log(pt_norm)) / LN2
    return out


def _excess_function(family: str, d: int, param: float):
    if family == "werner":
        return lambda t: werner_b2_excess(d, param, t)
    if family == "isotropic":
        return lambda t: isotropic_b2_excess(d, param, t)
    raise UnsupportedFamilyError(f"unknown family '{family}'")


def _structural_candidates(family: str, d: int, param: float) -> List[float]:
    lo, hi = family_range(family, d)
    points = [lo, hi, 0.0, param]
    if family == "werner":
        # kink of log2 max(|1+dα|, 1)
        points.append(-2.0 / d)
    return [p for p in points if lo <= p <= hi]


def b2_optimize_family(family: str, d: int, param: float,
                       grid_step: float = B2_GRID_STEP,
                       param_tol: float = B2_PARAM_TOL) -> B2Optimum:
    """
    min over the matching one-parameter σ-family of B2(ρ, σ).

    A coarse grid over the σ-parameter range is refined with a bounded
    Brent search around the best grid point; structural points (range ends,
    the maximally mixed σ, σ = ρ, the Werner kink at -2/d) are always tried.
    """
    if family == "werner":
        param = WernerParam(d, param).beta
    elif family == "isotropic":
        param = IsotropicParam(d, param).lam
    else:
        raise UnsupportedFamilyError(f"b2 optimisation supports werner/isotropic, got '{family}'")

    excess = _excess_function(family, d, param)
    lo, hi = family_range(family, d)
    n_points = int(round((hi - lo) / grid_step)) + 1
    grid = np.linspace(lo, hi, n_points)
    values = excess(grid)
    k = int(np.argmin(values))
    best_t, best_h = float(grid[k]), float(values[k])

    bracket = (float(grid[max(k - 1, 0)]), float(grid[min(k + 1, n_points - 1)]))
    if np.isfinite(best_h) and bracket[1] > bracket[0]:
        res = minimize_scalar(lambda t: float(excess(t)), bounds=bracket,
                              method="bounded", options={"xatol": param_tol})
        if res.success and float(res.fun) < best_h:
            best_t, best_h = float(res.x), float(res.fun)

    for t in _structural_candidates(family, d, param):
        h = float(excess(t))
        if h < best_h:
            best_t, best_h = t, h

    info = family_info_content(family, d, param)
    logger.debug(f"b2 {family}(d={d}, param={param:.6g}): sigma param {best_t:.9g}, excess {best_h:.3e}")
    return B2Optimum(value=info + best_h, sigma_family=family, sigma_param=best_t, info_content=info)


def b2_optimize_symmetric(rho: np.ndarray, dims: Optional[BipartiteDims] = None,
                          twirl_first: bool = False) -> B2Optimum:
    """
    B2 optimum for a Werner or isotropic state given as a matrix.

    Args:
        rho: state invariant under U⊗U or U⊗U*
        dims: local dimensions (d⊗d inferred when omitted)
        twirl_first: accept any state and optimise its U⊗U twirl instead
    """
    R, dims = _state_and_dims(rho, dims)
    point = detect_family(R, dims)
    if point is None:
        if not twirl_first:
            raise UnsupportedFamilyError("state is neither Werner nor isotropic; pass twirl_first=True")
        point = ("werner", dims.dA, werner_parameter_from_state(R, dims))
    return b2_optimize_family(*point)


def b2_best_reference(rho: np.ndarray, dims: Optional[BipartiteDims] = None) -> B2Optimum:
    """
    Smallest B2(ρ, σ) over σ ∈ {ρ} ∪ Werner family ∪ isotropic family.

    Each candidate is a valid bound; exact only for twirl-invariant ρ.
    """
    R, dims = _state_and_dims(rho, dims)
    info = info_content(R, dims)
    best = B2Optimum(value=b1_general(R, dims), sigma_family="self", sigma_param=float("nan"),
                     info_content=info)
    if not dims.is_square or dims.dA < 2:
        return best
    d = dims.dA
    for family, builder in (("werner", werner), ("isotropic", isotropic)):
        lo, hi = family_range(family, d)

        def objective(t: float) -> float:
            value = b2_general(R, builder(d, t), dims)
            return value if np.isfinite(value) else 1e6

        grid = np.linspace(lo, hi, 41)
        values = np.array([objective(t) for t in grid])
        k = int(np.argmin(values))
        bracket = (float(grid[max(k - 1, 0)]), float(grid[min(k + 1, grid.size - 1)]))
        res = minimize_scalar(objective, bounds=bracket, method="bounded", options={"xatol": 1e-7})
        t, value = (float(res.x), float(res.fun)) if res.fun < values[k] else (float(grid[k]), float(values[k]))
        if value < best.value:
            best = B2Optimum(value=value, sigma_family=family, sigma_param=t, info_content=info)
    return best


# --- closed forms ---

def werner_b1_closed_form(d: int, beta: float) -> float:
    return float(2.0 * np.log2(d) + np.log2(max(abs(1.0 + d * beta), 1.0) / (d * d + d * beta)))


def isotropic_b1_closed_form(d: int, lam: float) -> float:
    if lam >= 0:
        return float(np.log2(lam * (d - 1) + 1.0))
    return float(np.log2(1.0 - lam * (d + 1)))


def werner_knot(d: int) -> float:
    """β = -3d/(d²+2), where the optimal σ reaches the kink α = -2/d."""
    return -3.0 * d / (d * d + 2.0)


def werner_optimal_alpha(d: int, beta: float) -> float:
    return (1.0 + d * beta) / (d + beta)


def werner_b2_closed_form(d: int, beta: float) -> float:
    info = family_info_content("werner", d, beta)
    if beta >= -1.0 / d:
        return info
    a, b = _werner_weights(d, beta)
    if beta >= werner_knot(d):
        alpha = werner_optimal_alpha(d, beta)
        return float(info + (-xlogy(a, 1.0 + alpha) - xlogy(b, 1.0 - alpha)) / LN2)
    return float(info + (-xlogy(a, (d - 2.0) / d) - xlogy(b, (d + 2.0) / d)) / LN2)


def isotropic_optimal_mu(d: int, lam: float) -> float:
    """p = ((d+1)λ - 1)/((1-d²)(λ-1) + d)."""
    return ((d + 1) * lam - 1.0) / ((1.0 - d * d) * (lam - 1.0) + d)


def _isotropic_entangled_b2(d: int, lam: float, sign: float) -> float:
    info = family_info_content("isotropic", d, lam)
    if lam >= 1.0:
        return float(np.log2(d))
    p = isotropic_optimal_mu(d, lam)
    f = isotropic_fidelity(d, lam)
    return float(info + np.log2((1.0 + p * (d - 1)) / (1.0 - p))
                 + sign * f * np.log2((1.0 - p) / (1.0 + p * (d * d - 1))))


def isotropic_b2_closed_form(d: int, lam: float) -> float:
    if lam <= 1.0 / (d + 1):
        return family_info_content("isotropic", d, lam)
    return _isotropic_entangled_b2(d, lam, +1.0)


def isotropic_b2_closed_form_variant(d: int, lam: float) -> float:
    """Second branch with the f-term subtracted; kept for discrepancy reports."""
    if lam <= 1.0 / (d + 1):
        return family_info_content("isotropic", d, lam)
    return _isotropic_entangled_b2(d, lam, -1.0)


def werner_r_protocol_closed_form(d: int, beta: float) -> float:
    """log2 d + ((1+β)/(d+β))·log2(1+β) - log2(d+β)."""
    return float(np.log2(d) + xlogy(1.0 + beta, 1.0 + beta) / ((d + beta) * LN2) - np.log2(d + beta))


def isotropic_r_protocol_closed_form(d: int, lam: float) -> float:
    """log2 d + q·log2 q + (1-q)·log2((1-λ)/d) with q = λ + (1-λ)/d."""
    q = lam + (1.0 - lam) / d
    return float(np.log2(d) + (xlogy(q, q) + xlogy(1.0 - q, (1.0 - lam) / d)) / LN2)


def isotropic_r_protocol_closed_form_variant(d: int, lam: float) -> float:
    """log2 d + q·log2(1 + (1-λ)/d); kept for discrepancy reports."""
    q = lam + (1.0 - lam) / d
    return float(np.log2(d) + q * np.log2(1.0 + (1.0 - lam) / d))


def closed_form_bounds(family: str, d: int, param: float) -> ClosedFormBounds:
    if family == "werner":
        beta = WernerParam(d, param).beta
        return ClosedFormBounds(
            b1=werner_b1_closed_form(d, beta),
            b2=werner_b2_closed_form(d, beta),
            r_protocol=werner_r_protocol_closed_form(d, beta),
        )
    if family == "isotropic":
        lam = IsotropicParam(d, param).lam
        return ClosedFormBounds(
            b1=isotropic_b1_closed_form(d, lam),
            b2=isotropic_b2_closed_form(d, lam),
            r_protocol=isotropic_r_protocol_closed_form(d, lam),
        )
    raise UnsupportedFamilyError(f"closed forms exist for werner/isotropic, got '{family}'")


# --- dual fidelity bounds ---

def _dual_operands(rho_n, D, dims: Optional[BipartiteDims]) -> Tuple[np.ndarray, np.ndarray, BipartiteDims]:
    R = check_state(rho_n)
    Dm = check_hermitian(D)
    if Dm.shape != R.shape:
        raise DimensionMismatchError(f"rho is {R.shape}, D is {Dm.shape}")
    dims = dims or BipartiteDims.infer(R)
    check_dims(R, dims)
    return R, Dm, dims


def dual_fidelity_bound(rho_n: np.ndarray, D: np.ndarray, K: float,
                        dims: Optional[BipartiteDims] = None) -> float:
    """F ≤ Tr(ρ - D)_+ + K·λmax(D^Γ) for any Hermitian D."""
    if K <= 0:
        raise ParameterRangeError(f"trace budget K must be positive, got {K}")
    R, Dm, dims = _dual_operands(rho_n, D, dims)
    lam_max = float(hermitian_eigvals(partial_transpose(Dm, dims))[0])
    return trace_positive_part(R - Dm) + K * lam_max


def dual_fidelity_bound_transposed(rho_n: np.ndarray, D: np.ndarray, K: float,
                                   dims: Optional[BipartiteDims] = None) -> float:
    """Tr(ρ - D^Γ)_+ + K·λmax(D); the same bound with D replaced by D^Γ."""
    if K <= 0:
        raise ParameterRangeError(f"trace budget K must be positive, got {K}")
    R, Dm, dims = _dual_operands(rho_n, D, dims)
    return trace_positive_part(R - partial_transpose(Dm, dims)) + K * float(hermitian_eigvals(Dm)[0])


def dual_fidelity_bound_mixed(rho_n: np.ndarray, D: np.ndarray, lam: float, K: float, Ks: float,
                              dims: Optional[BipartiteDims] = None) -> float:
    """Tr(ρ - D)_+ + (1/K_s)·Tr|D^Γ - λI| + λK."""
    if K <= 0 or Ks < 1:
        raise ParameterRangeError(f"need K > 0 and K_s >= 1, got K={K}, K_s={Ks}")
    R, Dm, dims = _dual_operands(rho_n, D, dims)
    shifted = hermitian_eigvals(partial_transpose(Dm, dims)) - lam
    return trace_positive_part(R - Dm) + float(np.abs(shifted).sum()) / Ks + lam * K


def minimize_mixed_dual(rho_n: np.ndarray, D: np.ndarray, K: float, Ks: float,
                        dims: Optional[BipartiteDims] = None) -> Tuple[float, float]:
    """
    min over λ of dual_fidelity_bound_mixed.

    The objective is convex and piecewise linear in λ with breakpoints at the
    eigenvalues of D^Γ; every breakpoint is evaluated and a bounded Brent
    search over [λmin, λmax] is run on top.

    Returns:
        (value, lam)

    Raises:
        InfeasibleProblemError: If K > dim/K_s (the mixed primal is empty)
    """
    if K <= 0 or Ks < 1:
        raise ParameterRangeError(f"need K > 0 and K_s >= 1, got K={K}, K_s={Ks}")
    R, Dm, dims = _dual_operands(rho_n, D, dims)
    if K > dims.dim / Ks * (1 + 1e-12):
        # slope K - dim/K_s < 0 below λmin: unbounded below in λ
        raise InfeasibleProblemError(
            f"mixed dual unbounded: K = {K} exceeds dim/K_s = {dims.dim / Ks}")
    base = trace_positive_part(R - Dm)
    eig = hermitian_eigvals(partial_transpose(Dm, dims))

    def objective(t: float) -> float:
        return base + float(np.abs(eig - t).sum()) / Ks + t * K

    values = [objective(t) for t in eig]
    k = int(np.argmin(values))
    best_value, best_lam = values[k], float(eig[k])
    if eig[0] > eig[-1]:
        res = minimize_scalar(objective, bounds=(float(eig[-1]), float(eig[0])),
                              method="bounded", options={"xatol": 1e-9})
        if float(res.fun) < best_value:
            best_value, best_lam = float(res.fun), float(res.x)
    return float(best_value), best_lam


def dual_bank(rho: np.ndarray, size: int = DUAL_BANK_SIZE,
              rng: Optional[np.random.Generator] = None) -> List[np.ndarray]:
    """D = ρ followed by `size` random Hermitian operators of comparable scale."""
    R = as_operator(rho)
    rng = rng or np.random.default_rng(RANDOM_SEED)
    dim = R.shape[0]
    scale = max(float(np.abs(hermitian_eigvals(R)).max()), 1.0 / dim)
    bank = [R.copy()]
    bank.extend(R + random_hermitian(dim, rng, scale=scale * rng.uniform(0.05, 1.0))
                for _ in range(size))
    return bank


def best_dual_bound(rho_n: np.ndarray, K: float, dims: Optional[BipartiteDims] = None,
                    bank: Optional[Iterable[np.ndarray]] = None,
                    Ks: Optional[float] = None) -> Tuple[float, int]:
    """
    Smallest dual value over a bank of D (mixed form when Ks is given).

    Returns:
        (value, index of the best D in the bank)
    """
    bank = list(bank) if bank is not None else dual_bank(rho_n)
    best, best_index = float("inf"), -1
    for i, D in enumerate(bank):
        if Ks is None:
            value = dual_fidelity_bound(rho_n, D, K, dims)
        else:
            value, _ = minimize_mixed_dual(rho_n, D, K, Ks, dims)
        if value < best:
            best, best_index = value, i
    return best, best_index


def dual_bound_from_reference(rho: np.ndarray, sigma: np.ndarray, K: float,
                              dims: Optional[BipartiteDims] = None,
                              n: int = 1, y: float = 0.0) -> float:
    """
    Dual value for the certificate D = 2^{n y}·σ^{⊗n} evaluated on ρ^{⊗n}.
    """
    R, dims = _state_and_dims(rho, dims)
    S = check_state(sigma)
    rho_n, dims_n = tensor_power(R, dims, n)
    sigma_n, _ = tensor_power(S, dims, n)
    return dual_fidelity_bound(rho_n, (2.0 ** (n * y)) * sigma_n, K, dims_n)


# --- one-way measure-and-send protocol ---

def _check_measurement(measurement: Sequence[np.ndarray], dA: int) -> List[np.ndarray]:
    projectors = [as_operator(P) for P in measurement]
    if len(projectors) != dA:
        raise InvalidMeasurementError(f"need {dA} rank-1 projectors, got {len(projectors)}")
    total = np.zeros((dA, dA), dtype=complex)
    for P in projectors:
        if P.shape != (dA, dA):
            raise InvalidMeasurementError(f"projector shape {P.shape}, expected {(dA, dA)}")
        if np.max(np.abs(P @ P - P)) > 1e-9 or abs(np.trace(P) - 1.0) > 1e-9:
            raise InvalidMeasurementError("measurement elements must be rank-1 projectors")
        total += P
    if np.max(np.abs(total - np.eye(dA))) > 1e-9:
        raise InvalidMeasurementError("projectors do not sum to the identity")
    return projectors


def _conditional_states(R: np.ndarray, dims: BipartiteDims,
                        projectors: Sequence[np.ndarray]) -> Tuple[np.ndarray, List[np.ndarray]]:
    blocks = R.reshape(dims.dA, dims.dB, dims.dA, dims.dB)
    probabilities, states = [], []
    for P in projectors:
        w, v = linalg.eigh(P)
        vec = v[:, -1]
        unnormalised = np.einsum("a,abcd,c->bd", vec.conj(), blocks, vec)
        p = float(np.real(np.trace(unnormalised)))
        probabilities.append(p)
        states.append(unnormalised / p if p > 0 else unnormalised)
    return np.array(probabilities), states


def _check_maximally_mixed_marginal(R: np.ndarray, dims: BipartiteDims) -> None:
    marginal = partial_trace_b(R, dims)
    gap = float(np.max(np.abs(marginal - np.eye(dims.dA) / dims.dA)))
    if gap > MARGINAL_TOL:
        raise MarginalNotMaximallyMixedError(f"A-marginal is not maximally mixed (deviation {gap:.3e})")


def r_protocol_general(rho: np.ndarray, dims: Optional[BipartiteDims] = None,
                       measurement: Optional[Sequence[np.ndarray]] = None) -> float:
    """
    log2 dB - Σ p_i S(ρ_B^i) for one complete von Neumann measurement on A.

    Raises:
        MarginalNotMaximallyMixedError: If Tr_B ρ is not I/dA
        InvalidMeasurementError: If the projectors are not a complete rank-1 set
    """
    R, dims = _state_and_dims(rho, dims)
    _check_maximally_mixed_marginal(R, dims)
    projectors = _check_measurement(measurement if measurement is not None
                                    else computational_basis(dims.dA), dims.dA)
    probabilities, states = _conditional_states(R, dims, projectors)
    conditional = sum(p * von_neumann_entropy(s) for p, s in zip(probabilities, states) if p > 0)
    return float(np.log2(dims.dB) - conditional)


def measured_state(rho: np.ndarray, dims: Optional[BipartiteDims] = None,
                   measurement: Optional[Sequence[np.ndarray]] = None) -> np.ndarray:
    """ρ'_AB = Σ p_i |i><i| ⊗ ρ_B^i after Alice's measurement."""
    R, dims = _state_and_dims(rho, dims)
    projectors = _check_measurement(measurement if measurement is not None
                                    else computational_basis(dims.dA), dims.dA)
    probabilities, states = _conditional_states(R, dims, projectors)
    out = np.zeros_like(R)
    for i, (p, s) in enumerate(zip(probabilities, states)):
        label = np.zeros((dims.dA, dims.dA), dtype=complex)
        label[i, i] = 1.0
        out += p * np.kron(label, s)
    return out


def r_protocol_sup(rho: np.ndarray, dims: Optional[BipartiteDims] = None,
                   n_random: int = R_PROTOCOL_RANDOM_BASES,
                   rng: Optional[np.random.Generator] = None) -> ProtocolOptimum:
    """
    Max of r_protocol_general over the computational basis and n_random Haar bases.

    Exact for Werner and isotropic states (any basis is optimal), a heuristic otherwise.
    """
    R, dims = _state_and_dims(rho, dims)
    rng = rng or np.random.default_rng(RANDOM_SEED)
    best = ProtocolOptimum(r_protocol_general(R, dims), 0, n_random + 1)
    for k in range(1, n_random + 1):
        value = r_protocol_general(R, dims, basis_projectors(haar_unitary(dims.dA, rng)))
        if value > best.value:
            best = ProtocolOptimum(value, k, n_random + 1)
    return best


# --- deficits and reports ---

def _clamp_noise(x: float) -> float:
    return 0.0 if -DEFICIT_NOISE_TOL < x < 0.0 else x


def deficit_bounds(info: float, b2: float, r_protocol: Optional[float]) -> DeficitBounds:
    """δ_B = I - B2, δ_P = I - r_P; noise within -1e-9 is clamped to 0."""
    delta_p = None if r_protocol is None else _clamp_noise(info - r_protocol)
    return DeficitBounds(delta_b=_clamp_noise(info - b2), delta_p=delta_p)


def family_bound_report(family: str, d: int, param: float, with_measures: bool = True) -> BoundReport:
    """All bounds for one family point from spectra and closed forms (no dense matrices)."""
    closed = closed_form_bounds(family, d, param)
    optimum = b2_optimize_family(family, d, param)
    info = optimum.info_content
    deficits = deficit_bounds(info, optimum.value, closed.r_protocol)
    report = BoundReport(
        state=f"{family}(d={d}, {'beta' if family == 'werner' else 'lam'}={param:.12g})",
        dims=BipartiteDims.square(d),
        info_content=info,
        b1=closed.b1,
        b2=optimum.value,
        sigma_star=optimum.describe(),
        r_protocol=closed.r_protocol,
        delta_b=deficits.delta_b,
        delta_p=deficits.delta_p,
        family=family,
        d=d,
        param=param,
    )
    if with_measures:
        point = measure_point(family, d, param)
        report.er, report.ef = point.er, point.ef
    return report


def compute_bound_report(spec: StateSpec) -> BoundReport:
    """
    BoundReport for a StateSpec.

    Family members (and named states that belong to a family) use the
    family path. Explicit states use dense evaluation: B2 is the best of
    σ = ρ and the two symmetric σ-families, r_P needs a maximally mixed
    A-marginal, and entanglement measures are left undefined unless the
    matrix itself is Werner or isotropic.
    """
    point = spec.family_point()
    rho = build_state(spec)
    dims = spec.dims
    if point is None:
        point = detect_family(rho, dims) if dims.is_square and dims.dA >= 2 else None
    if point is not None:
        report = family_bound_report(*point)
        report.state = spec.describe()
        report.notes.append("symmetric family evaluation")
        return report

    info = info_content(rho, dims)
    optimum = b2_best_reference(rho, dims)
    notes = ["B2 minimised over sigma in {rho, Werner, isotropic}; not exact for general states"]
    try:
        r_p: Optional[float] = r_protocol_sup(rho, dims).value
        notes.append("r_P from computational + random bases")
    except MarginalNotMaximallyMixedError as e:
        r_p = None
        notes.append(f"r_P undefined: {e}")
    deficits = deficit_bounds(info, optimum.value, r_p)
    return BoundReport(
        state=spec.describe(),
        dims=dims,
        info_content=info,
        b1=b1_general(rho, dims),
        b2=optimum.value,
        sigma_star="rho" if optimum.sigma_family == "self" else optimum.describe(),
        r_protocol=r_p,
        delta_b=deficits.delta_b,
        delta_p=deficits.delta_p,
        notes=notes,
    )


def closed_form_discrepancy_report(family: str, d: int, params: Sequence[float],
                                   tol: float = CLOSED_FORM_TOL) -> Dict[str, Any]:
    """
    Compare closed forms against the numeric B2 minimiser and the protocol
    evaluation on a parameter grid.

    Returns:
        {"family", "d", "points", "checks": {name: {"max_abs_diff", "worst_param", "verdict"}}}
    """
    checks: Dict[str, List[Tuple[float, float]]] = {}

    def record(name: str, param: float, diff: float) -> None:
        checks.setdefault(name, []).append((param, diff))

    for param in params:
        numeric_b2 = b2_optimize_family(family, d, param).value
        numeric_rp = r_protocol_general(werner(d, param) if family == "werner" else isotropic(d, param))
        closed = closed_form_bounds(family, d, param)
        record("b2_closed_form", param, abs(closed.b2 - numeric_b2))
        record("r_protocol_closed_form", param, abs(closed.r_protocol - numeric_rp))
        if family == "isotropic":
            record("b2_closed_form_variant", param,
                   abs(isotropic_b2_closed_form_variant(d, param) - numeric_b2))
            record("r_protocol_closed_form_variant", param,
                   abs(isotropic_r_protocol_closed_form_variant(d, param) - numeric_rp))

    summary: Dict[str, Dict[str, Any]] = {}
    for name, rows in checks.items():
        worst_param, worst = max(rows, key=lambda row: row[1])
        verdict = "agrees" if worst <= tol else "disagrees"
        summary[name] = {"max_abs_diff": worst, "worst_param": worst_param, "verdict": verdict}
        if verdict == "disagrees":
            logger.warning(f"{family} d={d}: {name} differs by {worst:.3e} at param {worst_param:.6g}")
        else:
            logger.info(f"{family} d={d}: {name} agrees (max diff {worst:.3e})")
    return {"family": family, "d": d, "points": len(params), "checks": summary}
