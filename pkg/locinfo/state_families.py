"""
State families
Werner and isotropic states, the structural operators they are built from
(flip, symmetric/antisymmetric projectors, maximally entangled projector),
closed-form twirls, and named special states.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .config import TWIRL_INVARIANCE_TOL
from .errors import (
    DimensionMismatchError,
    ParameterRangeError,
    UnsupportedFamilyError,
)
from .operator_core import BipartiteDims, as_operator, check_dims, check_state
from .utils import setup_logger


logger = setup_logger("locinfo.state_families", "state_families.log")

FAMILIES = ("werner", "isotropic")
NAMED_STATES = ("singlet", "max_entangled", "product_pure", "max_mixed")
STATE_ALIASES = {
    "maxmixed": "max_mixed",
    "maxent": "max_entangled",
    "p00": "product_pure",
    "pplus": "max_entangled",
}

# grid points produced by rounding may sit a hair outside closed ranges
_RANGE_SLACK = 1e-12


def _check_d(d: int) -> int:
    if int(d) != d or d < 2:
        raise ParameterRangeError(f"local dimension d must be an integer >= 2, got {d}")
    return int(d)


@dataclass(frozen=True)
class WernerParam:
    d: int
    beta: float

    def __post_init__(self):
        _check_d(self.d)
        if not -1.0 - _RANGE_SLACK <= self.beta <= 1.0 + _RANGE_SLACK:
            raise ParameterRangeError(f"Werner beta must lie in [-1, 1], got {self.beta}")
        object.__setattr__(self, "beta", float(np.clip(self.beta, -1.0, 1.0)))


@dataclass(frozen=True)
class IsotropicParam:
    d: int
    lam: float

    def __post_init__(self):
        _check_d(self.d)
        lo, hi = isotropic_range(self.d)
        if not lo - _RANGE_SLACK <= self.lam <= hi + _RANGE_SLACK:
            raise ParameterRangeError(
                f"isotropic lambda must lie in [{lo:.6g}, 1] for d={self.d}, got {self.lam}")
        object.__setattr__(self, "lam", float(np.clip(self.lam, lo, hi)))


def werner_range(d: int) -> Tuple[float, float]:
    return -1.0, 1.0


def isotropic_range(d: int) -> Tuple[float, float]:
    """PSD range of λ for λP+ + (1-λ)I/d²."""
    return -1.0 / (d * d - 1), 1.0


def family_range(family: str, d: int) -> Tuple[float, float]:
    if family == "werner":
        return werner_range(d)
    if family == "isotropic":
        return isotropic_range(d)
    raise UnsupportedFamilyError(f"unknown family '{family}', expected one of {FAMILIES}")


def separability_threshold(family: str, d: int) -> float:
    """β ≥ -1/d (Werner) resp. λ ≤ 1/(d+1) (isotropic) are the separable ranges."""
    if family == "werner":
        return -1.0 / d
    if family == "isotropic":
        return 1.0 / (d + 1)
    raise UnsupportedFamilyError(f"unknown family '{family}', expected one of {FAMILIES}")


def is_separable_point(family: str, d: int, param: float) -> bool:
    threshold = separability_threshold(family, d)
    if family == "werner":
        return param >= threshold - _RANGE_SLACK
    return param <= threshold + _RANGE_SLACK


# --- structural operators ---

@dataclass(frozen=True)
class StructuralOperators:
    """Flip V, P_S = (I+V)/2, P_A = (I-V)/2 and P+ on d⊗d. Arrays are read-only."""
    d: int
    flip: np.ndarray
    sym: np.ndarray
    antisym: np.ndarray
    max_ent: np.ndarray

    @property
    def n_sym(self) -> int:
        return self.d * (self.d + 1) // 2

    @property
    def n_antisym(self) -> int:
        return self.d * (self.d - 1) // 2

    @property
    def dims(self) -> BipartiteDims:
        return BipartiteDims.square(self.d)


@lru_cache(maxsize=None)
def structural_operators(d: int) -> StructuralOperators:
    d = _check_d(d)
    n = d * d
    flip = np.zeros((n, n), dtype=complex)
    for i in range(d):
        for j in range(d):
            flip[j * d + i, i * d + j] = 1.0
    identity = np.eye(n, dtype=complex)
    phi = np.zeros(n, dtype=complex)
    phi[[i * d + i for i in range(d)]] = 1.0 / np.sqrt(d)
    ops = {
        "flip": flip,
        "sym": 0.5 * (identity + flip),
        "antisym": 0.5 * (identity - flip),
        "max_ent": np.outer(phi, phi.conj()),
    }
    for arr in ops.values():
        arr.setflags(write=False)
    return StructuralOperators(d=d, **ops)


# --- Werner family ---

def werner_eigenvalues(d: int, beta: float) -> Tuple[float, float]:
    """(r+, r-): eigenvalues of ρ_W on the symmetric / antisymmetric subspace."""
    denom = d * d + d * beta
    return (1.0 + beta) / denom, (1.0 - beta) / denom


def werner_antisymmetric_weight(d: int, beta: float) -> float:
    """p = Tr(ρ_W P_A)."""
    n_a = d * (d - 1) / 2
    return n_a * (1.0 - beta) / (d * d + d * beta)


def werner_beta_from_weight(d: int, p: float) -> float:
    """Inverse of werner_antisymmetric_weight."""
    if not -_RANGE_SLACK <= p <= 1.0 + _RANGE_SLACK:
        raise ParameterRangeError(f"antisymmetric weight must lie in [0, 1], got {p}")
    n_a = d * (d - 1) / 2
    return float(np.clip((n_a - p * d * d) / (n_a + p * d), -1.0, 1.0))


def werner(d: int, beta: float) -> np.ndarray:
    """ρ_W = (I + βV)/(d² + dβ)."""
    param = WernerParam(d, beta)
    ops = structural_operators(param.d)
    n = param.d * param.d
    return (np.eye(n, dtype=complex) + param.beta * ops.flip) / (n + param.d * param.beta)


def werner_from_antisymmetric_weight(d: int, p: float) -> np.ndarray:
    """ρ_W = p·P_A/N_A + (1-p)·P_S/N_S."""
    d = _check_d(d)
    if not -_RANGE_SLACK <= p <= 1.0 + _RANGE_SLACK:
        raise ParameterRangeError(f"antisymmetric weight must lie in [0, 1], got {p}")
    ops = structural_operators(d)
    return p * ops.antisym / ops.n_antisym + (1.0 - p) * ops.sym / ops.n_sym


# --- isotropic family ---

def isotropic_fidelity(d: int, lam: float) -> float:
    """f = Tr(ρ_iso P+) = λ + (1-λ)/d²."""
    return lam + (1.0 - lam) / (d * d)


def isotropic(d: int, lam: float) -> np.ndarray:
    """ρ_iso = λP+ + (1-λ)I/d²."""
    param = IsotropicParam(d, lam)
    ops = structural_operators(param.d)
    n = param.d * param.d
    return param.lam * ops.max_ent + (1.0 - param.lam) * np.eye(n, dtype=complex) / n


def product_pure_pairs(m: int) -> np.ndarray:
    """Projector onto |00>^{⊗m}, a 2^m ⊗ 2^m operator."""
    if int(m) != m or m < 1:
        raise ParameterRangeError(f"number of pairs must be >= 1, got {m}")
    n = 4 ** int(m)
    out = np.zeros((n, n), dtype=complex)
    out[0, 0] = 1.0
    return out


def product_pure_dims(m: int) -> BipartiteDims:
    return BipartiteDims(2 ** m, 2 ** m)


# --- twirls ---

def _square_d(operator: np.ndarray, dims: Optional[BipartiteDims]) -> int:
    dims = dims or BipartiteDims.infer(operator)
    check_dims(operator, dims)
    if not dims.is_square:
        raise DimensionMismatchError(f"twirl needs dA = dB, got {dims.dA}x{dims.dB}")
    return _check_d(dims.dA)


def twirl_uu(rho: np.ndarray, dims: Optional[BipartiteDims] = None) -> np.ndarray:
    """
    Closed-form U⊗U twirl: projection onto span{I, V} keeping Tr X and Tr XV.

    Linear and trace preserving; maps any state to the Werner state with the
    same antisymmetric weight.
    """
    X = as_operator(rho)
    d = _square_d(X, dims)
    ops = structural_operators(d)
    t = np.trace(X)
    v = np.trace(X @ ops.flip)
    det = d ** 4 - d ** 2
    a = (d * d * t - d * v) / det
    b = (d * d * v - d * t) / det
    return a * np.eye(d * d, dtype=complex) + b * ops.flip


def twirl_uustar(rho: np.ndarray, dims: Optional[BipartiteDims] = None) -> np.ndarray:
    """
    Closed-form U⊗U* twirl: projection onto span{I, P+} keeping Tr X and Tr XP+.

    For a state the output is isotropic with λ = (d²·Tr(ρP+) - 1)/(d² - 1).
    """
    X = as_operator(rho)
    d = _square_d(X, dims)
    ops = structural_operators(d)
    t = np.trace(X)
    f = np.trace(X @ ops.max_ent)
    a = (t - f) / (d * d - 1)
    b = f - a
    return a * np.eye(d * d, dtype=complex) + b * ops.max_ent


def werner_parameter_from_state(rho: np.ndarray, dims: Optional[BipartiteDims] = None) -> float:
    """β of the Werner state twirl_uu(ρ)."""
    R = check_state(rho)
    d = _square_d(R, dims)
    p = float(np.real(np.trace(R @ structural_operators(d).antisym)))
    return werner_beta_from_weight(d, float(np.clip(p, 0.0, 1.0)))


def isotropic_parameter_from_state(rho: np.ndarray, dims: Optional[BipartiteDims] = None) -> float:
    """λ of the isotropic state twirl_uustar(ρ)."""
    R = check_state(rho)
    d = _square_d(R, dims)
    f = float(np.real(np.trace(R @ structural_operators(d).max_ent)))
    lo, hi = isotropic_range(d)
    return float(np.clip((d * d * f - 1.0) / (d * d - 1.0), lo, hi))


def twirl_deviation(rho: np.ndarray, symmetry: str, dims: Optional[BipartiteDims] = None) -> float:
    """max |ρ - twirl(ρ)| elementwise for symmetry 'uu' or 'uustar'."""
    X = as_operator(rho)
    if symmetry == "uu":
        twirled = twirl_uu(X, dims)
    elif symmetry == "uustar":
        twirled = twirl_uustar(X, dims)
    else:
        raise UnsupportedFamilyError(f"unknown symmetry '{symmetry}', expected 'uu' or 'uustar'")
    return float(np.max(np.abs(X - twirled)))


def is_twirl_invariant(rho: np.ndarray, symmetry: str,
                       dims: Optional[BipartiteDims] = None,
                       tol: float = TWIRL_INVARIANCE_TOL) -> bool:
    X = as_operator(rho)
    dims = dims or BipartiteDims.infer(X)
    if not dims.is_square or dims.dA < 2:
        return False
    return twirl_deviation(X, symmetry, dims) <= tol


def detect_family(rho: np.ndarray, dims: Optional[BipartiteDims] = None) -> Optional[Tuple[str, int, float]]:
    """(family, d, param) when ρ is Werner or isotropic, else None. Werner wins ties (I/d²)."""
    X = as_operator(rho)
    dims = dims or BipartiteDims.infer(X)
    if is_twirl_invariant(X, "uu", dims):
        return "werner", dims.dA, werner_parameter_from_state(X, dims)
    if is_twirl_invariant(X, "uustar", dims):
        return "isotropic", dims.dA, isotropic_parameter_from_state(X, dims)
    return None


# --- state specifications ---

@dataclass
class StateSpec:
    """
    A named family member, a named special state, or an explicit matrix.

    variant: werner | isotropic | singlet | max_entangled | product_pure | max_mixed | explicit
    params: {"d": int, "beta"/"lam": float} for families, {"d": int} for named states
    """
    variant: str
    params: Dict[str, Any] = field(default_factory=dict)
    dims: Optional[BipartiteDims] = None
    matrix: Optional[np.ndarray] = None
    label: Optional[str] = None

    def __post_init__(self):
        valid = FAMILIES + NAMED_STATES + ("explicit",)
        if self.variant not in valid:
            raise UnsupportedFamilyError(f"unknown state variant '{self.variant}', expected one of {valid}")
        if self.variant == "explicit":
            if self.matrix is None:
                raise ParameterRangeError("explicit state needs a matrix payload")
            self.matrix = check_state(self.matrix)
            self.dims = self.dims or BipartiteDims.infer(self.matrix)
            check_dims(self.matrix, self.dims)
        else:
            d = _check_d(self.params.get("d", 2))
            if self.variant == "singlet" and d != 2:
                raise ParameterRangeError("singlet is defined for d = 2")
            self.params["d"] = d
            self.dims = BipartiteDims.square(d)
            if self.variant == "werner":
                self.params["beta"] = WernerParam(d, float(self.params["beta"])).beta
            elif self.variant == "isotropic":
                self.params["lam"] = IsotropicParam(d, float(self.params["lam"])).lam

    def family_point(self) -> Optional[Tuple[str, int, float]]:
        """Position of the state in a symmetric family, if it has one."""
        d = self.params.get("d")
        if self.variant == "werner":
            return "werner", d, self.params["beta"]
        if self.variant == "isotropic":
            return "isotropic", d, self.params["lam"]
        if self.variant == "singlet":
            return "werner", 2, -1.0
        if self.variant == "max_entangled":
            return "isotropic", d, 1.0
        if self.variant == "max_mixed":
            return "werner", d, 0.0
        return None

    def describe(self) -> str:
        if self.label:
            return self.label
        if self.variant == "explicit":
            return f"explicit({self.dims.dA}x{self.dims.dB})"
        inner = ",".join(f"{k}={v:.12g}" if isinstance(v, float) else f"{k}={v}"
                         for k, v in self.params.items())
        return f"{self.variant}({inner})"


def build_state(spec: StateSpec) -> np.ndarray:
    d = spec.params.get("d")
    if spec.variant == "explicit":
        return spec.matrix.copy()
    if spec.variant == "werner":
        return werner(d, spec.params["beta"])
    if spec.variant == "isotropic":
        return isotropic(d, spec.params["lam"])
    if spec.variant == "singlet":
        return werner(2, -1.0)
    if spec.variant == "max_entangled":
        return np.array(structural_operators(d).max_ent)
    if spec.variant == "max_mixed":
        return np.eye(d * d, dtype=complex) / (d * d)
    if spec.variant == "product_pure":
        out = np.zeros((d * d, d * d), dtype=complex)
        out[0, 0] = 1.0
        return out
    raise UnsupportedFamilyError(f"cannot build state variant '{spec.variant}'")


def parse_state_name(name: str) -> StateSpec:
    """
    Parse NAME[:d[:param]], e.g. 'singlet', 'max_entangled:3', 'werner:3:-0.5'.
    """
    parts = [p.strip() for p in name.strip().split(":")]
    variant = parts[0].lower().replace("-", "_")
    variant = STATE_ALIASES.get(variant, variant)
    try:
        if variant in FAMILIES:
            if len(parts) != 3:
                raise ParameterRangeError(f"'{name}': families need NAME:d:param")
            key = "beta" if variant == "werner" else "lam"
            return StateSpec(variant, {"d": int(parts[1]), key: float(parts[2])})
        if variant in NAMED_STATES:
            if len(parts) > 2:
                raise ParameterRangeError(f"'{name}': named states take at most NAME:d")
            d = int(parts[1]) if len(parts) == 2 else 2
            return StateSpec(variant, {"d": d})
    except ValueError as e:
        if isinstance(e, (ParameterRangeError, UnsupportedFamilyError)):
            raise
        raise ParameterRangeError(f"cannot parse state '{name}': {e}") from e
    raise UnsupportedFamilyError(
        f"unknown state '{name}', expected one of {NAMED_STATES + FAMILIES}")
