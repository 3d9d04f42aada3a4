"""
Entanglement measures
Closed-form relative entropy of entanglement and entanglement of
formation for Werner and isotropic states, plus the comparison of the
deficit bounds against them.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull

from .config import HULL_GRID_POINTS
from .errors import UnsupportedFamilyError
from .operator_core import binary_entropy
from .state_families import IsotropicParam, WernerParam, is_separable_point
from .utils import setup_logger


logger = setup_logger("locinfo.entanglement_measures", "entanglement_measures.log")


@dataclass
class MeasurePoint:
    family: str
    d: int
    param: float
    er: float
    ef: float
    g_raw: Optional[float] = None


# --- Werner ---

def werner_antisymmetric_fraction(d: int, beta: float) -> float:
    """(d-1)(1-β)/(2(d+β)), the weight of ρ_W on the antisymmetric subspace."""
    return (d - 1) * (1.0 - beta) / (2.0 * (d + beta))


def er_inf_werner(d: int, beta: float) -> float:
    """Regularised relative entropy of entanglement of ρ_W (three branches)."""
    beta = WernerParam(d, beta).beta
    if beta >= -1.0 / d:
        return 0.0
    x = min(werner_antisymmetric_fraction(d, beta), 1.0)
    if beta >= -3.0 * d / (d * d + 2.0):
        return float(max(1.0 - binary_entropy(x), 0.0))
    return float(np.log2((d - 2.0) / d) + x * np.log2((d + 2.0) / (d - 2.0)))


def ef_werner(d: int, beta: float) -> float:
    beta = WernerParam(d, beta).beta
    if beta > -1.0 / d:
        return 0.0
    overlap = (1.0 + d * beta) / (d + beta)
    return float(binary_entropy(0.5 * (1.0 - np.sqrt(max(1.0 - overlap * overlap, 0.0)))))


# --- isotropic ---

def er_isotropic(d: int, lam: float) -> float:
    """log2 d + f·log2 f + (1-f)·log2((1-f)/(d-1)) on the entangled range, else 0."""
    lam = IsotropicParam(d, lam).lam
    if lam <= 1.0 / (d + 1):
        return 0.0
    f = ((d * d - 1) * lam + 1.0) / (d * d)
    value = np.log2(d) - binary_entropy(min(f, 1.0)) - (1.0 - f) * np.log2(d - 1.0)
    return float(max(value, 0.0))


def isotropic_gamma(d: int, lam):
    """γ(λ) = (1/d²)(√(dλ + (1-λ)/d) + √((d-1)(d²-1)(1-λ)/d))²."""
    lam = np.asarray(lam, dtype=float)
    first = np.sqrt(np.clip(d * lam + (1.0 - lam) / d, 0.0, None))
    second = np.sqrt(np.clip((d - 1.0) * (d * d - 1.0) * (1.0 - lam) / d, 0.0, None))
    gamma = np.clip((first + second) ** 2 / (d * d), 0.0, 1.0)
    return float(gamma) if gamma.ndim == 0 else gamma


def g_raw(d: int, gamma):
    """g(γ) = H2(γ) + (1-γ)·log2(d-1)."""
    gamma = np.asarray(gamma, dtype=float)
    value = binary_entropy(gamma) + (1.0 - gamma) * np.log2(d - 1.0)
    return float(value) if np.ndim(value) == 0 else value


def g_of_lambda(d: int, lam):
    return g_raw(d, isotropic_gamma(d, lam))


@lru_cache(maxsize=None)
def _isotropic_formation_hull(d: int, n_points: int = HULL_GRID_POINTS) -> Tuple[np.ndarray, np.ndarray]:
    """Vertices (λ, value) of the lower convex envelope of g(γ(λ)) on [1/(d+1), 1]."""
    lam = np.linspace(1.0 / (d + 1), 1.0, n_points)
    values = np.asarray(g_of_lambda(d, lam))
    hull = ConvexHull(np.column_stack([lam, values]))
    lower = set()
    for simplex, equation in zip(hull.simplices, hull.equations):
        if equation[1] < -1e-12:
            lower.update(int(i) for i in simplex)
    vertices = np.array(sorted(lower))
    xs, ys = lam[vertices], values[vertices]
    xs.setflags(write=False)
    ys.setflags(write=False)
    logger.debug(f"E_F hull for d={d}: {len(vertices)} of {n_points} grid points on the envelope")
    return xs, ys


def ef_isotropic(d: int, lam: float) -> float:
    """Entanglement of formation: convex hull of g(γ(λ)), 0 on the separable range."""
    lam = IsotropicParam(d, lam).lam
    if lam <= 1.0 / (d + 1):
        return 0.0
    xs, ys = _isotropic_formation_hull(d)
    return float(max(np.interp(lam, xs, ys), 0.0))


# --- dispatch ---

def measure_point(family: str, d: int, param: float) -> MeasurePoint:
    if family == "werner":
        return MeasurePoint(family, d, param, er=er_inf_werner(d, param), ef=ef_werner(d, param))
    if family == "isotropic":
        raw = 0.0 if is_separable_point(family, d, param) else g_of_lambda(d, param)
        return MeasurePoint(family, d, param, er=er_isotropic(d, param), ef=ef_isotropic(d, param),
                            g_raw=raw)
    raise UnsupportedFamilyError(f"closed-form measures exist for werner/isotropic, got '{family}'")


def _sign_changes(params: Sequence[float], diff: Sequence[float], tol: float) -> List[float]:
    crossings = []
    for i in range(1, len(params)):
        left, right = diff[i - 1], diff[i]
        if abs(left) <= tol or abs(right) <= tol:
            continue
        if (left > 0) != (right > 0):
            t = left / (left - right)
            crossings.append(float(params[i - 1] + t * (params[i] - params[i - 1])))
    return crossings


def compare_deficit_with_formation(family: str, d: int, params: Sequence[float],
                                   tol: float = 1e-9) -> Dict[str, Any]:
    """
    δ_P and E_F side by side over a grid, with the parameters where
    δ_P - E_F changes sign. No inequality is asserted.
    """
    from .bounds_engine import family_bound_report

    rows = []
    for param in params:
        report = family_bound_report(family, d, param)
        rows.append({"param": param, "deltaP": report.delta_p, "EF": report.ef,
                     "difference": report.delta_p - report.ef})
    diff = [row["difference"] for row in rows]
    crossings = _sign_changes([row["param"] for row in rows], diff, tol)
    above = sum(1 for x in diff if x > tol)
    logger.info(f"{family} d={d}: deltaP > EF at {above}/{len(rows)} points, "
                f"{len(crossings)} crossing(s)")
    return {"family": family, "d": d, "rows": rows, "crossings": crossings,
            "points_deltaP_above_EF": above}
