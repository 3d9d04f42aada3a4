"""
SDP solver
Primal fidelity problems over PPT-constrained operators Π:

    maximise Tr[Πρ]  s.t.  0 ⪯ Π ⪯ I,  Π^Γ ⪰ 0  (or -I/K_s ⪯ Π^Γ ⪯ I/K_s),  Tr Π = K

solved by projected ascent with Dykstra-corrected cyclic projections, and
an exact two-variable LP for twirl-invariant ρ.
"""

import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .config import (
    SDP_DYKSTRA_MAX_CYCLES,
    SDP_DYKSTRA_TOL,
    SDP_FEASIBILITY_TOL,
    SDP_FIXED_POINT_TOL,
    SDP_MAX_DIM,
    SDP_MAX_ITERATIONS,
    SDP_MAX_STEP_FACTOR,
    SDP_STALL_TOL,
    SDP_STALL_WINDOW,
    SDP_STEP_GROWTH,
    SDP_STEP_SCALE,
    TWIRL_INVARIANCE_TOL,
)
from .errors import (
    DimensionMismatchError,
    InfeasibleProblemError,
    ParameterRangeError,
    UnsupportedFamilyError,
)
from .operator_core import BipartiteDims, check_dims, check_state, partial_transpose
from .state_families import structural_operators, twirl_deviation
from .utils import format_seconds, setup_logger


logger = setup_logger("locinfo.sdp_solver", "sdp_solver.log")

VARIANTS = ("local_only", "mixed")

Projector = Callable[[np.ndarray], np.ndarray]


@dataclass
class SolverOptions:
    step_scale: float = SDP_STEP_SCALE
    step_growth: float = SDP_STEP_GROWTH
    max_step_factor: float = SDP_MAX_STEP_FACTOR
    max_iterations: int = SDP_MAX_ITERATIONS
    feasibility_tol: float = SDP_FEASIBILITY_TOL
    stall_tol: float = SDP_STALL_TOL
    stall_window: int = SDP_STALL_WINDOW
    fixed_point_tol: float = SDP_FIXED_POINT_TOL
    dykstra_tol: float = SDP_DYKSTRA_TOL
    dykstra_max_cycles: int = SDP_DYKSTRA_MAX_CYCLES


@dataclass
class SdpProblem:
    rho: np.ndarray
    K: float
    dims: Optional[BipartiteDims] = None
    variant: str = "local_only"
    Ks: float = 1.0

    def __post_init__(self):
        self.rho = check_state(self.rho)
        self.dims = self.dims or BipartiteDims.infer(self.rho)
        check_dims(self.rho, self.dims)
        dim = self.dims.dim
        if dim > SDP_MAX_DIM:
            raise DimensionMismatchError(f"SDP instances are limited to dimension {SDP_MAX_DIM}, got {dim}")
        if self.variant not in VARIANTS:
            raise ParameterRangeError(f"unknown variant '{self.variant}', expected one of {VARIANTS}")
        if not 0 < self.K <= dim * (1 + 1e-12):
            raise ParameterRangeError(f"trace budget K must lie in (0, {dim}], got {self.K}")
        if self.variant == "mixed":
            if self.Ks < 1:
                raise ParameterRangeError(f"K_s must be >= 1, got {self.Ks}")
            if self.K > dim / self.Ks * (1 + 1e-12):
                raise InfeasibleProblemError(
                    f"mixed problem infeasible: Tr Π^Γ = K = {self.K} exceeds dim/K_s = {dim / self.Ks}")

    @property
    def dim(self) -> int:
        return self.dims.dim

    @property
    def pt_bounds(self) -> Tuple[float, float]:
        """Spectral interval allowed for Π^Γ."""
        if self.variant == "mixed":
            return -1.0 / self.Ks, 1.0 / self.Ks
        return 0.0, np.inf


@dataclass
class SdpResiduals:
    psd_gap: float
    cap_gap: float
    pt_gap: float
    trace_gap: float

    def worst(self) -> float:
        return max(self.psd_gap, self.cap_gap, self.pt_gap, self.trace_gap)


@dataclass
class SdpResult:
    value: float
    pi: np.ndarray
    residuals: SdpResiduals
    iterations: int
    converged: bool
    method: str = "projected_ascent"
    message: str = ""
    elapsed_seconds: float = 0.0
    history: List[float] = field(default_factory=list, repr=False)


# --- projections ---

def _symmetrise(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + X.conj().T)


def _clip_spectrum(X: np.ndarray, lo: float, hi: float) -> np.ndarray:
    w, v = linalg.eigh(_symmetrise(X))
    return (v * np.clip(w, lo, hi)) @ v.conj().T


def project_box(X: np.ndarray) -> np.ndarray:
    """Nearest operator with spectrum in [0, 1]."""
    return _clip_spectrum(X, 0.0, 1.0)


def project_pt(X: np.ndarray, dims: BipartiteDims, lo: float = 0.0, hi: float = np.inf) -> np.ndarray:
    """Nearest operator whose partial transpose has spectrum in [lo, hi]."""
    return partial_transpose(_clip_spectrum(partial_transpose(X, dims), lo, hi), dims)


def project_trace(X: np.ndarray, K: float) -> np.ndarray:
    dim = X.shape[0]
    return X + ((K - np.real(np.trace(X))) / dim) * np.eye(dim)


def constraint_projectors(problem: SdpProblem) -> List[Projector]:
    lo, hi = problem.pt_bounds
    return [
        project_box,
        lambda X: project_pt(X, problem.dims, lo, hi),
        lambda X: project_trace(X, problem.K),
    ]


def dykstra_projection(Z: np.ndarray, projectors: Sequence[Projector],
                       tol: float = SDP_DYKSTRA_TOL,
                       max_cycles: int = SDP_DYKSTRA_MAX_CYCLES) -> Tuple[np.ndarray, int]:
    """
    Project Z onto the intersection of convex sets by Dykstra's algorithm.

    A run ends once no increment moves by more than tol over a cycle. The
    change of increment i is the gap between the outputs of projectors i-1
    and i, so at that point every projector agrees on X to within tol.

    Returns:
        (projection, cycles used); cycles == max_cycles means the run did
        not settle and X may lie outside the sets
    """
    X = _symmetrise(Z)
    # rounding floor for far-away inputs
    tol = max(tol, 64.0 * np.finfo(float).eps * max(1.0, float(np.linalg.norm(X))))
    increments = [np.zeros_like(X) for _ in projectors]
    for cycle in range(1, max_cycles + 1):
        shift = 0.0
        for i, project in enumerate(projectors):
            Y = X + increments[i]
            X = project(Y)
            updated = Y - X
            shift = max(shift, float(np.linalg.norm(updated - increments[i])))
            increments[i] = updated
        X = _symmetrise(X)
        if shift <= tol:
            return X, cycle
    logger.debug(f"Dykstra did not settle in {max_cycles} cycles (last shift {shift:.3e})")
    return X, max_cycles


def feasibility_residuals(pi: np.ndarray, problem: SdpProblem) -> SdpResiduals:
    w = linalg.eigvalsh(_symmetrise(pi))
    pt = linalg.eigvalsh(_symmetrise(partial_transpose(pi, problem.dims)))
    lo, hi = problem.pt_bounds
    pt_gap = max(0.0, lo - pt[0])
    if np.isfinite(hi):
        pt_gap = max(pt_gap, pt[-1] - hi)
    return SdpResiduals(
        psd_gap=float(max(0.0, -w[0])),
        cap_gap=float(max(0.0, w[-1] - 1.0)),
        pt_gap=float(pt_gap),
        trace_gap=float(abs(np.real(np.trace(pi)) - problem.K)),
    )


def _objective(pi: np.ndarray, rho: np.ndarray) -> float:
    return float(np.real(np.vdot(pi, rho)))


# --- projected ascent ---

def _projected_ascent(problem: SdpProblem, opts: SolverOptions) -> SdpResult:
    start = time.time()
    projectors = constraint_projectors(problem)
    rho = problem.rho
    dim = problem.dim

    rho_norm = float(np.abs(linalg.eigvalsh(rho)).max())
    step0 = opts.step_scale / rho_norm
    step_cap = opts.max_step_factor * step0
    step = step0

    pi = (problem.K / dim) * np.eye(dim, dtype=complex)
    value = _objective(pi, rho)
    best_pi, best_value = pi, value
    history = [value]
    converged = False
    message = "iteration cap reached"
    iteration = 0

    for iteration in range(1, opts.max_iterations + 1):
        candidate, _ = dykstra_projection(pi + step * rho, projectors,
                                          opts.dykstra_tol, opts.dykstra_max_cycles)
        candidate_value = _objective(candidate, rho)
        feasible = feasibility_residuals(candidate, problem).worst() <= opts.feasibility_tol
        if not feasible or candidate_value < value - 1e-10:
            step *= 0.5
            history.append(value)
            if step < 1e-12 * step0:
                message = "step size underflow"
                break
            continue

        moved = float(np.linalg.norm(candidate - pi))
        full_step = step >= step0
        pi, value = candidate, candidate_value
        step = min(step * opts.step_growth, step_cap)
        history.append(value)
        if value >= best_value:
            best_pi, best_value = pi, value

        # Π = P(Π + ηρ) holds exactly at a maximiser
        if full_step and moved <= opts.fixed_point_tol:
            converged = True
            message = "fixed point of the projected step"
            break
        if full_step and iteration >= opts.stall_window:
            change = abs(history[-1] - history[-1 - opts.stall_window])
            if change < opts.stall_tol:
                converged = True
                message = "objective stalled with feasible iterate"
                break

    # repair pass: exact projection of the best iterate, objective taken afterwards
    repaired, _ = dykstra_projection(best_pi, projectors, opts.dykstra_tol * 0.1, opts.dykstra_max_cycles)
    residuals = feasibility_residuals(repaired, problem)
    final_value = _objective(repaired, rho)
    if residuals.worst() > opts.feasibility_tol:
        converged = False
        message = f"{message}; residual {residuals.worst():.2e} above tolerance"

    elapsed = time.time() - start
    log = logger.info if converged else logger.warning
    log(f"{problem.variant} SDP dim={dim} K={problem.K:.6g}: value {final_value:.9f} after "
        f"{iteration} iterations in {format_seconds(elapsed)} ({message})")
    return SdpResult(
        value=final_value,
        pi=repaired,
        residuals=residuals,
        iterations=iteration,
        converged=converged,
        message=message,
        elapsed_seconds=elapsed,
        history=history,
    )


def primal_fidelity_sdp(problem: SdpProblem, opts: Optional[SolverOptions] = None) -> SdpResult:
    """max Tr[Πρ] over 0 ⪯ Π ⪯ I, Π^Γ ⪰ 0, Tr Π = K."""
    if problem.variant != "local_only":
        raise ParameterRangeError("primal_fidelity_sdp expects variant='local_only'")
    return _projected_ascent(problem, opts or SolverOptions())


def primal_fidelity_sdp_mixed(problem: SdpProblem, opts: Optional[SolverOptions] = None) -> SdpResult:
    """max Tr[Πρ] over 0 ⪯ Π ⪯ I, -I/K_s ⪯ Π^Γ ⪯ I/K_s, Tr Π = K."""
    if problem.variant != "mixed":
        raise ParameterRangeError("primal_fidelity_sdp_mixed expects variant='mixed'")
    return _projected_ascent(problem, opts or SolverOptions())


def solve(problem: SdpProblem, opts: Optional[SolverOptions] = None) -> SdpResult:
    if problem.variant == "mixed":
        return primal_fidelity_sdp_mixed(problem, opts)
    return primal_fidelity_sdp(problem, opts)


# --- commutant LP oracle ---

def _commutant_lp_data(problem: SdpProblem, symmetry: str):
    """
    Basis operators, trace coefficients, objective coefficients and the
    affine maps giving the spectra of Π and Π^Γ in the two coefficients.
    """
    d = problem.dims.dA
    ops = structural_operators(d)
    n = d * d
    rho = problem.rho
    if symmetry == "uu":
        basis = (np.array(ops.sym), np.array(ops.antisym))
        trace = (ops.n_sym, ops.n_antisym)
        # spectrum of Π^Γ: (x1+x2)/2 and ((1+d)x1 + (1-d)x2)/2
        pt_rows = [(0.5, 0.5), (0.5 * (1 + d), 0.5 * (1 - d))]
    elif symmetry == "uustar":
        basis = (np.array(ops.max_ent), np.eye(n, dtype=complex) - ops.max_ent)
        trace = (1, n - 1)
        # spectrum of Π^Γ: x2 ± (x1 - x2)/d
        pt_rows = [(1.0 / d, 1.0 - 1.0 / d), (-1.0 / d, 1.0 + 1.0 / d)]
    else:
        raise UnsupportedFamilyError(f"unknown symmetry '{symmetry}', expected 'uu' or 'uustar'")
    objective = tuple(float(np.real(np.trace(rho @ B))) for B in basis)
    return basis, trace, objective, pt_rows


def commutant_reduce_lp(problem: SdpProblem, symmetry: str) -> SdpResult:
    """
    Exact optimum for twirl-invariant ρ: the problem reduces to a
    two-variable LP over Π = x1·B1 + x2·B2 solved by vertex enumeration.
    """
    dims = problem.dims
    if not dims.is_square or dims.dA < 2:
        raise DimensionMismatchError("commutant reduction needs d⊗d with d >= 2")
    deviation = twirl_deviation(problem.rho, symmetry, dims)
    if deviation > TWIRL_INVARIANCE_TOL:
        raise UnsupportedFamilyError(
            f"rho is not {symmetry}-invariant (deviation {deviation:.3e})")

    start = time.time()
    basis, trace, objective, pt_rows = _commutant_lp_data(problem, symmetry)
    lo, hi = problem.pt_bounds

    # inequalities a·x <= b
    inequalities = [((-1.0, 0.0), 0.0), ((0.0, -1.0), 0.0), ((1.0, 0.0), 1.0), ((0.0, 1.0), 1.0)]
    for row in pt_rows:
        inequalities.append(((-row[0], -row[1]), -lo))
        if np.isfinite(hi):
            inequalities.append((row, hi))

    vertices = []
    for a, b in inequalities:
        system = np.array([trace, a], dtype=float)
        if abs(np.linalg.det(system)) < 1e-14:
            continue
        x = np.linalg.solve(system, np.array([problem.K, b], dtype=float))
        if all(np.dot(a2, x) <= b2 + 1e-12 for a2, b2 in inequalities):
            vertices.append(x)
    if not vertices:
        raise InfeasibleProblemError("commutant LP has no feasible point")

    best = max(vertices, key=lambda x: objective[0] * x[0] + objective[1] * x[1])
    pi = best[0] * basis[0] + best[1] * basis[1]
    value = float(objective[0] * best[0] + objective[1] * best[1])
    logger.debug(f"commutant LP ({symmetry}): value {value:.12f} at x = ({best[0]:.9g}, {best[1]:.9g})")
    return SdpResult(
        value=value,
        pi=pi,
        residuals=feasibility_residuals(pi, problem),
        iterations=0,
        converged=True,
        method=f"commutant_lp_{symmetry}",
        message=f"vertex enumeration over {len(vertices)} candidate(s)",
        elapsed_seconds=time.time() - start,
    )
