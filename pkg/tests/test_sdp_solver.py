#!/usr/bin/env python3
"""
Tests for locinfo.sdp_solver
Projected-ascent SDP against the commutant LP and the dual bound
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path to import locinfo
sys.path.insert(0, str(Path(__file__).parent.parent))

from locinfo.bounds_engine import best_dual_bound, dual_bank
from locinfo.errors import DimensionMismatchError, InfeasibleProblemError, ParameterRangeError, UnsupportedFamilyError
from locinfo.operator_core import BipartiteDims, partial_transpose, random_density_matrix, tensor_power
from locinfo.sdp_solver import (
    SdpProblem,
    SolverOptions,
    commutant_reduce_lp,
    constraint_projectors,
    dykstra_projection,
    feasibility_residuals,
    primal_fidelity_sdp,
    primal_fidelity_sdp_mixed,
    project_box,
    project_pt,
    project_trace,
    solve,
)
from locinfo.state_families import isotropic, structural_operators, werner


@pytest.fixture
def singlet():
    return werner(2, -1.0)


@pytest.mark.parametrize("K, expected", [(1.0, 0.5), (1.5, 0.75), (2.0, 1.0), (3.0, 1.0)])
def test_commutant_lp_singlet(singlet, K, expected):
    result = commutant_reduce_lp(SdpProblem(singlet, K), "uu")
    assert result.value == pytest.approx(expected, abs=1e-12)
    assert result.residuals.worst() < 1e-12
    assert result.method == "commutant_lp_uu"


def test_commutant_lp_singlet_optimal_point(singlet):
    result = commutant_reduce_lp(SdpProblem(singlet, 2.0), "uu")
    # Π = P_S/3 + P_A
    ops = structural_operators(2)
    assert np.allclose(result.pi, ops.sym / 3.0 + ops.antisym)


def test_commutant_lp_antisymmetric_werner():
    result = commutant_reduce_lp(SdpProblem(werner(3, -1.0), 4.5), "uu")
    assert result.value == pytest.approx(0.75, abs=1e-12)


def test_commutant_lp_isotropic():
    result = commutant_reduce_lp(SdpProblem(isotropic(2, 1.0), 1.0), "uustar")
    assert result.value == pytest.approx(0.5, abs=1e-12)


def test_commutant_lp_mixed(singlet):
    problem = SdpProblem(singlet, 1.0, variant="mixed", Ks=2.0)
    assert commutant_reduce_lp(problem, "uu").value == pytest.approx(1.0, abs=1e-12)


def test_commutant_lp_rejects_non_invariant_state():
    rho = random_density_matrix(4, np.random.default_rng(0))
    with pytest.raises(UnsupportedFamilyError):
        commutant_reduce_lp(SdpProblem(rho, 1.0), "uu")


def test_problem_validation(singlet):
    with pytest.raises(ParameterRangeError):
        SdpProblem(singlet, 0.0)
    with pytest.raises(ParameterRangeError):
        SdpProblem(singlet, 5.0)
    with pytest.raises(ParameterRangeError):
        SdpProblem(singlet, 1.0, variant="global")
    with pytest.raises(InfeasibleProblemError):
        SdpProblem(singlet, 3.0, variant="mixed", Ks=2.0)
    rho2, dims2 = tensor_power(werner(3, 0.0), BipartiteDims(3, 3), 2)
    with pytest.raises(DimensionMismatchError):
        SdpProblem(rho2, 1.0, dims2)


def test_single_projections_land_in_their_sets():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((4, 4))
    X = X + X.T
    dims = BipartiteDims(2, 2)
    w = np.linalg.eigvalsh(project_box(X))
    assert w.min() >= -1e-12 and w.max() <= 1 + 1e-12
    assert np.linalg.eigvalsh(partial_transpose(project_pt(X, dims), dims)).min() >= -1e-12
    assert np.trace(project_trace(X, 1.5)).real == pytest.approx(1.5)


def test_dykstra_projection_is_feasible(singlet):
    problem = SdpProblem(singlet, 2.0)
    Z = np.eye(4) + 3.0 * singlet
    X, cycles = dykstra_projection(Z, constraint_projectors(problem), tol=1e-12)
    assert cycles >= 1
    assert feasibility_residuals(X, problem).worst() < 1e-8


def test_dykstra_projection_from_far_point_settles_on_feasible_point(singlet):
    # the box increment must drain before the run may stop
    problem = SdpProblem(singlet, 1.0)
    Z = np.eye(4) / 4 + 50.0 * singlet
    X, cycles = dykstra_projection(Z, constraint_projectors(problem))
    assert cycles < SolverOptions().dykstra_max_cycles
    assert feasibility_residuals(X, problem).worst() < 1e-9
    assert np.real(np.trace(X @ singlet)) <= 0.5 + 1e-9


def test_dykstra_projection_returns_feasible_input_unchanged(singlet):
    problem = SdpProblem(singlet, 2.0)
    pi = commutant_reduce_lp(problem, "uu").pi
    X, cycles = dykstra_projection(pi, constraint_projectors(problem))
    assert cycles == 1
    assert np.allclose(X, pi, atol=1e-12)


@pytest.mark.parametrize("K", [1.0, 1.5, 2.0, 3.0])
def test_projected_ascent_matches_lp_on_singlet(singlet, K):
    problem = SdpProblem(singlet, K)
    result = primal_fidelity_sdp(problem)
    oracle = commutant_reduce_lp(problem, "uu").value
    assert result.converged, result.message
    assert result.residuals.worst() <= SolverOptions().feasibility_tol
    assert result.value == pytest.approx(oracle, abs=1e-6)
    assert result.value <= oracle + 1e-9


def test_projected_ascent_on_antisymmetric_werner():
    problem = SdpProblem(werner(3, -1.0), 4.5)
    result = solve(problem)
    assert result.converged, result.message
    assert result.value == pytest.approx(0.75, abs=1e-6)
    assert result.value == pytest.approx(commutant_reduce_lp(problem, "uu").value, abs=1e-6)


def test_projected_ascent_on_isotropic():
    rho = isotropic(2, 0.7)
    problem = SdpProblem(rho, 1.5)
    result = solve(problem)
    oracle = commutant_reduce_lp(problem, "uustar").value
    assert result.converged, result.message
    assert result.value == pytest.approx(oracle, abs=1e-6)


def test_mixed_projected_ascent(singlet):
    problem = SdpProblem(singlet, 1.0, variant="mixed", Ks=2.0)
    result = primal_fidelity_sdp_mixed(problem)
    assert result.converged, result.message
    assert result.value == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ParameterRangeError):
        primal_fidelity_sdp(problem)
    with pytest.raises(ParameterRangeError):
        primal_fidelity_sdp_mixed(SdpProblem(singlet, 1.0))


@pytest.mark.parametrize("rho, symmetry", [
    (werner(2, -1.0), "uu"),
    (werner(3, -0.6), "uu"),
    (isotropic(3, 0.5), "uustar"),
])
def test_optimum_is_nondecreasing_in_trace_budget(rho, symmetry):
    dim = rho.shape[0]
    budgets = np.linspace(0.5, dim, 6)
    values = []
    for K in budgets:
        problem = SdpProblem(rho, float(K))
        result = solve(problem)
        assert result.converged, (K, result.message)
        assert result.value == pytest.approx(commutant_reduce_lp(problem, symmetry).value, abs=1e-6)
        values.append(result.value)
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(1.0, abs=1e-9)


def test_weak_duality_on_generic_state():
    rng = np.random.default_rng(12)
    rho = random_density_matrix(4, rng)
    problem = SdpProblem(rho, 1.0)
    result = solve(problem, SolverOptions(max_iterations=3000))
    dual, _ = best_dual_bound(rho, 1.0, bank=dual_bank(rho, size=30, rng=rng))
    assert result.residuals.worst() <= SolverOptions().feasibility_tol
    assert result.value <= dual + 1e-6
    assert 0.0 <= result.value <= 1.0 + 1e-9


def test_result_history_is_recorded(singlet):
    result = solve(SdpProblem(singlet, 1.0))
    assert result.iterations >= 1
    assert len(result.history) == result.iterations + 1
    assert result.elapsed_seconds >= 0.0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
