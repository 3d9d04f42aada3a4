#!/usr/bin/env python3
"""
Tests for locinfo.bounds_engine
B1/B2 upper bounds, dual fidelity bounds, protocol lower bound and deficits
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path to import locinfo
sys.path.insert(0, str(Path(__file__).parent.parent))

from locinfo.bounds_engine import (
    RateParams,
    b1_general,
    b2_best_reference,
    b2_general,
    b2_optimize_family,
    b2_optimize_symmetric,
    best_dual_bound,
    closed_form_bounds,
    closed_form_discrepancy_report,
    compute_bound_report,
    deficit_bounds,
    dual_bank,
    dual_bound_from_reference,
    dual_fidelity_bound,
    dual_fidelity_bound_mixed,
    dual_fidelity_bound_transposed,
    family_bound_report,
    family_info_content,
    info_content,
    isotropic_b2_closed_form,
    isotropic_b2_closed_form_variant,
    isotropic_r_protocol_closed_form,
    measured_state,
    minimize_mixed_dual,
    r_protocol_general,
    r_protocol_sup,
    rate_from_trace_budget,
    werner_b2_closed_form,
    werner_b2_excess,
    werner_knot,
    werner_r_protocol_closed_form,
)
from locinfo.errors import (
    InfeasibleProblemError,
    InvalidMeasurementError,
    MarginalNotMaximallyMixedError,
    ParameterRangeError,
)
from locinfo.operator_core import (
    BipartiteDims,
    basis_projectors,
    haar_unitary,
    random_density_matrix,
    random_hermitian,
)
from locinfo.sdp_solver import SdpProblem, commutant_reduce_lp
from locinfo.state_families import isotropic, parse_state_name, werner


def test_singlet_values():
    singlet = werner(2, -1.0)
    assert info_content(singlet) == pytest.approx(2.0)
    assert b1_general(singlet) == pytest.approx(1.0)
    report = family_bound_report("werner", 2, -1.0)
    assert report.info_content == pytest.approx(2.0)
    assert report.b1 == pytest.approx(1.0)
    assert report.b2 == pytest.approx(1.0, abs=1e-9)
    assert report.r_protocol == pytest.approx(1.0)
    assert report.delta_b == pytest.approx(1.0, abs=1e-9)
    assert report.delta_p == pytest.approx(1.0)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_max_entangled_values(d):
    report = family_bound_report("isotropic", d, 1.0)
    assert report.info_content == pytest.approx(2 * np.log2(d))
    assert report.b1 == pytest.approx(np.log2(d))
    assert report.b2 == pytest.approx(np.log2(d), abs=1e-9)
    assert report.r_protocol == pytest.approx(np.log2(d))


def test_maximally_mixed_has_no_information():
    report = family_bound_report("werner", 3, 0.0)
    assert report.info_content == pytest.approx(0.0, abs=1e-12)
    assert report.b2 == pytest.approx(0.0, abs=1e-12)
    assert report.delta_b == pytest.approx(0.0, abs=1e-12)


def test_b1_general_matches_closed_forms():
    for d in (2, 3, 4):
        for beta in (-1.0, -0.6, -0.2, 0.5):
            assert b1_general(werner(d, beta)) == pytest.approx(closed_form_bounds("werner", d, beta).b1)
        for lam in (-1.0 / (d * d - 1), 0.1, 0.7, 1.0):
            assert b1_general(isotropic(d, lam)) == pytest.approx(closed_form_bounds("isotropic", d, lam).b1)


def test_info_content_matches_spectral_formula():
    for d in (2, 3):
        for beta in (-0.8, 0.3):
            assert info_content(werner(d, beta)) == pytest.approx(family_info_content("werner", d, beta))
        for lam in (0.2, 0.9):
            assert info_content(isotropic(d, lam)) == pytest.approx(family_info_content("isotropic", d, lam))


def test_b2_general_with_self_reference_equals_b1():
    rng = np.random.default_rng(1)
    rho = random_density_matrix(4, rng)
    assert b2_general(rho, rho) == pytest.approx(b1_general(rho))


def test_b2_general_is_infinite_off_support():
    sigma = np.zeros((4, 4))
    sigma[0, 0] = 1.0
    assert np.isinf(b2_general(werner(2, -1.0), sigma))


def test_werner_excess_matches_dense_b2():
    d, beta = 3, -0.7
    rho = werner(d, beta)
    info = info_content(rho)
    for alpha in (-0.9, -0.5, 0.0, 0.4):
        dense = b2_general(rho, werner(d, alpha)) - info
        assert float(werner_b2_excess(d, beta, alpha)) == pytest.approx(dense, abs=1e-10)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_werner_b2_closed_form_matches_minimiser(d):
    for beta in np.linspace(-1.0, 1.0, 41):
        numeric = b2_optimize_family("werner", d, beta).value
        assert werner_b2_closed_form(d, beta) == pytest.approx(numeric, abs=1e-6)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_isotropic_b2_closed_form_matches_minimiser(d):
    lo = -1.0 / (d * d - 1)
    for lam in np.linspace(lo, 1.0, 41):
        numeric = b2_optimize_family("isotropic", d, lam).value
        assert isotropic_b2_closed_form(d, lam) == pytest.approx(numeric, abs=1e-6)


def test_isotropic_b2_variant_departs_on_entangled_range():
    d, lam = 3, 0.6
    assert abs(isotropic_b2_closed_form_variant(d, lam) - isotropic_b2_closed_form(d, lam)) > 1e-3
    assert isotropic_b2_closed_form_variant(d, 0.2) == isotropic_b2_closed_form(d, 0.2)


def test_werner_knot():
    assert werner_knot(2) == pytest.approx(-1.0)
    assert werner_knot(5) == pytest.approx(-15.0 / 27.0)
    # past the knot the optimal sigma sits at the kink alpha = -2/d
    optimum = b2_optimize_family("werner", 5, -0.9)
    assert optimum.sigma_param == pytest.approx(-0.4, abs=1e-6)


def test_b2_between_info_and_b1():
    for family, d, params in (("werner", 3, np.linspace(-1, 1, 21)),
                              ("isotropic", 3, np.linspace(-0.125, 1, 21))):
        for p in params:
            report = family_bound_report(family, d, p, with_measures=False)
            assert report.b2 <= report.b1 + 1e-9
            assert report.b2 >= report.r_protocol - 1e-9


def test_b2_optimize_symmetric_accepts_matrices():
    assert b2_optimize_symmetric(isotropic(3, 0.5)).value == pytest.approx(
        isotropic_b2_closed_form(3, 0.5), abs=1e-6)
    rng = np.random.default_rng(2)
    rho = random_density_matrix(4, rng)
    with pytest.raises(ValueError):
        b2_optimize_symmetric(rho)
    assert np.isfinite(b2_optimize_symmetric(rho, twirl_first=True).value)


def test_b2_best_reference_on_werner_matrix():
    rho = werner(3, -0.6)
    best = b2_best_reference(rho)
    assert best.sigma_family == "werner"
    assert best.value == pytest.approx(werner_b2_closed_form(3, -0.6), abs=1e-4)


def test_dual_bounds_dominate_the_lp_optimum():
    rng = np.random.default_rng(4)
    for beta, K in ((-1.0, 1.0), (-1.0, 1.5), (-0.5, 2.0)):
        rho = werner(2, beta)
        primal = commutant_reduce_lp(SdpProblem(rho, K), "uu").value
        for D in dual_bank(rho, size=20, rng=rng):
            assert dual_fidelity_bound(rho, D, K) >= primal - 1e-9
            assert dual_fidelity_bound_transposed(rho, D, K) >= primal - 1e-9


def test_best_dual_bound_prefers_lowest_value():
    rho = werner(2, -1.0)
    bank = [rho, np.zeros((4, 4)), 0.5 * rho]
    value, index = best_dual_bound(rho, 1.0, bank=bank)
    expected = [dual_fidelity_bound(rho, D, 1.0) for D in bank]
    assert value == pytest.approx(min(expected))
    assert index == int(np.argmin(expected))


def test_mixed_dual_minimisation():
    rng = np.random.default_rng(8)
    rho = werner(2, -1.0)
    D = rho + random_hermitian(4, rng, scale=0.3)
    value, lam = minimize_mixed_dual(rho, D, K=1.0, Ks=2.0)
    grid = [dual_fidelity_bound_mixed(rho, D, t, 1.0, 2.0) for t in np.linspace(-3, 3, 601)]
    assert value <= min(grid) + 1e-9
    assert value == pytest.approx(dual_fidelity_bound_mixed(rho, D, lam, 1.0, 2.0))
    primal = commutant_reduce_lp(SdpProblem(rho, 1.0, variant="mixed", Ks=2.0), "uu").value
    assert value >= primal - 1e-9


def test_mixed_dual_rejects_budget_above_dim_over_ks():
    rho = werner(2, -1.0)
    # dim/K_s = 2: below λmin the objective falls with slope K - 2
    with pytest.raises(InfeasibleProblemError):
        minimize_mixed_dual(rho, rho, K=3.0, Ks=2.0)
    with pytest.raises(InfeasibleProblemError):
        best_dual_bound(rho, 3.0, bank=[rho], Ks=2.0)
    value, _ = minimize_mixed_dual(rho, rho, K=2.0, Ks=2.0)
    assert np.isfinite(value)


def test_dual_bound_from_reference_on_two_copies():
    rho = werner(2, -0.8)
    sigma = werner(2, -0.5)
    single = dual_bound_from_reference(rho, sigma, K=1.0)
    double = dual_bound_from_reference(rho, sigma, K=2.0, n=2, y=0.5)
    assert np.isfinite(single) and np.isfinite(double)
    assert single >= commutant_reduce_lp(SdpProblem(rho, 1.0), "uu").value - 1e-9


def test_rate_params_round_trip():
    dims = BipartiteDims(2, 2)
    params = RateParams(n=2, r=1.5, dims=dims)
    assert params.K == pytest.approx(2.0)
    assert rate_from_trace_budget(params.K, dims, n=2) == pytest.approx(1.5)
    mixed = RateParams(n=1, r=0.5, dims=dims, r_s=0.5)
    assert mixed.K == pytest.approx(2.0 ** 0.5)
    assert mixed.Ks == pytest.approx(2.0 ** 0.5)
    with pytest.raises(ParameterRangeError):
        RateParams(n=0, r=1.0, dims=dims)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_r_protocol_closed_forms(d):
    for beta in np.linspace(-1, 1, 11):
        assert r_protocol_general(werner(d, beta)) == pytest.approx(werner_r_protocol_closed_form(d, beta), abs=1e-9)
    for lam in np.linspace(-1.0 / (d * d - 1), 1, 11):
        assert r_protocol_general(isotropic(d, lam)) == pytest.approx(
            isotropic_r_protocol_closed_form(d, lam), abs=1e-9)


def test_r_protocol_is_basis_independent_on_families():
    rng = np.random.default_rng(9)
    for rho in (werner(3, -0.4), isotropic(3, 0.6)):
        reference = r_protocol_general(rho)
        for _ in range(20):
            basis = basis_projectors(haar_unitary(3, rng))
            assert r_protocol_general(rho, measurement=basis) == pytest.approx(reference, abs=1e-9)


def test_r_protocol_sup_reports_best_basis():
    best = r_protocol_sup(werner(2, -1.0), n_random=5, rng=np.random.default_rng(0))
    assert best.value == pytest.approx(1.0)
    assert best.n_bases == 6


def test_r_protocol_rejects_bad_inputs():
    p00 = np.zeros((4, 4))
    p00[0, 0] = 1.0
    with pytest.raises(MarginalNotMaximallyMixedError):
        r_protocol_general(p00)
    with pytest.raises(InvalidMeasurementError):
        r_protocol_general(werner(2, -1.0), measurement=[np.eye(2)])


def test_measured_state_is_classical_on_a():
    rho = werner(2, -1.0)
    measured = measured_state(rho)
    assert np.isclose(np.trace(measured), 1.0)
    # singlet measured in the computational basis: 1/2 (|01><01| + |10><10|)
    assert np.allclose(measured, np.diag([0, 0.5, 0.5, 0]))


def test_deficit_noise_is_clamped():
    deficits = deficit_bounds(1.0, 1.0 + 5e-10, None)
    assert deficits.delta_b == 0.0
    assert deficits.delta_p is None
    assert deficit_bounds(1.0, 1.5, 0.25).delta_b == pytest.approx(-0.5)


def test_compute_bound_report_for_named_and_explicit_states():
    singlet = compute_bound_report(parse_state_name("singlet"))
    assert singlet.family == "werner"
    assert singlet.er == pytest.approx(1.0)
    assert singlet.ef == pytest.approx(1.0)

    product = compute_bound_report(parse_state_name("product_pure:2"))
    assert product.info_content == pytest.approx(2.0)
    assert product.b1 == pytest.approx(2.0)
    assert product.delta_b == pytest.approx(0.0, abs=1e-9)
    assert product.r_protocol is None
    assert product.delta_p is None
    assert any("undefined" in note for note in product.notes)


def test_closed_form_discrepancy_report():
    params = list(np.linspace(0.3, 1.0, 8))
    report = closed_form_discrepancy_report("isotropic", 3, params)
    checks = report["checks"]
    assert checks["b2_closed_form"]["verdict"] == "agrees"
    assert checks["r_protocol_closed_form"]["verdict"] == "agrees"
    assert checks["b2_closed_form_variant"]["verdict"] == "disagrees"
    assert checks["r_protocol_closed_form_variant"]["verdict"] == "disagrees"
    werner_report = closed_form_discrepancy_report("werner", 4, list(np.linspace(-1, 0, 6)))
    assert all(c["verdict"] == "agrees" for c in werner_report["checks"].values())


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
