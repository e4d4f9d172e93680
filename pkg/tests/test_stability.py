import math

import numpy as np
import pytest

from config import get_config, tolerance
from models.fields import SurfaceField
from services import stability
from services.immersion import area, build_surface, integrate_M
from services.operators import robin_defect, robin_q
from utils.errors import ArgumentError, PreconditionError

CAPS = ['euclid_cap', 'horoball_cap', 'euclid_cap_3d', 'horoball_cap_3d']


@pytest.mark.parametrize('fixture', CAPS)
def test_test_function_vanishes_on_caps(request, fixture):
    M = request.getfixturevalue(fixture)
    for r in range(M.n):
        report = stability.test_function_report(M, r)
        assert report.passed, report.components
        assert report.components['vanishing'][-1] < 1e-8


def test_test_function_operator_at_fine_resolution():
    M = build_surface('horoball', 2, 2.0, math.pi / 3, 48)
    report = stability.test_function_report(M, 1)
    assert report.passed, report.components
    assert report.values['limits']['operator'] == tolerance('jacobi')
    assert report.components['vanishing'][-1] < 1e-8


def test_test_function_needs_constant_curvature(perturbed_euclid, perturbed_horoball):
    with pytest.raises(PreconditionError):
        stability.test_function(perturbed_euclid, 0)
    with pytest.raises(PreconditionError):
        stability.test_function(perturbed_horoball, 0)


def test_model_specific_test_functions(euclid_cap, horoball_cap):
    with pytest.raises(PreconditionError):
        stability.test_function_horoball(euclid_cap, 0)
    with pytest.raises(PreconditionError):
        stability.test_function_euclidean(horoball_cap, 0)


def test_basis_is_admissible(euclid_cap, horoball_cap_3d):
    for M in (euclid_cap, horoball_cap_3d):
        basis = stability.admissible_basis(M, 6)
        assert len(basis) == 6
        for element in basis:
            phi = stability.admissible_field(M, element)
            assert phi.admissible, phi.residuals()
            assert integrate_M(M, element.interior ** 2) == pytest.approx(1.0)


def test_basis_size_must_be_positive(euclid_cap):
    with pytest.raises(ArgumentError):
        stability.admissible_basis(euclid_cap, -1)


def test_constants_are_not_admissible(euclid_cap):
    ones = SurfaceField(np.ones(euclid_cap.grid.shape), np.ones(euclid_cap.grid.angular_shape),
                        euclid_cap.key, 'analytic', 'one')
    phi = stability.admissible_field(euclid_cap, ones)
    assert not phi.admissible
    with pytest.raises(PreconditionError):
        stability.quadratic_form(euclid_cap, phi, 0)


def test_hemisphere_translations_are_neutral(hemisphere):
    # horizontal coordinates are Neumann eigenfunctions with J_0 x = 0
    assert stability.lowest_eigenvalue(hemisphere, 0, 8) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize('fixture', CAPS)
def test_caps_are_stable(request, fixture):
    M = request.getfixturevalue(fixture)
    for r in range(M.n):
        report = stability.stability_report(M, r, basis_size=8)
        assert report.passed, report.values
        assert report.values['asymmetry'] < 1e-6


def test_quadratic_form_of_random_fields(horoball_cap):
    for phi in stability.random_admissible_fields(horoball_cap, 3, basis_size=6, seed=7):
        assert phi.admissible
        assert stability.quadratic_form(horoball_cap, phi, 0).value >= -1e-8 * area(horoball_cap)


def test_energy_second_variation():
    assert stability.energy_second_variation(3.0, 2, 1) == pytest.approx(3.0)
    assert stability.energy_second_variation(3.0, 3, 1) == pytest.approx(2.0)
    with pytest.raises(ArgumentError):
        stability.energy_second_variation(1.0, 2, 2)


@pytest.mark.parametrize('fixture', ['euclid_cap_3d', 'horoball_cap_3d'])
def test_cap_reduction(request, fixture):
    M = request.getfixturevalue(fixture)
    for r in range(M.n):
        report = stability.cap_reduction_report(M, r, count=3, basis_size=6)
        assert report.passed, report.components


def test_cap_reduction_needs_a_cap(perturbed_euclid):
    phi = stability.random_admissible_fields(perturbed_euclid, 1, basis_size=4)[0]
    with pytest.raises(PreconditionError):
        stability.cap_reduction_residual(perturbed_euclid, phi, 1)


@pytest.mark.parametrize('fixture', CAPS)
def test_rigidity_gaps_vanish_on_caps(request, fixture):
    M = request.getfixturevalue(fixture)
    for r in range(M.n):
        report = stability.rigidity_gap_report(M, r)
        assert report.passed, report.components
        assert not report.warnings


def test_rigidity_gaps_on_perturbed_caps(perturbed_euclid, perturbed_horoball):
    for M in (perturbed_euclid, perturbed_horoball):
        report = stability.rigidity_gap_report(M, 0)
        assert report.passed, report.components
        assert report.values['gap_a_min'] >= 0.0
        assert report.warnings


def test_auxiliary_identities(horoball_cap, horoball_cap_3d):
    for M in (horoball_cap, horoball_cap_3d):
        for r in range(M.n):
            report = stability.auxiliary_identity_residuals(M, r)
            assert report.passed, report.components


def test_auxiliary_identities_need_the_horoball(euclid_cap):
    with pytest.raises(PreconditionError):
        stability.auxiliary_identity_residuals(euclid_cap, 0)


def test_u_nondegeneracy(horoball_cap):
    measures = stability.u_nondegeneracy(horoball_cap)
    assert measures['ratio'] > 0.0
    assert measures['boundary_residual'] < 1e-8


@pytest.mark.parametrize('fixture', CAPS + ['perturbed_euclid', 'perturbed_horoball'])
def test_basis_meets_robin_condition_exactly(request, fixture):
    M = request.getfixturevalue(fixture)
    robin = robin_q(M)
    for element in stability.admissible_basis(M, 6):
        defect = float(np.abs(robin_defect(M, element, robin)).max())
        assert defect < 1e-9 * max(element.sup(), 1.0)


def test_random_fields_on_perturbed_caps_are_admissible(perturbed_horoball):
    for phi in stability.random_admissible_fields(perturbed_horoball, 3, basis_size=6, seed=3):
        assert phi.admissible, phi.residuals()


def test_lowest_eigenvalue_decreases_with_basis(euclid_cap):
    values = [stability.lowest_eigenvalue(euclid_cap, 0, size) for size in (4, 8, 12)]
    slack = 1e-10 * area(euclid_cap)
    assert values[1] <= values[0] + slack
    assert values[2] <= values[1] + slack


def test_hemisphere_basis_doubling(hemisphere):
    report = stability.stability_report(hemisphere, 0, basis_size=6, doubling=True)
    assert report.passed, report.components
    assert report.components['basis_doubling'][-1] <= get_config().BASIS_DOUBLING_LIMIT
    assert 'lambda_min_doubled' in report.values


def test_top_order_has_no_pointwise_gap(euclid_cap, horoball_cap_3d):
    for M in (euclid_cap, horoball_cap_3d):
        report = stability.rigidity_gap_report(M, M.n - 1)
        assert 'gap_a_negativity' not in report.components
        assert report.components['umbilical_excess'][-1] < 1e-8


def test_top_order_on_perturbed_caps_has_no_gap(perturbed_euclid):
    with pytest.raises(PreconditionError):
        stability.rigidity_gap_report(perturbed_euclid, perturbed_euclid.n - 1)


def test_perturbed_caps_open_a_strict_gap(perturbed_euclid, perturbed_horoball):
    for M in (perturbed_euclid, perturbed_horoball):
        report = stability.rigidity_gap_report(M, 0)
        assert report.components['strict_gap_shortfall'][-1] == 0.0
        assert report.values['largest_gap'] > get_config().STRICT_GAP


def test_nearly_umbilical_surface_misses_the_strict_gap():
    M = build_surface('euclid', 2, 1.0, math.pi / 2, 16, 1e-6, 2)
    report = stability.rigidity_gap_report(M, 0)
    assert not report.passed
    assert report.components['strict_gap_shortfall'][-1] > 0.0
    assert any('strict_gap_shortfall' in warning for warning in report.warnings)
