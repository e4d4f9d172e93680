import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from services.operators import (
    L_r, cutoff_field, divergence_form_residual, ellipticity_gate, geometric_field,
    hessian_surface, jacobi_components, jacobi_identity_residuals, jacobi_J_r, mean_field,
    newton_h2_trace, newton_trace, normal_derivative, robin_components, robin_q,
    robin_residuals, surface_field,
)
from utils.errors import ArgumentError


def test_laplacian_of_coordinates(hemisphere):
    x = hemisphere.interior.points[..., 0]
    assert_allclose(L_r(hemisphere, x, 0).interior, -2.0 * x, atol=1e-7)


def test_newton_operator_on_unit_sphere(euclid_cap_3d):
    # P_1 = 2 I on the unit 3-sphere
    x = euclid_cap_3d.interior.points[..., 1]
    assert_allclose(L_r(euclid_cap_3d, x, 1).interior, -2.0 * 3.0 * x, atol=1e-6)


def test_hessian_is_symmetric(euclid_cap):
    f = euclid_cap.interior.points[..., 0] ** 2
    hessian = hessian_surface(euclid_cap, f)
    assert_allclose(hessian, np.swapaxes(hessian, -1, -2), atol=1e-9)


def test_order_range(hemisphere):
    with pytest.raises(ArgumentError):
        L_r(hemisphere, np.zeros(hemisphere.grid.shape), 2)


def test_jacobi_potential_of_unit_sphere(hemisphere):
    ones = np.ones(hemisphere.grid.shape)
    assert_allclose(jacobi_J_r(hemisphere, ones, 0).interior, 2.0, atol=1e-10)
    assert_allclose(newton_h2_trace(hemisphere, 0), 2.0, atol=1e-10)
    assert_allclose(newton_trace(hemisphere, 1), 2.0, atol=1e-10)


def test_geometric_fields_on_hemisphere(hemisphere):
    assert_allclose(geometric_field(hemisphere, 'support_function').interior, 1.0, atol=1e-10)
    assert_allclose(geometric_field(hemisphere, 'potential').boundary, 1.0)
    assert_allclose(mean_field(hemisphere, 2).interior, 1.0, atol=1e-10)
    with pytest.raises(ArgumentError):
        geometric_field(hemisphere, 'torsion')


def test_robin_coefficient(hemisphere, euclid_cap):
    assert_allclose(robin_q(hemisphere).q, 0.0, atol=1e-10)
    assert_allclose(robin_q(euclid_cap).q, 1.0 / math.sqrt(3.0), atol=1e-8)


def test_normal_derivative_of_height(euclid_cap):
    # x_3 decreases along the outward conormal at rate sin(theta)
    height = euclid_cap.interior.points[..., -1]
    field = surface_field(euclid_cap, height, euclid_cap.boundary.points[..., -1])
    assert_allclose(normal_derivative(euclid_cap, field), -math.sin(math.pi / 3), atol=1e-7)


def test_divergence_form(euclid_cap, horoball_cap):
    for M in (euclid_cap, horoball_cap):
        f = cutoff_field(M, mode=1)
        g = cutoff_field(M, mode=2, phase=0.3)
        for r in range(M.n):
            assert divergence_form_residual(M, f, g, r) < 1e-8


def test_ellipticity_gate(euclid_cap, horoball_cap_3d):
    assert ellipticity_gate(euclid_cap, 1)['passed']
    gate = ellipticity_gate(horoball_cap_3d, 2)
    assert gate['passed'] and gate['elliptic_point']


@pytest.mark.parametrize('fixture', ['euclid_cap', 'horoball_cap', 'euclid_cap_3d', 'horoball_cap_3d'])
def test_jacobi_identities_on_caps(request, fixture):
    M = request.getfixturevalue(fixture)
    for r in range(M.n):
        report = jacobi_identity_residuals(M, r)
        assert report.passed, report.components
        assert report.identity == 'jacobi'


def test_jacobi_identities_on_perturbed_caps(perturbed_euclid, perturbed_horoball):
    for M in (perturbed_euclid, perturbed_horoball):
        for r in range(M.n):
            assert max(jacobi_components(M, r).values()) < 1e-4


@pytest.mark.parametrize('fixture', ['euclid_cap', 'horoball_cap', 'horoball_cap_3d'])
def test_robin_relations(request, fixture):
    M = request.getfixturevalue(fixture)
    report = robin_residuals(M)
    assert report.passed, report.components
    expected = {'nabla_mu conformal_normal', 'nabla_mu omega', 'nabla_mu u', 'nabla_mu g(x,nu)'}
    if M.space.is_hyperbolic:
        assert set(robin_components(M)) == expected


def test_robin_coefficient_on_horoball_cap(horoball_cap):
    # (1 + cos(theta) Lambda) / sin(theta) with Lambda = 2, theta = pi/3
    assert_allclose(robin_q(horoball_cap).q, 4.0 / math.sqrt(3.0), atol=1e-7)


def test_robin_relations_on_perturbed_cap(perturbed_horoball):
    assert max(robin_components(perturbed_horoball).values()) < 1e-4
