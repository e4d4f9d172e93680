import math

import numpy as np
import pytest

from services.identities import (
    boundary_flux_1, boundary_flux_2, boundary_flux_cross_check, cmc_boundary_identity,
    convergence_study, dilated_patch, minkowski, scale_covariance, sigma_spread,
)
from services.immersion import build_surface
from utils.errors import ArgumentError, PreconditionError

CAPS = ['hemisphere', 'euclid_cap', 'euclid_cap_3d', 'horoball_cap', 'horoball_cap_3d']


@pytest.mark.parametrize('fixture', CAPS)
def test_minkowski_on_caps(request, fixture):
    M = request.getfixturevalue(fixture)
    for r in range(M.n):
        report = minkowski(M, r)
        assert report.passed, (r, report.residuals)
        assert report.identity == 'minkowski'
        assert report.model == M.space.tag


@pytest.mark.parametrize('fixture', ['perturbed_euclid', 'perturbed_horoball'])
def test_minkowski_on_perturbed_caps(request, fixture):
    M = request.getfixturevalue(fixture)
    for r in range(M.n):
        assert minkowski(M, r).finest < 1e-5


def test_minkowski_on_hemisphere_values(hemisphere):
    # omega = 1 and <x, nu> = 1, so both sides are the area
    report = minkowski(hemisphere, 0)
    assert report.values['int_omega_H_r'] == pytest.approx(2 * math.pi, rel=1e-8)
    assert report.values['int_support_H_r+1'] == pytest.approx(2 * math.pi, rel=1e-8)


def test_order_out_of_range(hemisphere):
    with pytest.raises(ArgumentError):
        minkowski(hemisphere, 2)


@pytest.mark.parametrize('fixture', ['horoball_cap', 'horoball_cap_3d', 'perturbed_horoball'])
def test_boundary_fluxes(request, fixture):
    M = request.getfixturevalue(fixture)
    assert boundary_flux_cross_check(M).finest < 1e-6
    for r in range(M.n):
        assert boundary_flux_1(M, r).finest < 1e-6
        assert boundary_flux_2(M, r).finest < 1e-6


def test_fluxes_need_the_horoball(euclid_cap):
    with pytest.raises(PreconditionError):
        boundary_flux_1(euclid_cap, 0)
    with pytest.raises(PreconditionError):
        boundary_flux_cross_check(euclid_cap)


def test_cmc_identity_on_caps(horoball_cap, horoball_cap_3d):
    for M in (horoball_cap, horoball_cap_3d):
        for r in range(M.n):
            report = cmc_boundary_identity(M, r)
            assert report.passed, report.values


def test_cmc_identity_needs_constant_sigma(perturbed_horoball):
    assert sigma_spread(perturbed_horoball, 1) > 1e-4
    with pytest.raises(PreconditionError):
        cmc_boundary_identity(perturbed_horoball, 0)


def test_dilation(hemisphere):
    patch = dilated_patch(hemisphere.patch, 2.0)
    assert patch.metadata['lambda'] == pytest.approx(0.5)
    with pytest.raises(ArgumentError):
        dilated_patch(hemisphere.patch, -1.0)
    with pytest.raises(ArgumentError):
        dilated_patch(hemisphere.patch, 2.0, np.array([0.0, 0.0, 1.0]))


def test_scale_covariance(euclid_cap):
    report = scale_covariance(euclid_cap, 1, factor=3.0)
    assert report.values['dilated_residual'] < 1e-6
    assert report.finest < 1e-6


def test_convergence_study_merges_levels():
    report = convergence_study(lambda N: build_surface('euclid', 2, 1.0, math.pi / 3, N),
                               lambda M: minkowski(M, 1), [12, 16, 24])
    assert report.resolutions == [12, 16, 24]
    assert len(report.residuals) == 3
    assert report.passed


def test_convergence_study_needs_increasing_resolutions():
    with pytest.raises(ArgumentError):
        convergence_study(lambda N: None, lambda M: None, [16, 16])
    with pytest.raises(ArgumentError):
        convergence_study(lambda N: None, lambda M: None, [])
