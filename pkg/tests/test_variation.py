import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from services import stability
from services.immersion import area, enclosed_volume
from services.variation import (
    admissible_variation_from, capillary_functionals, evolve, first_variation_check, flow_rule,
    functional_ledger, ledger_report, linear_family, normal_unit_field, scaling_field,
    sweep_rate, transported_rule, variation_vector, wetting_rate_check,
)
from utils.errors import ArgumentError, PreconditionError


def test_scaling_field_on_hemisphere(hemisphere):
    field = scaling_field(hemisphere)
    assert_allclose(field.normal_speed.interior, 1.0, atol=1e-10)
    assert_allclose(field.tangential, 0.0, atol=1e-10)
    assert field.compatibility_residual < 1e-10


@pytest.mark.parametrize('fixture', ['euclid_cap', 'horoball_cap', 'euclid_cap_3d'])
def test_named_fields_are_compatible(request, fixture):
    M = request.getfixturevalue(fixture)
    for field in (scaling_field(M), normal_unit_field(M)):
        assert field.compatibility_residual < 1e-8, field.label


def test_normal_unit_field_tangent_on_ring(euclid_cap):
    field = normal_unit_field(euclid_cap)
    _, boundary = variation_vector(field, euclid_cap)
    # Y stays tangent to the support plane along the boundary
    assert_allclose(boundary[..., -1], 0.0, atol=1e-10)


def test_flow_rules():
    assert flow_rule('scale') is scaling_field
    assert flow_rule('normal-unit') is normal_unit_field
    with pytest.raises(ArgumentError):
        flow_rule('from-phi')
    with pytest.raises(ArgumentError):
        flow_rule('mean-curvature')


def test_admissible_variation(euclid_cap):
    basis = stability.admissible_basis(euclid_cap, 4)
    phi = stability.admissible_field(euclid_cap, basis[1])
    field = admissible_variation_from(phi, euclid_cap)
    assert field.metadata['angle_residual'] < 1e-7
    assert field.metadata['volume_rate'] == pytest.approx(0.0, abs=1e-8)
    assert field.compatibility_residual < 1e-8


def test_admissible_variation_needs_admissible_field(euclid_cap):
    ones = normal_unit_field(euclid_cap).normal_speed
    with pytest.raises(PreconditionError):
        admissible_variation_from(stability.admissible_field(euclid_cap, ones), euclid_cap)


def test_linear_family_dilates_hemisphere(hemisphere):
    moved = linear_family(hemisphere, normal_unit_field(hemisphere), 0.1)
    assert area(moved) == pytest.approx(2 * math.pi * 1.21, rel=1e-8)


def test_hemisphere_functionals(hemisphere):
    values = capillary_functionals(hemisphere, math.pi / 2, 0.0, 0.0)
    assert values['A'][0] == pytest.approx(2 * math.pi, rel=1e-8)
    assert values['W'][1] == pytest.approx(math.pi, rel=1e-8)
    assert values['Q'][0] == pytest.approx(2 * math.pi, rel=1e-8)
    assert len(values['E']) == 3


def test_sweep_rate_of_unit_speed(hemisphere):
    ones = np.ones(hemisphere.grid.angular_shape)
    assert sweep_rate(hemisphere, ones, 0) == pytest.approx(2 * math.pi, rel=1e-8)
    assert sweep_rate(hemisphere, ones, 1) == pytest.approx(math.pi, rel=1e-8)


def test_wetting_rate_on_hemisphere(hemisphere):
    report = wetting_rate_check(hemisphere, normal_unit_field, 1)
    assert report.values['dW_dt'] == pytest.approx(math.pi, rel=1e-6)
    assert report.passed


def test_first_variation_of_scaling_on_hemisphere(hemisphere):
    report = first_variation_check(hemisphere, scaling_field, 1)
    assert report.values['dE_dt'] == pytest.approx(2 * math.pi, rel=1e-6)
    assert report.values['expected'] == pytest.approx(2 * math.pi, rel=1e-8)
    assert report.values['dV_dt'] == pytest.approx(2 * math.pi, rel=1e-6)
    assert report.passed


@pytest.mark.parametrize('fixture', ['euclid_cap', 'horoball_cap', 'euclid_cap_3d', 'perturbed_euclid'])
def test_first_variation_formula(request, fixture):
    M = request.getfixturevalue(fixture)
    for rule in (scaling_field, normal_unit_field):
        for r in range(M.n):
            report = first_variation_check(M, rule, r)
            assert report.passed, (r, report.components, report.values['dE_dt'], report.values['expected'])
            assert report.components['volume'][-1] < 1e-6


def test_first_variation_along_admissible_field(horoball_cap):
    basis = stability.admissible_basis(horoball_cap, 4)
    phi = stability.admissible_field(horoball_cap, basis[0])
    rule = flow_rule('from-phi', horoball_cap, phi)
    report = first_variation_check(horoball_cap, rule, 0)
    assert report.passed, report.components
    assert report.values['dV_dt'] == pytest.approx(0.0, abs=1e-6)


def test_first_variation_order_range(hemisphere):
    with pytest.raises(ArgumentError):
        first_variation_check(hemisphere, scaling_field, 2)


def test_flow_argument_checks(hemisphere):
    with pytest.raises(ArgumentError):
        evolve(hemisphere, normal_unit_field, dt=0.0, steps=1)
    with pytest.raises(PreconditionError):
        evolve(hemisphere, normal_unit_field, dt=1.0, steps=1)


def test_expanding_hemisphere(hemisphere):
    flow = evolve(hemisphere, normal_unit_field, dt=0.01, steps=3)
    assert flow.steps == 3
    assert area(flow.surfaces[-1]) == pytest.approx(2 * math.pi * 1.03 ** 2, rel=1e-8)
    assert enclosed_volume(flow.surfaces[-1]) == pytest.approx(2 * math.pi * 1.03 ** 3 / 3, rel=1e-8)
    assert max(flow.max_deviation().values()) < 1e-4
    assert max(flow.boundary_drift) < 1e-10


def test_functional_ledger_of_expanding_hemisphere(hemisphere):
    flow = evolve(hemisphere, normal_unit_field, dt=0.01, steps=2)
    ledger = functional_ledger(flow)
    assert ledger.times == pytest.approx([0.0, 0.01, 0.02])
    assert ledger.consistency < 1e-9
    assert ledger.wetted_sweep[-1] == pytest.approx(math.pi * (1.02 ** 2 - 1.0), rel=1e-8)
    assert ledger.volume[-1] == pytest.approx(2 * math.pi * (1.02 ** 3 - 1.0) / 3, rel=1e-8)


@pytest.mark.parametrize('fixture, rule', [
    ('euclid_cap', normal_unit_field),
    ('horoball_cap', scaling_field),
    ('horoball_cap', normal_unit_field),
])
def test_evolution_ledger(request, fixture, rule):
    M = request.getfixturevalue(fixture)
    report = ledger_report(M, rule, dt=0.004, steps=2)
    assert report.passed, report.components
    assert report.resolutions == [2, 4]
    assert report.values['duration'] == pytest.approx(0.008)


def test_evolution_ledger_with_transported_field(euclid_cap_3d):
    field = normal_unit_field(euclid_cap_3d)
    flow = evolve(euclid_cap_3d, field, dt=0.004, steps=2)
    assert max(flow.max_deviation().values()) < 1e-4


def test_transported_rule_keeps_speed(euclid_cap):
    field = normal_unit_field(euclid_cap)
    rule = transported_rule(field, euclid_cap)
    assert rule(euclid_cap) is field
