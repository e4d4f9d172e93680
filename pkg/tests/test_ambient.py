import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from services.ambient import (
    ambient_property_report, connection_term, conformal_field, exponential_map,
    geodesic, hessian_V_residual, inner, killing_defect, metric_at, potential,
    random_points, space_for, support_normal_derivative_V, support_tangency_residual,
)
from utils.errors import ArgumentError, DomainError, PreconditionError


@pytest.fixture
def hyperbolic():
    return space_for('horoball', 2)


@pytest.fixture
def euclidean():
    return space_for('euclid', 2)


def test_space_tags(hyperbolic, euclidean):
    assert hyperbolic.tag == 'horoball'
    assert euclidean.tag == 'euclid'
    assert hyperbolic.tau == 0.0
    with pytest.raises(ArgumentError):
        space_for('sphere', 2)


def test_hyperbolic_metric_and_potential(hyperbolic):
    point = np.array([0.3, -0.1, 2.0])
    assert_allclose(metric_at(hyperbolic, point), np.eye(3) / 4.0)
    assert float(potential(hyperbolic, point)) == pytest.approx(0.5)


def test_points_below_the_boundary_are_rejected(hyperbolic):
    with pytest.raises(DomainError):
        metric_at(hyperbolic, np.array([0.0, 0.0, -1.0]))


def test_euclidean_connection_vanishes(euclidean):
    y = np.array([1.0, 2.0, 3.0])
    assert_allclose(connection_term(euclidean, np.zeros(3), y, y), 0.0)


def test_connection_is_metric_compatible(hyperbolic, rng):
    # d/dt <Z, W> along Y equals <nabla_Y Z, W> + <Z, nabla_Y W> for constant chart fields
    point = np.array([0.2, 0.4, 1.3])
    y, z, w = rng.normal(size=(3, 3))
    lhs = -2.0 * y[-1] / point[-1] ** 3 * np.dot(z, w)
    rhs = (inner(hyperbolic, point, connection_term(hyperbolic, point, y, z), w)
           + inner(hyperbolic, point, z, connection_term(hyperbolic, point, y, w)))
    assert float(rhs) == pytest.approx(lhs, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize('tag', ['position', 'E_i', 'E_{n+1}', 'X_{n+1}'])
def test_killing_and_conformal_defects(hyperbolic, rng, tag):
    for point in random_points(hyperbolic, rng, 20):
        a, b = rng.normal(size=(2, 3))
        assert abs(killing_defect(hyperbolic, tag, point, a, b)) < 1e-10


def test_killing_checks_need_hyperbolic_model(euclidean):
    with pytest.raises(PreconditionError):
        killing_defect(euclidean, 'position', np.zeros(3), np.ones(3), np.ones(3))


def test_potential_hessian(hyperbolic, rng):
    for point in random_points(hyperbolic, rng, 20):
        a, b = rng.normal(size=(2, 3))
        assert abs(hessian_V_residual(hyperbolic, point, a, b)) < 1e-10


def test_support_identities(hyperbolic, rng):
    support = random_points(hyperbolic, rng, 10, on_support=True)
    assert_allclose(support_tangency_residual(hyperbolic, support), 0.0, atol=1e-12)
    assert_allclose(support_normal_derivative_V(hyperbolic, support), 0.0, atol=1e-12)


def test_vertical_geodesic_is_exponential(hyperbolic):
    start = np.array([[0.5, 0.0, 1.0]])
    velocity = np.array([[0.0, 0.0, 1.0]])
    points, arrival = geodesic(hyperbolic, start, velocity, 0.7)
    assert_allclose(points, [[0.5, 0.0, math.exp(0.7)]])
    assert_allclose(arrival, [[0.0, 0.0, math.exp(0.7)]])


def test_geodesic_keeps_hyperbolic_speed(hyperbolic, rng):
    points = random_points(hyperbolic, rng, 50)
    velocity = rng.normal(size=points.shape)
    moved, arrival = geodesic(hyperbolic, points, velocity, 0.5)
    before = np.linalg.norm(velocity, axis=-1) / points[:, -1]
    after = np.linalg.norm(arrival, axis=-1) / moved[:, -1]
    assert_allclose(after, before, rtol=1e-10)
    assert np.all(moved[:, -1] > 0.0)


def test_geodesic_reaches_the_distance(hyperbolic):
    # points on the same vertical line: d = |log(z1/z0)|
    start = np.array([[0.0, 0.0, 1.0]])
    end = exponential_map(hyperbolic, start, np.array([[0.0, 0.0, -0.3]]))
    assert math.log(start[0, -1] / end[0, -1]) == pytest.approx(0.3)


def test_euclidean_geodesic_is_straight(euclidean):
    points, velocity = geodesic(euclidean, np.zeros(3), np.array([1.0, 2.0, 3.0]), 2.0)
    assert_allclose(points, [2.0, 4.0, 6.0])
    assert_allclose(velocity, [1.0, 2.0, 3.0])


def test_conformal_field_is_position_minus_vertical(hyperbolic):
    assert_allclose(conformal_field(hyperbolic, np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 2.0])


def test_property_report_at_roundoff(hyperbolic, rng):
    defects = ambient_property_report(hyperbolic, rng, 20)
    assert set(defects) >= {'position', 'E_i', 'E_{n+1}', 'X_{n+1}', 'hessian_V', 'support_tangency'}
    assert max(defects.values()) < 1e-10
