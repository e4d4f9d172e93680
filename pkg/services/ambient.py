"""
Space-form models in their half-space charts.

Points and vectors are chart coordinate arrays with the last axis of length
n + 1. Everything is vectorized over leading axes. The hyperbolic metric is
(1 / x_{n+1}^2) delta and its Levi-Civita connection is written in closed
form through `connection_term`.
"""

from utils.logger import get_logger
from typing import Dict, Tuple

import numpy as np

from models.space_form import (
    EUCLIDEAN, HYPERBOLIC, CanonicalFields, SpaceForm, VectorJet,
)
from utils.errors import ArgumentError, DomainError, PreconditionError

logger = get_logger(__name__)

HEIGHT_FLOOR = 1e-12

KILLING_TAGS = ('position', 'E_i', 'E_{n+1}', 'X_{n+1}')


def euclidean_half_space(n: int) -> SpaceForm:
    return SpaceForm(EUCLIDEAN, n, 0.0, 0.0, 0.0)


def hyperbolic_upper_half_space(n: int) -> SpaceForm:
    return SpaceForm(HYPERBOLIC, n, -1.0, 1.0, 1.0)


def space_for(tag: str, n: int) -> SpaceForm:
    """Model from its CLI tag ('euclid' or 'horoball')"""
    if tag in ('euclid', EUCLIDEAN):
        return euclidean_half_space(n)
    if tag in ('horoball', HYPERBOLIC):
        return hyperbolic_upper_half_space(n)
    raise ArgumentError(f"Unknown model tag {tag}")


def _heights(space: SpaceForm, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.shape[-1] != space.ambient_dimension:
        raise ArgumentError(
            f"Expected {space.ambient_dimension} chart coordinates, got {points.shape[-1]}")
    height = points[..., -1]
    if space.is_hyperbolic and np.any(height <= HEIGHT_FLOOR):
        raise DomainError("Hyperbolic point with non-positive height",
                          {'min_height': float(np.min(height))})
    return height


def conformal_factor(space: SpaceForm, points: np.ndarray) -> np.ndarray:
    """lambda with g-bar = lambda^2 delta"""
    height = _heights(space, points)
    if space.is_hyperbolic:
        return 1.0 / height
    return np.ones_like(height)


def metric_at(space: SpaceForm, point: np.ndarray) -> np.ndarray:
    """Matrix of g-bar at a single point"""
    factor = float(conformal_factor(space, np.asarray(point, dtype=float)))
    return factor ** 2 * np.eye(space.ambient_dimension)


def inner(space: SpaceForm, points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """g-bar(a, b) node-wise"""
    factor = conformal_factor(space, points)
    return factor ** 2 * np.einsum('...a,...a->...', a, b)


def norm(space: SpaceForm, points: np.ndarray, a: np.ndarray) -> np.ndarray:
    return np.sqrt(inner(space, points, a, a))


def connection_term(space: SpaceForm, points: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """
    Christoffel part C(Y, Z) of nabla-bar_Y Z = D_Y Z + C(Y, Z).

    Hyperbolic: C = -Y(ln h) Z - Z(ln h) Y + <Y, Z> D ln h with h = x_{n+1}.
    """
    height = _heights(space, points)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if not space.is_hyperbolic:
        return np.zeros(np.broadcast_shapes(y.shape, z.shape))
    inv = (1.0 / height)[..., None]
    term = -y[..., -1:] * inv * z - z[..., -1:] * inv * y
    flat = np.einsum('...a,...a->...', y, z)[..., None]
    vertical = np.zeros_like(term)
    vertical[..., -1] = 1.0
    return term + flat * inv * vertical


def covariant_derivative(space: SpaceForm, point: np.ndarray, y: VectorJet, z: VectorJet) -> np.ndarray:
    """nabla-bar_Y Z from the value of Y and the value plus flat Jacobian of Z"""
    if z.jacobian is None:
        raise ArgumentError("Covariant derivative needs the flat Jacobian of Z")
    y_value = np.asarray(y.value, dtype=float)
    flat = np.asarray(z.jacobian, dtype=float) @ y_value
    return flat + connection_term(space, point, y_value, z.value)


def support_normal(space: SpaceForm, points: np.ndarray) -> np.ndarray:
    """N-bar: -E_{n+1} (Euclidean) or -E-bar_{n+1} = -x_{n+1} E_{n+1} (horosphere)"""
    factor = conformal_factor(space, points)
    normal = np.zeros(np.shape(points))
    normal[..., -1] = -1.0 / factor
    return normal


def vertical_field(space: SpaceForm, points: np.ndarray) -> np.ndarray:
    """Constant chart field E_{n+1}"""
    _heights(space, points)
    field = np.zeros(np.shape(points))
    field[..., -1] = 1.0
    return field


def conformal_field(space: SpaceForm, points: np.ndarray) -> np.ndarray:
    """X_{n+1} = x - E_{n+1}"""
    return np.asarray(points, dtype=float) - vertical_field(space, points)


def potential(space: SpaceForm, points: np.ndarray) -> np.ndarray:
    """V_{n+1} = 1 / x_{n+1}; the Euclidean model carries the constant 1"""
    return conformal_factor(space, points)


def canonical_fields(space: SpaceForm, point: np.ndarray) -> CanonicalFields:
    point = np.asarray(point, dtype=float)
    factor = float(conformal_factor(space, point))
    return CanonicalFields(
        position=point.copy(),
        vertical=vertical_field(space, point),
        conformal=conformal_field(space, point),
        potential=factor,
        frame=np.eye(space.ambient_dimension) / factor,
    )


def killing_jet(space: SpaceForm, tag: str, point: np.ndarray, index: int = 0) -> VectorJet:
    """Value and Jacobian of one of the canonical fields"""
    dim = space.ambient_dimension
    point = np.asarray(point, dtype=float)
    if tag == 'position':
        return VectorJet(point.copy(), np.eye(dim))
    if tag == 'E_i':
        if not 0 <= index < dim - 1:
            raise ArgumentError(f"Horizontal index {index} outside 0..{dim - 2}")
        value = np.zeros(dim)
        value[index] = 1.0
        return VectorJet(value, np.zeros((dim, dim)))
    if tag == 'E_{n+1}':
        return VectorJet(vertical_field(space, point), np.zeros((dim, dim)))
    if tag == 'X_{n+1}':
        return VectorJet(conformal_field(space, point), np.eye(dim))
    raise ArgumentError(f"Unknown field tag {tag}")


def killing_defect(space: SpaceForm, field_tag: str, point: np.ndarray,
                   a: np.ndarray, b: np.ndarray, index: int = 0) -> float:
    """
    Symmetrized derivative of a canonical field minus its expected conformal
    factor: 0 for x and E_i, -(1/x_{n+1}) g-bar for E_{n+1}, V_{n+1} g-bar for
    X_{n+1}.
    """
    if not space.is_hyperbolic:
        raise PreconditionError("Killing checks are defined on the hyperbolic model")
    if field_tag not in KILLING_TAGS:
        raise ArgumentError(f"Unknown field tag {field_tag}")
    point = np.asarray(point, dtype=float)
    jet = killing_jet(space, field_tag, point, index)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    along_a = covariant_derivative(space, point, VectorJet(a), jet)
    along_b = covariant_derivative(space, point, VectorJet(b), jet)
    symmetric = 0.5 * (inner(space, point, along_a, b) + inner(space, point, along_b, a))
    height = point[-1]
    metric_ab = inner(space, point, a, b)
    if field_tag == 'E_{n+1}':
        expected = -metric_ab / height
    elif field_tag == 'X_{n+1}':
        expected = metric_ab / height
    else:
        expected = 0.0
    return float(symmetric - expected)


def hessian_V_residual(space: SpaceForm, point: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """nabla-bar^2 V(A, B) - V g-bar(A, B) with A, B extended as constant chart fields"""
    if not space.is_hyperbolic:
        raise PreconditionError("The potential Hessian identity is a hyperbolic statement")
    point = np.asarray(point, dtype=float)
    height = float(_heights(space, point))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    gradient = np.zeros_like(point)
    gradient[-1] = -1.0 / height ** 2
    flat_hessian = a[-1] * b[-1] * 2.0 / height ** 3
    correction = gradient @ connection_term(space, point, a, b)
    value = flat_hessian - correction
    return float(value - inner(space, point, a, b) / height)


def support_tangency_residual(space: SpaceForm, points: np.ndarray) -> np.ndarray:
    """g-bar(X_{n+1}, N-bar) on the support"""
    return inner(space, points, conformal_field(space, points), support_normal(space, points))


def support_normal_derivative_V(space: SpaceForm, points: np.ndarray) -> np.ndarray:
    """d_{N-bar} V_{n+1} - V_{n+1}"""
    height = _heights(space, points)
    normal = support_normal(space, points)
    derivative = normal[..., -1] * (-1.0 / height ** 2)
    return derivative - potential(space, points)


def geodesic(space: SpaceForm, points: np.ndarray, velocity: np.ndarray,
             t: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Point and velocity at time t of the geodesic with initial velocity v.

    Euclidean: straight lines. Upper half-space: semicircles orthogonal to the
    boundary, written in a form that stays finite for vertical v.
    """
    points = np.asarray(points, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    if not space.is_hyperbolic:
        return points + t * velocity, np.array(velocity, copy=True)

    height = _heights(space, points)
    speed = np.linalg.norm(velocity, axis=-1)
    moving = speed > 0.0
    safe_speed = np.where(moving, speed, 1.0)
    beta = velocity[..., -1] / safe_speed
    length = t * speed / height
    cosh_l = np.cosh(length)
    sinh_l = np.sinh(length)
    denominator = cosh_l - beta * sinh_l

    scale = height * sinh_l / (safe_speed * denominator)
    new_points = points.copy()
    new_points[..., :-1] = points[..., :-1] + scale[..., None] * velocity[..., :-1]
    new_points[..., -1] = height / denominator

    new_velocity = np.empty_like(velocity)
    new_velocity[..., :-1] = velocity[..., :-1] / (denominator ** 2)[..., None]
    new_velocity[..., -1] = -speed * (sinh_l - beta * cosh_l) / denominator ** 2

    new_points = np.where(moving[..., None], new_points, points)
    new_velocity = np.where(moving[..., None], new_velocity, velocity)
    return new_points, new_velocity


def exponential_map(space: SpaceForm, points: np.ndarray, velocity: np.ndarray) -> np.ndarray:
    return geodesic(space, points, velocity, 1.0)[0]


def random_points(space: SpaceForm, rng: np.random.Generator, count: int,
                  on_support: bool = False) -> np.ndarray:
    """Random chart points; heights in (0.2, 3) for the hyperbolic model"""
    dim = space.ambient_dimension
    points = rng.uniform(-2.0, 2.0, size=(count, dim))
    if space.is_hyperbolic:
        points[:, -1] = rng.uniform(0.2, 3.0, size=count)
    if on_support:
        points[:, -1] = space.support_height
    return points


def ambient_property_report(space: SpaceForm, rng: np.random.Generator, count: int = 100) -> Dict[str, float]:
    """Largest defects of every ambient identity over random points and vectors"""
    dim = space.ambient_dimension
    points = random_points(space, rng, count)
    worst = {tag: 0.0 for tag in KILLING_TAGS}
    worst['hessian_V'] = 0.0
    for point in points:
        frame = point[-1] * np.eye(dim)
        vectors = [rng.normal(size=dim), rng.normal(size=dim), frame[0], frame[-1]]
        for a in vectors:
            for b in vectors:
                for tag in KILLING_TAGS:
                    indices = range(dim - 1) if tag == 'E_i' else [0]
                    for index in indices:
                        defect = abs(killing_defect(space, tag, point, a, b, index))
                        worst[tag] = max(worst[tag], defect)
                worst['hessian_V'] = max(worst['hessian_V'], abs(hessian_V_residual(space, point, a, b)))
    support_points = random_points(space, rng, count, on_support=True)
    worst['support_tangency'] = float(np.abs(support_tangency_residual(space, support_points)).max())
    worst['support_normal_derivative'] = float(
        np.abs(support_normal_derivative_V(space, support_points)).max())
    return worst
