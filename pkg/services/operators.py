"""
Surface operators on a DiscreteImmersion.

L_r f = P_r^{ij} nabla^2_ij f is evaluated in the orthonormal frame built
from the Cholesky factor of g, where the Newton tensors are stored; J_r adds
tr(P_r h^2) f + K tr(P_r) f. Boundary normal derivatives use the grid's
spectral boundary rows.
"""

from utils.logger import get_logger
from typing import Dict, Optional, Union

import numpy as np

from config import get_config, tolerance
from models.fields import RobinData, SurfaceField
from models.reports import VerificationReport
from models.surface import DiscreteImmersion
from services.ambient import inner, vertical_field
from services.immersion import integrate_M
from services.symfun import is_positive_definite
from utils.errors import ArgumentError, DegenerateAngleError

logger = get_logger(__name__)

ANGLE_FLOOR = 1e-12

FIELD_NAMES = (
    'support_function', 'height_normal', 'conformal_normal', 'potential', 'omega', 'u', 'Phi',
)

FieldLike = Union[SurfaceField, np.ndarray]


def pointwise_residual(lhs, rhs) -> float:
    """sup |lhs - rhs| / (1 + max(|lhs|, |rhs|))"""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    return float((np.abs(lhs - rhs) / (1.0 + np.maximum(np.abs(lhs), np.abs(rhs)))).max())


def surface_field(M: DiscreteImmersion, interior: np.ndarray, boundary: Optional[np.ndarray] = None,
                  provenance: str = 'sampled', name: str = '') -> SurfaceField:
    return SurfaceField(interior, boundary, M.key, provenance, name)


def _values(M: DiscreteImmersion, f: FieldLike) -> np.ndarray:
    if isinstance(f, SurfaceField):
        f.require(M.key)
        return f.interior
    values = np.asarray(f, dtype=float)
    if values.shape != M.grid.shape:
        raise ArgumentError("Field values do not match the interior node set")
    return values


def _frame_inverse(M: DiscreteImmersion) -> np.ndarray:
    return np.linalg.inv(M.interior.cholesky)


def parameter_gradient(M: DiscreteImmersion, f: FieldLike) -> np.ndarray:
    """d_i f at interior nodes"""
    return M.grid.partials(_values(M, f))


def hessian_surface(M: DiscreteImmersion, f: FieldLike) -> np.ndarray:
    """nabla^2_ij f = d_ij f - Gamma^k_ij d_k f"""
    values = _values(M, f)
    first = M.grid.partials(values)
    second = M.grid.second_partials(values, first)
    return second - np.einsum('...kij,...k->...ij', M.interior.christoffel, first)


def surface_gradient(M: DiscreteImmersion, f: FieldLike) -> np.ndarray:
    """nabla f as a chart vector at interior nodes"""
    first = parameter_gradient(M, f)
    raised = np.einsum('...ij,...j->...i', M.interior.inverse_metric, first)
    return np.einsum('...i,...ia->...a', raised, M.interior.tangents)


def ambient_directional(M: DiscreteImmersion, vector: np.ndarray, f: FieldLike) -> np.ndarray:
    """g-bar(Z, nabla f) for a chart vector field Z at interior nodes"""
    return inner(M.space, M.interior.points, vector, surface_gradient(M, f))


def _check_order(M: DiscreteImmersion, r: int) -> None:
    if not 0 <= r <= M.n - 1:
        raise ArgumentError(f"Operator order {r} outside 0..{M.n - 1}")


def L_r(M: DiscreteImmersion, f: FieldLike, r: int) -> SurfaceField:
    """div(P_r nabla f) = P_r^{ij} nabla^2_ij f"""
    _check_order(M, r)
    inverse = _frame_inverse(M)
    hessian = inverse @ hessian_surface(M, f) @ np.swapaxes(inverse, -1, -2)
    values = np.einsum('...ij,...ij->...', M.interior.newton[r], hessian)
    return surface_field(M, values, name=f"L_{r}")


def newton_h2_trace(M: DiscreteImmersion, r: int) -> np.ndarray:
    """tr(P_r h^2) node-wise"""
    shape = M.interior.frame_shape
    return np.einsum('...ij,...ji->...', M.interior.newton[r], shape @ shape)


def newton_trace(M: DiscreteImmersion, r: int) -> np.ndarray:
    """tr(P_r) = (n - r) sigma_r"""
    return (M.n - r) * M.interior.sigma[..., r]


def jacobi_J_r(M: DiscreteImmersion, f: FieldLike, r: int) -> SurfaceField:
    """L_r f + tr(P_r h^2) f + K tr(P_r) f"""
    values = _values(M, f)
    potential = newton_h2_trace(M, r) + M.space.curvature * newton_trace(M, r)
    return surface_field(M, L_r(M, f, r).interior + potential * values, name=f"J_{r}")


def normal_derivative(M: DiscreteImmersion, f: SurfaceField) -> np.ndarray:
    """nabla_mu f at the boundary nodes"""
    f.require(M.key)
    partials = M.grid.boundary_partials(f.interior, f.boundary)
    return np.einsum('...i,...i->...', M.boundary.conormal_parameter, partials)


def robin_q(M: DiscreteImmersion) -> RobinData:
    """q = kappa csc(theta) + cot(theta) h(mu, mu)"""
    trace = M.boundary
    if np.any(np.abs(trace.sin_theta) < ANGLE_FLOOR):
        raise DegenerateAngleError("Contact angle is 0 or pi on the boundary",
                                   {'min_sin_theta': float(np.abs(trace.sin_theta).min())})
    q = (M.space.support_curvature + trace.cos_theta * trace.h_mu_mu) / trace.sin_theta
    return RobinData(q, M.key)


def robin_defect(M: DiscreteImmersion, f: SurfaceField, robin: Optional[RobinData] = None) -> np.ndarray:
    """nabla_mu f - q f on the boundary"""
    robin = robin or robin_q(M)
    boundary = f.boundary if f.boundary is not None else M.grid.boundary_value(f.interior)
    with_boundary = SurfaceField(f.interior, boundary, f.grid_key, f.provenance, f.name)
    return normal_derivative(M, with_boundary) - robin.q * boundary


# named geometric fields

def _pairs(M: DiscreteImmersion):
    return ((M.interior, 'interior'), (M.boundary.geometry, 'boundary'))


def _geometric_values(M: DiscreteImmersion, geometry, name: str) -> np.ndarray:
    space = M.space
    points = geometry.points
    normal = geometry.normal
    support = inner(space, points, points, normal)
    height = inner(space, points, vertical_field(space, points), normal)
    potential = geometry.conformal
    cos_t = np.cos(M.theta)
    if name == 'support_function':
        return support
    if name == 'height_normal':
        return height
    if name == 'conformal_normal':
        return support - height
    if name == 'potential':
        return potential
    if name == 'omega':
        return potential - cos_t * height
    if name == 'u':
        return potential - cos_t * support
    if name == 'Phi':
        return -height
    if name.startswith('sigma_'):
        return geometry.sigma[..., int(name.split('_')[1])]
    if name.startswith('H_'):
        return geometry.normalized(int(name.split('_')[1]))
    raise ArgumentError(f"Unknown geometric field {name}")


def geometric_field(M: DiscreteImmersion, name: str) -> SurfaceField:
    """
    Named fields with exact boundary values: support_function g(x, nu),
    height_normal g(E_{n+1}, nu), conformal_normal g(X_{n+1}, nu),
    potential V_{n+1}, omega = V - cos(theta) g(E_{n+1}, nu), u, Phi,
    sigma_k and H_k.
    """
    interior = _geometric_values(M, M.interior, name)
    boundary = _geometric_values(M, M.boundary.geometry, name)
    return surface_field(M, interior, boundary, provenance='analytic', name=name)


def sigma_field(M: DiscreteImmersion, k: int) -> SurfaceField:
    return geometric_field(M, f"sigma_{k}")


def mean_field(M: DiscreteImmersion, k: int) -> SurfaceField:
    return geometric_field(M, f"H_{k}")


def conormal_component(M: DiscreteImmersion, which: str) -> np.ndarray:
    """g-bar(x, mu) ('mu') or g-bar(x, nu-bar) ('nu_bar') on the boundary"""
    trace = M.boundary
    vector = trace.conormal if which == 'mu' else trace.support_tangent
    return inner(M.space, trace.points, trace.points, vector)


# structural checks

def ellipticity_gate(M: DiscreteImmersion, r: int) -> Dict[str, object]:
    """P_j positive definite and H_j > 0 at every node for j <= r, plus an elliptic point"""
    _check_order(M, r)
    geometry = M.interior
    definite = all(bool(np.all(is_positive_definite(geometry.newton[j]))) for j in range(r + 1))
    positive = bool(np.all(geometry.sigma[..., 1:r + 2] > 0.0))
    elliptic_point = bool(np.any(np.all(geometry.curvatures > 0.0, axis=-1)))
    return {
        'passed': definite and positive and elliptic_point,
        'newton_positive_definite': definite,
        'mean_curvatures_positive': positive,
        'elliptic_point': elliptic_point,
    }


def cutoff_field(M: DiscreteImmersion, power: int = 4, mode: int = 1, phase: float = 0.0) -> SurfaceField:
    """(1 - s^2/s_b^2)^power (s/s_b)^m cos(m phi + phase), vanishing near the boundary"""
    grid = M.grid
    params = grid.params
    ratio = params[..., 0] / grid.boundary_parameter
    phi = params[..., -1]
    values = (1.0 - ratio ** 2) ** power * ratio ** mode * np.cos(mode * phi + phase)
    return surface_field(M, values, np.zeros(grid.angular_shape), provenance='analytic', name='cutoff')


def divergence_form_residual(M: DiscreteImmersion, f: FieldLike, g: FieldLike, r: int) -> float:
    """
    int g L_r f + int P_r(nabla f, nabla g) for fields supported away from
    the boundary, relative to the size of either term.
    """
    inverse = _frame_inverse(M)
    grad_f = np.einsum('...ij,...j->...i', inverse, parameter_gradient(M, f))
    grad_g = np.einsum('...ij,...j->...i', inverse, parameter_gradient(M, g))
    bilinear = np.einsum('...i,...ij,...j->...', grad_f, M.interior.newton[r], grad_g)
    product = _values(M, g) * L_r(M, f, r).interior
    total = integrate_M(M, product) + integrate_M(M, bilinear)
    scale = integrate_M(M, np.abs(product)) + integrate_M(M, np.abs(bilinear))
    return float(abs(total) / max(scale, 1e-300))


# identity verifiers

def jacobi_components(M: DiscreteImmersion, r: int) -> Dict[str, float]:
    """Per-identity sup residuals of the Jacobi identities with gradient terms"""
    _check_order(M, r)
    n = M.n
    space = M.space
    points = M.interior.points
    sigma_next = M.interior.sigma[..., r + 1]
    gradient_target = sigma_field(M, r + 1)
    vertical = vertical_field(space, points)

    support = geometric_field(M, 'support_function')
    height = geometric_field(M, 'height_normal')
    x_term = ambient_directional(M, points, gradient_target)
    e_term = ambient_directional(M, vertical, gradient_target)
    components = {}
    if not space.is_hyperbolic:
        components['J_r<x,nu>'] = pointwise_residual(
            jacobi_J_r(M, support, r).interior, x_term + (r + 1) * sigma_next)
        components['J_r<E,nu>'] = pointwise_residual(jacobi_J_r(M, height, r).interior, e_term)
        return components

    potential = M.interior.conformal
    sigma_r = M.interior.sigma[..., r]
    conformal = geometric_field(M, 'conformal_normal')
    components['J_r g(x,nu)'] = pointwise_residual(jacobi_J_r(M, support, r).interior, x_term)
    components['J_r g(E,nu)'] = pointwise_residual(
        jacobi_J_r(M, height, r).interior,
        -(r + 1) * sigma_next * potential + e_term - (n - r) * sigma_r * height.interior)
    components['J_r g(X,nu)'] = pointwise_residual(
        jacobi_J_r(M, conformal, r).interior,
        x_term - e_term + (r + 1) * sigma_next * potential + (n - r) * sigma_r * height.interior)
    potential_field = geometric_field(M, 'potential')
    sigma = M.interior.sigma
    components['J_r V'] = pointwise_residual(
        jacobi_J_r(M, potential_field, r).interior,
        (r + 1) * sigma_next * height.interior
        + (sigma[..., 1] * sigma_next - (r + 2) * sigma[..., r + 2]) * potential)
    components['L_r V'] = pointwise_residual(
        L_r(M, potential_field, r).interior,
        (n - r) * sigma_r * potential + (r + 1) * sigma_next * height.interior)
    return components


def jacobi_identity_residuals(M: DiscreteImmersion, r: int,
                              overrides: Optional[dict] = None) -> VerificationReport:
    tol = tolerance('jacobi', overrides)
    components = jacobi_components(M, r)
    report = VerificationReport.for_surface('jacobi', M, r, tol, normalizer='1 + max(|lhs|, |rhs|)')
    report.add_level(M.resolution, max(components.values()), components)
    report.judge(get_config().MIN_ORDER, get_config().ROUNDOFF_FLOOR)
    return report


def robin_components(M: DiscreteImmersion) -> Dict[str, float]:
    """Per-identity sup residuals of the boundary Robin relations"""
    robin = robin_q(M)
    q = robin.q
    trace = M.boundary
    components = {}
    support = geometric_field(M, 'support_function')
    if not M.space.is_hyperbolic:
        omega = geometric_field(M, 'omega')
        components['nabla_mu<x,nu>'] = pointwise_residual(normal_derivative(M, support), q * support.boundary)
        components['nabla_mu omega'] = pointwise_residual(normal_derivative(M, omega), q * omega.boundary)
        return components

    for name in ('conformal_normal', 'omega', 'u'):
        values = geometric_field(M, name)
        components[f"nabla_mu {name}"] = pointwise_residual(normal_derivative(M, values), q * values.boundary)
    components['nabla_mu g(x,nu)'] = pointwise_residual(
        normal_derivative(M, support),
        conormal_component(M, 'nu_bar') + trace.h_mu_mu * conormal_component(M, 'mu'))
    return components


def robin_residuals(M: DiscreteImmersion, r: int = 0,
                    overrides: Optional[dict] = None) -> VerificationReport:
    tol = tolerance('robin', overrides)
    components = robin_components(M)
    report = VerificationReport.for_surface('robin', M, r, tol, normalizer='1 + max(|lhs|, |rhs|)')
    report.add_level(M.resolution, max(components.values()), components)
    report.judge(get_config().MIN_ORDER, get_config().ROUNDOFF_FLOOR)
    return report
