"""
Immersion service: built-in cap families, boundary-preserving perturbations,
discretization onto the polar grid and the quadrature / geometric checks
that every other module relies on.

All built-in surfaces are radial graphs over a chart sphere,
x(u) = c + rho(u) n(u) with n(u) = (sin s w, cos s), so the boundary
parameter is s_b = theta in both models.
"""

from utils.logger import get_logger
from functools import lru_cache
from math import gamma, pi
from typing import Optional, Tuple, Union

import numpy as np
from scipy import integrate

from config import get_config
from models.fields import SurfaceField
from models.space_form import SpaceForm
from models.surface import (
    BoundaryTrace, DiscreteImmersion, NodeGeometry, ParametricPatch, SampledEmbedding, SurfaceJet,
)
from services.ambient import conformal_factor, connection_term, inner, space_for, support_normal
from services.polar_grid import PolarGrid, direction_jet, polar_grid
from services.symfun import newton_frame_stack, symmetric_stack
from utils.errors import (
    ArgumentError, ConstructionError, DiscretizationError, NumericalConsistencyError, PreconditionError,
)

logger = get_logger(__name__)

METRIC_FLOOR = 1e-12
SUPPORT_TOLERANCE = 1e-10
UMBILIC_TOLERANCE = 1e-8

FieldLike = Union[SurfaceField, np.ndarray]


def sphere_measure(n: int) -> float:
    """Volume of the unit sphere S^{n-1}"""
    return 2.0 * pi ** (n / 2.0) / gamma(n / 2.0)


# radial graphs

def _profile(s: np.ndarray, boundary_parameter: float, mode: int):
    """chi(s) sin^m(s) and its first two derivatives, chi = (1 - s^2/s_b^2)^3"""
    span = boundary_parameter ** 2
    q = 1.0 - s ** 2 / span
    dq = -2.0 * s / span
    ddq = -2.0 / span
    chi = q ** 3
    dchi = 3.0 * q ** 2 * dq
    ddchi = 6.0 * q * dq ** 2 + 3.0 * q ** 2 * ddq
    sin_s, cos_s = np.sin(s), np.cos(s)
    m = mode
    lift = sin_s ** m
    dlift = m * sin_s ** (m - 1) * cos_s if m > 0 else np.zeros_like(s)
    ddlift = (m * (m - 1) * sin_s ** (m - 2) * cos_s ** 2 - m * sin_s ** m) if m > 1 else -m * lift
    return (chi * lift,
            dchi * lift + chi * dlift,
            ddchi * lift + 2.0 * dchi * dlift + chi * ddlift)


def _harmonic(angles: np.ndarray, mode: int):
    """cos(m phi) on S^1, sin^m(alpha) cos(m phi) on S^2, with derivatives"""
    m = mode
    if angles.shape[-1] == 1:
        phi = angles[..., 0]
        value = np.cos(m * phi)
        first = (-m * np.sin(m * phi))[..., None]
        second = (-m * m * np.cos(m * phi))[..., None, None]
        return value, first, second
    alpha, phi = angles[..., 0], angles[..., 1]
    sa, ca = np.sin(alpha), np.cos(alpha)
    cm, sm = np.cos(m * phi), np.sin(m * phi)
    lift = sa ** m
    dlift = m * sa ** (m - 1) * ca if m > 0 else np.zeros_like(alpha)
    ddlift = (m * (m - 1) * sa ** (m - 2) * ca ** 2 - m * lift) if m > 1 else -m * lift
    value = lift * cm
    first = np.stack([dlift * cm, -m * lift * sm], axis=-1)
    second = np.empty(alpha.shape + (2, 2))
    second[..., 0, 0] = ddlift * cm
    second[..., 0, 1] = second[..., 1, 0] = -m * dlift * sm
    second[..., 1, 1] = -m * m * lift * cm
    return value, first, second


def _radial_graph_jet(params: np.ndarray, center: np.ndarray, radius: float,
                      amplitude: float, mode: int, boundary_parameter: float) -> SurfaceJet:
    params = np.asarray(params, dtype=float)
    n = params.shape[-1]
    s = params[..., 0]
    w, dw, ddw = direction_jet(params[..., 1:])
    sin_s, cos_s = np.sin(s)[..., None], np.cos(s)[..., None]

    # unit sphere direction and its parameter derivatives
    zeros = np.zeros(s.shape + (1,))
    unit = np.concatenate([sin_s * w, cos_s], axis=-1)
    d_unit = np.empty(s.shape + (n, n + 1))
    d_unit[..., 0, :] = np.concatenate([cos_s * w, -sin_s], axis=-1)
    for a in range(n - 1):
        d_unit[..., a + 1, :] = np.concatenate([sin_s * dw[..., a, :], zeros], axis=-1)
    dd_unit = np.empty(s.shape + (n, n, n + 1))
    dd_unit[..., 0, 0, :] = -unit
    for a in range(n - 1):
        mixed = np.concatenate([cos_s * dw[..., a, :], zeros], axis=-1)
        dd_unit[..., 0, a + 1, :] = mixed
        dd_unit[..., a + 1, 0, :] = mixed
        for b in range(n - 1):
            dd_unit[..., a + 1, b + 1, :] = np.concatenate([sin_s * ddw[..., a, b, :], zeros], axis=-1)

    rho = np.full(s.shape, float(radius))
    d_rho = np.zeros(s.shape + (n,))
    dd_rho = np.zeros(s.shape + (n, n))
    if amplitude != 0.0:
        p, dp, ddp = _profile(s, boundary_parameter, mode)
        harmonic, d_harmonic, dd_harmonic = _harmonic(params[..., 1:], mode)
        rho = rho + amplitude * p * harmonic
        d_rho[..., 0] = amplitude * dp * harmonic
        d_rho[..., 1:] = amplitude * p[..., None] * d_harmonic
        dd_rho[..., 0, 0] = amplitude * ddp * harmonic
        dd_rho[..., 0, 1:] = amplitude * dp[..., None] * d_harmonic
        dd_rho[..., 1:, 0] = dd_rho[..., 0, 1:]
        dd_rho[..., 1:, 1:] = amplitude * p[..., None, None] * dd_harmonic

    points = center + rho[..., None] * unit
    first = d_rho[..., :, None] * unit[..., None, :] + rho[..., None, None] * d_unit
    second = (dd_rho[..., :, :, None] * unit[..., None, None, :]
              + d_rho[..., :, None, None] * d_unit[..., None, :, :]
              + d_rho[..., None, :, None] * d_unit[..., :, None, :]
              + rho[..., None, None, None] * dd_unit)
    return SurfaceJet(points, first, second)


def _radial_graph(n: int, center: np.ndarray, radius: float, theta: float, amplitude: float,
                  mode: int, support_height: float, label: str, metadata: dict,
                  analytic: bool = True) -> ParametricPatch:
    center = np.asarray(center, dtype=float)

    def jet(params):
        return _radial_graph_jet(params, center, radius, amplitude, mode, theta)

    def embedding(params):
        return jet(params).points

    return ParametricPatch(
        n=n,
        boundary_parameter=theta,
        embedding=embedding,
        jet=jet if analytic else None,
        normal_center=center,
        support_height=support_height,
        scale=radius,
        label=label,
        metadata=metadata,
    )


def cap_family(space: SpaceForm, n: int, curvature: float, theta: float) -> ParametricPatch:
    """
    Umbilical cap meeting the support at angle theta.

    Euclidean: sphere of radius 1/Lambda centered at -(cos theta / Lambda) E_{n+1}.
    Horoball: chart sphere of radius 1/(Lambda + cos theta) centered at height
    Lambda/(Lambda + cos theta); its hyperbolic principal curvatures are Lambda.

    Raises:
        ConstructionError: when (Lambda, theta) gives no cap with boundary
    """
    if n != space.n:
        raise ArgumentError(f"Cap dimension {n} does not match the model dimension {space.n}")
    if not 0.0 < theta < pi:
        raise ConstructionError(f"Contact angle {theta} outside (0, pi)")
    cos_t = np.cos(theta)
    if space.is_hyperbolic:
        denominator = curvature + cos_t
        if denominator <= 0.0:
            raise ConstructionError(
                "Umbilical sphere does not meet the horosphere from above",
                {'lambda': curvature, 'theta': theta})
        radius = 1.0 / denominator
        height = curvature / denominator
        tag = 'horoball-cap'
    else:
        if curvature <= 0.0:
            raise ConstructionError("Euclidean caps need positive curvature", {'lambda': curvature})
        radius = 1.0 / curvature
        height = -cos_t / curvature
        tag = 'euclid-cap'
    center = np.zeros(n + 1)
    center[-1] = height
    metadata = {
        'kind': 'cap',
        'lambda': float(curvature),
        'theta': float(theta),
        'radius': float(radius),
        'center_height': float(height),
        'degenerate': bool(space.is_hyperbolic and curvature == 0.0),
    }
    patch = _radial_graph(n, center, radius, theta, 0.0, 0, space.support_height,
                          f"{tag}:n={n},lambda={curvature:g},theta={theta:.6g}", metadata)
    if space.is_hyperbolic:
        _check_umbilic(space, patch, curvature)
    return patch


def _check_umbilic(space: SpaceForm, patch: ParametricPatch, curvature: float) -> None:
    n = patch.n
    radii = np.linspace(0.2, 0.9, 4) * patch.boundary_parameter
    angle_axes = [np.linspace(0.3, 2.8, 3)] * (n - 1)
    mesh = np.meshgrid(radii, *angle_axes, indexing='ij')
    params = np.stack(mesh, axis=-1).reshape(-1, n)
    jet = patch.jet(params)
    geometry = node_geometry(space, jet, jet.points - patch.normal_center, params)
    deviation = float(np.abs(geometry.curvatures - curvature).max())
    if deviation > UMBILIC_TOLERANCE * max(1.0, abs(curvature)):
        raise NumericalConsistencyError("Constructed horoball cap is not umbilical",
                                        {'deviation': deviation, 'lambda': curvature})


def perturbed_cap(cap: ParametricPatch, amplitude: float, mode: int,
                  analytic: bool = True) -> ParametricPatch:
    """
    Radial-graph perturbation rho = R + a chi(s) sin^m(s) Y_m(angles) with
    chi vanishing to third order at the boundary, so the boundary ring, the
    contact angle and the boundary frames are those of the cap.
    """
    if cap.metadata.get('kind') != 'cap':
        raise ArgumentError("Perturbations are defined for built-in caps")
    if mode < 0:
        raise ArgumentError(f"Mode must be non-negative, got {mode}")
    curvature = cap.metadata['lambda']
    if curvature > 0.0 and abs(amplitude) > 0.1 / curvature:
        raise ConstructionError("Perturbation amplitude exceeds 0.1 / Lambda",
                                {'amplitude': amplitude, 'lambda': curvature})
    if abs(amplitude) >= cap.scale:
        raise ConstructionError("Perturbation amplitude would pass through the center",
                                {'amplitude': amplitude, 'radius': cap.scale})
    metadata = dict(cap.metadata, kind='perturbed', amplitude=float(amplitude), mode=int(mode))
    label = f"perturbed:{cap.label},amp={amplitude:g},mode={mode}"
    return _radial_graph(cap.n, cap.normal_center, cap.scale, cap.boundary_parameter, amplitude, mode,
                         cap.support_height, label, metadata, analytic=analytic)


def sampled_patch(M: DiscreteImmersion, interior: np.ndarray, boundary: np.ndarray,
                  label: Optional[str] = None) -> ParametricPatch:
    """A patch given by node positions on M's grid; normals are oriented like M's"""
    grid = M.grid
    dim = M.space.ambient_dimension
    if np.shape(interior) != grid.shape + (dim,) or np.shape(boundary) != grid.angular_shape + (dim,):
        raise ArgumentError("Sampled positions do not match the grid of the immersion")
    samples = SampledEmbedding(
        resolution=grid.resolution,
        interior=np.array(interior, dtype=float),
        boundary=np.array(boundary, dtype=float),
        interior_hint=np.array(M.interior.normal),
        boundary_hint=np.array(M.boundary.geometry.normal),
    )
    metadata = dict(M.patch.metadata, kind='sampled', source=M.patch.label)
    return ParametricPatch(
        n=M.n,
        boundary_parameter=grid.boundary_parameter,
        samples=samples,
        support_height=M.patch.support_height,
        scale=M.patch.scale,
        label=label or f"sampled:{M.patch.label}",
        metadata=metadata,
    )


# jets on the grid

def _finite_difference_jet(embedding, params: np.ndarray, step: float) -> SurfaceJet:
    """4th-order central differences of the embedding"""
    n = params.shape[-1]
    offsets = (-2, -1, 1, 2)
    first_weights = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)
    second_weights = (-1.0 / 12.0, 16.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0)
    center = embedding(params)
    unit = np.eye(n)
    first = np.zeros(params.shape[:-1] + (n, center.shape[-1]))
    second = np.zeros(params.shape[:-1] + (n, n, center.shape[-1]))
    for i in range(n):
        shifted = {k: embedding(params + k * step * unit[i]) for k in offsets}
        first[..., i, :] = sum(c * shifted[k] for c, k in zip(first_weights, offsets)) / step
        second[..., i, i, :] = (sum(c * shifted[k] for c, k in zip(second_weights, offsets))
                                - 30.0 / 12.0 * center) / step ** 2
        for j in range(i + 1, n):
            total = 0.0
            for ci, ki in zip(first_weights, offsets):
                for cj, kj in zip(first_weights, offsets):
                    total = total + ci * cj * embedding(params + step * (ki * unit[i] + kj * unit[j]))
            second[..., i, j, :] = total / step ** 2
            second[..., j, i, :] = second[..., i, j, :]
    return SurfaceJet(center, first, second)


def _vector_partials(grid: PolarGrid, positions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = grid.n
    dim = positions.shape[-1]
    first = np.empty(grid.shape + (n, dim))
    second = np.empty(grid.shape + (n, n, dim))
    for c in range(dim):
        partials = grid.partials(positions[..., c])
        first[..., c] = partials
        second[..., c] = grid.second_partials(positions[..., c], partials)
    return first, second


def _vector_boundary_partials(grid: PolarGrid, positions: np.ndarray,
                              boundary: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = grid.n
    dim = positions.shape[-1]
    first = np.empty(grid.angular_shape + (n, dim))
    second = np.empty(grid.angular_shape + (n, n, dim))
    for c in range(dim):
        first[..., c] = grid.boundary_partials(positions[..., c], boundary[..., c])
        second[..., c] = grid.boundary_second_partials(positions[..., c], boundary[..., c])
    return first, second


def _patch_jets(patch: ParametricPatch, grid: PolarGrid):
    if patch.sampled:
        samples = patch.samples
        if samples.resolution != grid.resolution:
            raise ArgumentError("Sampled patch must be discretized at its own resolution",
                                {'samples': samples.resolution, 'requested': grid.resolution})
        first, second = _vector_partials(grid, samples.interior)
        b_first, b_second = _vector_boundary_partials(grid, samples.interior, samples.boundary)
        return (SurfaceJet(samples.interior, first, second), samples.interior_hint,
                SurfaceJet(samples.boundary, b_first, b_second), samples.boundary_hint)
    if patch.normal_center is None:
        raise ArgumentError("Patch needs a normal orientation center")
    if patch.analytic:
        interior = patch.jet(grid.params)
        boundary = patch.jet(grid.boundary_params)
    else:
        step = get_config().PATCH_FD_STEP * patch.boundary_parameter
        interior = _finite_difference_jet(patch.embedding, grid.params, step)
        boundary = _finite_difference_jet(patch.embedding, grid.boundary_params, step)
    return (interior, interior.points - patch.normal_center,
            boundary, boundary.points - patch.normal_center)


# node geometry

def _euclidean_normal(tangents: np.ndarray) -> np.ndarray:
    """Cofactor vector orthogonal to the n rows of tangents (..., n, n+1)"""
    dim = tangents.shape[-1]
    components = []
    for k in range(dim):
        minor = np.delete(tangents, k, axis=-1)
        components.append((-1.0) ** k * np.linalg.det(minor))
    normal = np.stack(components, axis=-1)
    return normal / np.linalg.norm(normal, axis=-1, keepdims=True)


def ambient_second_derivatives(space: SpaceForm, points: np.ndarray, first: np.ndarray,
                               second: np.ndarray) -> np.ndarray:
    """nabla-bar_{e_i} e_j = x_ij + C(x_i, x_j)"""
    correction = connection_term(space, points[..., None, None, :],
                                 first[..., :, None, :], first[..., None, :, :])
    return second + correction


def node_geometry(space: SpaceForm, jet: SurfaceJet, hint: np.ndarray, params: np.ndarray) -> NodeGeometry:
    """
    Induced metric, normal, second fundamental form, Christoffels, curvatures
    and Newton tensors at every node of a jet.

    Raises:
        DiscretizationError: at a node with det g <= 1e-12
    """
    points, first = jet.points, jet.first
    n = first.shape[-2]
    factor = conformal_factor(space, points)
    metric = factor[..., None, None] ** 2 * np.einsum('...ia,...ja->...ij', first, first)
    det = np.linalg.det(metric)
    if np.any(det <= METRIC_FLOOR):
        where = np.unravel_index(int(np.argmin(det)), det.shape)
        raise DiscretizationError(
            f"Degenerate induced metric at parameter {np.round(params[where], 12).tolist()}",
            {'det': float(det[where]), 'parameter': params[where].tolist()})
    inverse = np.linalg.inv(metric)

    flat_normal = _euclidean_normal(first)
    orientation = np.sign(np.einsum('...a,...a->...', flat_normal, hint))
    orientation[orientation == 0.0] = 1.0
    normal = (orientation / factor)[..., None] * flat_normal

    covariant = ambient_second_derivatives(space, points, first, jet.second)
    weight = factor[..., None, None] ** 2
    second_form = -weight * np.einsum('...ija,...a->...ij', covariant, normal)
    second_form = 0.5 * (second_form + np.swapaxes(second_form, -1, -2))
    lowered = factor[..., None, None, None] ** 2 * np.einsum('...ija,...la->...lij', covariant, first)
    christoffel = np.einsum('...kl,...lij->...kij', inverse, lowered)

    cholesky = np.linalg.cholesky(metric)
    inverse_cholesky = np.linalg.inv(cholesky)
    frame_shape = inverse_cholesky @ second_form @ np.swapaxes(inverse_cholesky, -1, -2)
    frame_shape = 0.5 * (frame_shape + np.swapaxes(frame_shape, -1, -2))
    curvatures = np.linalg.eigvalsh(frame_shape)
    sigma = symmetric_stack(curvatures, n + 2)
    newton = np.stack(newton_frame_stack(frame_shape, sigma[..., :n + 1]))
    return NodeGeometry(
        points=points,
        tangents=first,
        second_derivatives=jet.second,
        conformal=factor,
        metric=metric,
        inverse_metric=inverse,
        normal=normal,
        second_form=second_form,
        christoffel=christoffel,
        cholesky=cholesky,
        frame_shape=frame_shape,
        curvatures=curvatures,
        sigma=sigma,
        newton=newton,
        area_element=np.sqrt(det),
    )


def _boundary_trace(space: SpaceForm, grid: PolarGrid, geometry: NodeGeometry) -> BoundaryTrace:
    n = grid.n
    points = geometry.points
    inverse = geometry.inverse_metric
    conormal_parameter = inverse[..., 0, :] / np.sqrt(inverse[..., 0, 0])[..., None]
    conormal = np.einsum('...i,...ia->...a', conormal_parameter, geometry.tangents)
    support = support_normal(space, points)
    sin_t = inner(space, points, conormal, support)
    cos_t = -inner(space, points, geometry.normal, support)
    tangent = cos_t[..., None] * conormal + sin_t[..., None] * geometry.normal

    def gnorm(vector):
        return np.sqrt(np.abs(inner(space, points, vector, vector)))

    frame_residual = np.max(np.stack([
        gnorm(conormal - sin_t[..., None] * support - cos_t[..., None] * tangent),
        gnorm(geometry.normal + cos_t[..., None] * support - sin_t[..., None] * tangent),
        np.abs(inner(space, points, tangent, tangent) - 1.0),
        np.abs(inner(space, points, tangent, support)),
    ]), axis=0)

    angular_metric = geometry.metric[..., 1:, 1:]
    line_element = np.sqrt(np.linalg.det(angular_metric))
    h = geometry.second_form
    h_mu_mu = np.einsum('...i,...ij,...j->...', conormal_parameter, h, conormal_parameter)
    mixed = np.einsum('...ai,...i->...a', h[..., 1:, :], conormal_parameter)
    lengths = np.sqrt(np.einsum('...aa->...a', angular_metric))
    principal_residual = np.abs(mixed / lengths).max(axis=-1)

    covariant = ambient_second_derivatives(space, points, geometry.tangents, geometry.second_derivatives)
    boundary_form = -inner(space, points[..., None, None, :], covariant[..., 1:, 1:, :],
                           tangent[..., None, None, :])
    boundary_form = 0.5 * (boundary_form + np.swapaxes(boundary_form, -1, -2))
    angular_cholesky = np.linalg.cholesky(angular_metric)
    inverse_angular = np.linalg.inv(angular_cholesky)
    reduced = inverse_angular @ boundary_form @ np.swapaxes(inverse_angular, -1, -2)
    boundary_curvatures = np.linalg.eigvalsh(0.5 * (reduced + np.swapaxes(reduced, -1, -2)))
    boundary_sigma = symmetric_stack(boundary_curvatures, n - 1)

    in_frame = np.einsum('...ji,...j->...i', geometry.cholesky, conormal_parameter)
    newton_mu = np.stack([np.einsum('...i,...ij,...j->...', in_frame, geometry.newton[r], in_frame)
                          for r in range(n)], axis=-1)

    return BoundaryTrace(
        geometry=geometry,
        conormal_parameter=conormal_parameter,
        conormal=conormal,
        support_normal=support,
        support_tangent=tangent,
        sin_theta=sin_t,
        cos_theta=cos_t,
        line_element=line_element,
        line_weights=grid.angular_weights * line_element,
        h_mu_mu=h_mu_mu,
        principal_residual=principal_residual,
        boundary_second_form=boundary_form,
        boundary_sigma=boundary_sigma,
        newton_mu=newton_mu,
        frame_residual=frame_residual,
    )


def discretize(patch: ParametricPatch, space: SpaceForm, resolution: int) -> DiscreteImmersion:
    """
    Sample a patch on the polar grid and compute interior and boundary geometry.

    Raises:
        DiscretizationError: for resolution < 8 or a degenerate node
        ConstructionError: when the boundary ring leaves the support
    """
    if patch.n != space.n:
        raise ArgumentError(f"Patch dimension {patch.n} does not match the model dimension {space.n}")
    grid = polar_grid(patch.n, patch.boundary_parameter, resolution)
    interior_jet, interior_hint, boundary_jet, boundary_hint = _patch_jets(patch, grid)
    interior = node_geometry(space, interior_jet, interior_hint, grid.params)
    boundary_geometry = node_geometry(space, boundary_jet, boundary_hint, grid.boundary_params)

    if not patch.sampled:
        drift = float(np.abs(boundary_geometry.points[..., -1] - space.support_height).max())
        if drift > SUPPORT_TOLERANCE * max(1.0, patch.scale):
            raise ConstructionError("Boundary ring does not lie on the support",
                                    {'drift': drift, 'label': patch.label})
    boundary = _boundary_trace(space, grid, boundary_geometry)
    logger.debug(f"Discretized {patch.label} at resolution {resolution} "
                 f"({interior.area_element.size} nodes, {patch.derivative_source} derivatives)")
    return DiscreteImmersion(patch=patch, space=space, grid=grid, interior=interior, boundary=boundary)


@lru_cache(maxsize=32)
def build_surface(model: str, n: int, curvature: float, theta: float, resolution: int,
                  amplitude: float = 0.0, mode: int = 2) -> DiscreteImmersion:
    """Cached cap (or perturbed cap) at one resolution"""
    space = space_for(model, n)
    patch = cap_family(space, n, curvature, theta)
    if amplitude != 0.0:
        patch = perturbed_cap(patch, amplitude, mode)
    return discretize(patch, space, resolution)


# quadrature

def _interior_values(M: DiscreteImmersion, f: FieldLike) -> np.ndarray:
    if isinstance(f, SurfaceField):
        f.require(M.key)
        return f.interior
    values = np.asarray(f, dtype=float)
    if values.shape != M.grid.shape:
        raise ArgumentError("Field values do not match the interior node set",
                            {'field': list(values.shape), 'nodes': list(M.grid.shape)})
    return values


def _boundary_values(M: DiscreteImmersion, f: FieldLike) -> np.ndarray:
    if isinstance(f, SurfaceField):
        f.require(M.key)
        if f.boundary is None:
            return M.grid.boundary_value(f.interior)
        return f.boundary
    values = np.asarray(f, dtype=float)
    if values.shape != M.grid.angular_shape:
        raise ArgumentError("Field values do not match the boundary node set",
                            {'field': list(values.shape), 'nodes': list(M.grid.angular_shape)})
    return values


def integrate_M(M: DiscreteImmersion, f: FieldLike) -> float:
    """Integral of f dA"""
    return float(np.sum(M.area_weights * _interior_values(M, f)))


def integrate_boundary(M: DiscreteImmersion, f: FieldLike) -> float:
    """Integral of f ds over the boundary"""
    return float(np.sum(M.boundary.line_weights * _boundary_values(M, f)))


def area(M: DiscreteImmersion) -> float:
    return float(np.sum(M.area_weights))


def boundary_measure(M: DiscreteImmersion) -> float:
    return float(np.sum(M.boundary.line_weights))


def cap_area(space: SpaceForm, n: int, curvature: float, theta: float) -> float:
    """Closed-form (Euclidean) or one-dimensional-quadrature (horoball) cap area"""
    if space.is_hyperbolic:
        radius = 1.0 / (curvature + np.cos(theta))
        height = curvature * radius
        value, _ = integrate.quad(
            lambda s: radius ** n * np.sin(s) ** (n - 1) / (height + radius * np.cos(s)) ** n,
            0.0, theta, epsabs=1e-14, epsrel=1e-13)
        return sphere_measure(n) * value
    radius = 1.0 / curvature
    value, _ = integrate.quad(lambda s: np.sin(s) ** (n - 1), 0.0, theta, epsabs=1e-14, epsrel=1e-13)
    return sphere_measure(n) * radius ** n * value


def cap_boundary_measure(space: SpaceForm, n: int, curvature: float, theta: float) -> float:
    radius = 1.0 / (curvature + np.cos(theta)) if space.is_hyperbolic else 1.0 / curvature
    # the horosphere at height 1 carries the flat metric
    return sphere_measure(n) * (radius * np.sin(theta)) ** (n - 1)


# geometric checks

def frame_orthonormality_residual(M: DiscreteImmersion) -> float:
    """max |g(nu, nu) - 1| and |g(nu, e_i)| over interior and boundary nodes"""
    worst = 0.0
    for geometry in (M.interior, M.boundary.geometry):
        pts = geometry.points
        unit = np.abs(inner(M.space, pts, geometry.normal, geometry.normal) - 1.0).max()
        across = np.abs(inner(M.space, pts[..., None, :], geometry.normal[..., None, :],
                              geometry.tangents)).max()
        lengths = np.sqrt(np.einsum('...ii->...i', geometry.metric)).min()
        worst = max(worst, float(unit), float(across / max(lengths, 1e-300)))
    return worst


def umbilicity_spread(M: DiscreteImmersion) -> float:
    """max over nodes of max kappa - min kappa"""
    kappa = M.interior.curvatures
    return float((kappa[..., -1] - kappa[..., 0]).max())


def boundary_relation_residual(M: DiscreteImmersion) -> float:
    """h_ab against sin(theta) h-hat_ab - kappa_supp cos(theta) g_ab along the boundary"""
    trace = M.boundary
    geometry = trace.geometry
    h = geometry.second_form[..., 1:, 1:]
    expected = (trace.sin_theta[..., None, None] * trace.boundary_second_form
                - M.space.support_curvature * trace.cos_theta[..., None, None] * geometry.metric[..., 1:, 1:])
    scale = 1.0 + np.maximum(np.abs(h), np.abs(expected))
    return float((np.abs(h - expected) / scale).max())


def _sectional_curvature(space: SpaceForm, patch: ParametricPatch, u: np.ndarray, step: float) -> float:
    """Intrinsic curvature of the (u^0, u^1) plane from differenced metrics"""
    n = patch.n

    def metric(point):
        jet = patch.jet(point[None, :])
        factor = conformal_factor(space, jet.points)[0]
        return factor ** 2 * jet.first[0] @ jet.first[0].T

    unit = np.eye(n)
    g = metric(u)
    inverse = np.linalg.inv(g)
    d = np.array([(metric(u + step * unit[k]) - metric(u - step * unit[k])) / (2.0 * step)
                  for k in range(n)])
    dd = np.empty((n, n, n, n))
    for a in range(n):
        for b in range(n):
            if a == b:
                dd[a, a] = (metric(u + step * unit[a]) - 2.0 * g + metric(u - step * unit[a])) / step ** 2
            else:
                dd[a, b] = (metric(u + step * (unit[a] + unit[b])) - metric(u + step * (unit[a] - unit[b]))
                            - metric(u - step * (unit[a] - unit[b]))
                            + metric(u - step * (unit[a] + unit[b]))) / (4.0 * step ** 2)
    # d[k][i, j] = g_ij,k ; dd[a][b][i, j] = g_ij,ab
    lowered = 0.5 * (np.einsum('kmj->mjk', d) + np.einsum('jmk->mjk', d) - np.einsum('mjk->mjk', d))
    christoffel = np.einsum('pm,mjk->pjk', inverse, lowered)
    i, j, k, l = 0, 1, 0, 1
    value = 0.5 * (dd[j, k][i, l] + dd[i, l][j, k] - dd[j, l][i, k] - dd[i, k][j, l])
    value += np.einsum('pq,p,q->', g, christoffel[:, j, k], christoffel[:, i, l])
    value -= np.einsum('pq,p,q->', g, christoffel[:, j, l], christoffel[:, i, k])
    return float(value / (g[0, 0] * g[1, 1] - g[0, 1] ** 2))


def gauss_equation_residual(M: DiscreteImmersion, samples: int = 4) -> float:
    """
    Sectional curvature of the (s, first angle) plane computed intrinsically
    and through the Gauss equation K + det(h)/det(g), at mid-radius nodes.
    """
    patch = M.patch
    if not patch.analytic:
        raise PreconditionError("The Gauss spot check needs an analytic patch")
    grid = M.grid
    step = 1e-3 * grid.boundary_parameter
    radial = grid.resolution // 2
    flat = np.linspace(0, int(np.prod(grid.angular_shape)) - 1, samples).astype(int)
    worst = 0.0
    for index in flat:
        where = (radial,) + np.unravel_index(int(index), grid.angular_shape)
        u = grid.params[where]
        intrinsic = _sectional_curvature(M.space, patch, u, step)
        h = M.interior.second_form[where][:2, :2]
        g = M.interior.metric[where][:2, :2]
        extrinsic = M.space.curvature + np.linalg.det(h) / np.linalg.det(g)
        worst = max(worst, abs(intrinsic - extrinsic) / (1.0 + max(abs(intrinsic), abs(extrinsic))))
    return float(worst)


def wetted_area(M: DiscreteImmersion) -> float:
    """Support area enclosed by the boundary ring (horizontal chart projection)"""
    grid = M.grid
    n = M.n
    horizontal = M.boundary.points[..., :-1]
    columns = [horizontal]
    for a in range(n - 1):
        derivative = np.stack([grid.angular_derivative(horizontal[..., c], a, offset=0)
                               for c in range(n)], axis=-1)
        columns.append(derivative)
    determinant = np.linalg.det(np.stack(columns, axis=-2))
    return float(abs(np.sum(grid.angular_weights * determinant)) / n)


def enclosed_volume(M: DiscreteImmersion) -> float:
    """Volume between M and the support"""
    n = M.n
    geometry = M.interior
    if M.space.is_hyperbolic:
        # div(x_{n+1} E_{n+1}) = -n
        vertical = geometry.conformal * geometry.normal[..., -1]
        return -integrate_M(M, vertical) / n + wetted_area(M) / n
    support = np.einsum('...a,...a->...', geometry.points, geometry.normal)
    return integrate_M(M, support) / (n + 1)


def immersion_summary(M: DiscreteImmersion) -> dict:
    return {
        'area': area(M),
        'boundary_measure': boundary_measure(M),
        'frame_residual': float(M.boundary.frame_residual.max()),
        'principal_residual': float(M.boundary.principal_residual.max()),
        'theta_spread': float(np.ptp(M.boundary.theta)),
        'umbilicity_spread': umbilicity_spread(M),
    }
