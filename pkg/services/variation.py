"""
Variations of capillary hypersurfaces: variation fields, geodesic flows
with an independently integrated evolution ledger, the capillary
functionals A_r, W_r, Q_{r+1}, E_{r+1}, V and finite-difference checks of
the first-variation formula and the wetting rate.

Nodes follow the full field Y = f nu + T, so every ledger quantity is a
function of the fixed grid parameters.
"""

from utils.logger import get_logger
from math import comb
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from config import get_config, tolerance
from models.fields import AdmissibleField, SurfaceField, VariationField
from models.reports import FlowResult, FunctionalLedger, VerificationReport
from models.surface import DiscreteImmersion, NodeGeometry
from services.ambient import conformal_field, connection_term, geodesic, inner
from services.immersion import (
    discretize, enclosed_volume, integrate_M, integrate_boundary, sampled_patch, wetted_area,
)
from services.operators import (
    L_r, hessian_surface, normal_derivative, parameter_gradient, robin_q, surface_field,
)
from utils.errors import (
    ArgumentError, CapillaryError, FlowBreakdownError, PreconditionError,
)

logger = get_logger(__name__)

FLOW_NAMES = ('scale', 'normal-unit', 'from-phi')

FlowRule = Callable[[DiscreteImmersion], VariationField]


# variation fields

def _tangent_part(M: DiscreteImmersion, geometry: NodeGeometry, vector: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(g-bar(Y, nu), Y - g-bar(Y, nu) nu)"""
    speed = inner(M.space, geometry.points, vector, geometry.normal)
    return speed, vector - speed[..., None] * geometry.normal


def _cotangent(M: DiscreteImmersion) -> np.ndarray:
    trace = M.boundary
    return trace.cos_theta / trace.sin_theta


def compatibility_residual(M: DiscreteImmersion, speed: np.ndarray, boundary_tangential: np.ndarray) -> float:
    """sup |g-bar(T, mu) - cot(theta) f| on the ring"""
    trace = M.boundary
    along = inner(M.space, trace.points, boundary_tangential, trace.conormal)
    scale = max(float(np.abs(speed).max()), 1.0)
    return float(np.abs(along - _cotangent(M) * speed).max() / scale)


def _from_vector(M: DiscreteImmersion, interior: np.ndarray, boundary: np.ndarray, label: str) -> VariationField:
    speed, tangential = _tangent_part(M, M.interior, interior)
    boundary_speed, boundary_tangential = _tangent_part(M, M.boundary.geometry, boundary)
    return VariationField(
        normal_speed=surface_field(M, speed, boundary_speed, name='f'),
        tangential=tangential,
        boundary_tangential=boundary_tangential,
        compatibility_residual=compatibility_residual(M, boundary_speed, boundary_tangential),
        label=label,
    )


def scaling_field(M: DiscreteImmersion) -> VariationField:
    """Euclidean: dilation x about the origin. Horoball: X_{n+1} = x - E_{n+1}, tangent to the horosphere."""
    if M.space.is_hyperbolic:
        interior = conformal_field(M.space, M.interior.points)
        boundary = conformal_field(M.space, M.boundary.points)
    else:
        interior = np.array(M.interior.points)
        boundary = np.array(M.boundary.points)
    return _from_vector(M, interior, boundary, 'scale')


def _conormal_extension(M: DiscreteImmersion) -> np.ndarray:
    """Unit chart field along grad s at interior nodes"""
    geometry = M.interior
    inverse = geometry.inverse_metric
    direction = inverse[..., 0, :] / np.sqrt(inverse[..., 0, 0])[..., None]
    return np.einsum('...i,...ia->...a', direction, geometry.tangents)


def _radial_cutoff(M: DiscreteImmersion) -> np.ndarray:
    """(s/s_b)^p, one on the ring and flat at the pole"""
    ratio = M.grid.params[..., 0] / M.grid.boundary_parameter
    return ratio ** get_config().TANGENT_CUTOFF_POWER


def _cutoff_tangent(M: DiscreteImmersion, boundary_coefficient: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """c mu on the ring, extended by c (s/s_b)^p grad s / |grad s|"""
    interior = (boundary_coefficient[None, ...] * _radial_cutoff(M))[..., None] * _conormal_extension(M)
    boundary = boundary_coefficient[..., None] * M.boundary.conormal
    return interior, boundary


def normal_unit_field(M: DiscreteImmersion) -> VariationField:
    """f = 1 with T = cot(theta) mu near the boundary"""
    cot = _cotangent(M)
    tangential, boundary_tangential = _cutoff_tangent(M, cot)
    speed = surface_field(M, np.ones(M.grid.shape), np.ones(M.grid.angular_shape), 'analytic', 'f')
    return VariationField(
        normal_speed=speed,
        tangential=tangential,
        boundary_tangential=boundary_tangential,
        compatibility_residual=compatibility_residual(M, speed.boundary, boundary_tangential),
        label='normal-unit',
    )


def admissible_variation_from(phi: AdmissibleField, M: DiscreteImmersion) -> VariationField:
    """
    f = phi, T = cot(theta) phi mu extended into M by the radial cutoff.

    Raises:
        PreconditionError: if phi is not admissible
    """
    if not phi.admissible:
        raise PreconditionError("Field is not admissible", phi.residuals())
    field = phi.field
    field.require(M.key)
    boundary = field.boundary if field.boundary is not None else M.grid.boundary_value(field.interior)
    field = SurfaceField(field.interior, boundary, field.grid_key, field.provenance, 'f')
    tangential, boundary_tangential = _cutoff_tangent(M, _cotangent(M) * boundary)
    trace = M.boundary
    angle = trace.sin_theta * (-normal_derivative(M, field) + robin_q(M).q * boundary)
    return VariationField(
        normal_speed=field,
        tangential=tangential,
        boundary_tangential=boundary_tangential,
        compatibility_residual=compatibility_residual(M, boundary, boundary_tangential),
        label='from-phi',
        metadata={'angle_residual': float(np.abs(angle).max()), 'volume_rate': integrate_M(M, field)},
    )


def _parameter_components(M: DiscreteImmersion, geometry: NodeGeometry, vector: np.ndarray) -> np.ndarray:
    """T^i = g^{ij} g-bar(T, x_j)"""
    lowered = inner(M.space, geometry.points[..., None, :], vector[..., None, :], geometry.tangents)
    return np.einsum('...ij,...j->...i', geometry.inverse_metric, lowered)


def transported_rule(field: VariationField, M0: DiscreteImmersion) -> FlowRule:
    """Keep the nodal normal speed and the parameter components of T along the flow"""
    interior = _parameter_components(M0, M0.interior, field.tangential)
    boundary = _parameter_components(M0, M0.boundary.geometry, field.boundary_tangential)
    speed = field.normal_speed

    def rule(M: DiscreteImmersion) -> VariationField:
        if M is M0:
            return field
        tangential = np.einsum('...i,...ia->...a', interior, M.interior.tangents)
        boundary_tangential = np.einsum('...i,...ia->...a', boundary, M.boundary.geometry.tangents)
        moved = SurfaceField(speed.interior, speed.boundary, M.key, speed.provenance, speed.name)
        return VariationField(moved, tangential, boundary_tangential,
                              compatibility_residual(M, moved.boundary, boundary_tangential),
                              field.label, field.metadata)

    return rule


def flow_rule(name: str, M0: Optional[DiscreteImmersion] = None,
              phi: Optional[AdmissibleField] = None) -> FlowRule:
    """Named flows: 'scale', 'normal-unit', 'from-phi' (needs M0 and phi)"""
    if name == 'scale':
        return scaling_field
    if name == 'normal-unit':
        return normal_unit_field
    if name == 'from-phi':
        if M0 is None or phi is None:
            raise ArgumentError("flow:from-phi needs the initial surface and an admissible field")
        return transported_rule(admissible_variation_from(phi, M0), M0)
    raise ArgumentError(f"Unknown flow {name}; expected one of {', '.join(FLOW_NAMES)}")


def variation_vector(field: VariationField, M: DiscreteImmersion) -> Tuple[np.ndarray, np.ndarray]:
    """Chart components of Y = f nu + T at interior and boundary nodes"""
    speed = field.normal_speed
    interior = speed.interior[..., None] * M.interior.normal + field.tangential
    boundary = speed.boundary[..., None] * M.boundary.normal + field.boundary_tangential
    return interior, boundary


# evolution ledger

LEDGER_KEYS = ('sigma', 'H', 'dA', 'g', 'nu', 'h')


def _evolution_rates(M: DiscreteImmersion, field: VariationField) -> Dict[str, np.ndarray]:
    """Time derivatives at fixed parameters from the evolution equations"""
    n = M.n
    K = M.space.curvature
    geometry = M.interior
    grid = M.grid
    f = field.normal_speed.interior
    T = _parameter_components(M, geometry, field.tangential)
    christoffel = geometry.christoffel
    sigma = geometry.sigma

    def along_T(values):
        return np.einsum('...i,...i->...', T, grid.partials(values))

    sigma_rates = []
    for r in range(1, n + 1):
        rate = (-L_r(M, f, r - 1).interior
                - (sigma[..., 1] * sigma[..., r] - (r + 1) * sigma[..., r + 1]) * f
                - K * (n - r + 1) * sigma[..., r - 1] * f
                + along_T(sigma[..., r]))
        sigma_rates.append(rate)

    shape = geometry.shape_operator
    hessian = hessian_surface(M, f)
    laplacian = np.einsum('...ij,...ij->...', geometry.inverse_metric, hessian)
    norm_h = np.einsum('...ij,...ji->...', shape, shape)
    mean_rate = -laplacian - (n * K + norm_h) * f + along_T(sigma[..., 1])

    d_T = np.stack([grid.partials(T[..., i]) for i in range(n)], axis=-1)  # [..., k, i] = d_k T^i
    divergence = np.einsum('...ii->...', d_T) + np.einsum('...iik,...k->...', christoffel, T)
    area_rate = (f * sigma[..., 1] + divergence) * geometry.area_element

    lowered = np.einsum('...jk,...k->...j', geometry.metric, T)
    d_lowered = np.stack([grid.partials(lowered[..., j]) for j in range(n)], axis=-1)  # [..., i, j] = d_i T_j
    covariant = d_lowered - np.einsum('...kij,...k->...ij', christoffel, lowered)
    metric_rate = 2.0 * f[..., None, None] * geometry.second_form + covariant + np.swapaxes(covariant, -1, -2)

    gradient = parameter_gradient(M, f)
    upper = (-np.einsum('...ij,...j->...i', geometry.inverse_metric, gradient)
             + np.einsum('...ij,...jk,...k->...i', geometry.inverse_metric, geometry.second_form, T))
    covariant_normal = np.einsum('...i,...ia->...a', upper, geometry.tangents)
    velocity, _ = variation_vector(field, M)
    normal_rate = covariant_normal - connection_term(M.space, geometry.points, velocity, geometry.normal)

    # tangential part of the shape operator rate as a Lie derivative at fixed parameters
    d_shape = np.stack([np.stack([grid.partials(shape[..., i, j]) for j in range(n)], axis=-2)
                        for i in range(n)], axis=-3)
    lie = (np.einsum('...k,...ijk->...ij', T, d_shape)
           - np.einsum('...kj,...ki->...ij', shape, d_T)
           + np.einsum('...ik,...jk->...ij', shape, d_T))
    shape_rate = (-np.einsum('...ik,...kj->...ij', geometry.inverse_metric, hessian)
                  - f[..., None, None] * (shape @ shape + K * np.eye(n)) + lie)
    return {
        'sigma': np.stack(sigma_rates, axis=-1),
        'H': mean_rate,
        'dA': area_rate,
        'g': metric_rate,
        'nu': normal_rate,
        'h': shape_rate,
    }


def _ledger_state(M: DiscreteImmersion) -> Dict[str, np.ndarray]:
    geometry = M.interior
    return {
        'sigma': geometry.sigma[..., 1:M.n + 1],
        'H': geometry.sigma[..., 1],
        'dA': geometry.area_element,
        'g': geometry.metric,
        'nu': geometry.normal,
        'h': geometry.shape_operator,
    }


def _resampled(M: DiscreteImmersion, interior: np.ndarray, boundary: np.ndarray, step: int) -> DiscreteImmersion:
    try:
        return discretize(sampled_patch(M, interior, boundary), M.space, M.resolution)
    except CapillaryError as exc:
        raise FlowBreakdownError(f"Immersion degenerated at step {step}: {exc}", step, exc.details) from exc


def _geodesic_step(M: DiscreteImmersion, Y: VariationField, dt: float,
                   step: int) -> Tuple[DiscreteImmersion, VariationField]:
    """exp(dt Y) at every node, with the arrival velocity as a field on the new surface"""
    interior, boundary = variation_vector(Y, M)
    points, velocity = geodesic(M.space, M.interior.points, dt * interior)
    boundary_points, boundary_velocity = geodesic(M.space, M.boundary.points, dt * boundary)
    moved = _resampled(M, points, boundary_points, step)
    arrival = _from_vector(moved, velocity / dt, boundary_velocity / dt, Y.label)
    return moved, arrival


def evolve(M: DiscreteImmersion, field: Union[VariationField, FlowRule], dt: Optional[float] = None,
           steps: Optional[int] = None) -> FlowResult:
    """
    Advance nodes by ambient geodesic steps exp(dt Y), recompute geometry from
    positions, and integrate the evolution equations for sigma_r, H, dA, g,
    nu and h^i_j with the trapezoidal rule along each geodesic segment as an
    independent ledger.

    Args:
        M: initial immersion
        field: a variation field on M (transported along the flow) or a rule
            M_k -> field
        dt: time step
        steps: number of steps

    Returns:
        FlowResult with the surfaces, boundary speeds and per-step ledger deviations

    Raises:
        PreconditionError: if dt max|f| max|kappa| exceeds the CFL limit
        FlowBreakdownError: if an immersion degenerates
    """
    config = get_config()
    dt = config.FLOW_DT if dt is None else float(dt)
    steps = config.FLOW_STEPS if steps is None else int(steps)
    if dt <= 0.0 or steps < 0:
        raise ArgumentError("Flows need dt > 0 and steps >= 0", {'dt': dt, 'steps': steps})

    current = _resampled(M, M.interior.points, M.boundary.points, 0)
    if callable(field):
        rule = field
    else:
        field.normal_speed.require(M.key)
        rule = _rekeyed_rule(field, current)

    Y = rule(current)
    bound = dt * Y.normal_speed.sup() * float(np.abs(current.interior.curvatures).max())
    if bound > config.CFL_LIMIT:
        raise PreconditionError("Time step violates the CFL bound",
                                {'dt': dt, 'bound': bound, 'limit': config.CFL_LIMIT})

    surfaces = [current]
    speeds = [np.array(Y.normal_speed.boundary)]
    ledger = _ledger_state(current)
    deviations: Dict[str, List[float]] = {key: [] for key in LEDGER_KEYS}
    drift = [float(np.abs(current.boundary.points[..., -1] - M.space.support_height).max())]

    for step in range(1, steps + 1):
        start_rates = _evolution_rates(current, Y)
        moved, arrival = _geodesic_step(current, Y, dt, step)
        end_rates = _evolution_rates(moved, arrival)
        ledger = {key: ledger[key] + 0.5 * dt * (start_rates[key] + end_rates[key]) for key in ledger}
        recomputed = _ledger_state(moved)
        for key in LEDGER_KEYS:
            deviations[key].append(float(np.abs(recomputed[key] - ledger[key]).max()))
        drift.append(float(np.abs(moved.boundary.points[..., -1] - M.space.support_height).max()))

        Y = rule(moved)
        surfaces.append(moved)
        speeds.append(np.array(Y.normal_speed.boundary))
        current = moved
        logger.debug(f"Flow step {step}: sigma deviation {deviations['sigma'][-1]:.3e}, "
                     f"boundary drift {drift[-1]:.3e}")

    return FlowResult(surfaces=surfaces, boundary_speeds=speeds, dt=dt, deviations=deviations,
                      boundary_drift=drift)


def _rekeyed_rule(field: VariationField, start: DiscreteImmersion) -> FlowRule:
    """Transport a field given on M to the resampled copy of M that starts the flow"""
    speed = field.normal_speed
    moved = VariationField(SurfaceField(speed.interior, speed.boundary, start.key, speed.provenance, speed.name),
                           field.tangential, field.boundary_tangential, field.compatibility_residual,
                           field.label, field.metadata)
    return transported_rule(moved, start)


def ledger_report(M: DiscreteImmersion, field: Union[VariationField, FlowRule], dt: Optional[float] = None,
                  steps: Optional[int] = None, overrides: Optional[dict] = None) -> VerificationReport:
    """
    Ledger deviation over the same time span at dt and dt / 2; the step
    counts play the role of resolutions in the order estimate.
    """
    config = get_config()
    dt = config.FLOW_DT if dt is None else float(dt)
    steps = config.FLOW_STEPS if steps is None else int(steps)
    report = VerificationReport.for_surface('evolution_ledger', M, None, tolerance('flow_ledger', overrides),
                                            normalizer='absolute')
    drift = 0.0
    for factor in (1, 2):
        flow = evolve(M, field, dt / factor, steps * factor)
        worst = flow.max_deviation()
        report.add_level(steps * factor, max(worst.values(), default=0.0), worst)
        report.values[f"boundary_drift_{steps * factor}"] = max(flow.boundary_drift)
        drift = max(drift, max(flow.boundary_drift))
    report.values['duration'] = dt * steps
    report.judge(config.MIN_ORDER, config.ROUNDOFF_FLOOR, slack=config.FLOW_ORDER_SLACK,
                 roundoff=VerificationReport.roundoff_level(config.ROUNDOFF_FLOOR, M.resolution))
    if drift > config.TOLERANCES['support']:
        report.warnings.append("boundary nodes drift off the support along geodesic steps")
    return report


# capillary functionals

def family_angle(M: DiscreteImmersion) -> float:
    """Contact angle the family is built with, else the measured mean"""
    return float(M.patch.metadata.get('theta', M.theta))


def _boundary_mean(M: DiscreteImmersion, k: int) -> np.ndarray:
    """Normalized k-th mean curvature of the boundary inside the support"""
    return M.boundary.boundary_sigma[..., k] / comb(M.n - 1, k)


def capillary_functionals(M: DiscreteImmersion, theta: float, W0: float, V: float) -> Dict[str, List[float]]:
    """
    A_r, W_l, Q_{r+1} and E_k of one surface, given the swept support area
    W_0 and the swept volume V of its family.

    Returns:
        dict with lists 'A' (r = 0..n), 'W' (l = 0..n-1), 'Q' (Q_1..Q_n) and 'E' (E_0..E_n)
    """
    n = M.n
    K = M.space.curvature
    kappa = M.space.support_curvature
    cos, sin = np.cos(theta), np.sin(theta)

    A = [integrate_M(M, M.interior.sigma[..., r]) for r in range(n + 1)]
    W = [float(W0)]
    for r in range(1, n):
        value = integrate_boundary(M, _boundary_mean(M, r - 1)) / n
        if r >= 2:
            value += (r - 1) / (n - r + 2) * M.space.tau * W[r - 2]
        W.append(value)

    Q = [A[0] - cos * W[0]]
    for r in range(1, n):
        total = A[r] / comb(n, r) - cos * sin ** r * W[r]
        for l in range(r):
            # cos^{r-1} tan^l written so that theta = pi/2 stays finite
            angular = cos ** (r - 1 - l) * sin ** l
            bracket = (n - r) * cos ** 2 + (r - l)
            total -= ((-1) ** (r + l) / (n - l)) * kappa ** (r - l) * comb(r, l) * bracket * angular * W[l]
        Q.append(total)

    E = [(n + 1) * float(V), Q[0]]
    for r in range(1, n):
        E.append(Q[r] + r * K / (n + 2 - r) * E[r - 1])
    return {'A': A, 'W': W, 'Q': Q, 'E': E}


def sweep_rate(M: DiscreteImmersion, boundary_speed: np.ndarray, k: int = 0) -> float:
    """(1 / sin theta) C(n, k)^{-1} int sigma_k(boundary) f ds"""
    trace = M.boundary
    weight = trace.boundary_sigma[..., k] * boundary_speed / trace.sin_theta
    return integrate_boundary(M, weight) / comb(M.n, k)


def functional_ledger(flow: FlowResult, theta: Optional[float] = None) -> FunctionalLedger:
    """
    Capillary functionals along a flow. W_0 is the time integral of the
    boundary sweep rate; the wetted-area difference is kept alongside as a
    cross-check.
    """
    first = flow.surfaces[0]
    theta = family_angle(first) if theta is None else float(theta)
    base_wetted = wetted_area(first)
    base_volume = enclosed_volume(first)
    ledger = FunctionalLedger()
    swept = 0.0
    previous_rate = None
    for k, (M, speed) in enumerate(zip(flow.surfaces, flow.boundary_speeds)):
        rate = sweep_rate(M, speed)
        if previous_rate is not None:
            swept += 0.5 * flow.dt * (previous_rate + rate)
        previous_rate = rate
        volume = enclosed_volume(M) - base_volume
        values = capillary_functionals(M, theta, swept, volume)
        ledger.times.append(k * flow.dt)
        ledger.curvature_integrals.append(values['A'])
        ledger.wetting.append(values['W'])
        ledger.quermass.append(values['Q'])
        ledger.energies.append(values['E'])
        ledger.volume.append(volume)
        ledger.wetted_sweep.append(wetted_area(M) - base_wetted)
    ledger.consistency = max(abs(W[0] - sweep) for W, sweep in zip(ledger.wetting, ledger.wetted_sweep))
    return ledger


# first variation

def linear_family(M: DiscreteImmersion, field: VariationField, t: float) -> DiscreteImmersion:
    """Nodes moved to x + t Y in the chart"""
    interior, boundary = variation_vector(field, M)
    return _resampled(M, M.interior.points + t * interior, M.boundary.points + t * boundary, 0)


def _family_functionals(M: DiscreteImmersion, field: VariationField, t: float, theta: float,
                        base: DiscreteImmersion) -> Tuple[Dict[str, List[float]], float]:
    moved = linear_family(M, field, t)
    W0 = wetted_area(moved) - wetted_area(base)
    V = enclosed_volume(moved) - enclosed_volume(base)
    values = capillary_functionals(moved, theta, W0, V)
    values['V'] = [V]
    return values, moved.theta


def _derivatives(M: DiscreteImmersion, field: VariationField, theta: float,
                 steps: List[float]) -> Tuple[List[Dict[str, np.ndarray]], float]:
    """Central difference quotients of every functional for each step, and d theta / dt"""
    base = linear_family(M, field, 0.0)
    quotients = []
    theta_rate = 0.0
    for h in steps:
        plus, theta_plus = _family_functionals(M, field, h, theta, base)
        minus, theta_minus = _family_functionals(M, field, -h, theta, base)
        quotients.append({key: (np.asarray(plus[key]) - np.asarray(minus[key])) / (2.0 * h) for key in plus})
        theta_rate = (theta_plus - theta_minus) / (2.0 * h)
    return quotients, theta_rate


def _richardson(coarse: np.ndarray, fine: np.ndarray) -> np.ndarray:
    return (4.0 * fine - coarse) / 3.0


def _relative(value: float, expected: float) -> float:
    return abs(value - expected) / max(abs(expected), 1.0)


def _resolve_field(M: DiscreteImmersion, field: Union[VariationField, FlowRule]) -> VariationField:
    Y = field(M) if callable(field) else field
    Y.normal_speed.require(M.key)
    return Y


def first_variation_check(M: DiscreteImmersion, field: Union[VariationField, FlowRule], r: int,
                          step: Optional[float] = None, overrides: Optional[dict] = None) -> VerificationReport:
    """
    d/dt E_{r+1} at t = 0 along x + tY against (n - r) int H_{r+1} f dA.

    The derivative is a Richardson-extrapolated central difference over
    steps h and h / 2. The same sweep checks dQ_{r+1}/dt against
    (n - r) int H_{r+1} f - rK int H_{r-1} f and dV/dt against int f.
    """
    n = M.n
    if not 0 <= r <= n - 1:
        raise ArgumentError(f"Order r={r} outside 0..{n - 1}")
    Y = _resolve_field(M, field)
    theta = family_angle(M)
    h = get_config().VARIATION_STEP if step is None else float(step)
    quotients, theta_rate = _derivatives(M, Y, theta, [h, h / 2.0])
    derivative = {key: _richardson(quotients[0][key], quotients[1][key]) for key in quotients[0]}

    f = Y.normal_speed.interior
    geometry = M.interior
    expected_energy = (n - r) * integrate_M(M, geometry.normalized(r + 1) * f)
    expected_quermass = expected_energy
    if r >= 1:
        expected_quermass -= r * M.space.curvature * integrate_M(M, geometry.normalized(r - 1) * f)
    expected_volume = integrate_M(M, f)

    energy = float(derivative['E'][r + 1])
    quermass = float(derivative['Q'][r])
    volume = float(derivative['V'][0])
    components = {
        'energy': _relative(energy, expected_energy),
        'quermass': _relative(quermass, expected_quermass),
        'volume': _relative(volume, expected_volume),
    }
    report = VerificationReport.for_surface('first_variation', M, r, tolerance('first_variation', overrides),
                                            normalizer='max(|(n-r) int H_{r+1} f|, 1)')
    report.add_level(M.resolution, max(components['energy'], components['quermass']), components)
    step_errors = [abs(float(q['E'][r + 1]) - expected_energy) for q in quotients]
    report.values.update({
        'dE_dt': energy,
        'expected': expected_energy,
        'dQ_dt': quermass,
        'expected_dQ': expected_quermass,
        'dV_dt': volume,
        'int_f': expected_volume,
        'steps': [h, h / 2.0],
        'difference_quotients': [float(q['E'][r + 1]) for q in quotients],
        'theta_rate': theta_rate,
        'compatibility_residual': Y.compatibility_residual,
        'field': Y.label,
    })
    if min(step_errors) > get_config().RESIDUAL_FLOOR:
        report.values['step_order'] = float(np.log2(step_errors[0] / step_errors[1]))
    report.judge(get_config().MIN_ORDER, get_config().ROUNDOFF_FLOOR)
    if abs(theta_rate) > tolerance('finite_difference', overrides):
        report.warnings.append(f"family changes the contact angle at first order (d theta/dt = {theta_rate:.3e})")
    logger.info(f"{report.name}: dE/dt {energy:.10g} vs {expected_energy:.10g}, {report.verdict}")
    return report


def wetting_rate_check(M: DiscreteImmersion, field: Union[VariationField, FlowRule], r: int,
                       step: Optional[float] = None, overrides: Optional[dict] = None) -> VerificationReport:
    """dW_r/dt at t = 0 against (1 / sin theta) C(n, r)^{-1} int sigma_r(boundary) f ds"""
    n = M.n
    if not 0 <= r <= n - 1:
        raise ArgumentError(f"Order r={r} outside 0..{n - 1}")
    Y = _resolve_field(M, field)
    h = get_config().VARIATION_STEP if step is None else float(step)
    quotients, _ = _derivatives(M, Y, family_angle(M), [h, h / 2.0])
    rate = float(_richardson(quotients[0]['W'][r], quotients[1]['W'][r]))
    expected = sweep_rate(M, Y.normal_speed.boundary, r)
    report = VerificationReport.for_surface('wetting_rate', M, r, tolerance('first_variation', overrides),
                                            normalizer='max(|rate|, 1)')
    report.add_level(M.resolution, _relative(rate, expected))
    report.values.update({'dW_dt': rate, 'expected': expected, 'field': Y.label})
    report.judge(get_config().MIN_ORDER, get_config().ROUNDOFF_FLOOR)
    return report
