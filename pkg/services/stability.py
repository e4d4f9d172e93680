"""
Second variation on the admissible space: quadratic forms, the test
functions built from the Minkowski formulas, a Galerkin estimate of the
lowest eigenvalue, the cap reduction law and the rigidity gap quantities.
"""

from math import comb
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.special import eval_legendre

from config import get_config, tolerance
from models.fields import AdmissibleField, RobinData, SurfaceField
from models.reports import VERDICT_FAIL, QuadraticFormReport, VerificationReport
from models.surface import DiscreteImmersion
from services.identities import sigma_spread
from services.immersion import area, integrate_M
from services.operators import (
    L_r, conormal_component, geometric_field, jacobi_J_r, newton_h2_trace, normal_derivative,
    pointwise_residual, robin_defect, robin_q, surface_field,
)
from services.polar_grid import direction_jet
from services.symfun import garding_stack, is_positive_definite
from utils.errors import (
    ArgumentError, BasisError, DegenerateNormalizerError, PreconditionError,
)
from utils.logger import get_logger

logger = get_logger(__name__)

U_THRESHOLD = 1e-6
MASS_FLOOR = 1e-14


def _check_order(M: DiscreteImmersion, r: int) -> None:
    if not 0 <= r <= M.n - 1:
        raise ArgumentError(f"Order r={r} outside 0..{M.n - 1}")


def _judged(identity: str, M: DiscreteImmersion, r: int, tol: float, components: Dict[str, float],
            values: Dict[str, float], normalizer: str,
            limits: Optional[Dict[str, float]] = None) -> VerificationReport:
    """
    The residual is the worst component held to `tol`; components named in
    `limits` are recorded but judged against their own limit instead.
    """
    limits = limits or {}
    report = VerificationReport.for_surface(identity, M, r, tol, normalizer=normalizer)
    judged = [value for key, value in components.items() if key not in limits]
    report.add_level(M.resolution, max(judged, default=0.0), components)
    report.values.update(values)
    report.judge(get_config().MIN_ORDER, get_config().ROUNDOFF_FLOOR)
    exceeded = sorted(key for key, limit in limits.items() if components[key] > limit)
    if exceeded:
        report.verdict = VERDICT_FAIL
        report.warnings.append(f"over limit: {', '.join(exceeded)}")
    if limits:
        report.values['limits'] = dict(limits)
    return report


# admissible fields

def admissible_field(M: DiscreteImmersion, f: SurfaceField, robin: Optional[RobinData] = None,
                     overrides: Optional[dict] = None, **metadata) -> AdmissibleField:
    """Measure the mean defect (int f dA / area) and the Robin defect of f"""
    robin = robin or robin_q(M)
    return AdmissibleField(
        field=f,
        mean_residual=integrate_M(M, f) / area(M),
        robin_residual=float(np.abs(robin_defect(M, f, robin)).max()),
        scale=f.sup(),
        tolerance=tolerance('admissibility', overrides),
        metadata=metadata,
    )


def quadratic_form(M: DiscreteImmersion, phi: AdmissibleField, r: int,
                   check: bool = True) -> QuadraticFormReport:
    """
    Q_r(phi) = -int phi J_r phi dA; Q_r >= 0 for every admissible phi means stable.

    Raises:
        PreconditionError: if phi is not admissible within its tolerance
    """
    _check_order(M, r)
    if check and not phi.admissible:
        raise PreconditionError("Field is not admissible", phi.residuals())
    values = phi.field.interior
    integrand = -values * jacobi_J_r(M, phi.field, r).interior
    return QuadraticFormReport(
        value=integrate_M(M, integrand),
        r=r,
        integrand=integrand,
        admissibility=phi.residuals(),
        metadata={'scenario': M.patch.label, 'resolution': M.resolution},
    )


def energy_second_variation(Q_r: float, n: int, r: int) -> float:
    """E''_{r+1} = (n - r) / C(n, r+1) Q_r"""
    if not 0 <= r <= n - 1:
        raise ArgumentError(f"Order r={r} outside 0..{n - 1}")
    return (n - r) / comb(n, r + 1) * Q_r


# test functions

def _constant_mean(M: DiscreteImmersion, k: int, overrides: Optional[dict] = None) -> float:
    spread = sigma_spread(M, k)
    limit = tolerance('test_function', overrides)
    if spread > limit:
        raise PreconditionError(f"H_{k} is not constant on M", {'spread': spread, 'limit': limit})
    return float(np.mean(M.interior.normalized(k)))


def _combine(M: DiscreteImmersion, weight: float, first: SurfaceField, curvature: float,
             second: SurfaceField, name: str) -> SurfaceField:
    interior = weight * first.interior - curvature * second.interior
    boundary = weight * first.boundary - curvature * second.boundary
    return surface_field(M, interior, boundary, provenance='analytic', name=name)


def _with_scale(phi: AdmissibleField, natural: float) -> AdmissibleField:
    return AdmissibleField(phi.field, phi.mean_residual, phi.robin_residual,
                           max(natural, phi.scale), phi.tolerance, phi.metadata)


def test_function_euclidean(M: DiscreteImmersion, r: int, overrides: Optional[dict] = None) -> AdmissibleField:
    """
    phi = alpha omega - H_{r+1} <x, nu> with alpha = int omega H_r / int omega.

    Raises:
        PreconditionError: outside the Euclidean model or when H_{r+1} is not constant
    """
    if M.space.is_hyperbolic:
        raise PreconditionError("Test function needs the Euclidean model")
    _check_order(M, r)
    curvature = _constant_mean(M, r + 1, overrides)
    omega = geometric_field(M, 'omega')
    support = geometric_field(M, 'support_function')
    alpha = integrate_M(M, omega.interior * M.interior.normalized(r)) / integrate_M(M, omega)
    phi = admissible_field(M, _combine(M, alpha, omega, curvature, support, 'phi'),
                           overrides=overrides, weight=alpha, curvature=curvature)
    return _with_scale(phi, abs(alpha) * omega.sup() + abs(curvature) * support.sup())


def _horoball_lambda(M: DiscreteImmersion, r: int) -> Tuple[float, float]:
    """(int u H_r / int u, int u)"""
    u = geometric_field(M, 'u')
    total = integrate_M(M, u)
    threshold = U_THRESHOLD * area(M)
    if abs(total) < threshold:
        raise DegenerateNormalizerError("int u dA vanishes", {'int_u': total, 'threshold': threshold})
    return integrate_M(M, u.interior * M.interior.normalized(r)) / total, total


def test_function_horoball(M: DiscreteImmersion, r: int, overrides: Optional[dict] = None) -> AdmissibleField:
    """
    phi_{n+1} = lambda u - g(X_{n+1}, nu) H_{r+1} with lambda = int u H_r / int u.

    Raises:
        PreconditionError: outside the hyperbolic model or when H_{r+1} is not constant
        DegenerateNormalizerError: when |int u dA| < 1e-6 area
    """
    if not M.space.is_hyperbolic:
        raise PreconditionError("Test function needs the horoball model")
    _check_order(M, r)
    curvature = _constant_mean(M, r + 1, overrides)
    weight, _ = _horoball_lambda(M, r)
    u = geometric_field(M, 'u')
    conformal = geometric_field(M, 'conformal_normal')
    phi = admissible_field(M, _combine(M, weight, u, curvature, conformal, 'phi_n+1'),
                           overrides=overrides, weight=weight, curvature=curvature)
    return _with_scale(phi, abs(weight) * u.sup() + abs(curvature) * conformal.sup())


def test_function(M: DiscreteImmersion, r: int, overrides: Optional[dict] = None) -> AdmissibleField:
    if M.space.is_hyperbolic:
        return test_function_horoball(M, r, overrides)
    return test_function_euclidean(M, r, overrides)


def _phi_psi(M: DiscreteImmersion, r: int, weight: float, curvature: float) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients of J_r phi_{n+1} = phi g(E_{n+1}, nu) + psi V_{n+1}"""
    n = M.n
    sigma = M.interior.sigma
    phi = weight * (r + 1) * sigma[..., r + 1] - (n - r) * sigma[..., r] * curvature
    psi = (weight * (sigma[..., 1] * sigma[..., r + 1] - (r + 2) * sigma[..., r + 2])
           - (r + 1) * sigma[..., r + 1] * curvature)
    return phi, psi


def test_function_report(M: DiscreteImmersion, r: int, overrides: Optional[dict] = None) -> VerificationReport:
    """Admissibility, vanishing on caps and the closed form of J_r applied to the test function"""
    field = test_function(M, r, overrides)
    phi = field.field
    weight = field.metadata['weight']
    curvature = field.metadata['curvature']
    n = M.n
    applied = jacobi_J_r(M, phi, r).interior
    if M.space.is_hyperbolic:
        coefficient, potential_term = _phi_psi(M, r, weight, curvature)
        expected = (coefficient * geometric_field(M, 'height_normal').interior
                    + potential_term * M.interior.conformal)
    else:
        H = M.interior.normalized
        expected = comb(n, r + 1) * (weight * (n * H(1) * curvature - (n - r - 1) * H(r + 2))
                                     - (r + 1) * curvature ** 2)
    scale = max(field.scale, 1.0)
    components = {
        'mean': abs(field.mean_residual) / scale,
        'robin': field.robin_residual / scale,
        'operator': pointwise_residual(applied, expected),
    }
    values = {'weight': weight, 'curvature': curvature, 'sup_phi': phi.sup(), 'scale': field.scale}
    if M.patch.metadata.get('kind') == 'cap':
        components['vanishing'] = phi.sup() / scale
    # J_r phi and the ring slope are held to the operator tolerances
    limits = {'operator': tolerance('jacobi', overrides), 'robin': tolerance('robin', overrides)}
    return _judged('test_function', M, r, tolerance('test_function', overrides), components, values,
                   'natural scale of the test function', limits)


def u_nondegeneracy(M: DiscreteImmersion) -> Dict[str, float]:
    """int u dA against the area, and u on the ring against sin(theta)(sin(theta) - cos(theta) g(x, nu-bar))"""
    if not M.space.is_hyperbolic:
        raise PreconditionError("u is defined on horoball surfaces")
    trace = M.boundary
    u = geometric_field(M, 'u')
    total = integrate_M(M, u)
    expected = trace.sin_theta * (trace.sin_theta - trace.cos_theta * conormal_component(M, 'nu_bar'))
    return {
        'int_u': total,
        'area': area(M),
        'ratio': total / area(M),
        'boundary_residual': pointwise_residual(u.boundary, expected),
    }


# Galerkin basis

def _harmonics(w: np.ndarray, n: int, degree: int) -> List[np.ndarray]:
    """Real spherical harmonics of one degree restricted to unit directions w"""
    if degree == 0:
        return [np.ones(w.shape[:-1])]
    if n == 2:
        z = (w[..., 0] + 1j * w[..., 1]) ** degree
        return [z.real, z.imag]
    x, y, z = w[..., 0], w[..., 1], w[..., 2]
    if degree == 1:
        return [x, y, z]
    if degree == 2:
        return [x * y, x * z, y * z, x ** 2 - y ** 2, x ** 2 + y ** 2 - 2.0 * z ** 2]
    raise BasisError(f"Harmonics of degree {degree} are not tabulated for n = 3")


def _basis_labels(n: int, size: int) -> List[Tuple[int, int, int]]:
    """(radial index j, degree m, harmonic index) ordered by 2j + m; the constant is excluded"""
    top_degree = None if n == 2 else 2
    labels = []
    total = 1
    while len(labels) < size:
        for m in range(total % 2, total + 1, 2):
            if top_degree is not None and m > top_degree:
                continue
            j = (total - m) // 2
            count = 1 if m == 0 else (2 if n == 2 else 2 * m + 1)
            labels.extend((j, m, k) for k in range(count))
        total += 1
    return labels[:size]


def _raw_basis(M: DiscreteImmersion, label: Tuple[int, int, int], params: np.ndarray) -> np.ndarray:
    j, m, k = label
    s_b = M.grid.boundary_parameter
    s = params[..., 0]
    w, _, _ = direction_jet(params[..., 1:])
    radial = eval_legendre(j, 2.0 * (s / s_b) ** 2 - 1.0) * (np.sin(s) / np.sin(s_b)) ** m
    return radial * _harmonics(w, M.n, m)[k]


def _robin_cutoff(M: DiscreteImmersion) -> np.ndarray:
    """eta = (s^2 - s_b^2)/(2 s_b) (s/s_b)^p: zero on the ring, unit radial slope in the continuum"""
    s_b = M.grid.boundary_parameter
    s = M.grid.params[..., 0]
    power = get_config().TANGENT_CUTOFF_POWER
    return (s ** 2 - s_b ** 2) / (2.0 * s_b) * (s / s_b) ** power


def cutoff_slopes(M: DiscreteImmersion) -> np.ndarray:
    """
    Discrete nabla_mu of c eta as a matrix acting on ring coefficients c.

    The mirrored radial stencil couples antipodal ring nodes, so the
    discrete slope of c eta is not c times the slope of eta.
    """
    eta = _robin_cutoff(M)
    shape = M.grid.angular_shape
    count = int(np.prod(shape))
    zeros = np.zeros(shape)
    columns = []
    for k in range(count):
        unit = np.zeros(count)
        unit[k] = 1.0
        columns.append(normal_derivative(M, surface_field(M, eta * unit.reshape(shape)[None, ...], zeros)).ravel())
    return np.stack(columns, axis=1)


def robin_corrected(M: DiscreteImmersion, interior: np.ndarray, boundary: np.ndarray,
                    robin: RobinData, name: str = 'basis', slopes: Optional[np.ndarray] = None) -> SurfaceField:
    """
    b + c eta with c solving slopes c = q b - nabla_mu b, so nabla_mu = q on the ring.

    Raises:
        BasisError: if the cutoff slope matrix is singular
    """
    slopes = cutoff_slopes(M) if slopes is None else slopes
    raw = surface_field(M, interior, boundary, name=name)
    defect = (robin.q * boundary - normal_derivative(M, raw)).ravel()
    try:
        correction = linalg.solve(slopes, defect).reshape(M.grid.angular_shape)
    except linalg.LinAlgError as exc:
        raise BasisError("Cutoff slope matrix is singular", {'size': slopes.shape[0]}) from exc
    return surface_field(M, interior + correction[None, ...] * _robin_cutoff(M), boundary, name=name)


def admissible_basis(M: DiscreteImmersion, size: Optional[int] = None,
                     overrides: Optional[dict] = None) -> List[SurfaceField]:
    """
    Robin-corrected, mean-zero, unit-mass Galerkin basis of the admissible space.

    Raises:
        BasisError: if the corrected constant has vanishing integral, a basis
            element has vanishing mass, or a corrected element still misses
            the Robin condition
    """
    size = size or get_config().DEFAULT_BASIS_SIZE
    if size < 1:
        raise ArgumentError(f"Basis size must be positive, got {size}")
    grid = M.grid
    robin = robin_q(M)
    slopes = cutoff_slopes(M)
    constant = robin_corrected(M, np.ones(grid.shape), np.ones(grid.angular_shape), robin, 'constant', slopes)
    constant_integral = integrate_M(M, constant)
    if abs(constant_integral) < get_config().NORMALIZER_THRESHOLD * area(M):
        raise BasisError("Robin-corrected constant has zero mean", {'integral': constant_integral})

    limit = tolerance('admissibility', overrides)
    basis = []
    for label in _basis_labels(M.n, size):
        element = robin_corrected(M, _raw_basis(M, label, grid.params), _raw_basis(M, label, grid.boundary_params),
                                  robin, f"basis{label}", slopes)
        element = element - constant * (integrate_M(M, element) / constant_integral)
        mass = integrate_M(M, element.interior ** 2)
        if mass < MASS_FLOOR:
            raise BasisError(f"Basis element {label} has vanishing mass", {'mass': mass})
        element = (element * (1.0 / np.sqrt(mass))).renamed(f"basis{label}")
        defect = float(np.abs(robin_defect(M, element, robin)).max())
        if defect > limit * max(element.sup(), 1.0):
            raise BasisError(f"Basis element {label} misses the Robin condition", {'defect': defect, 'limit': limit})
        basis.append(element)
    return basis


def galerkin_matrices(M: DiscreteImmersion, basis: List[SurfaceField], r: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """Stiffness -int psi_i J_r psi_j (symmetrized), mass int psi_i psi_j, and the stiffness asymmetry"""
    weights = M.area_weights.ravel()
    values = np.stack([element.interior.ravel() for element in basis])
    applied = np.stack([jacobi_J_r(M, element, r).interior.ravel() for element in basis])
    mass = (values * weights) @ values.T
    stiffness = -(values * weights) @ applied.T
    asymmetry = float(np.abs(stiffness - stiffness.T).max() / max(np.abs(stiffness).max(), 1e-300))
    return 0.5 * (stiffness + stiffness.T), 0.5 * (mass + mass.T), asymmetry


def stability_spectrum(M: DiscreteImmersion, r: int, basis_size: Optional[int] = None) -> Dict[str, object]:
    """
    Generalized eigenvalues of (stiffness, mass) over the admissible basis.

    Raises:
        PreconditionError: if P_r is not positive definite at every node
        BasisError: if the mass matrix is not positive definite
    """
    _check_order(M, r)
    if not np.all(is_positive_definite(M.interior.newton[r])):
        raise PreconditionError(f"P_{r} is not positive definite on M")
    basis = admissible_basis(M, basis_size)
    stiffness, mass, asymmetry = galerkin_matrices(M, basis, r)
    try:
        linalg.cholesky(mass, lower=True)
    except linalg.LinAlgError as exc:
        raise BasisError("Mass matrix is not positive definite", {'size': len(basis)}) from exc
    eigenvalues = linalg.eigh(stiffness, mass, eigvals_only=True)
    robin = robin_q(M)
    admissibility = max(float(np.abs(robin_defect(M, element, robin)).max()) for element in basis)
    return {'eigenvalues': eigenvalues, 'asymmetry': asymmetry, 'basis_size': len(basis),
            'robin_residual': admissibility}


def lowest_eigenvalue(M: DiscreteImmersion, r: int, basis_size: Optional[int] = None) -> float:
    """Smallest Rayleigh value of Q_r over the Galerkin subspace of the admissible space"""
    return float(stability_spectrum(M, r, basis_size)['eigenvalues'][0])


def _cap_curvature(M: DiscreteImmersion) -> float:
    if 'lambda' in M.patch.metadata:
        return float(M.patch.metadata['lambda'])
    return float(np.mean(M.interior.normalized(1)))


def stability_report(M: DiscreteImmersion, r: int, basis_size: Optional[int] = None,
                     overrides: Optional[dict] = None, doubling: bool = False) -> VerificationReport:
    """
    lambda_min >= -tol max(|Lambda|, 1)^{r+2} area.

    With doubling, lambda_min is recomputed on twice the basis and the
    relative change is held to BASIS_DOUBLING_LIMIT.
    """
    config = get_config()
    size = basis_size or config.DEFAULT_BASIS_SIZE
    spectrum = stability_spectrum(M, r, size)
    lowest = float(spectrum['eigenvalues'][0])
    scale = max(abs(_cap_curvature(M)), 1.0) ** (r + 2) * area(M)
    tol = tolerance('eigenvalue', overrides)
    components = {'negativity': max(0.0, -lowest) / scale}
    values = {
        'lambda_min': lowest,
        'scale': scale,
        'asymmetry': spectrum['asymmetry'],
        'basis_size': spectrum['basis_size'],
        'robin_residual': spectrum['robin_residual'],
    }
    limits = {}
    if doubling:
        refined = lowest_eigenvalue(M, r, 2 * size)
        components['basis_doubling'] = abs(lowest - refined) / max(abs(refined), tol * scale)
        values['lambda_min_doubled'] = refined
        limits['basis_doubling'] = config.BASIS_DOUBLING_LIMIT
    return _judged('stability', M, r, tol, components, values, 'max(|Lambda|, 1)^(r+2) area', limits)


def random_admissible_fields(M: DiscreteImmersion, count: int, basis_size: Optional[int] = None,
                             seed: Optional[int] = None) -> List[AdmissibleField]:
    """Random combinations of the admissible basis"""
    rng = np.random.default_rng(get_config().RANDOM_SEED if seed is None else seed)
    basis = admissible_basis(M, basis_size)
    robin = robin_q(M)
    fields = []
    for index in range(count):
        coefficients = rng.normal(size=len(basis))
        combined = sum((c * element for c, element in zip(coefficients, basis)), 0.0 * basis[0])
        fields.append(admissible_field(M, combined.renamed(f"random{index}"), robin))
    return fields


def cap_reduction_residual(M: DiscreteImmersion, phi: AdmissibleField, r: int) -> Dict[str, float]:
    """
    Q_r = C(n-1, r) Lambda^r Q_0 and E''_{r+1} = ((r+1)(n-r)/n) Lambda^r E''_1,
    each as a defect relative to the r = 0 value.
    """
    if M.patch.metadata.get('kind') != 'cap':
        raise PreconditionError("Cap reduction holds on umbilical caps")
    _check_order(M, r)
    n = M.n
    curvature = float(M.patch.metadata['lambda'])
    top = quadratic_form(M, phi, r, check=False).value
    base = quadratic_form(M, phi, 0, check=False).value
    energy_top = energy_second_variation(top, n, r)
    energy_base = energy_second_variation(base, n, 0)
    denominator = max(abs(base), 1e-300)
    return {
        'Q_r': top,
        'Q_0': base,
        'quadratic': abs(top - comb(n - 1, r) * curvature ** r * base) / denominator,
        'energy': abs(energy_top - (r + 1) * (n - r) / n * curvature ** r * energy_base)
        / max(abs(energy_base), 1e-300),
    }


def cap_reduction_report(M: DiscreteImmersion, r: int, count: Optional[int] = None,
                         basis_size: Optional[int] = None, overrides: Optional[dict] = None) -> VerificationReport:
    count = count or get_config().RANDOM_FIELDS
    worst = {'quadratic': 0.0, 'energy': 0.0}
    for phi in random_admissible_fields(M, count, basis_size):
        measured = cap_reduction_residual(M, phi, r)
        for key in worst:
            worst[key] = max(worst[key], measured[key])
    return _judged('cap_reduction', M, r, tolerance('cap_reduction', overrides), worst,
                   {'fields': count}, '|Q_0| resp. |E_1\'\'|')


# rigidity gaps

def rigidity_gap_report(M: DiscreteImmersion, r: int, overrides: Optional[dict] = None) -> VerificationReport:
    """
    Nonnegative gap quantities of the rigidity argument: (a) H_1 H_{r+1} - H_{r+2}
    pointwise for r + 2 <= n, (b) the Hoelder / Newton-MacLaurin chain (Euclidean)
    and (c) the pointwise hyperbolic gap psi lambda - phi H_{r+1}. Only (a) is
    available when H_{r+1} is not constant. Caps must close every gap; any other
    surface must open one by at least STRICT_GAP.

    Raises:
        PreconditionError: outside the Garding cone of order r+1, or when no
            gap is defined (r = n - 1 with H_n not constant)
    """
    _check_order(M, r)
    geometry = M.interior
    if not np.all(garding_stack(geometry.sigma, r + 1)):
        raise PreconditionError(f"Surface leaves the Garding cone of order {r + 1}")
    H = geometry.normalized
    tol = tolerance('gap', overrides)
    umbilical = M.patch.metadata.get('kind') == 'cap'
    components: Dict[str, float] = {}
    values: Dict[str, float] = {}
    gaps = []
    warnings = []
    if r + 2 <= M.n:
        gap_a = H(1) * H(r + 1) - H(r + 2)
        components['gap_a_negativity'] = max(0.0, -float(gap_a.min()))
        values.update({'gap_a_min': float(gap_a.min()), 'gap_a_max': float(gap_a.max())})
        gaps.append(float(np.abs(gap_a).max()))
    try:
        curvature = _constant_mean(M, r + 1, overrides)
    except PreconditionError:
        if not gaps:
            raise PreconditionError(f"No rigidity gap is defined at r={r} when H_{r + 1} is not constant")
        curvature = None
        warnings.append(f"H_{r + 1} is not constant; only the pointwise Newton-MacLaurin gap is reported")

    if curvature is not None and not M.space.is_hyperbolic:
        omega = geometric_field(M, 'omega').interior
        total = integrate_M(M, omega)
        inverse_mean = integrate_M(M, omega / H(1))
        weighted_mean = integrate_M(M, omega * H(1))
        ratio = integrate_M(M, omega * H(r) / H(r + 1))
        normalizer = max(total ** 2, 1e-300)
        holder = (inverse_mean * weighted_mean - total ** 2) / normalizer
        maclaurin = (ratio - inverse_mean) * weighted_mean / normalizer
        gap_b = (ratio * weighted_mean - total ** 2) / normalizer
        components['gap_b_negativity'] = max(0.0, -gap_b, -holder, -maclaurin)
        values.update({'gap_b': gap_b, 'holder_step': holder, 'maclaurin_step': maclaurin})
        gaps.append(abs(gap_b))
    elif curvature is not None:
        weight, _ = _horoball_lambda(M, r)
        coefficient, potential_term = _phi_psi(M, r, weight, curvature)
        gap_c = potential_term * weight - coefficient * curvature
        binom = comb(M.n, r + 1)
        identity = (weight ** 2 * (M.n - r - 1) * binom * (H(1) * curvature - H(r + 2))
                    + (r + 1) * binom * curvature ** 2
                    * ((H(1) / curvature) * (weight - curvature / H(1)) ** 2 + H(r) - curvature / H(1)))
        components['gap_c_negativity'] = max(0.0, -float(gap_c.min()))
        components['gap_c_identity'] = pointwise_residual(gap_c, identity)
        values.update({'gap_c_min': float(gap_c.min()), 'gap_c_max': float(gap_c.max()), 'lambda': weight})
        gaps.append(float(np.abs(gap_c).max()))
    limits = {}
    if umbilical:
        components['umbilical_excess'] = max(gaps)
    else:
        strict = get_config().STRICT_GAP
        components['strict_gap_shortfall'] = max(0.0, strict - max(gaps))
        values['largest_gap'] = max(gaps)
        limits['strict_gap_shortfall'] = 0.0
    report = _judged('rigidity_gaps', M, r, tol, components, values, 'raw gaps; Hoelder chain over (int omega)^2',
                     limits)
    report.warnings.extend(warnings)
    return report


# auxiliary functions of the hyperbolic rigidity argument

def auxiliary_identity_residuals(M: DiscreteImmersion, r: int, overrides: Optional[dict] = None) -> VerificationReport:
    """
    Phi = -g(E_{n+1}, nu) and Psi = -H_{r+1} V_{n+1} - lambda g(E_{n+1}, nu):
    L_r of each against its closed form, their boundary values and their
    conormal derivatives.
    """
    if not M.space.is_hyperbolic:
        raise PreconditionError("Auxiliary identities are stated on the horoball model")
    _check_order(M, r)
    curvature = _constant_mean(M, r + 1, overrides)
    weight, _ = _horoball_lambda(M, r)
    trace = M.boundary
    height = geometric_field(M, 'height_normal')
    potential = geometric_field(M, 'potential')
    sigma = M.interior.sigma
    Phi = geometric_field(M, 'Phi')
    Psi = (potential * -curvature) - height * weight
    coefficient, potential_term = _phi_psi(M, r, weight, curvature)

    components = {
        'L_r Phi': pointwise_residual(
            L_r(M, Phi, r).interior,
            potential.interior * (r + 1) * sigma[..., r + 1] + height.interior * newton_h2_trace(M, r)),
        'Phi boundary': pointwise_residual(Phi.boundary, -trace.cos_theta),
        'nabla_mu Phi': pointwise_residual(normal_derivative(M, Phi), trace.sin_theta * trace.h_mu_mu),
        'L_r Psi': pointwise_residual(
            L_r(M, Psi, r).interior, coefficient * potential.interior + potential_term * height.interior),
        'Psi boundary': pointwise_residual(Psi.boundary, -curvature - weight * trace.cos_theta),
        'nabla_mu Psi': pointwise_residual(
            normal_derivative(M, Psi), -trace.sin_theta * (curvature - weight * trace.h_mu_mu)),
    }
    values = {'lambda': weight, 'curvature': curvature, 'psi_spread': float(np.ptp(Psi.interior))}
    return _judged('auxiliary', M, r, tolerance('jacobi', overrides), components, values,
                   '1 + max(|lhs|, |rhs|)')
