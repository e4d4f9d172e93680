"""
Integral identities: the two Minkowski-type formulas, the horosphere boundary
flux identities and the constant-sigma boundary identity.

Each verifier evaluates one immersion and returns a single-level
VerificationReport; `convergence_study` stacks levels over nested
resolutions and applies the verdict rule.
"""

from utils.logger import get_logger
from dataclasses import replace
from typing import Callable, Dict, Iterable, Optional

import numpy as np

from config import get_config, tolerance
from models.reports import VerificationReport
from models.surface import DiscreteImmersion, ParametricPatch, SurfaceJet
from services.immersion import area, discretize, integrate_M, integrate_boundary
from services.operators import conormal_component, geometric_field
from utils.errors import ArgumentError, PreconditionError

logger = get_logger(__name__)

CMC_SPREAD = 1e-8


def _check_order(M: DiscreteImmersion, r: int, top: Optional[int] = None) -> None:
    top = M.n - 1 if top is None else top
    if not 0 <= r <= top:
        raise ArgumentError(f"Order r={r} outside 0..{top}")


def _require_model(M: DiscreteImmersion, hyperbolic: bool) -> None:
    if M.space.is_hyperbolic != hyperbolic:
        wanted = 'horoball' if hyperbolic else 'euclid'
        raise PreconditionError(f"Identity needs the {wanted} model, got {M.space.tag}")


def _balance(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


def _single_level(identity: str, M: DiscreteImmersion, r: int, tol: float, residual: float,
                  normalizer: str, values: Dict[str, float],
                  components: Optional[Dict[str, float]] = None) -> VerificationReport:
    report = VerificationReport.for_surface(identity, M, r, tol, normalizer=normalizer)
    report.add_level(M.resolution, residual, components)
    report.values.update(values)
    report.judge(get_config().MIN_ORDER, get_config().ROUNDOFF_FLOOR)
    return report


def _normalized_integral(M: DiscreteImmersion, total: float, normalizer: float,
                         report_name: str):
    """|total| / |normalizer|, falling back to max(|terms|, 1) when the normalizer vanishes"""
    threshold = get_config().NORMALIZER_THRESHOLD * area(M)
    if abs(normalizer) > threshold:
        return abs(total) / abs(normalizer), report_name, None
    return abs(total), '1', f"normalizer {report_name} below {threshold:.3g}; residual left unnormalized"


def minkowski_euclidean(M: DiscreteImmersion, r: int, overrides: Optional[dict] = None) -> VerificationReport:
    """
    Residual of int (1 - cos(theta) <E_{n+1}, nu>) H_r - <x, nu> H_{r+1} dA,
    relative to int omega H_r dA.
    """
    _require_model(M, hyperbolic=False)
    _check_order(M, r)
    omega = geometric_field(M, 'omega').interior
    support = geometric_field(M, 'support_function').interior
    weighted = integrate_M(M, omega * M.interior.normalized(r))
    paired = integrate_M(M, support * M.interior.normalized(r + 1))
    residual, normalizer, warning = _normalized_integral(M, weighted - paired, weighted, 'int omega H_r dA')
    report = _single_level('minkowski', M, r, tolerance('minkowski', overrides), residual, normalizer,
                           {'int_omega_H_r': weighted, 'int_support_H_r+1': paired})
    if warning:
        report.warnings.append(warning)
    return report


def minkowski_horoball(M: DiscreteImmersion, r: int, overrides: Optional[dict] = None) -> VerificationReport:
    """
    Residual of int (V_{n+1} - cos(theta) g(x, nu)) H_r - g(X_{n+1}, nu) H_{r+1} dA,
    relative to int u H_r dA.
    """
    _require_model(M, hyperbolic=True)
    _check_order(M, r)
    u = geometric_field(M, 'u').interior
    conformal = geometric_field(M, 'conformal_normal').interior
    weighted = integrate_M(M, u * M.interior.normalized(r))
    paired = integrate_M(M, conformal * M.interior.normalized(r + 1))
    residual, normalizer, warning = _normalized_integral(M, weighted - paired, weighted, 'int u H_r dA')
    report = _single_level('minkowski', M, r, tolerance('minkowski', overrides), residual, normalizer,
                           {'int_u_H_r': weighted, 'int_conformal_H_r+1': paired})
    if warning:
        report.warnings.append(warning)
    return report


def minkowski(M: DiscreteImmersion, r: int, overrides: Optional[dict] = None) -> VerificationReport:
    if M.space.is_hyperbolic:
        return minkowski_horoball(M, r, overrides)
    return minkowski_euclidean(M, r, overrides)


def _boundary_support(M: DiscreteImmersion) -> np.ndarray:
    return conormal_component(M, 'nu_bar')


def boundary_flux_1(M: DiscreteImmersion, r: int, overrides: Optional[dict] = None) -> VerificationReport:
    """-(r+1) int g(x, nu) sigma_{r+1} dA = int P_r^{mu mu} (cos(theta) g(x, nu-bar) - sin(theta)) ds"""
    _require_model(M, hyperbolic=True)
    _check_order(M, r)
    trace = M.boundary
    support = geometric_field(M, 'support_function').interior
    lhs = -(r + 1) * integrate_M(M, support * M.interior.sigma[..., r + 1])
    rhs = integrate_boundary(
        M, trace.newton_mu[..., r] * (trace.cos_theta * _boundary_support(M) - trace.sin_theta))
    return _single_level('flux_1', M, r, tolerance('flux', overrides), _balance(lhs, rhs),
                         'max(|lhs|, |rhs|, 1)', {'lhs': lhs, 'rhs': rhs})


def boundary_flux_2(M: DiscreteImmersion, r: int, overrides: Optional[dict] = None) -> VerificationReport:
    """(n - r) int sigma_r g(x, nu) dA = int P_r^{mu mu} g(x, nu-bar) ds"""
    _require_model(M, hyperbolic=True)
    _check_order(M, r)
    trace = M.boundary
    support = geometric_field(M, 'support_function').interior
    lhs = (M.n - r) * integrate_M(M, M.interior.sigma[..., r] * support)
    rhs = integrate_boundary(M, trace.newton_mu[..., r] * _boundary_support(M))
    return _single_level('flux_2', M, r, tolerance('flux', overrides), _balance(lhs, rhs),
                         'max(|lhs|, |rhs|, 1)', {'lhs': lhs, 'rhs': rhs})


def boundary_flux_cross_check(M: DiscreteImmersion, overrides: Optional[dict] = None) -> VerificationReport:
    """n int g(x, nu) dA = int g(x, nu-bar) ds, computed without Newton tensors"""
    _require_model(M, hyperbolic=True)
    lhs = M.n * integrate_M(M, geometric_field(M, 'support_function'))
    rhs = integrate_boundary(M, _boundary_support(M))
    return _single_level('flux_2_r0', M, 0, tolerance('flux', overrides), _balance(lhs, rhs),
                         'max(|lhs|, |rhs|, 1)', {'lhs': lhs, 'rhs': rhs})


def sigma_spread(M: DiscreteImmersion, k: int) -> float:
    """Relative spread of sigma_k over the interior and boundary nodes"""
    values = np.concatenate([M.interior.sigma[..., k].ravel(), M.boundary.geometry.sigma[..., k].ravel()])
    return float(np.ptp(values) / max(np.abs(values).max(), 1.0))


def cmc_boundary_identity(M: DiscreteImmersion, r: int, overrides: Optional[dict] = None) -> VerificationReport:
    """
    int P_r^{mu mu} (-sin(theta) + cos(theta) g(x, nu-bar) + g(x, nu-bar) h(mu, mu)) ds = 0
    for constant sigma_{r+1}.

    Raises:
        PreconditionError: when sigma_{r+1} is not constant on M
    """
    _require_model(M, hyperbolic=True)
    _check_order(M, r)
    spread = sigma_spread(M, r + 1)
    if spread > CMC_SPREAD:
        raise PreconditionError(f"sigma_{r + 1} is not constant on M",
                                {'spread': spread, 'limit': CMC_SPREAD})
    trace = M.boundary
    support = _boundary_support(M)
    weight = trace.newton_mu[..., r]
    terms = [-trace.sin_theta, trace.cos_theta * support, support * trace.h_mu_mu]
    total = integrate_boundary(M, weight * sum(terms))
    scale = max(sum(abs(integrate_boundary(M, weight * term)) for term in terms), 1.0)
    return _single_level('cmc', M, r, tolerance('cmc', overrides), abs(total) / scale,
                         'sum of |term integrals|', {'integral': total, 'sigma_spread': spread})


# dilations

def dilated_patch(patch: ParametricPatch, factor: float, origin: Optional[np.ndarray] = None) -> ParametricPatch:
    """Chart dilation x -> o + factor (x - o) of an analytic patch about a support point o"""
    if not patch.analytic:
        raise PreconditionError("Dilations are built from analytic jets")
    if factor <= 0.0:
        raise ArgumentError(f"Dilation factor must be positive, got {factor}")
    origin = np.zeros(patch.n + 1) if origin is None else np.asarray(origin, dtype=float)
    if abs(origin[-1] - patch.support_height) > 1e-14:
        raise ArgumentError("Dilation center must lie on the support")
    source = patch.jet

    def jet(params):
        base = source(params)
        return SurfaceJet(origin + factor * (base.points - origin), factor * base.first, factor * base.second)

    def embedding(params):
        return jet(params).points

    metadata = dict(patch.metadata, dilation=float(factor))
    if 'lambda' in metadata:
        metadata['lambda'] = metadata['lambda'] / factor
    return replace(
        patch,
        embedding=embedding,
        jet=jet,
        normal_center=origin + factor * (patch.normal_center - origin),
        scale=patch.scale * factor,
        label=f"{patch.label},dilated={factor:g}",
        metadata=metadata,
    )


def scale_covariance(M: DiscreteImmersion, r: int, factor: float = 2.0,
                     origin: Optional[np.ndarray] = None) -> VerificationReport:
    """Euclidean Minkowski residual of M against that of its dilation"""
    _require_model(M, hyperbolic=False)
    dilated = discretize(dilated_patch(M.patch, factor, origin), M.space, M.resolution)
    base = minkowski_euclidean(M, r)
    scaled = minkowski_euclidean(dilated, r)
    difference = abs(base.finest - scaled.finest)
    return _single_level('scale_covariance', M, r, tolerance('identity'), difference, 'absolute',
                         {'residual': base.finest, 'dilated_residual': scaled.finest, 'factor': factor})


# convergence

def convergence_study(build: Callable[[int], DiscreteImmersion],
                      verifier: Callable[[DiscreteImmersion], VerificationReport],
                      resolutions: Iterable[int]) -> VerificationReport:
    """
    Run a verifier over nested resolutions and merge the single-level reports.

    Args:
        build: resolution -> immersion
        verifier: immersion -> single-level report
        resolutions: strictly increasing resolutions

    Returns:
        Report with one residual per level, the log-ratio order and the verdict
    """
    resolutions = [int(k) for k in resolutions]
    if not resolutions or any(b <= a for a, b in zip(resolutions, resolutions[1:])):
        raise ArgumentError("Resolutions must be nonempty and strictly increasing",
                            {'resolutions': resolutions})
    merged = None
    for resolution in resolutions:
        level = verifier(build(resolution))
        logger.debug(f"{level.name} N={resolution}: residual {level.finest:.3e}")
        if merged is None:
            merged = replace(level, resolutions=[], residuals=[], components={}, warnings=[])
        merged.add_level(resolution, level.finest,
                         {key: values[-1] for key, values in level.components.items()})
        merged.values = dict(level.values)
        merged.warnings.extend(w for w in level.warnings if w not in merged.warnings)
    merged.judge(get_config().MIN_ORDER, get_config().ROUNDOFF_FLOOR)
    order = 'n/a' if merged.order is None else f"{merged.order:.2f}"
    logger.info(f"{merged.name}: finest {merged.finest:.3e}, order {order}, {merged.verdict}")
    return merged
