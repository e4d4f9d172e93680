"""
Elementary symmetric functions, normalized mean curvatures and Newton tensors.

Scalar entry points take the value types from models.curvature; the
`*_stack` helpers work on arrays of spectra / frame matrices and are what
the immersion and operator services call at every node.
"""

import itertools
from utils.logger import get_logger
from math import comb
from typing import List, Tuple

import numpy as np

from config import get_config
from models.curvature import CurvatureSpectrum, NewtonTensor, ShapeOperator
from utils.errors import ArgumentError, NumericalConsistencyError, PreconditionError

logger = get_logger(__name__)


def symmetric_stack(kappa: np.ndarray, max_order: int) -> np.ndarray:
    """
    sigma_0..sigma_max_order for every spectrum in a stack.

    Uses the coefficient recurrence of prod_i (1 + kappa_i t); orders above
    n stay zero.

    Args:
        kappa: array (..., n) of principal curvatures
        max_order: highest order wanted

    Returns:
        array (..., max_order + 1)
    """
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    sigma = np.zeros(kappa.shape[:-1] + (max_order + 1,))
    sigma[..., 0] = 1.0
    for i in range(n):
        value = kappa[..., i]
        for order in range(min(i + 1, max_order), 0, -1):
            sigma[..., order] += value * sigma[..., order - 1]
    return sigma


def elementary_symmetric(spectrum: CurvatureSpectrum, r: int) -> float:
    """sigma_r(kappa) with sigma_0 = 1 and sigma_r = 0 for r > n"""
    if r < 0:
        raise ArgumentError(f"Order must be non-negative, got {r}")
    if r > spectrum.n:
        return 0.0
    return float(symmetric_stack(spectrum.values, r)[r])


def brute_force_symmetric(spectrum: CurvatureSpectrum, r: int) -> float:
    """Subset-enumeration oracle for elementary_symmetric"""
    if r < 0:
        raise ArgumentError(f"Order must be non-negative, got {r}")
    if r == 0:
        return 1.0
    return float(sum(np.prod(subset) for subset in itertools.combinations(spectrum.values, r)))


def normalized_mean_curvature(spectrum: CurvatureSpectrum, r: int) -> float:
    """H_r = sigma_r / C(n, r)"""
    n = spectrum.n
    if r < 0 or r > n:
        raise ArgumentError(f"Order {r} outside 0..{n}")
    return elementary_symmetric(spectrum, r) / comb(n, r)


def normalized_stack(sigma: np.ndarray) -> np.ndarray:
    """H_0..H_n from a stack of sigma_0..sigma_n"""
    n = sigma.shape[-1] - 1
    binomials = np.array([comb(n, r) for r in range(n + 1)], dtype=float)
    return sigma / binomials


def restricted_symmetric(spectrum: CurvatureSpectrum, index: int, r: int) -> float:
    """sigma_r of the spectrum with entry `index` removed"""
    if not 0 <= index < spectrum.n:
        raise ArgumentError(f"Index {index} outside spectrum of size {spectrum.n}")
    remaining = np.delete(spectrum.values, index)
    if remaining.size == 0:
        return 1.0 if r == 0 else 0.0
    return elementary_symmetric(CurvatureSpectrum(remaining), r)


def _check_order(shape: ShapeOperator, r: int) -> None:
    if r < 0 or r > shape.n - 1:
        raise ArgumentError(f"Newton tensor order {r} outside 0..{shape.n - 1}")


def newton_tensor(shape: ShapeOperator, r: int) -> NewtonTensor:
    """P_r by the recursion P_0 = I, P_k = sigma_k I - P_{k-1} S"""
    _check_order(shape, r)
    n = shape.n
    sigma = symmetric_stack(shape.spectrum().values, n)
    identity = np.eye(n)
    current = identity
    for order in range(1, r + 1):
        current = sigma[order] * identity - current @ shape.matrix
    return NewtonTensor(r, current)


def _consistent(value: float, expected: float, scale: float, tol: float) -> bool:
    return abs(value - expected) <= tol * max(abs(expected), scale)


def _power_scale(shape: ShapeOperator, power: int) -> float:
    radius = float(np.abs(shape.spectrum().values).max())
    return comb(shape.n, min(power, shape.n)) * max(radius, 1.0) ** power


def newton_traces(shape: ShapeOperator, r: int) -> Tuple[float, float, float]:
    """
    Traces (tr P_r, tr P_r S, tr P_r S^2), checked against the closed forms.

    Raises:
        NumericalConsistencyError: when any trace misses its identity
    """
    tol = get_config().TOLERANCES['identity']
    n = shape.n
    tensor = newton_tensor(shape, r).matrix
    sigma = symmetric_stack(shape.spectrum().values, n + 2)
    traces = (
        float(np.trace(tensor)),
        float(np.trace(tensor @ shape.matrix)),
        float(np.trace(tensor @ shape.matrix @ shape.matrix)),
    )
    expected = (
        (n - r) * sigma[r],
        (r + 1) * sigma[r + 1],
        sigma[1] * sigma[r + 1] - (r + 2) * sigma[r + 2],
    )
    for power, (value, target) in enumerate(zip(traces, expected)):
        if not _consistent(value, target, _power_scale(shape, r + power), tol):
            raise NumericalConsistencyError(
                f"Newton trace identity {power} failed for r={r}",
                {'value': value, 'expected': float(target)},
            )
    return traces


def sigma_gradient(shape: ShapeOperator, r: int) -> np.ndarray:
    """
    d sigma_r / d h = P_{r-1}, cross-checked by one-sided differences on the
    eigenvalues (sigma_r is affine in each curvature, so the check is sharp).
    """
    n = shape.n
    if r < 1 or r > n:
        raise ArgumentError(f"Gradient order {r} outside 1..{n}")
    tensor = newton_tensor(shape, r - 1).matrix
    eigenvalues, eigenvectors = shape.eigen()
    # eigenvectors are g-orthonormal, so V^T g P V is P in the eigenframe
    in_frame = np.diag(eigenvectors.T @ shape.metric @ tensor @ eigenvectors)

    spectrum = CurvatureSpectrum(eigenvalues)
    base = elementary_symmetric(spectrum, r)
    tol = get_config().TOLERANCES['finite_difference']
    for i in range(n):
        step = 1e-7 * max(1.0, abs(eigenvalues[i]))
        bumped = eigenvalues.copy()
        bumped[i] += step
        difference = (elementary_symmetric(CurvatureSpectrum(bumped), r) - base) / step
        if not _consistent(in_frame[i], difference, _power_scale(shape, r - 1), tol):
            raise NumericalConsistencyError(
                f"sigma_{r} gradient disagrees with finite differences at entry {i}",
                {'tensor': float(in_frame[i]), 'difference': float(difference)},
            )
    return tensor


def garding_cone_contains(spectrum: CurvatureSpectrum, l: int) -> bool:
    """True iff sigma_1..sigma_l are all strictly positive"""
    if l < 1 or l > spectrum.n:
        raise ArgumentError(f"Cone index {l} outside 1..{spectrum.n}")
    sigma = symmetric_stack(spectrum.values, l)
    return bool(np.all(sigma[1:l + 1] > 0.0))


def garding_stack(sigma: np.ndarray, l: int) -> np.ndarray:
    """Node-wise cone membership from a stack of sigma values"""
    return np.all(sigma[..., 1:l + 1] > 0.0, axis=-1)


def newton_maclaurin_gap(spectrum: CurvatureSpectrum, k: int, l: int) -> float:
    """H_k H_{l-1} - H_{k-1} H_l, nonnegative inside the cone Gamma_l"""
    n = spectrum.n
    if not 1 <= k < l <= n:
        raise ArgumentError(f"Need 1 <= k < l <= n, got k={k}, l={l}, n={n}")
    if not garding_cone_contains(spectrum, l):
        raise PreconditionError(f"Spectrum is outside the Garding cone of order {l}",
                                {'values': spectrum.values.tolist()})
    H = [normalized_mean_curvature(spectrum, order) for order in range(n + 1)]
    return H[k] * H[l - 1] - H[k - 1] * H[l]


def newton_frame_stack(frame_shape: np.ndarray, sigma: np.ndarray) -> List[np.ndarray]:
    """
    P_0..P_{n-1} at every node, in an orthonormal frame.

    Args:
        frame_shape: symmetric matrices (..., n, n)
        sigma: matching sigma_0..sigma_n (..., n + 1)
    """
    n = frame_shape.shape[-1]
    identity = np.broadcast_to(np.eye(n), frame_shape.shape)
    tensors = [np.array(identity)]
    for order in range(1, n):
        previous = tensors[-1]
        tensors.append(sigma[..., order, None, None] * identity - previous @ frame_shape)
    return tensors


def is_positive_definite(tensors: np.ndarray) -> np.ndarray:
    """Node-wise positive definiteness of symmetric (..., n, n) stacks"""
    symmetric = 0.5 * (tensors + np.swapaxes(tensors, -1, -2))
    return np.linalg.eigvalsh(symmetric)[..., 0] > 0.0


def random_spectra(rng: np.random.Generator, count: int, max_n: int = 6,
                   low: float = -2.0, high: float = 2.0) -> List[CurvatureSpectrum]:
    """Random spectra for the oracle checks"""
    sizes = rng.integers(1, max_n + 1, size=count)
    return [CurvatureSpectrum(rng.uniform(low, high, size=int(size))) for size in sizes]


def random_shape_operator(rng: np.random.Generator, n: int) -> ShapeOperator:
    """A random self-adjoint operator with a random SPD metric"""
    basis = rng.normal(size=(n, n))
    metric = basis @ basis.T + n * np.eye(n)
    sff = rng.normal(size=(n, n))
    sff = 0.5 * (sff + sff.T)
    shape = np.linalg.solve(metric, sff)
    # re-symmetrize g S against roundoff in the solve
    lowered = metric @ shape
    shape = np.linalg.solve(metric, 0.5 * (lowered + lowered.T))
    return ShapeOperator(shape, metric, self_adjoint_tol=1e-10)
