"""
Geodesic-polar collocation grid on the parameter ball {s < s_b}.

Parameters are u = (s, phi) for n = 2 and u = (s, alpha, phi) for n = 3.

Radial direction: s_j = sqrt(t_j) with t_j Gauss-Jacobi nodes on (0, s_b^2)
for the weight t^{(n-2)/2}, so the volume factor s^{n-1} ds is integrated
exactly and the pole is never a node. Radial derivatives are taken on the
doubled line {-s_j} u {s_j}, where f(-s, w) = f(s, -w); a scalar that is
smooth on the ball is smooth there.

Angles: periodic Fourier collocation in phi; for n = 3 the polar angle alpha
sits on Fejer midpoints and is differentiated through the double-Fourier
extension f(-alpha, phi) = f(alpha, phi + pi).

Only scalars are differentiated. Mixed derivatives are angular derivatives
of the radial derivative.
"""

from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.special import roots_jacobi

from utils.errors import DiscretizationError

MIN_RESOLUTION = 8


def _barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    differences = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(differences, 1.0)
    log_abs = -np.sum(np.log(np.abs(differences)), axis=1)
    sign = np.prod(np.sign(differences), axis=1)
    return sign * np.exp(log_abs - log_abs.max())


def _differentiation_matrices(nodes: np.ndarray, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    differences = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(differences, 1.0)
    first = (weights[None, :] / weights[:, None]) / differences
    np.fill_diagonal(first, 0.0)
    np.fill_diagonal(first, -first.sum(axis=1))
    second = 2.0 * first * (np.diag(first)[:, None] - 1.0 / differences)
    np.fill_diagonal(second, 0.0)
    np.fill_diagonal(second, -second.sum(axis=1))
    return first, second


def _fourier_matrices(count: int) -> Tuple[np.ndarray, np.ndarray]:
    """First and second periodic differentiation on `count` equispaced points of [0, 2 pi)"""
    step = 2.0 * np.pi / count
    offsets = np.arange(count)[:, None] - np.arange(count)[None, :]
    signs = np.where(offsets % 2 == 0, 1.0, -1.0)
    half = offsets * step / 2.0
    with np.errstate(divide='ignore', invalid='ignore'):
        first = 0.5 * signs / np.tan(half)
        second = -signs / (2.0 * np.sin(half) ** 2)
    first[offsets == 0] = 0.0
    second[offsets == 0] = -np.pi ** 2 / (3.0 * step ** 2) - 1.0 / 6.0
    return first, second


def _fejer_weights(count: int) -> Tuple[np.ndarray, np.ndarray]:
    """Midpoint nodes on (0, pi) and Fejer-1 weights for int_0^pi g sin(a) da"""
    angles = (np.arange(count) + 0.5) * np.pi / count
    orders = np.arange(1, count // 2 + 1)
    series = np.cos(2.0 * orders[None, :] * angles[:, None]) / (4.0 * orders[None, :] ** 2 - 1.0)
    weights = (2.0 / count) * (1.0 - 2.0 * series.sum(axis=1))
    return angles, weights


def direction_jet(angles: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Unit directions w on S^{n-1} with first and second angular derivatives.

    Args:
        angles: (..., n - 1) with (phi,) for n = 2 and (alpha, phi) for n = 3

    Returns:
        (w, dw, d2w) with shapes (..., n), (..., n-1, n), (..., n-1, n-1, n)
    """
    angles = np.asarray(angles, dtype=float)
    if angles.shape[-1] == 1:
        phi = angles[..., 0]
        w = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        dw = np.stack([-np.sin(phi), np.cos(phi)], axis=-1)[..., None, :]
        d2w = (-w)[..., None, None, :]
        return w, dw, d2w
    alpha, phi = angles[..., 0], angles[..., 1]
    sa, ca, sp, cp = np.sin(alpha), np.cos(alpha), np.sin(phi), np.cos(phi)
    zero = np.zeros_like(alpha)
    w = np.stack([sa * cp, sa * sp, ca], axis=-1)
    w_a = np.stack([ca * cp, ca * sp, -sa], axis=-1)
    w_p = np.stack([-sa * sp, sa * cp, zero], axis=-1)
    w_ap = np.stack([-ca * sp, ca * cp, zero], axis=-1)
    w_pp = np.stack([-sa * cp, -sa * sp, zero], axis=-1)
    dw = np.stack([w_a, w_p], axis=-2)
    d2w = np.stack([np.stack([-w, w_ap], axis=-2), np.stack([w_ap, w_pp], axis=-2)], axis=-3)
    return w, dw, d2w


def _apply(matrix: np.ndarray, values: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(matrix, values, axes=(1, axis)), 0, axis)


class PolarGrid:
    """Nodes, weights and differentiation on the polar parameter ball"""

    def __init__(self, n: int, boundary_parameter: float, resolution: int):
        if n not in (2, 3):
            raise DiscretizationError(f"Polar grids are implemented for n = 2, 3; got n = {n}")
        if resolution < MIN_RESOLUTION:
            raise DiscretizationError(f"Resolution must be at least {MIN_RESOLUTION}, got {resolution}")
        if not boundary_parameter > 0.0:
            raise DiscretizationError(f"Boundary parameter must be positive, got {boundary_parameter}")
        self.n = n
        self.resolution = resolution
        self.boundary_parameter = float(boundary_parameter)
        self._build_radial()
        self._build_angular()
        self._build_parameters()

    # construction

    def _build_radial(self) -> None:
        count = self.resolution
        beta = (self.n - 2) / 2.0
        x, w = roots_jacobi(count, 0.0, beta)
        span = self.boundary_parameter ** 2
        t = span * (x + 1.0) / 2.0
        s = np.sqrt(t)
        self.radii = s
        self.radial_weights = 0.5 * (span / 2.0) ** (beta + 1.0) * w / s ** (self.n - 1)

        scaled = s / self.boundary_parameter
        doubled = np.concatenate([-scaled[::-1], scaled])
        bary = _barycentric_weights(doubled)
        first, second = _differentiation_matrices(doubled, bary)
        rows = slice(count, 2 * count)
        self._radial_first = (first[rows, count:], first[rows, :count][:, ::-1])
        self._radial_second = (second[rows, count:], second[rows, :count][:, ::-1])

        # evaluation and slope of the interpolant at the boundary s = s_b
        gaps = 1.0 - doubled
        lagrange = (bary / gaps) / np.sum(bary / gaps)
        slope = lagrange * (np.sum(1.0 / gaps) - 1.0 / gaps)
        self._edge_value = (lagrange[count:], lagrange[:count][::-1])
        self._edge_slope = (slope[count:], slope[:count][::-1])
        self._radial_scale = 1.0 / self.boundary_parameter

    def _build_angular(self) -> None:
        count = self.resolution
        self.phi_count = 2 * ((count + 1) // 2)
        self.phi = 2.0 * np.pi * np.arange(self.phi_count) / self.phi_count
        phi_weights = np.full(self.phi_count, 2.0 * np.pi / self.phi_count)
        self._phi_matrices = _fourier_matrices(self.phi_count)

        if self.n == 2:
            self.alpha = None
            self.alpha_count = 0
            self.angular_shape = (self.phi_count,)
            self.angular_weights = phi_weights
            return

        self.alpha_count = max(4, (count + 1) // 2)
        self.alpha, fejer = _fejer_weights(self.alpha_count)
        self._alpha_matrices = _fourier_matrices(2 * self.alpha_count)
        self.angular_shape = (self.alpha_count, self.phi_count)
        self.angular_weights = (fejer / np.sin(self.alpha))[:, None] * phi_weights[None, :]

    def _build_parameters(self) -> None:
        self.shape = (self.resolution,) + self.angular_shape
        angles = self.angle_mesh()
        self.boundary_params = np.concatenate(
            [np.full(self.angular_shape + (1,), self.boundary_parameter), angles], axis=-1)
        radial = np.broadcast_to(self.radii.reshape((-1,) + (1,) * len(self.angular_shape)), self.shape)
        self.params = np.concatenate(
            [radial[..., None], np.broadcast_to(angles, self.shape + (self.n - 1,))], axis=-1)
        self.weights = self.radial_weights.reshape((-1,) + (1,) * len(self.angular_shape)) \
            * self.angular_weights[None, ...]

    def angle_mesh(self) -> np.ndarray:
        """Angular parameters on the angular grid, shape angular_shape + (n - 1,)"""
        if self.n == 2:
            return self.phi[:, None]
        alpha, phi = np.meshgrid(self.alpha, self.phi, indexing='ij')
        return np.stack([alpha, phi], axis=-1)

    @property
    def key(self) -> Tuple[int, int, float]:
        return (self.n, self.resolution, self.boundary_parameter)

    # node maps

    def antipode(self, values: np.ndarray) -> np.ndarray:
        """Values at (s, -w) for an interior array"""
        rolled = np.roll(values, self.phi_count // 2, axis=self.n - 1)
        if self.n == 3:
            rolled = rolled[:, ::-1, :]
        return rolled

    def _alpha_extension(self, values: np.ndarray, axis: int) -> np.ndarray:
        flipped = np.flip(values, axis=axis)
        flipped = np.roll(flipped, self.phi_count // 2, axis=axis + 1)
        return np.concatenate([values, flipped], axis=axis)

    # radial derivatives

    def radial_derivative(self, values: np.ndarray) -> np.ndarray:
        positive, negative = self._radial_first
        mirrored = self.antipode(values)
        return (_apply(positive, values, 0) + _apply(negative, mirrored, 0)) * self._radial_scale

    def radial_second_derivative(self, values: np.ndarray) -> np.ndarray:
        positive, negative = self._radial_second
        mirrored = self.antipode(values)
        return (_apply(positive, values, 0) + _apply(negative, mirrored, 0)) * self._radial_scale ** 2

    def boundary_value(self, values: np.ndarray) -> np.ndarray:
        """Interpolated values on the ring s = s_b"""
        positive, negative = self._edge_value
        mirrored = self.antipode(values)
        return np.tensordot(positive, values, axes=(0, 0)) + np.tensordot(negative, mirrored, axes=(0, 0))

    def boundary_radial_derivative(self, values: np.ndarray) -> np.ndarray:
        positive, negative = self._edge_slope
        mirrored = self.antipode(values)
        return (np.tensordot(positive, values, axes=(0, 0))
                + np.tensordot(negative, mirrored, axes=(0, 0))) * self._radial_scale

    # angular derivatives; `offset` is the index of the first angular axis

    def angular_derivative(self, values: np.ndarray, which: int, offset: int = 1) -> np.ndarray:
        """First derivative in angle `which` (0-based among the angles)"""
        axis = offset + which
        centered = values - values.mean(axis=axis, keepdims=True)
        if self.n == 2 or which == 1:
            return _apply(self._phi_matrices[0], centered, axis)
        return self._alpha_apply(self._alpha_matrices[0], values, axis)

    def angular_second_derivative(self, values: np.ndarray, first: int, second: int,
                                  offset: int = 1) -> np.ndarray:
        if first != second:
            # d_alpha of d_phi: d_phi f is again a smooth function on the sphere
            return self.angular_derivative(self.angular_derivative(values, 1, offset), 0, offset)
        axis = offset + first
        if self.n == 2 or first == 1:
            centered = values - values.mean(axis=axis, keepdims=True)
            return _apply(self._phi_matrices[1], centered, axis)
        return self._alpha_apply(self._alpha_matrices[1], values, axis)

    def _alpha_apply(self, matrix: np.ndarray, values: np.ndarray, axis: int) -> np.ndarray:
        extended = self._alpha_extension(values, axis)
        extended = extended - extended.mean(axis=axis, keepdims=True)
        rows = matrix[:self.alpha_count]
        return _apply(rows, extended, axis)

    # parameter derivatives

    def partials(self, values: np.ndarray) -> np.ndarray:
        """First parameter derivatives of an interior scalar, shape + (n,)"""
        parts = [self.radial_derivative(values)]
        parts += [self.angular_derivative(values, k) for k in range(self.n - 1)]
        return np.stack(parts, axis=-1)

    def second_partials(self, values: np.ndarray, first: np.ndarray = None) -> np.ndarray:
        """Second parameter derivatives of an interior scalar, shape + (n, n)"""
        if first is None:
            first = self.partials(values)
        result = np.empty(values.shape + (self.n, self.n))
        result[..., 0, 0] = self.radial_second_derivative(values)
        for k in range(self.n - 1):
            mixed = self.angular_derivative(first[..., 0], k)
            result[..., 0, k + 1] = mixed
            result[..., k + 1, 0] = mixed
            for l in range(k, self.n - 1):
                value = self.angular_second_derivative(values, k, l)
                result[..., k + 1, l + 1] = value
                result[..., l + 1, k + 1] = value
        return result

    def boundary_partials(self, values: np.ndarray, boundary_values: np.ndarray = None) -> np.ndarray:
        """First parameter derivatives on the ring, shape angular_shape + (n,)"""
        if boundary_values is None:
            boundary_values = self.boundary_value(values)
        parts = [self.boundary_radial_derivative(values)]
        parts += [self.angular_derivative(boundary_values, k, offset=0) for k in range(self.n - 1)]
        return np.stack(parts, axis=-1)

    def boundary_second_partials(self, values: np.ndarray, boundary_values: np.ndarray = None) -> np.ndarray:
        """Second parameter derivatives on the ring from interior samples"""
        if boundary_values is None:
            boundary_values = self.boundary_value(values)
        result = np.empty(self.angular_shape + (self.n, self.n))
        result[..., 0, 0] = self.boundary_value(self.radial_second_derivative(values))
        radial_edge = self.boundary_radial_derivative(values)
        for k in range(self.n - 1):
            mixed = self.angular_derivative(radial_edge, k, offset=0)
            result[..., 0, k + 1] = mixed
            result[..., k + 1, 0] = mixed
            for l in range(k, self.n - 1):
                value = self.angular_second_derivative(boundary_values, k, l, offset=0)
                result[..., k + 1, l + 1] = value
                result[..., l + 1, k + 1] = value
        return result

    # quadrature

    def integrate(self, integrand: np.ndarray) -> float:
        """Sum of weights * integrand; the integrand carries sqrt(det g)"""
        return float(np.sum(self.weights * integrand))

    def integrate_ring(self, integrand: np.ndarray) -> float:
        return float(np.sum(self.angular_weights * integrand))


@lru_cache(maxsize=64)
def polar_grid(n: int, boundary_parameter: float, resolution: int) -> PolarGrid:
    """Shared immutable grid instances"""
    return PolarGrid(n, boundary_parameter, resolution)
