"""
Hypersurface-with-boundary value types: parametric patches, their jets and
the discretized immersion with per-node curvature data and boundary frames.
"""

from dataclasses import dataclass, field
from math import comb
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from models.space_form import SpaceForm
from utils.errors import ArgumentError, ValidationError


@dataclass(frozen=True)
class SurfaceJet:
    """Chart position x(u) with dx/du^i and d^2x/du^i du^j"""
    points: np.ndarray
    first: np.ndarray
    second: np.ndarray


@dataclass(frozen=True)
class SampledEmbedding:
    """Node positions on a polar grid, plus normal orientation hints"""
    resolution: int
    interior: np.ndarray
    boundary: np.ndarray
    interior_hint: np.ndarray
    boundary_hint: np.ndarray


@dataclass(frozen=True)
class ParametricPatch:
    """
    Embedding of the polar parameter ball {s < boundary_parameter}.

    Exactly one of `jet` (analytic derivatives) or `samples` (node
    positions) may be set; with neither, derivatives come from 4th-order
    central differences of `embedding`.
    """
    n: int
    boundary_parameter: float
    embedding: Optional[Callable[[np.ndarray], np.ndarray]] = None
    jet: Optional[Callable[[np.ndarray], SurfaceJet]] = None
    normal_center: Optional[np.ndarray] = None
    support_height: float = 0.0
    scale: float = 1.0
    label: str = 'patch'
    metadata: Dict[str, Any] = field(default_factory=dict)
    samples: Optional[SampledEmbedding] = None

    def __post_init__(self):
        if self.n < 1:
            raise ArgumentError(f"Patch dimension must be positive, got {self.n}")
        if not self.boundary_parameter > 0.0:
            raise ValidationError("Boundary parameter must be positive",
                                  {'boundary_parameter': self.boundary_parameter})
        if self.samples is None and self.embedding is None and self.jet is None:
            raise ValidationError("Patch needs an embedding, a jet or node samples")
        if self.samples is not None and self.jet is not None:
            raise ValidationError("A sampled patch cannot also carry analytic jets")

    @property
    def analytic(self) -> bool:
        return self.jet is not None

    @property
    def sampled(self) -> bool:
        return self.samples is not None

    @property
    def derivative_source(self) -> str:
        if self.analytic:
            return 'analytic'
        if self.sampled:
            return 'spectral'
        return 'finite-difference'


@dataclass(frozen=True)
class NodeGeometry:
    """
    Curvature data at a stack of nodes.

    Index conventions: tangents[..., i, :] = x_i in chart components;
    metric / second_form are covariant; christoffel[..., k, i, j] = Gamma^k_ij;
    cholesky L with g = L L^T; frame_shape = L^{-1} h L^{-T}; newton[r] is
    P_r in that orthonormal frame.
    """
    points: np.ndarray
    tangents: np.ndarray
    second_derivatives: np.ndarray
    conformal: np.ndarray
    metric: np.ndarray
    inverse_metric: np.ndarray
    normal: np.ndarray
    second_form: np.ndarray
    christoffel: np.ndarray
    cholesky: np.ndarray
    frame_shape: np.ndarray
    curvatures: np.ndarray
    sigma: np.ndarray
    newton: np.ndarray
    area_element: np.ndarray

    @property
    def n(self) -> int:
        return int(self.metric.shape[-1])

    @property
    def shape_operator(self) -> np.ndarray:
        """S = g^{-1} h"""
        return self.inverse_metric @ self.second_form

    @property
    def mean_curvature(self) -> np.ndarray:
        """Unnormalized H = sigma_1"""
        return self.sigma[..., 1]

    def normalized(self, k: int) -> np.ndarray:
        if k < 0 or k > self.n:
            return np.zeros(self.sigma.shape[:-1])
        return self.sigma[..., k] / comb(self.n, k)


@dataclass(frozen=True)
class BoundaryTrace:
    """Contact frame and boundary curvature data on the ring s = s_b"""
    geometry: NodeGeometry
    conormal_parameter: np.ndarray
    conormal: np.ndarray
    support_normal: np.ndarray
    support_tangent: np.ndarray
    sin_theta: np.ndarray
    cos_theta: np.ndarray
    line_element: np.ndarray
    line_weights: np.ndarray
    h_mu_mu: np.ndarray
    principal_residual: np.ndarray
    boundary_second_form: np.ndarray
    boundary_sigma: np.ndarray
    newton_mu: np.ndarray
    frame_residual: np.ndarray

    @property
    def theta(self) -> np.ndarray:
        return np.arctan2(self.sin_theta, self.cos_theta)

    @property
    def points(self) -> np.ndarray:
        return self.geometry.points

    @property
    def normal(self) -> np.ndarray:
        return self.geometry.normal


@dataclass(frozen=True)
class NodeRecord:
    """One interior node, as a flat record"""
    parameter: np.ndarray
    point: np.ndarray
    tangents: np.ndarray
    metric: np.ndarray
    normal: np.ndarray
    second_form: np.ndarray
    curvatures: np.ndarray
    area_weight: float


@dataclass(frozen=True)
class DiscreteImmersion:
    """A patch sampled on a polar grid, with interior and boundary geometry"""
    patch: ParametricPatch
    space: SpaceForm
    grid: Any
    interior: NodeGeometry
    boundary: BoundaryTrace

    @property
    def n(self) -> int:
        return self.patch.n

    @property
    def resolution(self) -> int:
        return self.grid.resolution

    @property
    def key(self) -> Tuple[int, int, float]:
        return self.grid.key

    @property
    def node_count(self) -> int:
        return int(np.prod(self.grid.shape))

    @property
    def theta(self) -> float:
        """Mean contact angle along the boundary"""
        return float(np.mean(self.boundary.theta))

    @property
    def area_weights(self) -> np.ndarray:
        return self.grid.weights * self.interior.area_element

    def node(self, index: int) -> NodeRecord:
        if not 0 <= index < self.node_count:
            raise ArgumentError(f"Node index {index} outside 0..{self.node_count - 1}")
        where = np.unravel_index(index, self.grid.shape)
        geometry = self.interior
        return NodeRecord(
            parameter=self.grid.params[where].copy(),
            point=geometry.points[where].copy(),
            tangents=geometry.tangents[where].copy(),
            metric=geometry.metric[where].copy(),
            normal=geometry.normal[where].copy(),
            second_form=geometry.second_form[where].copy(),
            curvatures=geometry.curvatures[where].copy(),
            area_weight=float(self.area_weights[where]),
        )

    def describe(self) -> Dict[str, Any]:
        return {
            'label': self.patch.label,
            'model': self.space.model,
            'n': self.n,
            'resolution': self.resolution,
            'theta': self.theta,
            'derivatives': self.patch.derivative_source,
        }
