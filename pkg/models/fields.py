"""
Scalar fields on discretized immersions, Robin data, admissible fields and
variation fields.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from utils.errors import ArgumentError, ValidationError

PROVENANCES = ('analytic', 'sampled')

Scalar = Union[int, float]


def _readonly(values: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if values is None:
        return None
    array = np.array(values, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SurfaceField:
    """
    Values of a scalar at the interior nodes and, when known, on the boundary ring.

    `grid_key` ties the field to the node set it was sampled on. Fields
    derived by differentiation carry no boundary values.
    """
    interior: np.ndarray
    boundary: Optional[np.ndarray] = None
    grid_key: Tuple = ()
    provenance: str = 'sampled'
    name: str = ''

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValidationError(f"Unknown field provenance {self.provenance}")
        object.__setattr__(self, 'interior', _readonly(self.interior))
        object.__setattr__(self, 'boundary', _readonly(self.boundary))
        if not np.all(np.isfinite(self.interior)):
            raise ValidationError(f"Field {self.name or '<unnamed>'} has non-finite values")

    @property
    def has_boundary(self) -> bool:
        return self.boundary is not None

    def matches(self, grid_key: Tuple) -> bool:
        return tuple(self.grid_key) == tuple(grid_key)

    def require(self, grid_key: Tuple) -> None:
        if not self.matches(grid_key):
            raise ArgumentError("Field was sampled on a different node set",
                                {'field': list(self.grid_key), 'immersion': list(grid_key)})

    def sup(self) -> float:
        values = [np.abs(self.interior).max()]
        if self.boundary is not None:
            values.append(np.abs(self.boundary).max())
        return float(max(values))

    def renamed(self, name: str) -> 'SurfaceField':
        return SurfaceField(self.interior, self.boundary, self.grid_key, self.provenance, name)

    def _combine(self, other, op, symbol: str) -> 'SurfaceField':
        if isinstance(other, SurfaceField):
            if not self.matches(other.grid_key):
                raise ArgumentError("Cannot combine fields sampled on different node sets")
            interior = op(self.interior, other.interior)
            boundary = None
            if self.boundary is not None and other.boundary is not None:
                boundary = op(self.boundary, other.boundary)
            provenance = 'analytic' if self.provenance == other.provenance == 'analytic' else 'sampled'
            name = f"({self.name}{symbol}{other.name})"
        else:
            interior = op(self.interior, other)
            boundary = None if self.boundary is None else op(self.boundary, other)
            provenance = self.provenance
            name = self.name
        return SurfaceField(interior, boundary, self.grid_key, provenance, name)

    def __add__(self, other):
        return self._combine(other, np.add, '+')

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract, '-')

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        return self._combine(other, np.multiply, '*')

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, np.divide, '/')

    def __neg__(self):
        return self * -1.0


@dataclass(frozen=True)
class RobinData:
    """q = kappa csc(theta) + cot(theta) h(mu, mu) at every boundary node"""
    q: np.ndarray
    grid_key: Tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'q', _readonly(self.q))


@dataclass(frozen=True)
class AdmissibleField:
    """A candidate member of the admissible space with its measured defects"""
    field: SurfaceField
    mean_residual: float
    robin_residual: float
    scale: float
    tolerance: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def admissible(self) -> bool:
        bound = self.tolerance * max(self.scale, 1.0)
        return abs(self.mean_residual) <= bound and self.robin_residual <= bound

    def residuals(self) -> Dict[str, float]:
        return {'mean': float(self.mean_residual), 'robin': float(self.robin_residual)}


@dataclass(frozen=True)
class VariationField:
    """
    Y = f nu + T. `tangential` holds T at interior nodes and
    `boundary_tangential` on the ring, both in chart components.
    """
    normal_speed: SurfaceField
    tangential: np.ndarray
    boundary_tangential: np.ndarray
    compatibility_residual: float = 0.0
    label: str = 'variation'
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.normal_speed.boundary is None:
            raise ValidationError("Variation speed needs boundary values")
        object.__setattr__(self, 'tangential', _readonly(self.tangential))
        object.__setattr__(self, 'boundary_tangential', _readonly(self.boundary_tangential))

    @property
    def is_zero(self) -> bool:
        return (not np.any(self.normal_speed.interior) and not np.any(self.normal_speed.boundary)
                and not np.any(self.tangential) and not np.any(self.boundary_tangential))
