from dataclasses import dataclass
from typing import Optional

import numpy as np

from utils.errors import ArgumentError, ValidationError

EUCLIDEAN = 'euclidean-half-space'
HYPERBOLIC = 'hyperbolic-upper-half-space'

_SUPPORTED = {
    EUCLIDEAN: (0.0, 0.0, 0.0),
    HYPERBOLIC: (-1.0, 1.0, 1.0),
}


@dataclass(frozen=True)
class SpaceForm:
    """Ambient model with its support hypersurface"""
    model: str
    n: int
    curvature: float
    support_curvature: float
    support_height: float

    def __post_init__(self):
        if self.model not in _SUPPORTED:
            raise ArgumentError(f"Unknown model {self.model}")
        if self.n < 1:
            raise ArgumentError(f"Hypersurface dimension must be positive, got {self.n}")
        if (self.curvature, self.support_curvature, self.support_height) != _SUPPORTED[self.model]:
            raise ValidationError(
                f"Unsupported (K, kappa) pair for {self.model}",
                {'K': self.curvature, 'kappa': self.support_curvature},
            )
        if self.tau != 0.0:
            raise ValidationError("Implemented supports must have K + kappa^2 = 0",
                                  {'tau': self.tau})

    @property
    def tau(self) -> float:
        return self.curvature + self.support_curvature ** 2

    @property
    def ambient_dimension(self) -> int:
        return self.n + 1

    @property
    def is_hyperbolic(self) -> bool:
        return self.model == HYPERBOLIC

    @property
    def tag(self) -> str:
        return 'horoball' if self.is_hyperbolic else 'euclid'


@dataclass(frozen=True)
class VectorJet:
    """Value and flat Jacobian (d Z^A / d x^B) of a vector field at a point"""
    value: np.ndarray
    jacobian: Optional[np.ndarray] = None


@dataclass(frozen=True)
class CanonicalFields:
    """x, E_{n+1}, X_{n+1} = x - E_{n+1}, V_{n+1} and the frame E-bar_A at a point"""
    position: np.ndarray
    vertical: np.ndarray
    conformal: np.ndarray
    potential: float
    frame: np.ndarray
