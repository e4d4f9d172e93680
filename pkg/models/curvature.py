"""
Curvature value types: principal-curvature spectra, shape operators and
Newton tensors.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from utils.errors import ValidationError


def _frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class CurvatureSpectrum:
    """Principal curvatures kappa_1..kappa_n at one surface point"""
    values: np.ndarray

    def __post_init__(self):
        values = _frozen_array(self.values).reshape(-1)
        if values.size < 1:
            raise ValidationError("Curvature spectrum needs at least one entry")
        if not np.all(np.isfinite(values)):
            raise ValidationError("Curvature spectrum has non-finite entries",
                                  {'values': values.tolist()})
        object.__setattr__(self, 'values', values)

    @classmethod
    def of(cls, values: Sequence[float]) -> 'CurvatureSpectrum':
        return cls(np.asarray(values, dtype=float))

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class ShapeOperator:
    """
    Mixed tensor h_i^j together with the metric it is self-adjoint for.

    `matrix` is S with S = g^{-1} h, so g S = h is symmetric.
    """
    matrix: np.ndarray
    metric: np.ndarray = field(default=None)
    self_adjoint_tol: float = 1e-12

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError("Shape operator must be a square matrix",
                                  {'shape': list(matrix.shape)})
        n = matrix.shape[0]
        metric = np.eye(n) if self.metric is None else np.array(self.metric, dtype=float)
        if metric.shape != (n, n):
            raise ValidationError("Metric and shape operator sizes differ")
        if not np.allclose(metric, metric.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(metric).max())):
            raise ValidationError("Metric is not symmetric")
        smallest = np.linalg.eigvalsh(0.5 * (metric + metric.T)).min()
        if smallest <= 0.0:
            raise ValidationError("Metric is not positive definite",
                                  {'smallest_eigenvalue': float(smallest)})
        lowered = metric @ matrix
        scale = np.linalg.norm(lowered)
        if np.linalg.norm(lowered - lowered.T) > self.self_adjoint_tol * max(scale, 1e-300):
            raise ValidationError("Shape operator is not self-adjoint for the metric",
                                  {'asymmetry': float(np.linalg.norm(lowered - lowered.T))})
        object.__setattr__(self, 'matrix', _frozen_array(matrix))
        object.__setattr__(self, 'metric', _frozen_array(metric))

    @classmethod
    def from_second_fundamental_form(cls, sff: np.ndarray, metric: np.ndarray) -> 'ShapeOperator':
        """Build S = g^{-1} h from the covariant second fundamental form"""
        sff = np.asarray(sff, dtype=float)
        metric = np.asarray(metric, dtype=float)
        return cls(np.linalg.solve(metric, sff), metric)

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> 'ShapeOperator':
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def lowered(self) -> np.ndarray:
        """Symmetrized g S, i.e. h_ij"""
        lowered = self.metric @ self.matrix
        return 0.5 * (lowered + lowered.T)

    def eigen(self):
        """g-orthonormal eigenpairs of S (ascending)"""
        return scipy.linalg.eigh(self.lowered, self.metric)

    def spectrum(self) -> CurvatureSpectrum:
        values = scipy.linalg.eigh(self.lowered, self.metric, eigvals_only=True)
        return CurvatureSpectrum(values)


@dataclass(frozen=True)
class NewtonTensor:
    """P_r as an endomorphism (same index placement as the shape operator)"""
    order: int
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'matrix', _frozen_array(self.matrix))

    def trace(self) -> float:
        return float(np.trace(self.matrix))
