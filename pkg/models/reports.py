import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

VERDICT_PASS = 'pass'
VERDICT_FAIL = 'fail'
VERDICT_PENDING = 'pending'


def to_plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into JSON-ready values"""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


@dataclass
class VerificationReport:
    """One verifier run: residual per resolution, order estimate and verdict"""
    identity: str
    model: str
    n: int
    r: Optional[int]
    theta: Optional[float]
    tolerance: float
    resolutions: List[int] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    components: Dict[str, List[float]] = field(default_factory=dict)
    values: Dict[str, Any] = field(default_factory=dict)
    order: Optional[float] = None
    verdict: str = VERDICT_PENDING
    normalizer: str = ''
    metadata: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == VERDICT_PASS

    @property
    def finest(self) -> Optional[float]:
        return self.residuals[-1] if self.residuals else None

    @property
    def name(self) -> str:
        parts = [self.identity, self.model, f"n={self.n}"]
        if self.r is not None:
            parts.append(f"r={self.r}")
        if self.theta is not None:
            parts.append(f"theta={self.theta:.6g}")
        label = self.metadata.get('scenario')
        if label:
            parts.append(str(label))
        return ' '.join(parts)

    @classmethod
    def for_surface(cls, identity: str, M: Any, r: Optional[int], tolerance: float,
                    normalizer: str = '') -> 'VerificationReport':
        """Empty report labelled with the model, dimension and angle of an immersion"""
        metadata = M.patch.metadata
        theta = metadata.get('theta', M.theta)
        return cls(
            identity=identity,
            model=M.space.tag,
            n=M.n,
            r=r,
            theta=float(theta),
            tolerance=float(tolerance),
            normalizer=normalizer,
            metadata={'scenario': M.patch.label, 'degenerate': bool(metadata.get('degenerate', False))},
        )

    @staticmethod
    def roundoff_level(floor: float, resolution: int) -> float:
        """Roundoff level at one resolution; second derivatives on the spectral grid grow like N^4"""
        return floor * max(resolution, 1) ** 4

    def estimate_order(self, floor: float) -> Optional[float]:
        """Log-ratio order from the last pair of residuals above their roundoff level"""
        order = None
        for k in range(1, len(self.residuals)):
            coarse, fine = self.residuals[k - 1], self.residuals[k]
            if (coarse > self.roundoff_level(floor, self.resolutions[k - 1])
                    and fine > self.roundoff_level(floor, self.resolutions[k])
                    and self.resolutions[k] > self.resolutions[k - 1]):
                order = math.log(coarse / fine) / math.log(self.resolutions[k] / self.resolutions[k - 1])
        return order

    def judge(self, min_order: float, floor: float, slack: float = 0.0,
              roundoff: Optional[float] = None) -> str:
        """
        A single level passes iff its residual is within tolerance. A sweep
        over several levels also needs the observed order to reach
        min_order - slack, unless the finest residual is already at its
        roundoff level.

        Args:
            min_order: required log-ratio order
            floor: roundoff per unit N^4
            slack: allowance below min_order
            roundoff: fixed roundoff level when the levels are not grid resolutions
        """
        if not self.residuals:
            self.verdict = VERDICT_FAIL
            return self.verdict
        self.order = self.estimate_order(floor)
        within = self.residuals[-1] <= self.tolerance
        if len(self.residuals) == 1:
            converged = True
        else:
            level = self.roundoff_level(floor, self.resolutions[-1]) if roundoff is None else roundoff
            at_roundoff = self.residuals[-1] <= level
            converged = at_roundoff or (self.order is not None and self.order >= min_order - slack)
        self.verdict = VERDICT_PASS if within and converged else VERDICT_FAIL
        return self.verdict

    def add_level(self, resolution: int, residual: float, components: Optional[Dict[str, float]] = None) -> None:
        self.resolutions.append(int(resolution))
        self.residuals.append(float(residual))
        for key, value in (components or {}).items():
            self.components.setdefault(key, []).append(float(value))

    def to_dict(self) -> Dict[str, Any]:
        return to_plain({
            'identity': self.identity,
            'model': self.model,
            'n': self.n,
            'r': self.r,
            'theta': self.theta,
            'tolerance': self.tolerance,
            'resolutions': self.resolutions,
            'residuals': self.residuals,
            'components': self.components,
            'values': self.values,
            'order': self.order,
            'verdict': self.verdict,
            'normalizer': self.normalizer,
            'metadata': self.metadata,
            'warnings': self.warnings,
        })


@dataclass
class QuadraticFormReport:
    """Q_r(phi) = -int phi J_r phi dA with its integrand and admissibility data"""
    value: float
    r: int
    integrand: np.ndarray
    admissibility: Dict[str, float]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return to_plain({
            'value': self.value,
            'r': self.r,
            'integrand_extremes': [float(np.min(self.integrand)), float(np.max(self.integrand))],
            'admissibility': self.admissibility,
            'metadata': self.metadata,
        })


@dataclass
class FunctionalLedger:
    """Capillary functionals per time sample along a flow"""
    times: List[float] = field(default_factory=list)
    curvature_integrals: List[List[float]] = field(default_factory=list)
    wetting: List[List[float]] = field(default_factory=list)
    quermass: List[List[float]] = field(default_factory=list)
    energies: List[List[float]] = field(default_factory=list)
    volume: List[float] = field(default_factory=list)
    wetted_sweep: List[float] = field(default_factory=list)
    consistency: float = 0.0

    def sample(self, index: int) -> Dict[str, Any]:
        return {
            't': self.times[index],
            'A': self.curvature_integrals[index],
            'W': self.wetting[index],
            'Q': self.quermass[index],
            'E': self.energies[index],
            'V': self.volume[index],
        }

    def to_dict(self) -> Dict[str, Any]:
        return to_plain({
            'times': self.times,
            'A': self.curvature_integrals,
            'W': self.wetting,
            'Q': self.quermass,
            'E': self.energies,
            'V': self.volume,
            'W0_sweep': self.wetted_sweep,
            'consistency': self.consistency,
        })


@dataclass
class FlowResult:
    """Surfaces along a flow together with the independently integrated ledger"""
    surfaces: List[Any]
    boundary_speeds: List[np.ndarray]
    dt: float
    deviations: Dict[str, List[float]] = field(default_factory=dict)
    boundary_drift: List[float] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.surfaces) - 1

    def max_deviation(self) -> Dict[str, float]:
        return {key: float(max(values)) if values else 0.0 for key, values in self.deviations.items()}

    def consistency_constant(self) -> float:
        """C with deviation <= C dt^2"""
        worst = max(self.max_deviation().values(), default=0.0)
        return worst / self.dt ** 2
