import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

from config import get_config
from utils.errors import UsageError
from utils.scenario import Scenario, combine_scenarios

MODELS = ('euclid', 'horoball')
SUBCOMMANDS = (
    'verify-symfun', 'verify-minkowski', 'verify-boundary', 'verify-jacobi', 'verify-ambient',
    'stability', 'rigidity-gaps', 'first-variation', 'convergence', 'all',
)
MIN_RESOLUTION = 8


@dataclass
class RunConfig:
    """One CLI run: the verification matrix plus overrides and output"""
    subcommand: str
    models: List[str] = field(default_factory=lambda: list(MODELS))
    dimensions: List[int] = field(default_factory=list)
    orders: Optional[List[int]] = None
    thetas: List[float] = field(default_factory=list)
    curvature: Optional[float] = None
    resolutions: List[int] = field(default_factory=list)
    scenarios: List[str] = field(default_factory=list)
    tolerances: Dict[str, float] = field(default_factory=dict)
    basis_size: Optional[int] = None
    output: Optional[str] = None

    @classmethod
    def defaults(cls, subcommand: str) -> 'RunConfig':
        config = get_config()
        return cls(
            subcommand=subcommand,
            dimensions=list(config.DEFAULT_DIMENSIONS),
            thetas=list(config.DEFAULT_THETAS),
            resolutions=list(config.DEFAULT_RESOLUTIONS),
            basis_size=config.DEFAULT_BASIS_SIZE,
        )

    @classmethod
    def from_mapping(cls, subcommand: str, values: Dict[str, Any]) -> 'RunConfig':
        """
        Defaults updated by a mapping with the config-file schema

        Raises:
            UsageError: on unknown keys or values of the wrong type
        """
        run = cls.defaults(subcommand)
        known = {f.name for f in fields(cls)} - {'subcommand'}
        aliases = {'model': 'models', 'n': 'dimensions', 'r': 'orders', 'theta': 'thetas',
                   'lambda': 'curvature', 'res': 'resolutions', 'scenario': 'scenarios',
                   'tolerance': 'tolerances'}
        for key, value in values.items():
            name = aliases.get(key, key)
            if name not in known:
                raise UsageError(f"Unknown config key '{key}'", {'known': sorted(known | set(aliases))})
            if value is None:
                continue
            setattr(run, name, _coerce(name, value))
        run.validate()
        return run

    @property
    def scenario(self) -> Optional[Scenario]:
        if not self.scenarios:
            return None
        return combine_scenarios(self.scenarios)

    def orders_for(self, n: int) -> List[int]:
        if self.orders is None:
            return list(range(n))
        return [r for r in self.orders if r < n]

    def curvature_for(self, model: str) -> float:
        if self.curvature is not None:
            return self.curvature
        config = get_config()
        return config.DEFAULT_HYPERBOLIC_LAMBDA if model == 'horoball' else config.DEFAULT_LAMBDA

    def validate(self) -> None:
        """
        Raises:
            UsageError: for empty lists, non-increasing resolutions or out-of-range values
        """
        if self.subcommand not in SUBCOMMANDS:
            raise UsageError(f"Unknown subcommand {self.subcommand}")
        for name in ('models', 'dimensions', 'thetas', 'resolutions'):
            if not getattr(self, name):
                raise UsageError(f"{name} must not be empty")
        if self.orders is not None and not self.orders:
            raise UsageError("orders must not be empty")
        for model in self.models:
            if model not in MODELS:
                raise UsageError(f"Unknown model {model}", {'models': list(MODELS)})
        for n in self.dimensions:
            if n not in (2, 3):
                raise UsageError(f"Dimension {n} is not supported; use 2 or 3")
        for r in self.orders or []:
            if not 0 <= r < max(self.dimensions):
                raise UsageError(f"Order r={r} outside 0..{max(self.dimensions) - 1}")
        for theta in self.thetas:
            if not 0.0 < theta < math.pi:
                raise UsageError(f"Contact angle {theta} outside (0, pi)")
        if self.resolutions[0] < MIN_RESOLUTION:
            raise UsageError(f"Resolutions must be at least {MIN_RESOLUTION}")
        if any(b <= a for a, b in zip(self.resolutions, self.resolutions[1:])):
            raise UsageError("Resolutions must be strictly increasing", {'resolutions': self.resolutions})
        unknown = set(self.tolerances) - set(get_config().TOLERANCES)
        if unknown:
            raise UsageError(f"Unknown tolerance keys: {', '.join(sorted(unknown))}")
        if any(not value > 0.0 for value in self.tolerances.values()):
            raise UsageError("Tolerances must be positive")
        if self.basis_size is not None and self.basis_size < 1:
            raise UsageError("Basis size must be positive")
        if self.scenarios:
            combine_scenarios(self.scenarios)

    def to_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values.pop('output')
        return values


def _coerce(name: str, value: Any) -> Any:
    try:
        if name == 'scenarios':
            return [value] if isinstance(value, str) else [str(item) for item in value]
        if name == 'models':
            return [str(item) for item in _as_list(value)]
        if name in ('dimensions', 'orders', 'resolutions'):
            return [int(item) for item in _as_list(value)]
        if name == 'thetas':
            return [float(item) for item in _as_list(value)]
        if name == 'curvature':
            return float(value)
        if name == 'basis_size':
            return int(value)
        if name == 'tolerances':
            if not isinstance(value, dict):
                raise UsageError("tolerances must map keys to values")
            return {str(key): float(item) for key, item in value.items()}
        return value
    except (TypeError, ValueError):
        raise UsageError(f"Bad value for {name}: {value!r}")


def _as_list(value: Any) -> List[Any]:
    if isinstance(value, str):
        return [item for item in value.split(',') if item.strip()]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]
