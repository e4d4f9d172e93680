"""
Scenario strings used by the CLI.

    euclid-cap:n=2,lambda=1,theta=1.0472
    horoball-cap:n=3,lambda=2,theta=2.0944
    perturbed:euclid-cap:n=2,lambda=1,theta=1.5708,amp=0.05,mode=2
    flow:scale | flow:normal-unit | flow:from-phi
"""

import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

from utils.errors import UsageError

CAP_KINDS = {'euclid-cap': 'euclid', 'horoball-cap': 'horoball'}
FLOW_KINDS = ('scale', 'normal-unit', 'from-phi')

_CAP_KEYS = {'n': int, 'lambda': float, 'theta': float}
_PERTURBATION_KEYS = {'amp': float, 'mode': int}


@dataclass(frozen=True)
class Scenario:
    """A surface family and, optionally, a flow on it"""
    model: Optional[str] = None
    n: Optional[int] = None
    curvature: Optional[float] = None
    theta: Optional[float] = None
    amplitude: float = 0.0
    mode: int = 2
    flow: Optional[str] = None

    @property
    def perturbed(self) -> bool:
        return self.amplitude != 0.0

    @property
    def hemisphere(self) -> bool:
        """Unperturbed Euclidean cap at a right contact angle; theta is matched to CLI precision"""
        return (self.model == 'euclid' and not self.perturbed and self.theta is not None
                and abs(self.theta - math.pi / 2) < 1e-4)

    @property
    def complete(self) -> bool:
        return None not in (self.model, self.n, self.curvature, self.theta)

    def with_defaults(self, model: str, n: int, curvature: float, theta: float) -> 'Scenario':
        """Fill unset surface fields from the run configuration"""
        return replace(
            self,
            model=self.model if self.model is not None else model,
            n=self.n if self.n is not None else n,
            curvature=self.curvature if self.curvature is not None else curvature,
            theta=self.theta if self.theta is not None else theta,
        )

    def label(self) -> str:
        parts = []
        if self.complete:
            base = f"{self.model}-cap:n={self.n},lambda={self.curvature:g},theta={self.theta:.6g}"
            if self.perturbed:
                base = f"perturbed:{base},amp={self.amplitude:g},mode={self.mode}"
            parts.append(base)
        if self.flow:
            parts.append(f"flow:{self.flow}")
        return ' '.join(parts)

    def to_dict(self) -> Dict[str, object]:
        return {
            'model': self.model,
            'n': self.n,
            'lambda': self.curvature,
            'theta': self.theta,
            'amp': self.amplitude,
            'mode': self.mode,
            'flow': self.flow,
        }


def _parse_pairs(text: str, allowed: Dict[str, type], source: str) -> Dict[str, object]:
    values: Dict[str, object] = {}
    for item in filter(None, (part.strip() for part in text.split(','))):
        key, sep, raw = item.partition('=')
        key = key.strip()
        if not sep or key not in allowed:
            raise UsageError(f"Unexpected field '{item}' in scenario '{source}'",
                             {'allowed': sorted(allowed)})
        try:
            values[key] = allowed[key](raw.strip())
        except ValueError:
            raise UsageError(f"Bad value for {key} in scenario '{source}': {raw!r}")
    return values


def _split_perturbation(body: str, source: str) -> Tuple[str, Dict[str, object]]:
    """Separate amp=/mode= fields from the base cap description"""
    base, extra = [], []
    for item in body.split(','):
        key = item.partition('=')[0].strip()
        (extra if key in _PERTURBATION_KEYS else base).append(item)
    return ','.join(base), _parse_pairs(','.join(extra), _PERTURBATION_KEYS, source)


def parse_scenario(text: str) -> Scenario:
    """
    Parse a scenario string

    Args:
        text: one of the forms in the module docstring

    Returns:
        Scenario with every field the string sets

    Raises:
        UsageError: on an unknown kind, key or value
    """
    source = text
    text = text.strip()
    kind, sep, body = text.partition(':')
    if not sep:
        raise UsageError(f"Scenario '{source}' has no kind prefix")

    if kind == 'flow':
        if body not in FLOW_KINDS:
            raise UsageError(f"Unknown flow '{body}'", {'flows': list(FLOW_KINDS)})
        return Scenario(flow=body)

    perturbation: Dict[str, object] = {}
    if kind == 'perturbed':
        body, perturbation = _split_perturbation(body, source)
        kind, sep, body = body.partition(':')
        if not sep:
            raise UsageError(f"Perturbed scenario '{source}' needs a base cap")
        if 'amp' not in perturbation:
            perturbation['amp'] = 0.05

    if kind not in CAP_KINDS:
        raise UsageError(f"Unknown scenario kind '{kind}'", {'kinds': sorted(CAP_KINDS) + ['perturbed', 'flow']})
    values = _parse_pairs(body, _CAP_KEYS, source)
    scenario = Scenario(
        model=CAP_KINDS[kind],
        n=values.get('n'),
        curvature=values.get('lambda'),
        theta=values.get('theta'),
        amplitude=float(perturbation.get('amp', 0.0)),
        mode=int(perturbation.get('mode', 2)),
    )
    if perturbation and scenario.amplitude == 0.0:
        raise UsageError(f"Perturbed scenario '{source}' needs a nonzero amplitude")
    return scenario


def combine_scenarios(texts) -> Scenario:
    """Merge a surface scenario and a flow scenario given separately"""
    merged = Scenario()
    for text in texts:
        part = parse_scenario(text)
        if part.flow:
            merged = replace(merged, flow=part.flow)
        else:
            merged = replace(part, flow=merged.flow)
    return merged
