"""One-at-a-time sweeps over index inputs and scenario parameters."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .risk import AleScenario, UncertainValue, evaluate_scenario
from .tiei import COMPONENTS, SCORE_FLOOR, ScoreVector, TieiWeights, compute_tiei

SCENARIO_PARAMS = ("lef0", "reduction", "lm", "cti_cost")


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep and over which grid.

    ``target`` is ``"tiei:<Q|E|I|O>"`` or ``"scenario:<lef0|reduction|lm|cti_cost>"``.
    ``base`` is ``(ScoreVector, TieiWeights)`` for index sweeps and an
    :class:`AleScenario` for scenario sweeps. Grid points are evenly spaced with
    both endpoints included.
    """

    target: str
    lo: float
    hi: float
    steps: int
    base: object

    def __post_init__(self):
        kind, _, param = self.target.partition(":")
        if kind == "tiei":
            if param not in COMPONENTS:
                raise ValidationError(f"unknown index component {param!r}; expected one of {COMPONENTS}")
        elif kind == "scenario":
            if param not in SCENARIO_PARAMS:
                raise ValidationError(f"unknown scenario parameter {param!r}; expected one of {SCENARIO_PARAMS}")
        else:
            raise ValidationError(f"sweep target must start with 'tiei:' or 'scenario:', got {self.target!r}")
        if not self.lo < self.hi:
            raise ValidationError(f"sweep range needs lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValidationError(f"sweep needs at least 2 steps, got {self.steps}")

    @property
    def kind(self):
        return self.target.partition(":")[0]

    @property
    def param(self):
        return self.target.partition(":")[2]

    def grid(self):
        return np.linspace(self.lo, self.hi, int(self.steps))


@dataclass(frozen=True)
class CurvePoint:
    x: float
    outputs: dict
    # "floored", "cti_cost=0" and similar per-point remarks
    notes: tuple[str, ...] = field(default=())

    @property
    def flagged(self):
        return not self.outputs


def sweep_tiei(spec: SweepSpec) -> list[CurvePoint]:
    if spec.kind != "tiei":
        raise ValidationError(f"sweep_tiei needs a tiei:<component> target, got {spec.target!r}")
    scores, weights = spec.base
    if not isinstance(scores, ScoreVector) or not isinstance(weights, TieiWeights):
        raise ValidationError("index sweeps need (ScoreVector, TieiWeights) as base", code="E102")
    if spec.hi > 100:
        raise ValidationError(f"scores cannot exceed 100, sweep goes to {spec.hi}")
    points = []
    for x in spec.grid():
        x = float(x)
        notes = ()
        value = x
        if x < SCORE_FLOOR:
            value = SCORE_FLOOR
            notes = (f"{spec.param} clipped to floor {SCORE_FLOOR:g}",)
        r = compute_tiei(scores.replace(spec.param, value), weights)
        points.append(CurvePoint(x, {"tiei": r.tiei, "linear": r.linear}, notes))
    return points


def _with_param(s: AleScenario, param, x):
    if param in ("lef0", "lm"):
        return dataclasses.replace(s, **{param: UncertainValue.point(x)})
    if param == "reduction":
        if s.reduction is None:
            raise ValidationError("scenario gives lef_cti explicitly; it has no reduction to sweep")
        return dataclasses.replace(s, reduction=x)
    return dataclasses.replace(s, cti_cost=x)


def _roi_at(s: AleScenario, param, x):
    scenario = _with_param(s, param, x)
    if scenario.cti_cost == 0:
        return CurvePoint(x, {}, ("cti_cost=0",))
    return CurvePoint(x, {"roi_ratio": evaluate_scenario(scenario).roi_ratio})


def sweep_scenario(spec: SweepSpec) -> list[CurvePoint]:
    if spec.kind != "scenario":
        raise ValidationError(f"sweep_scenario needs a scenario:<param> target, got {spec.target!r}")
    s = spec.base
    if not isinstance(s, AleScenario):
        raise ValidationError("scenario sweeps need an AleScenario as base", code="E102")
    return [_roi_at(s, spec.param, float(x)) for x in spec.grid()]


@dataclass(frozen=True)
class TornadoBar:
    param: str
    lo: float
    hi: float
    # None when that endpoint zeroes the CTI cost
    roi_lo: float | None
    roi_hi: float | None

    @property
    def swing(self):
        if self.roi_lo is None or self.roi_hi is None:
            return None
        return abs(self.roi_hi - self.roi_lo)


def tornado(scenario: AleScenario, spans: dict) -> list[TornadoBar]:
    """ROI at each parameter's low and high value, others held at base.

    Bars are ordered by swing, largest first, ties broken by parameter name;
    bars with a flagged (zero-cost) endpoint go last.
    """
    bars = []
    for param, (lo, hi) in spans.items():
        if param not in SCENARIO_PARAMS:
            raise ValidationError(f"unknown scenario parameter {param!r}", code="E103")
        ends = [_roi_at(scenario, param, float(x)) for x in (lo, hi)]
        rois = [None if p.flagged else p.outputs["roi_ratio"] for p in ends]
        bars.append(TornadoBar(param, float(lo), float(hi), *rois))
    return sorted(bars, key=lambda b: (b.swing is None, -(b.swing or 0.0), b.param))
