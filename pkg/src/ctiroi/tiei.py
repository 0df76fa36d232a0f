"""Threat Intelligence Effectiveness Index.

Raw sub-metric measurements are normalized to 0-100 against analyst-supplied
targets, combined into the four component scores (Quality, Enrichment,
Integration, Operational impact) with a weighted arithmetic mean, optionally
shrunk toward a neutral prior when the data is shaky, floored at 1 and finally
combined with a weighted geometric mean::

    TIEI = 100 * prod((s_k / 100) ** w_k)

The linear aggregate ``sum(w_k * s_k)`` is always reported next to it; by the
weighted AM-GM inequality it is never below the index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import DivisionByZeroError, ValidationError

COMPONENTS = ("Q", "E", "I", "O")

SCORE_FLOOR = 1.0
WEIGHT_EPS = 1e-9
# weight vectors this close to 1 are renormalized instead of rejected
WEIGHT_RENORM_TOL = 1e-6


class NormRule(enum.Enum):
    RATE_VS_TARGET = "rate_vs_target"
    TIMELINESS_INVERSE = "timeliness_inverse"
    DELTA_VS_TARGET = "delta_vs_target"
    DIRECT_PERCENT = "direct_percent"


def _finite(x, what):
    try:
        x = float(x)
    except (TypeError, ValueError):
        raise ValidationError(f"{what} must be a real number, got {x!r}", code="E102") from None
    if not math.isfinite(x):
        raise ValidationError(f"{what} must be finite, got {x!r}")
    return x


def _clamp(x, lo=0.0, hi=100.0):
    return min(max(x, lo), hi)


def _check_weights(values, what):
    """Return ``values`` as floats summing to 1, renormalizing near misses."""
    ws = [_finite(w, what) for w in values]
    if any(w <= 0 for w in ws):
        raise ValidationError(f"{what} must all be strictly positive: {ws}")
    total = math.fsum(ws)
    if abs(total - 1.0) > WEIGHT_RENORM_TOL:
        raise ValidationError(f"{what} sum to {total:.9g}, expected 1", code="E104")
    if abs(total - 1.0) > WEIGHT_EPS:
        ws = [w / total for w in ws]
    return ws


@dataclass(frozen=True)
class SubMetricSpec:
    name: str
    kind: NormRule
    target: float
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "kind", NormRule(self.kind))
        target = _finite(self.target, f"target of {self.name!r}")
        if target <= 0:
            raise ValidationError(f"target of {self.name!r} must be > 0, got {target}")
        weight = _finite(self.weight, f"weight of {self.name!r}")
        if not 0 < weight <= 1:
            raise ValidationError(f"weight of {self.name!r} must lie in (0, 1], got {weight}")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "weight", weight)


@dataclass(frozen=True)
class ComponentRubric:
    component: str
    submetrics: tuple[SubMetricSpec, ...]

    def __post_init__(self):
        if self.component not in COMPONENTS:
            raise ValidationError(f"unknown component {self.component!r}; expected one of {COMPONENTS}")
        subs = tuple(self.submetrics)
        if not subs:
            raise ValidationError(f"rubric {self.component} has no sub-metrics")
        ws = _check_weights([s.weight for s in subs], f"sub-metric weights of {self.component}")
        subs = tuple(
            s if s.weight == w else SubMetricSpec(s.name, s.kind, s.target, w)
            for s, w in zip(subs, ws)
        )
        object.__setattr__(self, "submetrics", subs)

    @property
    def names(self):
        return tuple(s.name for s in self.submetrics)


@dataclass(frozen=True)
class ScoreVector:
    """Four floored component scores, each in [1, 100]."""

    q: float
    e: float
    i: float
    o: float

    def __post_init__(self):
        for name, x in zip(COMPONENTS, (self.q, self.e, self.i, self.o)):
            x = _finite(x, f"{name} score")
            if x < SCORE_FLOOR:
                raise ValidationError(
                    f"{name} score {x} is below the floor of {SCORE_FLOOR:g}; floor it first"
                )
            if x > 100:
                raise ValidationError(f"{name} score {x} exceeds 100")
            object.__setattr__(self, name.lower(), x)

    @classmethod
    def floored(cls, q, e, i, o):
        """Build a vector after applying the floor of 1 to each score."""
        return cls(*(max(_finite(x, "score"), SCORE_FLOOR) for x in (q, e, i, o)))

    def as_tuple(self):
        return (self.q, self.e, self.i, self.o)

    def replace(self, component, value):
        vals = dict(zip(COMPONENTS, self.as_tuple()))
        vals[component] = value
        return ScoreVector(*(vals[c] for c in COMPONENTS))


@dataclass(frozen=True)
class TieiWeights:
    w_q: float
    w_e: float
    w_i: float
    w_o: float

    def __post_init__(self):
        ws = _check_weights((self.w_q, self.w_e, self.w_i, self.w_o), "TIEI weights")
        for name, w in zip(("w_q", "w_e", "w_i", "w_o"), ws):
            object.__setattr__(self, name, w)

    def as_tuple(self):
        return (self.w_q, self.w_e, self.w_i, self.w_o)


@dataclass(frozen=True)
class ConfidencePolicy:
    confidence: float
    prior: float = 50.0

    def __post_init__(self):
        c = _finite(self.confidence, "confidence")
        if not 0 <= c <= 1:
            raise ValidationError(f"confidence must lie in [0, 1], got {c}")
        p = _finite(self.prior, "prior")
        if not SCORE_FLOOR <= p <= 100:
            raise ValidationError(f"prior must lie in [1, 100], got {p}")
        object.__setattr__(self, "confidence", c)
        object.__setattr__(self, "prior", p)


@dataclass(frozen=True)
class TieiResult:
    tiei: float
    linear: float
    component_scores: ScoreVector
    weights: TieiWeights
    # components whose pre-floor score was exactly 0 (absent capability)
    annotations: tuple[str, ...] = field(default=())


def normalize_submetric(spec: SubMetricSpec, raw: float) -> float:
    """Map one raw measurement onto [0, 100] using ``spec``'s rule."""
    raw = _finite(raw, f"raw value of {spec.name!r}")
    ratio = raw / spec.target
    kind = spec.kind
    if kind is NormRule.DELTA_VS_TARGET:
        # regressions (negative improvement) score 0
        return _clamp(100.0 * ratio)
    if raw < 0:
        raise ValidationError(f"raw value of {spec.name!r} must be >= 0 for {kind.value}, got {raw}")
    if kind is NormRule.RATE_VS_TARGET:
        return _clamp(100.0 * ratio)
    if kind is NormRule.TIMELINESS_INVERSE:
        return _clamp(100.0 - 100.0 * ratio)
    return _clamp(raw)


def aggregate_component(rubric: ComponentRubric, raws: Sequence[float]) -> float:
    raws = list(raws)
    if len(raws) != len(rubric.submetrics):
        raise ValidationError(
            f"rubric {rubric.component} expects {len(rubric.submetrics)} raw values, got {len(raws)}"
        )
    total = math.fsum(s.weight * normalize_submetric(s, r) for s, r in zip(rubric.submetrics, raws))
    return _clamp(total)


def confidence_adjust(score: float, policy: ConfidencePolicy) -> float:
    """Shrink ``score`` toward ``policy.prior`` and apply the floor of 1.

    Full confidence leaves the score unchanged (apart from the floor); zero
    confidence replaces it with the prior.
    """
    score = _finite(score, "score")
    if not 0 <= score <= 100:
        raise ValidationError(f"score must lie in [0, 100], got {score}")
    c = policy.confidence
    return max(c * score + (1.0 - c) * policy.prior, SCORE_FLOOR)


def linear_aggregate(scores: ScoreVector, weights: TieiWeights) -> float:
    return math.fsum(w * s for w, s in zip(weights.as_tuple(), scores.as_tuple()))


def _geometric(scores, weights):
    return 100.0 * math.exp(math.fsum(w * math.log(s / 100.0) for w, s in zip(weights, scores)))


def compute_tiei(scores: ScoreVector, weights: TieiWeights, annotations=()) -> TieiResult:
    s = scores.as_tuple()
    if any(x < SCORE_FLOOR for x in s):  # unreachable through ScoreVector, kept for duck-typed input
        raise ValidationError("scores must be floored to >= 1 before computing the index")
    w = weights.as_tuple()
    tiei = _geometric(s, w)
    linear = linear_aggregate(scores, weights)
    # the log-space product can drift a few ulps above the mean at equal scores
    tiei = min(tiei, linear)
    return TieiResult(tiei, linear, scores, weights, tuple(annotations))


def relative_change(before: float, after: float) -> float:
    """Percent change from ``before`` to ``after``."""
    before = _finite(before, "before")
    after = _finite(after, "after")
    if before == 0:
        raise DivisionByZeroError("relative change from a zero baseline is undefined")
    return (after - before) / before * 100.0


# Default sub-metric layouts: (name, rule, weight). Targets are deliberately
# absent; they must come from the organisation's own baselines.
DEFAULT_LAYOUT = {
    "Q": (
        ("accuracy", NormRule.RATE_VS_TARGET, 0.35),
        ("timeliness", NormRule.TIMELINESS_INVERSE, 0.25),
        ("relevance", NormRule.RATE_VS_TARGET, 0.25),
        ("duplicates", NormRule.RATE_VS_TARGET, 0.15),
    ),
    "E": (
        ("attack_coverage", NormRule.RATE_VS_TARGET, 0.30),
        ("internal_correlation", NormRule.RATE_VS_TARGET, 0.50),
        ("actionability_notes", NormRule.RATE_VS_TARGET, 0.20),
    ),
    "I": (
        ("control_breadth", NormRule.RATE_VS_TARGET, 0.30),
        ("feed_health", NormRule.RATE_VS_TARGET, 0.20),
        ("automation_utilization", NormRule.RATE_VS_TARGET, 0.30),
        ("ticket_assist", NormRule.RATE_VS_TARGET, 0.20),
    ),
    "O": (
        ("detection_lift", NormRule.DELTA_VS_TARGET, 0.25),
        ("response_lift", NormRule.DELTA_VS_TARGET, 0.20),
        ("prevented_events", NormRule.RATE_VS_TARGET, 0.20),
        ("risk_reduction", NormRule.DELTA_VS_TARGET, 0.35),
    ),
}


def default_rubric(component: str, targets: Mapping[str, float]) -> ComponentRubric:
    """The built-in rubric for ``component`` with the caller's targets filled in."""
    if component not in DEFAULT_LAYOUT:
        raise ValidationError(f"unknown component {component!r}; expected one of {COMPONENTS}")
    layout = DEFAULT_LAYOUT[component]
    names = [n for n, _, _ in layout]
    missing = [n for n in names if n not in targets]
    if missing:
        raise ValidationError(f"rubric {component}: no target for {', '.join(missing)}", code="E101")
    extra = sorted(set(targets) - set(names))
    if extra:
        raise ValidationError(f"rubric {component}: unknown sub-metric {extra[0]!r}", code="E103")
    return ComponentRubric(component, tuple(SubMetricSpec(n, k, targets[n], w) for n, k, w in layout))


def score_component(rubric: ComponentRubric, raws, policy: ConfidencePolicy | None = None):
    """Run one component through normalize, aggregate and confidence adjustment.

    ``raws`` is either a sequence in rubric order or a mapping by sub-metric
    name. Returns ``(pre_floor_score, floored_score)``.
    """
    if isinstance(raws, Mapping):
        unknown = sorted(set(raws) - set(rubric.names))
        if unknown:
            raise ValidationError(f"rubric {rubric.component}: unknown sub-metric {unknown[0]!r}", code="E103")
        missing = [n for n in rubric.names if n not in raws]
        if missing:
            raise ValidationError(f"rubric {rubric.component}: no raw value for {', '.join(missing)}", code="E101")
        raws = [raws[n] for n in rubric.names]
    score = aggregate_component(rubric, raws)
    if policy is not None:
        score = policy.confidence * score + (1.0 - policy.confidence) * policy.prior
    return score, max(score, SCORE_FLOOR)


def tiei_from_measurements(rubrics, raws, weights: TieiWeights, policies=None) -> TieiResult:
    """Full pipeline from raw sub-metric values to the index.

    ``rubrics``, ``raws`` and the optional ``policies`` are mappings keyed by
    component letter. A component whose score is exactly 0 before the floor is
    listed in the result's ``annotations``.
    """
    policies = policies or {}
    floored = {}
    notes = []
    for comp in COMPONENTS:
        if comp not in rubrics or comp not in raws:
            raise ValidationError(f"no rubric/measurements for component {comp}", code="E101")
        raw_score, floored[comp] = score_component(rubrics[comp], raws[comp], policies.get(comp))
        if raw_score == 0:
            notes.append(f"{comp}: zero capability recorded, floored to {SCORE_FLOOR:g}")
    return compute_tiei(ScoreVector(*(floored[c] for c in COMPONENTS)), weights, notes)
