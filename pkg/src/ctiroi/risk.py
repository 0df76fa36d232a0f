"""Financial layer: total cost of ownership, cost-avoidance ROI and FAIR-style
annualized loss expectancy before and after a CTI program.

Point estimates use plain arithmetic. Uncertain inputs (triangular or PERT
ranges) go through :func:`monte_carlo_scenario`, which is reproducible for a
given seed no matter how the draws are partitioned.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import DivisionByZeroError, ModeError, ValidationError


def _nonneg(x, what):
    try:
        x = float(x)
    except (TypeError, ValueError):
        raise ValidationError(f"{what} must be a real number, got {x!r}", code="E102") from None
    if not math.isfinite(x):
        raise ValidationError(f"{what} must be finite, got {x}")
    if x < 0:
        raise ValidationError(f"{what} must be >= 0, got {x}")
    return x


def _unit_interval(x, what):
    x = _nonneg(x, what)
    if x > 1:
        raise ValidationError(f"{what} must lie in [0, 1], got {x}")
    return x


@dataclass(frozen=True)
class TcoBreakdown:
    platform: float = 0.0
    feeds: float = 0.0
    personnel: float = 0.0
    infra: float = 0.0
    integration: float = 0.0
    training: float = 0.0

    def __post_init__(self):
        for name in ("platform", "feeds", "personnel", "infra", "integration", "training"):
            object.__setattr__(self, name, _nonneg(getattr(self, name), f"TCO component {name}"))

    def components(self):
        return {
            "platform": self.platform,
            "feeds": self.feeds,
            "personnel": self.personnel,
            "infra": self.infra,
            "integration": self.integration,
            "training": self.training,
        }


def compute_tco(breakdown: TcoBreakdown) -> float:
    return math.fsum(breakdown.components().values())


@dataclass(frozen=True)
class ThreatScenario:
    name: str
    p: float
    c: float
    m: float

    def __post_init__(self):
        object.__setattr__(self, "p", _unit_interval(self.p, f"probability of {self.name!r}"))
        object.__setattr__(self, "c", _nonneg(self.c, f"cost of {self.name!r}"))
        object.__setattr__(self, "m", _unit_interval(self.m, f"effectiveness of {self.name!r}"))


def roi_cost_avoidance(threats: Sequence[ThreatScenario], tco: float) -> float:
    """Cost-avoidance ROI in percent: ``(sum(p*c*m) - tco) / tco * 100``."""
    tco = _nonneg(tco, "TCO")
    if tco == 0:
        raise DivisionByZeroError("cost-avoidance ROI needs a positive TCO")
    avoided = math.fsum(t.p * t.c * t.m for t in threats)
    return (avoided - tco) / tco * 100.0


def attack_coverage(covered: int, prioritized: int) -> float:
    """Share of prioritized ATT&CK techniques with defensive coverage, in percent."""
    if prioritized < 1:
        raise ValidationError(f"need at least one prioritized technique, got {prioritized}")
    if not 0 <= covered <= prioritized:
        raise ValidationError(f"covered count {covered} must lie in [0, {prioritized}]")
    return covered / prioritized * 100.0


# -- uncertain inputs --------------------------------------------------------


class Dist(enum.Enum):
    POINT = "point"
    TRIANGULAR = "triangular"
    PERT = "pert"


@dataclass(frozen=True)
class UncertainValue:
    """A point value or a bounded three-point estimate.

    Sampling is by inverse CDF so that one uniform variate maps to one value;
    this keeps draws aligned across inputs and seeds.
    """

    kind: Dist
    params: tuple[float, ...]
    lam: float = 4.0

    def __post_init__(self):
        kind = Dist(self.kind)
        object.__setattr__(self, "kind", kind)
        params = tuple(float(p) for p in self.params)
        if not all(math.isfinite(p) for p in params):
            raise ValidationError(f"{kind.value} parameters must be finite: {params}")
        if kind is Dist.POINT:
            if len(params) != 1:
                raise ValidationError("a point value takes exactly one parameter")
        else:
            if len(params) != 3:
                raise ValidationError(f"{kind.value} takes (min, mode, max), got {params}")
            lo, mode, hi = params
            if not lo <= mode <= hi:
                raise ValidationError(f"{kind.value} needs min <= mode <= max, got {params}")
            if kind is Dist.PERT and not (math.isfinite(self.lam) and self.lam > 0):
                raise ValidationError(f"PERT shape lambda must be > 0, got {self.lam}")
        object.__setattr__(self, "params", params)

    @classmethod
    def point(cls, v):
        return cls(Dist.POINT, (v,))

    @classmethod
    def triangular(cls, lo, mode, hi):
        return cls(Dist.TRIANGULAR, (lo, mode, hi))

    @classmethod
    def pert(cls, lo, mode, hi, lam=4.0):
        return cls(Dist.PERT, (lo, mode, hi), lam)

    @property
    def is_point(self):
        return self.kind is Dist.POINT

    @property
    def lower(self):
        return self.params[0]

    def mean(self):
        if self.kind is Dist.POINT:
            return self.params[0]
        lo, mode, hi = self.params
        if self.kind is Dist.TRIANGULAR:
            return (lo + mode + hi) / 3.0
        return (lo + self.lam * mode + hi) / (self.lam + 2.0)

    def variance(self):
        if self.kind is Dist.POINT:
            return 0.0
        lo, mode, hi = self.params
        if self.kind is Dist.TRIANGULAR:
            return (lo * lo + mode * mode + hi * hi - lo * mode - lo * hi - mode * hi) / 18.0
        a, b = self._beta_shape()
        return (hi - lo) ** 2 * a * b / ((a + b) ** 2 * (a + b + 1))

    def _beta_shape(self):
        lo, mode, hi = self.params
        span = hi - lo
        return 1.0 + self.lam * (mode - lo) / span, 1.0 + self.lam * (hi - mode) / span

    def ppf(self, u):
        """Inverse CDF at uniform variates ``u`` in (0, 1)."""
        u = np.asarray(u, dtype=float)
        if self.kind is Dist.POINT:
            return np.full(u.shape, self.params[0])
        lo, mode, hi = self.params
        if hi == lo:
            return np.full(u.shape, lo)
        span = hi - lo
        if self.kind is Dist.TRIANGULAR:
            cut = (mode - lo) / span
            left = lo + np.sqrt(u * span * (mode - lo))
            right = hi - np.sqrt((1.0 - u) * span * (hi - mode))
            return np.where(u < cut, left, right)
        a, b = self._beta_shape()
        return lo + span * stats.beta.ppf(u, a, b)


def as_uncertain(x) -> UncertainValue:
    if isinstance(x, UncertainValue):
        return x
    return UncertainValue.point(x)


@dataclass(frozen=True)
class AleScenario:
    """One threat scenario before and after CTI.

    Give exactly one of ``reduction`` (fractional cut in loss-event frequency)
    or ``lef_cti`` (the post-CTI frequency itself). Plain numbers are accepted
    wherever an :class:`UncertainValue` is expected.
    """

    lef0: UncertainValue
    lm: UncertainValue
    cti_cost: float
    reduction: float | None = None
    lef_cti: UncertainValue | None = None
    name: str = "scenario"
    currency: str = "USD"

    def __post_init__(self):
        object.__setattr__(self, "lef0", as_uncertain(self.lef0))
        object.__setattr__(self, "lm", as_uncertain(self.lm))
        if (self.reduction is None) == (self.lef_cti is None):
            raise ValidationError("give exactly one of reduction or lef_cti")
        if self.reduction is not None:
            object.__setattr__(self, "reduction", _unit_interval(self.reduction, "reduction"))
        else:
            object.__setattr__(self, "lef_cti", as_uncertain(self.lef_cti))
        for what, uv in (("lef0", self.lef0), ("lm", self.lm), ("lef_cti", self.lef_cti)):
            if uv is not None and uv.lower < 0:
                raise ValidationError(f"{what} cannot take negative values: {uv.params}")
        object.__setattr__(self, "cti_cost", _nonneg(self.cti_cost, "cti_cost"))

    @property
    def is_point(self):
        return all(uv is None or uv.is_point for uv in (self.lef0, self.lm, self.lef_cti))


@dataclass(frozen=True)
class SampleStats:
    mean: float
    p5: float
    p50: float
    p95: float
    std: float
    n: int
    seed: int


@dataclass(frozen=True)
class RiskResult:
    ale0: float
    ale_cti: float
    delta_ale: float
    roi_ratio: float
    cost: float
    currency: str = "USD"
    # Monte Carlo only: statistics of per-draw delta ALE, plus per-variable stats
    sample_stats: SampleStats | None = None
    variable_stats: dict[str, SampleStats] = field(default_factory=dict)

    @property
    def roi_percent(self):
        return self.roi_ratio * 100.0


def ale(lef: float, lm: float) -> float:
    return _nonneg(lef, "loss event frequency") * _nonneg(lm, "loss magnitude")


def apply_reduction(lef0: float, reduction: float) -> float:
    return _nonneg(lef0, "lef0") * (1.0 - _unit_interval(reduction, "reduction"))


def evaluate_scenario(s: AleScenario) -> RiskResult:
    """Point-estimate ALE, delta ALE and ROI ratio for ``s``."""
    if not s.is_point:
        raise ModeError("scenario has distributional inputs; use monte_carlo_scenario")
    if s.cti_cost == 0:
        raise DivisionByZeroError("ROI needs a positive CTI cost")
    lef0 = s.lef0.params[0]
    lm = s.lm.params[0]
    lef1 = apply_reduction(lef0, s.reduction) if s.reduction is not None else s.lef_cti.params[0]
    ale0 = ale(lef0, lm)
    ale1 = ale(lef1, lm)
    delta = ale0 - ale1
    return RiskResult(ale0, ale1, delta, delta / s.cti_cost, s.cti_cost, s.currency)


# -- Monte Carlo ---------------------------------------------------------------
#
# Generator: numpy's Philox-4x64 counter-based bit generator keyed by the
# seed. Draw i consumes exactly one Philox block (four 64-bit words), so any
# contiguous range of draws can be regenerated independently by advancing the
# counter to its first block. Words become doubles in (0, 1) via the top 53
# bits plus half an ulp, which keeps the inverse CDFs away from 0 and 1.

_WORDS_PER_DRAW = 4
_SEED_MASK = (1 << 64) - 1


def draw_uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """Uniform variates for draws ``start .. start+count-1``, shape (count, 4)."""
    bg = np.random.Philox(key=int(seed) & _SEED_MASK)
    if start:
        bg.advance(start)
    words = bg.random_raw(count * _WORDS_PER_DRAW).reshape(count, _WORDS_PER_DRAW)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def _shifted_mean(x):
    # exact for constant samples; also better conditioned than a raw sum
    x0 = x[0]
    return float(x0 + np.mean(x - x0))


def _stats(x, seed):
    p5, p50, p95 = np.quantile(x, [0.05, 0.5, 0.95])  # linear interpolation
    std = float(np.std(x, ddof=1)) if len(x) > 1 else 0.0
    return SampleStats(_shifted_mean(x), float(p5), float(p50), float(p95), std, len(x), int(seed))


def _simulate(s: AleScenario, u: np.ndarray):
    lef0 = s.lef0.ppf(u[:, 0])
    lm = s.lm.ppf(u[:, 1])
    if s.reduction is not None:
        lef1 = lef0 * (1.0 - s.reduction)
    else:
        lef1 = s.lef_cti.ppf(u[:, 2])
    ale0 = lef0 * lm
    ale1 = lef1 * lm
    return {"lef0": lef0, "lm": lm, "lef_cti": lef1, "ale0": ale0, "ale_cti": ale1, "delta_ale": ale0 - ale1}


def monte_carlo_scenario(s: AleScenario, n: int, seed: int, chunk: int = 65536) -> RiskResult:
    """Sample ``n`` independent draws of the scenario and summarize them.

    Frequency and magnitude are sampled independently. Results depend only on
    ``(s, n, seed)``; ``chunk`` merely bounds memory.
    """
    if int(n) != n or n < 1:
        raise ValidationError(f"number of draws must be a positive integer, got {n}")
    n = int(n)
    if s.cti_cost == 0:
        raise DivisionByZeroError("ROI needs a positive CTI cost")
    parts = []
    for start in range(0, n, chunk):
        parts.append(_simulate(s, draw_uniforms(seed, start, min(chunk, n - start))))
    cols = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    cols["roi_ratio"] = cols["delta_ale"] / s.cti_cost
    var_stats = {k: _stats(v, seed) for k, v in cols.items()}
    d = var_stats["delta_ale"]
    return RiskResult(
        ale0=var_stats["ale0"].mean,
        ale_cti=var_stats["ale_cti"].mean,
        delta_ale=d.mean,
        roi_ratio=d.mean / s.cti_cost,
        cost=s.cti_cost,
        currency=s.currency,
        sample_stats=d,
        variable_stats=var_stats,
    )


# Sector case studies (annual probability read as LEF; money in USD)
BUILTIN_SCENARIOS = {
    "finance": AleScenario(lef0=0.48, lm=6.08e6, cti_cost=0.5e6, reduction=0.60, name="finance"),
    "healthcare": AleScenario(lef0=0.67, lm=11.62e6, cti_cost=0.6e6, reduction=0.60, name="healthcare"),
    "retail": AleScenario(lef0=0.43, lm=5.41e6, cti_cost=0.6e6, reduction=0.60, name="retail"),
}
