"""CTI program valuation: effectiveness index, risk-based ROI, optimal spend."""

from .ahp import WeightReport, consistent_matrix, derive_weights_ahp, weights_from_budget
from .errors import DivisionByZeroError, ModeError, NumericError, ValidationError
from .gl import (
    BreachFunction,
    GridFunction,
    LossMultiplier,
    Optimum,
    PortfolioSpec,
    gl_upper_bound,
    net_benefit,
    optimal_investment_single,
    optimal_investment_two_param,
    optimize_portfolio,
    residual_breach_prob,
)
from .risk import (
    BUILTIN_SCENARIOS,
    AleScenario,
    RiskResult,
    TcoBreakdown,
    ThreatScenario,
    UncertainValue,
    ale,
    apply_reduction,
    attack_coverage,
    compute_tco,
    evaluate_scenario,
    monte_carlo_scenario,
    roi_cost_avoidance,
)
from .sensitivity import CurvePoint, SweepSpec, sweep_scenario, sweep_tiei, tornado
from .tiei import (
    ComponentRubric,
    ConfidencePolicy,
    NormRule,
    ScoreVector,
    SubMetricSpec,
    TieiResult,
    TieiWeights,
    aggregate_component,
    compute_tiei,
    confidence_adjust,
    default_rubric,
    linear_aggregate,
    normalize_submetric,
    relative_change,
    tiei_from_measurements,
)

__version__ = "0.1.0"
