import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ctiroi.errors import DivisionByZeroError, ValidationError
from ctiroi.tiei import (
    ComponentRubric,
    ConfidencePolicy,
    NormRule,
    ScoreVector,
    SubMetricSpec,
    TieiWeights,
    aggregate_component,
    compute_tiei,
    confidence_adjust,
    default_rubric,
    linear_aggregate,
    normalize_submetric,
    relative_change,
    score_component,
    tiei_from_measurements,
)

WORKED_W = TieiWeights(0.40, 0.20, 0.25, 0.15)
BASELINE = ScoreVector(85, 70, 60, 90)
STALLED = ScoreVector(85, 70, 20, 90)

score = st.floats(1, 100)
scores4 = st.tuples(score, score, score, score)


@st.composite
def weights4(draw):
    raw = [draw(st.floats(0.01, 1)) for _ in range(4)]
    total = sum(raw)
    return TieiWeights(*(r / total for r in raw))


def spec(kind, target=10.0, weight=1.0):
    return SubMetricSpec("m", kind, target, weight)


# -- normalization ------------------------------------------------------------


def test_timeliness_at_target_scores_zero():
    assert normalize_submetric(spec(NormRule.TIMELINESS_INVERSE, 24), 24) == 0


def test_rate_above_target_clamps_to_100():
    assert normalize_submetric(spec(NormRule.RATE_VS_TARGET, 80), 1.2 * 80) == 100


def test_timeliness_half_target():
    assert normalize_submetric(spec(NormRule.TIMELINESS_INVERSE, 24), 12) == 50


def test_delta_regression_scores_zero():
    assert normalize_submetric(spec(NormRule.DELTA_VS_TARGET, 20), -5) == 0


def test_direct_percent_clamps():
    s = spec(NormRule.DIRECT_PERCENT, 100)
    assert normalize_submetric(s, 42.5) == 42.5
    assert normalize_submetric(s, 130) == 100


def test_timeliness_far_past_target_clamps_to_zero():
    assert normalize_submetric(spec(NormRule.TIMELINESS_INVERSE, 24), 100) == 0


@pytest.mark.parametrize("raw", [math.nan, math.inf, -math.inf])
def test_non_finite_raw_rejected(raw):
    with pytest.raises(ValidationError):
        normalize_submetric(spec(NormRule.RATE_VS_TARGET), raw)


@pytest.mark.parametrize("target", [-1.0, 0.0, math.nan])
def test_bad_target_rejected(target):
    with pytest.raises(ValidationError):
        SubMetricSpec("m", NormRule.RATE_VS_TARGET, target, 1.0)


def test_negative_rate_rejected():
    with pytest.raises(ValidationError):
        normalize_submetric(spec(NormRule.RATE_VS_TARGET), -1)


@given(st.sampled_from(list(NormRule)), st.floats(-1e6, 1e6), st.floats(1e-3, 1e4))
def test_normalized_value_in_bounds(kind, raw, target):
    if kind is not NormRule.DELTA_VS_TARGET:
        raw = abs(raw)
    out = normalize_submetric(spec(kind, target), raw)
    assert 0 <= out <= 100


# -- aggregation ------------------------------------------------------------------


def test_constant_subscores_aggregate_to_same_value():
    rubric = ComponentRubric(
        "E",
        (
            SubMetricSpec("a", NormRule.RATE_VS_TARGET, 100, 0.3),
            SubMetricSpec("b", NormRule.RATE_VS_TARGET, 100, 0.5),
            SubMetricSpec("c", NormRule.RATE_VS_TARGET, 100, 0.2),
        ),
    )
    assert aggregate_component(rubric, [80, 80, 80]) == pytest.approx(80, abs=1e-12)


def test_quality_rubric_weights():
    rubric = default_rubric("Q", {"accuracy": 90, "timeliness": 24, "relevance": 50, "duplicates": 10})
    # normalized: 100 (over target), 0 (at timeliness target), 100, 100
    assert aggregate_component(rubric, [95, 24, 60, 10]) == pytest.approx(75, abs=1e-12)


def test_single_submetric_rubric_is_identity():
    rubric = ComponentRubric("O", (SubMetricSpec("x", NormRule.DIRECT_PERCENT, 100, 1.0),))
    assert aggregate_component(rubric, [37.25]) == 37.25


def test_length_mismatch_rejected():
    rubric = ComponentRubric("O", (SubMetricSpec("x", NormRule.DIRECT_PERCENT, 100, 1.0),))
    with pytest.raises(ValidationError):
        aggregate_component(rubric, [1, 2])


def test_rubric_weights_must_sum_to_one():
    with pytest.raises(ValidationError) as exc:
        ComponentRubric("Q", (SubMetricSpec("a", NormRule.RATE_VS_TARGET, 1, 0.5), SubMetricSpec("b", NormRule.RATE_VS_TARGET, 1, 0.4)))
    assert exc.value.code == "E104"


def test_empty_rubric_rejected():
    with pytest.raises(ValidationError):
        ComponentRubric("Q", ())


def test_default_rubric_layout_matches_tables():
    targets = {"control_breadth": 100, "feed_health": 99.9, "automation_utilization": 60, "ticket_assist": 40}
    rubric = default_rubric("I", targets)
    assert [s.weight for s in rubric.submetrics] == [0.30, 0.20, 0.30, 0.20]
    o = default_rubric("O", {"detection_lift": 30, "response_lift": 25, "prevented_events": 5, "risk_reduction": 1e6})
    assert [s.kind for s in o.submetrics][0] is NormRule.DELTA_VS_TARGET
    assert [s.weight for s in o.submetrics] == [0.25, 0.20, 0.20, 0.35]


def test_default_rubric_requires_every_target():
    with pytest.raises(ValidationError) as exc:
        default_rubric("E", {"attack_coverage": 50})
    assert exc.value.code == "E101"


# -- confidence adjustment ----------------------------------------------------------


def test_full_confidence_is_identity():
    assert confidence_adjust(73, ConfidencePolicy(1.0)) == 73


def test_zero_confidence_returns_prior():
    assert confidence_adjust(12, ConfidencePolicy(0.0, prior=50)) == 50


def test_half_confidence_blends():
    assert confidence_adjust(90, ConfidencePolicy(0.5, prior=50)) == 70


def test_adjusted_score_is_floored():
    assert confidence_adjust(0, ConfidencePolicy(1.0)) == 1


@pytest.mark.parametrize("c", [-0.1, 1.1])
def test_confidence_outside_unit_interval_rejected(c):
    with pytest.raises(ValidationError):
        ConfidencePolicy(c)


# -- index ------------------------------------------------------------------------


def test_worked_example_baseline():
    r = compute_tiei(BASELINE, WORKED_W)
    assert r.tiei == pytest.approx(75.6, abs=0.05)
    assert r.linear == pytest.approx(76.5, abs=1e-9)


def test_worked_example_integration_stall():
    r = compute_tiei(STALLED, WORKED_W)
    assert r.tiei == pytest.approx(57.4, abs=0.05)
    assert r.linear == pytest.approx(66.5, abs=1e-9)


@given(score, weights4())
def test_equal_scores_give_that_score(x, w):
    r = compute_tiei(ScoreVector(x, x, x, x), w)
    assert r.tiei == pytest.approx(x, rel=1e-12)
    assert r.linear == pytest.approx(x, rel=1e-12)


def test_relative_drops():
    assert relative_change(76.5, 66.5) == pytest.approx(-13.1, abs=0.05)
    assert relative_change(75.6, 57.4) == pytest.approx(-24.0, abs=0.1)
    assert relative_change(42.0, 42.0) == 0


def test_relative_change_from_zero():
    with pytest.raises(DivisionByZeroError):
        relative_change(0, 5)


def test_weights_near_one_are_renormalized():
    w = TieiWeights(0.4, 0.2, 0.25, 0.1500005)
    assert math.fsum(w.as_tuple()) == pytest.approx(1, abs=1e-12)


def test_weights_far_from_one_are_rejected():
    with pytest.raises(ValidationError) as exc:
        TieiWeights(0.4, 0.2, 0.25, 0.05)
    assert exc.value.code == "E104"


def test_zero_weight_rejected():
    with pytest.raises(ValidationError):
        TieiWeights(0.5, 0.5, 0.0, 0.0)


def test_unfloored_zero_refused():
    with pytest.raises(ValidationError):
        ScoreVector(0, 50, 50, 50)
    assert ScoreVector.floored(0, 50, 50, 50).q == 1


@settings(max_examples=300)
@given(scores4, weights4())
def test_geometric_never_exceeds_linear(s, w):
    r = compute_tiei(ScoreVector(*s), w)
    assert r.tiei <= r.linear
    assume(max(s) - min(s) > 1e-3)
    assert r.tiei < r.linear


@settings(max_examples=300)
@given(scores4, weights4(), st.integers(0, 3), st.floats(0.5, 50))
def test_raising_one_score_raises_both(s, w, k, bump):
    assume(s[k] + bump <= 100)
    before = compute_tiei(ScoreVector(*s), w)
    bumped = list(s)
    bumped[k] += bump
    after = compute_tiei(ScoreVector(*bumped), w)
    assert after.tiei > before.tiei
    assert after.linear > before.linear


@given(scores4, weights4())
def test_log_space_matches_direct_product(s, w):
    direct = 100 * math.prod((x / 100) ** wk for x, wk in zip(s, w.as_tuple()))
    assert compute_tiei(ScoreVector(*s), w).tiei == pytest.approx(direct, rel=1e-9)


def test_index_penalizes_integration_stall_more_than_linear():
    b, s = compute_tiei(BASELINE, WORKED_W), compute_tiei(STALLED, WORKED_W)
    assert abs(relative_change(b.tiei, s.tiei)) > abs(relative_change(b.linear, s.linear))


def test_linear_aggregate_alone():
    assert linear_aggregate(BASELINE, WORKED_W) == pytest.approx(76.5, abs=1e-12)


# -- full pipeline -------------------------------------------------------------


def _rubrics():
    return {
        "Q": default_rubric("Q", {"accuracy": 95, "timeliness": 24, "relevance": 80, "duplicates": 90}),
        "E": default_rubric("E", {"attack_coverage": 70, "internal_correlation": 50, "actionability_notes": 40}),
        "I": default_rubric("I", {"control_breadth": 100, "feed_health": 99.5, "automation_utilization": 60, "ticket_assist": 30}),
        "O": default_rubric("O", {"detection_lift": 30, "response_lift": 25, "prevented_events": 4, "risk_reduction": 1.5e6}),
    }


def test_pipeline_matches_manual_steps():
    rubrics = _rubrics()
    raws = {
        "Q": [90, 6, 72, 81],
        "E": {"attack_coverage": 35, "internal_correlation": 50, "actionability_notes": 10},
        "I": [75, 99.5, 30, 15],
        "O": [15, -3, 2, 0.75e6],
    }
    policies = {"E": ConfidencePolicy(0.6)}
    r = tiei_from_measurements(rubrics, raws, WORKED_W, policies)
    q = 0.35 * 90 / 95 * 100 + 0.25 * 75 + 0.25 * 90 + 0.15 * 90
    e = 0.6 * (0.30 * 50 + 0.50 * 100 + 0.20 * 25) + 0.4 * 50
    i = 0.30 * 75 + 0.20 * 100 + 0.30 * 50 + 0.20 * 50
    o = 0.25 * 50 + 0.20 * 0 + 0.20 * 50 + 0.35 * 50
    expected = compute_tiei(ScoreVector(q, e, i, o), WORKED_W)
    assert r.component_scores.as_tuple() == pytest.approx((q, e, i, o), abs=1e-9)
    assert r.tiei == pytest.approx(expected.tiei, abs=1e-9)
    assert r.annotations == ()


def test_zero_component_is_annotated_and_floored():
    rubric = ComponentRubric("I", (SubMetricSpec("x", NormRule.RATE_VS_TARGET, 50, 1.0),))
    full = ComponentRubric("Q", (SubMetricSpec("x", NormRule.RATE_VS_TARGET, 50, 1.0),))
    rubrics = {"Q": full, "E": ComponentRubric("E", full.submetrics), "I": rubric, "O": ComponentRubric("O", full.submetrics)}
    raws = {"Q": [50], "E": [50], "I": [0], "O": [50]}
    r = tiei_from_measurements(rubrics, raws, WORKED_W)
    assert r.component_scores.i == 1
    assert any(a.startswith("I:") for a in r.annotations)
    assert r.tiei > 0


def test_score_component_unknown_name():
    with pytest.raises(ValidationError) as exc:
        score_component(_rubrics()["E"], {"attack_coverage": 1, "internal_correlation": 1, "bogus": 1})
    assert exc.value.code == "E103"
