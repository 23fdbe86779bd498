"""Property tests over the numeric kernels."""

from hypothesis import given, settings
from hypothesis import strategies as st

from amlrisk.engine import combine_likelihood, final_score, normalize_feasibility
from amlrisk.records import DowngradePolicy, MatchBatch, estimate_success_rate
from amlrisk.reporting import display_score

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(st.lists(unit, min_size=1, max_size=5))
def test_weighted_mean_stays_inside_batch_hull(means):
    batches = [
        MatchBatch(level=i, execution_mode="digital", record_ids=(), batch_mean=m)
        for i, m in enumerate(means)
    ]
    value = estimate_success_rate(batches, DowngradePolicy())
    assert min(means) - 1e-12 <= value <= max(means) + 1e-12


@settings(max_examples=300, deadline=None)
@given(st.dictionaries(st.text(min_size=1, max_size=4), unit, min_size=1, max_size=12))
def test_normalized_feasibility_bounded(cohort):
    normalized = normalize_feasibility(cohort, 1e-6)
    assert set(normalized) == set(cohort)
    assert all(0.0 <= v <= 1.0 for v in normalized.values())


@settings(max_examples=300, deadline=None)
@given(unit, unit, unit, unit)
def test_likelihood_composition_bounds(nf_d, sr_d, nf_p, sr_p):
    l_by_mode, overall = combine_likelihood(
        {"digital": (nf_d, sr_d), "physical": (nf_p, sr_p)}
    )
    l_values = list(l_by_mode.values())
    assert max(l_values) - 1e-12 <= overall <= sum(l_values) + 1e-12
    assert 0.0 <= overall <= 1.0


@settings(max_examples=300, deadline=None)
@given(unit, unit)
def test_final_score_range(l_overall, impact):
    score = final_score(l_overall, impact)
    assert 0.0 <= score <= 10.0


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=0.0, max_value=10.0, allow_nan=False))
def test_display_score_always_three_decimals(value):
    text = display_score(value)
    whole, frac = text.split(".")
    assert len(frac) == 3
    assert abs(float(text) - value) <= 0.0005 + 1e-12
