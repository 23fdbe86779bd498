import json
from pathlib import Path

import pytest

from amlrisk.gateway import GatewayClient, GatewayError, ProviderConfig
from amlrisk.profiling import (
    SCALE_MAPS,
    DisallowedAnswerError,
    MissingAnswerError,
    ProfilingError,
    build_profile,
    customize_questionnaire,
    scale_answer,
)


def item(questionnaire, question_id):
    return questionnaire.item(question_id)


# ---------------------------------------------------------------------------
# scale_answer
# ---------------------------------------------------------------------------

def test_not_possible_scales_to_zero(questionnaire):
    assert scale_answer(item(questionnaire, "Q22"), "Not Possible") == 0.0
    assert scale_answer(item(questionnaire, "Q23"), "Not Possible") == 0.0


def test_very_easy_scales_to_one(questionnaire):
    assert scale_answer(item(questionnaire, "Q22"), "Very Easy") == 1.0


def test_decision_based_feedback_scales_to_0_33(questionnaire):
    assert scale_answer(item(questionnaire, "Q24"), "Decision-based") == 0.33


def test_disallowed_answer_raises(questionnaire):
    with pytest.raises(DisallowedAnswerError, match="Q22"):
        scale_answer(item(questionnaire, "Q22"), "Impossible")


def test_committed_scale_tables():
    # The committed maps themselves are the oracle for individual lookups.
    assert SCALE_MAPS["ordinal-difficulty"] == {
        "Very Easy": 1.0, "Easy": 0.75, "Medium": 0.5, "Hard": 0.25,
        "Very Hard": 0.1, "Not Possible": 0.0,
    }
    assert SCALE_MAPS["categorical-feedback"] == {
        "Full access to the model's flow": 1.0, "Score-based": 0.66,
        "Decision-based": 0.33, "No feedback": 0.0,
    }
    assert SCALE_MAPS["categorical-knowledge"]["Complete Knowledge"] == 1.0
    assert SCALE_MAPS["categorical-knowledge"]["Unknown"] == 0.1
    assert SCALE_MAPS["categorical-binary"] == {"Fine Tuning": 1.0, "Train From Scratch": 0.5}


def test_scale_monotone_along_every_answer_list(questionnaire):
    # Answers are ordered most-attacker-favorable first; scores must strictly
    # decrease along each ordered answer list.
    for it in questionnaire.items:
        if it.answer_kind == "characteristic-enum":
            continue
        scores = [scale_answer(it, answer) for answer in it.allowed_answers]
        assert all(a > b for a, b in zip(scores, scores[1:])), it.question_id


def test_all_scale_values_in_unit_interval(questionnaire):
    for it in questionnaire.items:
        if it.answer_kind == "characteristic-enum":
            continue
        for answer in it.allowed_answers:
            assert 0.0 <= scale_answer(it, answer) <= 1.0


def test_only_nullifying_answers_hit_zero(questionnaire):
    zero_labels = set()
    for it in questionnaire.items:
        if it.answer_kind == "characteristic-enum":
            continue
        for answer in it.allowed_answers:
            if scale_answer(it, answer) == 0.0:
                zero_labels.add(answer)
    assert zero_labels == {"Not Possible", "No feedback"}


# ---------------------------------------------------------------------------
# build_profile
# ---------------------------------------------------------------------------

def test_fixture_profile_matches_expected_file(profile):
    expected = json.loads(
        (Path(__file__).parent / "fixtures" / "expected_profile.json").read_text()
    )
    assert profile.factor_scores == expected["factor_scores"]
    assert profile.impact_scores == expected["impact_scores"]
    assert profile.categorical_answers == expected["categorical_answers"]
    assert profile.characteristics.as_dict() == expected["characteristics"]


def test_profile_covers_all_factors_and_impacts(profile):
    assert len(profile.factor_scores) == 18
    assert len(profile.impact_scores) == 11
    assert all(0.0 <= s <= 1.0 for s in profile.factor_scores.values())
    assert all(0.0 <= s <= 1.0 for s in profile.impact_scores.values())


def test_missing_answer_names_the_question(fixture_responses):
    answers = dict(fixture_responses["answers"])
    del answers["Q24"]
    with pytest.raises(MissingAnswerError, match="missing answer: Q24"):
        build_profile(answers, "d", "a")


def test_disallowed_answer_names_the_question(fixture_responses):
    answers = dict(fixture_responses["answers"])
    answers["Q17"] = "Fort Knox"
    with pytest.raises(DisallowedAnswerError, match="Q17"):
        build_profile(answers, "d", "a")


def test_physical_not_possible_zeroes_trigger_score(fixture_responses):
    answers = dict(fixture_responses["answers"])
    answers["Q23"] = "Not Possible"
    built = build_profile(answers, "d", "a")
    assert built.factor_scores["F13"] == 0.0


def test_build_profile_deterministic(fixture_responses):
    a = build_profile(fixture_responses["answers"], "d", "t")
    b = build_profile(fixture_responses["answers"], "d", "t")
    assert a == b
    assert a.profile_id == b.profile_id


def test_unknown_question_rejected(fixture_responses):
    answers = dict(fixture_responses["answers"])
    answers["Q99"] = "Very Easy"
    with pytest.raises(ProfilingError, match="Q99"):
        build_profile(answers, "d", "a")


# ---------------------------------------------------------------------------
# customize_questionnaire
# ---------------------------------------------------------------------------

@pytest.fixture()
def stub_gateway():
    return GatewayClient(ProviderConfig(provider="stub"))


def test_customization_references_description(questionnaire, stub_gateway):
    custom = customize_questionnaire(
        questionnaire, "e-commerce review scoring", stub_gateway
    )
    q22 = next(it for it in custom.items if it.question_id == "Q22")
    assert "review" in q22.text
    assert q22.text != questionnaire.item("Q22").text
    assert custom.warnings == ()


def test_customization_preserves_structure(questionnaire, stub_gateway):
    custom = customize_questionnaire(questionnaire, "a fraud scoring system", stub_gateway)
    assert [it.question_id for it in custom.items] == [
        it.question_id for it in questionnaire.items
    ]
    for created, base in zip(custom.items, questionnaire.items):
        assert created.section == base.section
        assert created.allowed_answers == base.allowed_answers
        assert created.answer_kind == base.answer_kind
        assert created.maps_to == base.maps_to


def test_empty_description_rejected(questionnaire, stub_gateway):
    with pytest.raises(ProfilingError, match="description required"):
        customize_questionnaire(questionnaire, "", stub_gateway)


class RenamingGateway:
    """Returns a structurally broken item for Q22, valid output elsewhere."""

    def complete(self, request):
        qid = request.variables["question_id"]
        if qid == "Q22":
            return json.dumps({"question_id": "Q99", "text": "renamed"})
        return json.dumps({"question_id": qid, "text": f"custom {qid}"})


class FailingGateway:
    def complete(self, request):
        raise GatewayError("gateway unreachable")


def test_renamed_id_falls_back_with_warning(questionnaire):
    custom = customize_questionnaire(questionnaire, "desc", RenamingGateway())
    q22 = next(it for it in custom.items if it.question_id == "Q22")
    assert q22.text == questionnaire.item("Q22").text
    assert any("Q22" in warning for warning in custom.warnings)


def test_transport_failure_keeps_base_questionnaire(questionnaire):
    custom = customize_questionnaire(questionnaire, "desc", FailingGateway())
    assert [it.text for it in custom.items] == [it.text for it in questionnaire.items]
    assert len(custom.warnings) == len(questionnaire.items)
