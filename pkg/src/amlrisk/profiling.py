"""Questionnaire handling and system profiling.

Turns questionnaire responses plus system characteristics into a
``SystemProfile`` with unit-interval factor and impact scores, and builds
LLM customization requests that rewrite question wording without touching
ids, sections, or answer sets.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import IO, Mapping, Optional, Union

from .gateway import GatewayError, GenerationRequest

logger = logging.getLogger(__name__)

SECTIONS = ("attack-impact", "system-safety", "characteristics")

# Committed scale maps. Answers are ordered most-attacker-favorable first in
# the questionnaire; scores are strictly decreasing along that order. Zero is
# reserved for answers that genuinely nullify an attack ("Not Possible",
# "No feedback"); mere difficulty bottoms out at 0.1.
SCALE_MAPS: Mapping[str, Mapping[str, float]] = {
    "ordinal-difficulty": {
        "Very Easy": 1.0,
        "Easy": 0.75,
        "Medium": 0.5,
        "Hard": 0.25,
        "Very Hard": 0.1,
        "Not Possible": 0.0,
    },
    "ordinal-severity": {
        "Very High": 1.0,
        "High": 0.75,
        "Medium": 0.5,
        "Low": 0.25,
        "Very Low": 0.1,
    },
    "ordinal-severity-inverted": {
        "Very Insecure": 1.0,
        "Insecure": 0.75,
        "Moderately Secure": 0.5,
        "Secure": 0.25,
        "Very Secure": 0.1,
    },
    # Three disjoint label sets share this kind: validation/feature levels,
    # retraining frequency, and online-evaluation depth.
    "ordinal-level": {
        "None": 1.0,
        "Basic": 0.5,
        "Extensive": 0.1,
        "Always": 1.0,
        "Often": 0.75,
        "Sometimes": 0.5,
        "Rarely": 0.25,
        "Very Rarely": 0.1,
        "No Evaluation": 1.0,
        "Yes, but without A/B testing": 0.5,
        "Yes, with A/B testing": 0.25,
    },
    "categorical-feedback": {
        "Full access to the model's flow": 1.0,
        "Score-based": 0.66,
        "Decision-based": 0.33,
        "No feedback": 0.0,
    },
    "categorical-knowledge": {
        "Complete Knowledge": 1.0,
        "Known architecture": 0.7,
        "Hyperparameters": 0.5,
        "Algorithm": 0.4,
        "Task": 0.2,
        "Unknown": 0.1,
    },
    "categorical-binary": {
        "Fine Tuning": 1.0,
        "Train From Scratch": 0.5,
    },
}

CHARACTERISTIC_SLUGS: Mapping[str, Mapping[str, str]] = {
    "architecture": {
        "Deep Learning": "deep-learning",
        "Ensemble": "ensemble",
        "Decision Trees": "decision-trees",
        "Standard ML": "standard-ml",
    },
    "task": {
        "Classification": "classification",
        "Regression": "regression",
        "Semi-supervised": "semi-supervised",
        "Unsupervised": "unsupervised",
        "LLM": "llm",
        "Object Detection": "object-detection",
        "Reinforcement Learning": "reinforcement-learning",
    },
    "data_type": {
        "Images (Computer Vision)": "images",
        "Text (NLP)": "text",
        "Tabular": "tabular",
        "Voice": "voice",
    },
    "domain": {
        "Cyber": "cyber",
        "Finance": "finance",
        "Computer Vision": "computer-vision",
        "Speech": "speech",
        "NLP (Text)": "nlp",
        "Network": "network",
        "Recommender System": "recommender",
    },
}

ARCHITECTURES = tuple(CHARACTERISTIC_SLUGS["architecture"].values())
TASKS = tuple(CHARACTERISTIC_SLUGS["task"].values())
DATA_TYPES = tuple(CHARACTERISTIC_SLUGS["data_type"].values())
DOMAINS = tuple(CHARACTERISTIC_SLUGS["domain"].values())


class ProfilingError(ValueError):
    """Raised for malformed questionnaires or responses."""


class MissingAnswerError(ProfilingError):
    def __init__(self, question_id: str):
        super().__init__(f"missing answer: {question_id}")
        self.question_id = question_id


class DisallowedAnswerError(ProfilingError):
    def __init__(self, question_id: str, answer: str):
        super().__init__(f"answer {answer!r} not allowed for {question_id}")
        self.question_id = question_id
        self.answer = answer


@dataclass(frozen=True)
class QuestionnaireItem:
    question_id: str
    section: str
    answer_kind: str
    text: str
    allowed_answers: tuple
    maps_to: str


@dataclass(frozen=True)
class Questionnaire:
    version: str
    items: tuple

    def item(self, question_id: str) -> QuestionnaireItem:
        for it in self.items:
            if it.question_id == question_id:
                return it
        raise ProfilingError(f"unknown question id {question_id!r}")

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "items": [
                {
                    "question_id": it.question_id,
                    "section": it.section,
                    "answer_kind": it.answer_kind,
                    "text": it.text,
                    "allowed_answers": list(it.allowed_answers),
                    "maps_to": it.maps_to,
                }
                for it in self.items
            ],
        }


@dataclass(frozen=True)
class CustomQuestionnaire:
    """Reworded questionnaire; ids, sections, and answer sets are untouched."""

    base_version: str
    system_description: str
    items: tuple
    warnings: tuple = ()

    def to_dict(self) -> dict:
        data = Questionnaire(version=self.base_version, items=self.items).to_dict()
        data["system_description"] = self.system_description
        data["warnings"] = list(self.warnings)
        return data


@dataclass(frozen=True)
class SystemCharacteristics:
    architecture: str
    task: str
    data_type: str
    domain: str

    def as_dict(self) -> dict:
        return {
            "architecture": self.architecture,
            "task": self.task,
            "data_type": self.data_type,
            "domain": self.domain,
        }


@dataclass(frozen=True)
class SystemProfile:
    """Scaled factor/impact scores plus retained categorical answers."""

    profile_id: str
    system_description: str
    threat_actor: str
    characteristics: SystemCharacteristics
    factor_scores: Mapping[str, float]
    impact_scores: Mapping[str, float]
    categorical_answers: Mapping[str, str]

    def to_dict(self) -> dict:
        return {
            "profile_id": self.profile_id,
            "system_description": self.system_description,
            "threat_actor": self.threat_actor,
            "characteristics": self.characteristics.as_dict(),
            "factor_scores": dict(self.factor_scores),
            "impact_scores": dict(self.impact_scores),
            "categorical_answers": dict(self.categorical_answers),
        }


def load_questionnaire(source: Union[str, Path, IO[str], None] = None) -> Questionnaire:
    """Load a questionnaire document; defaults to the bundled base version."""
    if source is None:
        with resources.files("amlrisk.data").joinpath("questionnaire.json").open("r") as fh:
            raw = json.load(fh)
    elif hasattr(source, "read"):
        raw = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            raw = json.load(fh)

    items = tuple(
        QuestionnaireItem(
            question_id=obj["question_id"],
            section=obj["section"],
            answer_kind=obj["answer_kind"],
            text=obj["text"],
            allowed_answers=tuple(obj["allowed_answers"]),
            maps_to=obj["maps_to"],
        )
        for obj in raw["items"]
    )
    for item in items:
        if item.section not in SECTIONS:
            raise ProfilingError(f"unknown section {item.section!r} on {item.question_id}")
    return Questionnaire(version=raw["version"], items=items)


def scale_answer(item: QuestionnaireItem, raw: str) -> float:
    """Map an allowed answer label to its unit-interval score."""
    if raw not in item.allowed_answers:
        raise DisallowedAnswerError(item.question_id, raw)
    if item.answer_kind == "characteristic-enum":
        raise ProfilingError(f"{item.question_id} is a characteristic question; it has no scale")
    scale = SCALE_MAPS.get(item.answer_kind)
    if scale is None or raw not in scale:
        raise ProfilingError(
            f"no scale value for kind {item.answer_kind!r}, answer {raw!r}"
        )
    return scale[raw]


def derive_profile_id(responses: Mapping[str, str], description: str, threat_actor: str) -> str:
    payload = json.dumps(
        {"answers": dict(sorted(responses.items())), "description": description,
         "threat_actor": threat_actor},
        sort_keys=True,
    )
    return "p-" + hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def build_profile(
    responses: Mapping[str, str],
    description: str,
    threat_actor: str,
    questionnaire: Optional[Questionnaire] = None,
    profile_id: Optional[str] = None,
) -> SystemProfile:
    """Build a :class:`SystemProfile` from a complete set of responses.

    Every question must be answered with one of its allowed labels;
    categorical answers are retained verbatim for zeroing-rule evaluation.
    """
    questionnaire = questionnaire or load_questionnaire()
    factor_scores = {}
    impact_scores = {}
    categorical = {}
    characteristics = {}

    for item in questionnaire.items:
        if item.question_id not in responses:
            raise MissingAnswerError(item.question_id)
        answer = responses[item.question_id]
        if answer not in item.allowed_answers:
            raise DisallowedAnswerError(item.question_id, answer)

        if item.section == "characteristics":
            slug = CHARACTERISTIC_SLUGS[item.maps_to][answer]
            characteristics[item.maps_to] = slug
            continue

        score = scale_answer(item, answer)
        if item.section == "attack-impact":
            impact_scores[item.maps_to] = score
        else:
            factor_scores[item.maps_to] = score
            if item.answer_kind.startswith("categorical"):
                categorical[item.maps_to] = answer

    unknown = set(responses) - {it.question_id for it in questionnaire.items}
    if unknown:
        raise ProfilingError(f"responses for unknown questions: {sorted(unknown)}")

    return SystemProfile(
        profile_id=profile_id or derive_profile_id(responses, description, threat_actor),
        system_description=description,
        threat_actor=threat_actor,
        characteristics=SystemCharacteristics(**characteristics),
        factor_scores=factor_scores,
        impact_scores=impact_scores,
        categorical_answers=categorical,
    )


def load_responses(source: Union[str, Path, IO[str]]):
    """Read a questionnaire-response file.

    The file is a JSON object with an ``answers`` mapping keyed by question
    id plus optional ``system_description`` / ``threat_actor`` strings; a
    bare question-id mapping is also accepted.
    Returns ``(answers, description, threat_actor)``.
    """
    if hasattr(source, "read"):
        raw = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    if "answers" in raw:
        return (
            dict(raw["answers"]),
            raw.get("system_description", ""),
            raw.get("threat_actor", ""),
        )
    return dict(raw), "", ""


def customize_questionnaire(base: Questionnaire, description: str, gateway) -> CustomQuestionnaire:
    """Rewrite question wording for a concrete system via the gateway.

    The gateway must answer each request with a JSON object
    ``{"question_id": ..., "text": ...}``. Any structural deviation
    (transport failure, malformed payload, renamed id, empty text) keeps the
    base wording for that item and records a warning; customization never
    changes ids, sections, or allowed answers.
    """
    if not description:
        raise ProfilingError("description required")

    items = []
    warnings = []
    for item in base.items:
        request = GenerationRequest(
            purpose="customize-questionnaire",
            template_id="customize",
            variables={
                "question_id": item.question_id,
                "question_text": item.text,
                "section": item.section,
                "system_description": description,
            },
        )
        text = item.text
        try:
            reply = gateway.complete(request)
            payload = json.loads(reply)
            if (
                isinstance(payload, dict)
                and payload.get("question_id") == item.question_id
                and isinstance(payload.get("text"), str)
                and payload["text"].strip()
            ):
                text = payload["text"].strip()
            else:
                warnings.append(
                    f"{item.question_id}: gateway output structurally invalid; base wording kept"
                )
        except (GatewayError, json.JSONDecodeError) as exc:
            warnings.append(f"{item.question_id}: {exc}; base wording kept")
        items.append(
            QuestionnaireItem(
                question_id=item.question_id,
                section=item.section,
                answer_kind=item.answer_kind,
                text=text,
                allowed_answers=item.allowed_answers,
                maps_to=item.maps_to,
            )
        )
    for warning in warnings:
        logger.warning("questionnaire customization: %s", warning)
    return CustomQuestionnaire(
        base_version=base.version,
        system_description=description,
        items=tuple(items),
        warnings=tuple(warnings),
    )
