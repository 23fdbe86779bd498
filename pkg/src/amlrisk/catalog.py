"""Attack catalog: attacks, feasibility factors, impacts, and zeroing rules.

The catalog is loaded from a single JSON document (top-level keys
``version``, ``factors``, ``impacts``, ``attacks``, ``zeroing_rules``) and
validated for referential integrity before the engine will use it. Loaded
catalogs are immutable; reloading produces a new value, never an in-place
mutation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Any, Mapping, Optional, Union

SUPPORTED_SCHEMA_VERSIONS = ("1.0",)

OBJECTIVES = ("integrity", "privacy", "availability")
THREAT_MODELS = ("white-box", "black-box", "gray-box")
STAGES = ("training", "serving")
ATTACK_FAMILIES = (
    "evasion",
    "poisoning-clean-label",
    "poisoning-backdoor",
    "poisoning-targeted",
    "poisoning-untargeted",
    "model-poisoning",
    "membership-inference",
    "attribute-inference",
    "data-reconstruction",
    "model-extraction",
    "resource-latency",
)
FEEDBACK_REQUIREMENTS = ("full-access", "score", "decision", "none")
EXECUTION_MODES = ("digital", "physical")
MODE_ROLES = ("none", "digital-trigger", "physical-trigger")

# Answer kinds a feasibility factor may carry. The questionnaire adds
# "ordinal-severity" (impact questions) and "characteristic-enum" (Q30-Q33).
FACTOR_ANSWER_KINDS = (
    "ordinal-difficulty",
    "ordinal-severity-inverted",
    "ordinal-level",
    "categorical-feedback",
    "categorical-knowledge",
    "categorical-binary",
)
CATEGORICAL_KINDS = (
    "categorical-feedback",
    "categorical-knowledge",
    "categorical-binary",
)


class CatalogError(ValueError):
    """Raised when a catalog document cannot be loaded or fails validation."""


@dataclass(frozen=True)
class FeasibilityFactor:
    """One condition/capability whose satisfaction level scales attacks."""

    id: str
    name: str
    question_id: str
    answer_kind: str
    execution_mode_role: str = "none"

    @property
    def is_categorical(self) -> bool:
        return self.answer_kind in CATEGORICAL_KINDS


@dataclass(frozen=True)
class ImpactDimension:
    """One consequence category under integrity, privacy, or availability."""

    id: str
    objective: str
    name: str
    question_id: str


@dataclass(frozen=True)
class ZeroingRule:
    """Invalidates an attack's score when a structural prerequisite is unmet.

    ``applies_to`` selects attacks by attribute equality/membership;
    ``condition`` is a boolean tree over retained categorical answers with
    ``all``/``any`` combinators and ``{"factor": id, "in"/"not_in": [...]}``
    leaves.
    """

    rule_id: str
    applies_to: Mapping[str, Any]
    condition: Mapping[str, Any]
    effect: str = "zero"

    def applies_to_attack(self, attack: "AttackDefinition") -> bool:
        for attr, expected in self.applies_to.items():
            value = getattr(attack, attr, None)
            if isinstance(expected, (list, tuple)):
                if value not in expected:
                    return False
            elif value != expected:
                return False
        return True

    def triggered_by(self, categorical_answers: Mapping[str, str]) -> bool:
        return _eval_condition(self.condition, categorical_answers)

    def condition_factor_ids(self) -> set:
        return _condition_factors(self.condition)


def _eval_condition(node: Mapping[str, Any], answers: Mapping[str, str]) -> bool:
    if "all" in node:
        return all(_eval_condition(child, answers) for child in node["all"])
    if "any" in node:
        return any(_eval_condition(child, answers) for child in node["any"])
    answer = answers.get(node["factor"])
    if "in" in node:
        return answer in node["in"]
    return answer not in node["not_in"]


def _condition_factors(node: Mapping[str, Any]) -> set:
    if "all" in node:
        return set().union(*(_condition_factors(c) for c in node["all"]))
    if "any" in node:
        return set().union(*(_condition_factors(c) for c in node["any"]))
    return {node["factor"]}


@dataclass(frozen=True)
class AttackDefinition:
    """One catalog entry with its required factors and compromised impacts."""

    id: str
    name: str
    objective: str
    threat_model: str
    stage: str
    attack_family: str
    feedback_requirement: str
    execution_modes: tuple
    required_factors: tuple
    compromised_impacts: tuple
    retraining_mitigated: bool
    description: str = ""


@dataclass(frozen=True)
class Catalog:
    """Validated, immutable bundle of attacks, factors, impacts, and rules."""

    version: str
    factors: tuple
    impacts: tuple
    attacks: tuple
    zeroing_rules: tuple
    factors_by_id: Mapping[str, FeasibilityFactor] = field(repr=False, default=None)
    impacts_by_id: Mapping[str, ImpactDimension] = field(repr=False, default=None)
    attacks_by_id: Mapping[str, AttackDefinition] = field(repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "factors_by_id", {f.id: f for f in self.factors})
        object.__setattr__(self, "impacts_by_id", {i.id: i for i in self.impacts})
        object.__setattr__(self, "attacks_by_id", {a.id: a for a in self.attacks})

    def trigger_factor_id(self, mode: str) -> Optional[str]:
        role = f"{mode}-trigger"
        for factor in self.factors:
            if factor.execution_mode_role == role:
                return factor.id
        return None

    @property
    def trigger_factor_ids(self) -> frozenset:
        return frozenset(
            f.id for f in self.factors if f.execution_mode_role != "none"
        )

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "factors": [vars(f).copy() for f in self.factors],
            "impacts": [vars(i).copy() for i in self.impacts],
            "attacks": [
                {
                    "id": a.id,
                    "name": a.name,
                    "objective": a.objective,
                    "threat_model": a.threat_model,
                    "stage": a.stage,
                    "attack_family": a.attack_family,
                    "feedback_requirement": a.feedback_requirement,
                    "execution_modes": list(a.execution_modes),
                    "required_factors": list(a.required_factors),
                    "compromised_impacts": list(a.compromised_impacts),
                    "retraining_mitigated": a.retraining_mitigated,
                    "description": a.description,
                }
                for a in self.attacks
            ],
            "zeroing_rules": [
                {
                    "rule_id": r.rule_id,
                    "applies_to": dict(r.applies_to),
                    "condition": r.condition,
                    "effect": r.effect,
                }
                for r in self.zeroing_rules
            ],
        }


@dataclass(frozen=True)
class Finding:
    """One validation finding; findings are data, not failures."""

    code: str
    subject: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple

    @property
    def ok(self) -> bool:
        return not self.findings


# ---------------------------------------------------------------------------
# Strict parsing
# ---------------------------------------------------------------------------

_TOP_KEYS = {"version", "factors", "impacts", "attacks", "zeroing_rules"}
_FACTOR_KEYS = {"id", "name", "question_id", "answer_kind", "execution_mode_role"}
_IMPACT_KEYS = {"id", "objective", "name", "question_id"}
_ATTACK_KEYS = {
    "id", "name", "objective", "threat_model", "stage", "attack_family",
    "feedback_requirement", "execution_modes", "required_factors",
    "compromised_impacts", "retraining_mitigated", "description",
}
_RULE_KEYS = {"rule_id", "applies_to", "condition", "effect"}


def _reject_unknown(obj: Mapping[str, Any], allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise CatalogError(f"unknown keys in {where}: {sorted(unknown)}")


def _require(obj: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in obj:
        raise CatalogError(f"missing key '{key}' in {where}")
    return obj[key]


def load_catalog(source: Union[str, Path, IO[str], Mapping[str, Any]]) -> Catalog:
    """Load and validate a catalog from a JSON document.

    ``source`` may be a path, an open text stream, or an already-parsed
    mapping. Raises :class:`CatalogError` on parse failure, unknown schema
    version, unknown keys, or any validation finding; there are no partial
    loads.
    """
    if isinstance(source, Mapping):
        raw = source
    else:
        try:
            if hasattr(source, "read"):
                raw = json.load(source)
            else:
                with open(source, "r", encoding="utf-8") as fh:
                    raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"malformed catalog document: {exc}") from exc

    if not isinstance(raw, Mapping):
        raise CatalogError("catalog document must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "catalog")

    version = _require(raw, "version", "catalog")
    if version not in SUPPORTED_SCHEMA_VERSIONS:
        raise CatalogError(
            f"unknown catalog schema version {version!r}; "
            f"supported: {list(SUPPORTED_SCHEMA_VERSIONS)}"
        )

    factors = []
    for obj in _require(raw, "factors", "catalog"):
        _reject_unknown(obj, _FACTOR_KEYS, f"factor {obj.get('id', '?')}")
        factors.append(FeasibilityFactor(
            id=_require(obj, "id", "factor"),
            name=_require(obj, "name", "factor"),
            question_id=_require(obj, "question_id", "factor"),
            answer_kind=_require(obj, "answer_kind", "factor"),
            execution_mode_role=obj.get("execution_mode_role", "none"),
        ))

    impacts = []
    for obj in _require(raw, "impacts", "catalog"):
        _reject_unknown(obj, _IMPACT_KEYS, f"impact {obj.get('id', '?')}")
        impacts.append(ImpactDimension(
            id=_require(obj, "id", "impact"),
            objective=_require(obj, "objective", "impact"),
            name=_require(obj, "name", "impact"),
            question_id=_require(obj, "question_id", "impact"),
        ))

    attacks = []
    for obj in _require(raw, "attacks", "catalog"):
        _reject_unknown(obj, _ATTACK_KEYS, f"attack {obj.get('id', '?')}")
        attacks.append(AttackDefinition(
            id=_require(obj, "id", "attack"),
            name=_require(obj, "name", "attack"),
            objective=_require(obj, "objective", "attack"),
            threat_model=_require(obj, "threat_model", "attack"),
            stage=_require(obj, "stage", "attack"),
            attack_family=_require(obj, "attack_family", "attack"),
            feedback_requirement=_require(obj, "feedback_requirement", "attack"),
            execution_modes=tuple(_require(obj, "execution_modes", "attack")),
            required_factors=tuple(_require(obj, "required_factors", "attack")),
            compromised_impacts=tuple(_require(obj, "compromised_impacts", "attack")),
            retraining_mitigated=bool(_require(obj, "retraining_mitigated", "attack")),
            description=obj.get("description", ""),
        ))

    rules = []
    for obj in raw.get("zeroing_rules", []):
        _reject_unknown(obj, _RULE_KEYS, f"zeroing rule {obj.get('rule_id', '?')}")
        rules.append(ZeroingRule(
            rule_id=_require(obj, "rule_id", "zeroing rule"),
            applies_to=dict(_require(obj, "applies_to", "zeroing rule")),
            condition=_require(obj, "condition", "zeroing rule"),
            effect=obj.get("effect", "zero"),
        ))

    catalog = Catalog(
        version=version,
        factors=tuple(factors),
        impacts=tuple(impacts),
        attacks=tuple(attacks),
        zeroing_rules=tuple(rules),
    )
    report = validate_catalog(catalog)
    if not report.ok:
        details = "; ".join(f"[{f.code}] {f.subject}: {f.message}" for f in report.findings)
        raise CatalogError(f"catalog failed validation: {details}")
    return catalog


def load_bundled_catalog() -> Catalog:
    """Load the catalog fixture shipped with the package."""
    with resources.files("amlrisk.data").joinpath("catalog.json").open("r") as fh:
        return load_catalog(fh)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_catalog(catalog: Catalog, questionnaire=None) -> ValidationReport:
    """Check every catalog invariant; returns findings without mutating.

    When ``questionnaire`` (an iterable of questionnaire items) is given,
    factor/impact question links are cross-checked against it.
    """
    findings = []

    def add(code: str, subject: str, message: str) -> None:
        findings.append(Finding(code=code, subject=subject, message=message))

    if not catalog.attacks:
        add("empty-attacks", "catalog", "catalog must define at least one attack")

    seen = set()
    for factor in catalog.factors:
        if factor.id in seen:
            add("duplicate-id", factor.id, "duplicate factor id")
        seen.add(factor.id)
        if factor.answer_kind not in FACTOR_ANSWER_KINDS:
            add("bad-answer-kind", factor.id, f"unknown answer kind {factor.answer_kind!r}")
        if factor.execution_mode_role not in MODE_ROLES:
            add("bad-mode-role", factor.id, f"unknown execution mode role {factor.execution_mode_role!r}")

    for role in ("digital-trigger", "physical-trigger"):
        holders = [f.id for f in catalog.factors if f.execution_mode_role == role]
        if len(holders) == 0:
            add("missing-trigger-role", role, f"no factor carries the {role} role")
        elif len(holders) > 1:
            add("duplicate-trigger-role", role, f"factors {holders} all carry the {role} role")

    seen = set()
    for impact in catalog.impacts:
        if impact.id in seen:
            add("duplicate-id", impact.id, "duplicate impact id")
        seen.add(impact.id)
        if impact.objective not in OBJECTIVES:
            add("bad-objective", impact.id, f"unknown objective {impact.objective!r}")
    covered = {i.objective for i in catalog.impacts}
    missing = set(OBJECTIVES) - covered
    if catalog.impacts and missing:
        add("objective-coverage", "impacts", f"no impact for objectives {sorted(missing)}")

    factor_ids = {f.id for f in catalog.factors}
    impact_ids = {i.id for i in catalog.impacts}
    seen = set()
    for attack in catalog.attacks:
        if attack.id in seen:
            add("duplicate-id", attack.id, "duplicate attack id")
        seen.add(attack.id)
        if attack.objective not in OBJECTIVES:
            add("bad-objective", attack.id, f"unknown objective {attack.objective!r}")
        if attack.threat_model not in THREAT_MODELS:
            add("bad-threat-model", attack.id, f"unknown threat model {attack.threat_model!r}")
        if attack.stage not in STAGES:
            add("bad-stage", attack.id, f"unknown stage {attack.stage!r}")
        if attack.attack_family not in ATTACK_FAMILIES:
            add("bad-family", attack.id, f"unknown attack family {attack.attack_family!r}")
        if attack.feedback_requirement not in FEEDBACK_REQUIREMENTS:
            add("bad-feedback", attack.id, f"unknown feedback requirement {attack.feedback_requirement!r}")
        if not attack.execution_modes:
            add("no-modes", attack.id, "execution_modes must be non-empty")
        for mode in attack.execution_modes:
            if mode not in EXECUTION_MODES:
                add("bad-mode", attack.id, f"unknown execution mode {mode!r}")
        if not attack.required_factors:
            add("empty-factors", attack.id, "required factor set must be non-empty")
        if not attack.compromised_impacts:
            add("empty-impacts", attack.id, "compromised impact set must be non-empty")
        for fid in attack.required_factors:
            if fid not in factor_ids:
                add("dangling-reference", attack.id, f"attack references undefined factor {fid}")
        for iid in attack.compromised_impacts:
            if iid not in impact_ids:
                add("dangling-reference", attack.id, f"attack references undefined impact {iid}")
        # Trigger consistency is a biconditional: mode supported <=> trigger required.
        for mode in EXECUTION_MODES:
            trigger = catalog.trigger_factor_id(mode)
            if trigger is None:
                continue
            supported = mode in attack.execution_modes
            required = trigger in attack.required_factors
            if supported and not required:
                add("missing-trigger-factor", attack.id,
                    f"{mode} mode supported but trigger factor {trigger} not required")
            if required and not supported:
                add("unsupported-trigger-factor", attack.id,
                    f"trigger factor {trigger} required but {mode} mode not supported")

    categorical_ids = {f.id for f in catalog.factors if f.is_categorical}
    seen = set()
    for rule in catalog.zeroing_rules:
        if rule.rule_id in seen:
            add("duplicate-id", rule.rule_id, "duplicate rule id")
        seen.add(rule.rule_id)
        if rule.effect != "zero":
            add("bad-effect", rule.rule_id, f"unsupported effect {rule.effect!r}")
        for fid in rule.condition_factor_ids():
            if fid not in factor_ids:
                add("dangling-reference", rule.rule_id, f"rule references undefined factor {fid}")
            elif fid not in categorical_ids:
                add("non-categorical-condition", rule.rule_id,
                    f"rule condition references non-categorical factor {fid}")
        for attr in rule.applies_to:
            if attr not in {
                "objective", "threat_model", "stage", "attack_family",
                "feedback_requirement", "retraining_mitigated", "id",
            }:
                add("bad-rule-attribute", rule.rule_id, f"unknown attack attribute {attr!r}")

    if questionnaire is not None:
        items = {item.question_id: item for item in questionnaire}
        for factor in catalog.factors:
            item = items.get(factor.question_id)
            if item is None:
                add("dangling-question", factor.id,
                    f"question {factor.question_id} not in questionnaire")
            elif item.answer_kind != factor.answer_kind:
                add("question-kind-mismatch", factor.id,
                    f"questionnaire item {factor.question_id} has kind "
                    f"{item.answer_kind!r}, factor expects {factor.answer_kind!r}")
        for impact in catalog.impacts:
            item = items.get(impact.question_id)
            if item is None:
                add("dangling-question", impact.id,
                    f"question {impact.question_id} not in questionnaire")
            elif item.maps_to != impact.id:
                add("question-mapping-mismatch", impact.id,
                    f"questionnaire item {impact.question_id} maps to {item.maps_to!r}")

    return ValidationReport(findings=tuple(findings))


def lookup_mapping(catalog: Catalog, attack_id: str):
    """Return the stored ``(required factors, compromised impacts)`` sets."""
    attack = catalog.attacks_by_id.get(attack_id)
    if attack is None:
        raise CatalogError(f"unknown attack id {attack_id!r}")
    return frozenset(attack.required_factors), frozenset(attack.compromised_impacts)
