"""Scoring pipeline: feasibility, normalization, impact, likelihood, score.

For each catalog attack the engine multiplies the profile's scores for the
attack's required factors (triggers excluded), refines per execution mode
with the mode's trigger score, log-scales and min-max-normalizes the mode
cohort, weighs in empirical success rates, combines mode likelihoods, scales
by impact, clamps to 0-10, and finally applies the catalog's zeroing rules
as an override. Everything is pure given (catalog, profile, store snapshot,
config); results are independent of evaluation order.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Mapping, Optional, Sequence

from .catalog import EXECUTION_MODES, AttackDefinition, Catalog
from .profiling import SystemProfile
from .records import (
    DowngradePolicy,
    RecordStore,
    estimate_success_rate,
    match_records,
)

SCORE_CAP = 10.0
DEGENERATE_SPREAD = 1e-12

IMPACT_MODES = ("noisy-or", "literal-product")

CONFIG_FILE_KEYS = (
    "epsilon",
    "impact_mode",
    "normalization_degenerate_value",
    "downgrade.levels",
    "downgrade.weights",
)


class EngineError(ValueError):
    """Raised when scoring inputs are inconsistent."""


@dataclass(frozen=True)
class EngineConfig:
    """Scoring knobs; the 0-10 score cap is fixed, everything else is data."""

    epsilon: float = 1e-6
    impact_mode: str = "noisy-or"
    normalization_degenerate_value: float = 1.0
    downgrade: DowngradePolicy = field(default_factory=DowngradePolicy)
    score_cap: float = SCORE_CAP

    def __post_init__(self):
        if self.epsilon <= 0:
            raise EngineError("epsilon must be positive")
        if self.impact_mode not in IMPACT_MODES:
            raise EngineError(f"unknown impact mode {self.impact_mode!r}")
        if not (0.0 <= self.normalization_degenerate_value <= 1.0):
            raise EngineError("normalization degenerate value must be within [0, 1]")

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "impact_mode": self.impact_mode,
            "normalization_degenerate_value": self.normalization_degenerate_value,
            "downgrade": self.downgrade.to_dict(),
            "score_cap": self.score_cap,
        }

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return "c-" + hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def resolve_config(
    file_values: Optional[Mapping] = None,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping] = None,
) -> EngineConfig:
    """Merge configuration sources with precedence flag > env > file > default.

    ``file_values`` uses the documented config keys (``epsilon``,
    ``impact_mode``, ``normalization_degenerate_value``, ``downgrade.levels``,
    ``downgrade.weights``, nested ``downgrade`` also accepted). Environment
    names are the keys upper-cased with dots as underscores. ``overrides``
    maps config keys to already-typed values.
    """
    env = os.environ if env is None else env
    values = {}

    def put(key, value):
        if value is not None:
            values[key] = value

    if file_values:
        flat = dict(file_values)
        nested = flat.pop("downgrade", None)
        if isinstance(nested, Mapping):
            for sub in ("levels", "weights"):
                if sub in nested:
                    flat.setdefault(f"downgrade.{sub}", nested[sub])
        unknown = set(flat) - set(CONFIG_FILE_KEYS)
        if unknown:
            raise EngineError(f"unknown config keys: {sorted(unknown)}")
        for key in CONFIG_FILE_KEYS:
            put(key, flat.get(key))

    for key in CONFIG_FILE_KEYS:
        env_name = key.upper().replace(".", "_")
        if env_name in env:
            raw = env[env_name]
            if key in ("epsilon", "normalization_degenerate_value"):
                put(key, float(raw))
            elif key == "impact_mode":
                put(key, raw)
            else:
                put(key, json.loads(raw))

    if overrides:
        for key, value in overrides.items():
            if key not in CONFIG_FILE_KEYS:
                raise EngineError(f"unknown config key {key!r}")
            put(key, value)

    policy_kwargs = {}
    if "downgrade.levels" in values:
        policy_kwargs["levels"] = tuple(tuple(axes) for axes in values["downgrade.levels"])
    if "downgrade.weights" in values:
        policy_kwargs["weights"] = tuple(float(w) for w in values["downgrade.weights"])
    defaults = DowngradePolicy()
    policy = DowngradePolicy(
        levels=policy_kwargs.get("levels", defaults.levels),
        weights=policy_kwargs.get("weights", defaults.weights),
    )
    return EngineConfig(
        epsilon=float(values.get("epsilon", 1e-6)),
        impact_mode=values.get("impact_mode", "noisy-or"),
        normalization_degenerate_value=float(values.get("normalization_degenerate_value", 1.0)),
        downgrade=policy,
    )


# ---------------------------------------------------------------------------
# Breakdown containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeBreakdown:
    """Per-execution-mode slice of an attack's audit trail."""

    supported: bool
    f_em: Optional[float]
    norm_f_em: Optional[float]
    sr_em: Optional[float]
    sr_fallback: bool
    l_em: float
    batches: tuple = ()

    def to_dict(self) -> dict:
        return {
            "supported": self.supported,
            "f_em": self.f_em,
            "norm_f_em": self.norm_f_em,
            "sr_em": self.sr_em,
            "sr_fallback": self.sr_fallback,
            "l_em": self.l_em,
            "batches": [
                {
                    "level": b.level,
                    "record_ids": list(b.record_ids),
                    "batch_mean": b.batch_mean,
                }
                for b in self.batches
            ],
        }


@dataclass(frozen=True)
class ScoreBreakdown:
    """Full per-attack audit trail, including pre-zeroing components."""

    attack_id: str
    attack_name: str
    objective: str
    retraining_mitigated: bool
    f_generic: float
    modes: Mapping[str, ModeBreakdown]
    l_overall: float
    impact: float
    raw_score: float
    final_score: float
    zeroed_by: Optional[str] = None
    countermeasure_rate: Optional[float] = None

    def to_dict(self) -> dict:
        data = {
            "attack_id": self.attack_id,
            "attack_name": self.attack_name,
            "objective": self.objective,
            "retraining_mitigated": self.retraining_mitigated,
            "f_generic": self.f_generic,
            "modes": {mode: mb.to_dict() for mode, mb in sorted(self.modes.items())},
            "l_overall": self.l_overall,
            "impact": self.impact,
            "raw_score": self.raw_score,
            "final_score": self.final_score,
            "zeroed_by": self.zeroed_by,
        }
        if self.countermeasure_rate is not None:
            data["countermeasure_rate"] = self.countermeasure_rate
        return data


@dataclass(frozen=True)
class RiskAssessment:
    """Ranked breakdowns plus the provenance needed to reproduce them."""

    assessment_id: str
    created_at: str
    profile_id: str
    catalog_version: str
    snapshot_id: str
    config_digest: str
    breakdowns: tuple
    ranking: tuple
    countermeasure: Optional[str] = None

    def breakdown(self, attack_id: str) -> ScoreBreakdown:
        for b in self.breakdowns:
            if b.attack_id == attack_id:
                return b
        raise EngineError(f"no breakdown for attack {attack_id!r}")

    def to_dict(self) -> dict:
        data = {
            "assessment_id": self.assessment_id,
            "created_at": self.created_at,
            "profile_id": self.profile_id,
            "catalog_version": self.catalog_version,
            "snapshot_id": self.snapshot_id,
            "config_digest": self.config_digest,
            "breakdowns": [b.to_dict() for b in self.breakdowns],
            "ranking": list(self.ranking),
        }
        if self.countermeasure is not None:
            data["countermeasure"] = self.countermeasure
        return data


@dataclass(frozen=True)
class CountermeasureProfile:
    """Post-defense success rates for attacks the defense is known to mitigate."""

    name: str
    rates: Mapping[str, float]
    provenance: str = ""

    def __post_init__(self):
        for attack_id, rate in self.rates.items():
            if not (0.0 <= rate <= 1.0):
                raise EngineError(
                    f"countermeasure rate for {attack_id} out of range: {rate}"
                )


# ---------------------------------------------------------------------------
# Pipeline stages
# ---------------------------------------------------------------------------

def feasibility_generic(attack: AttackDefinition, profile: SystemProfile, catalog: Catalog) -> float:
    """Product of the profile's scores over the attack's non-trigger factors."""
    triggers = catalog.trigger_factor_ids
    product = 1.0
    for factor_id in attack.required_factors:
        if factor_id in triggers:
            continue
        if factor_id not in profile.factor_scores:
            raise EngineError(f"profile lacks a score for factor {factor_id}")
        product *= profile.factor_scores[factor_id]
    return product


def feasibility_mode(
    attack: AttackDefinition,
    profile: SystemProfile,
    mode: str,
    f_generic: float,
    catalog: Catalog,
) -> float:
    """Refine the generic feasibility with the mode's trigger score."""
    if mode not in attack.execution_modes:
        raise EngineError(f"attack {attack.id} does not support mode {mode!r}")
    trigger_id = catalog.trigger_factor_id(mode)
    if trigger_id is None or trigger_id not in profile.factor_scores:
        raise EngineError(f"profile lacks a score for the {mode} trigger factor")
    return f_generic * profile.factor_scores[trigger_id]


def normalize_feasibility(
    values: Mapping[str, float],
    epsilon: float,
    degenerate_value: float = 1.0,
) -> dict:
    """Log-scale then min-max normalize a mode cohort to [0, 1].

    When the cohort is degenerate (max == min), entries receive the
    configured degenerate value, except that a feasibility of exactly zero
    always normalizes to zero so that nullified attacks stay nullified.
    """
    if not values:
        raise EngineError("cannot normalize an empty cohort")
    logs = {aid: math.log(f + epsilon) for aid, f in values.items()}
    low = min(logs.values())
    high = max(logs.values())
    if high - low < DEGENERATE_SPREAD:
        return {
            aid: (0.0 if values[aid] == 0.0 else degenerate_value)
            for aid in values
        }
    return {aid: (logs[aid] - low) / (high - low) for aid in values}


def impact_score(attack: AttackDefinition, profile: SystemProfile, impact_mode: str = "noisy-or") -> float:
    """Aggregate the severities of the impacts the attack compromises.

    noisy-or grows with the number and severity of compromised impacts;
    literal-product is the complement form, kept only for comparison runs.
    """
    if impact_mode not in IMPACT_MODES:
        raise EngineError(f"unknown impact mode {impact_mode!r}")
    complement = 1.0
    for impact_id in attack.compromised_impacts:
        if impact_id not in profile.impact_scores:
            raise EngineError(f"profile lacks a score for impact {impact_id}")
        complement *= 1.0 - profile.impact_scores[impact_id]
    if impact_mode == "noisy-or":
        return 1.0 - complement
    return complement


def combine_likelihood(mode_inputs: Mapping[str, tuple]) -> tuple:
    """Combine per-mode (NormF, SR) pairs into L_em values and L_overall.

    ``mode_inputs`` maps each supported mode to its (normalized feasibility,
    success rate); unsupported modes are simply absent and contribute zero.
    """
    l_by_mode = {}
    complement = 1.0
    for mode in EXECUTION_MODES:
        if mode in mode_inputs:
            norm_f, sr = mode_inputs[mode]
            l_em = norm_f * sr
        else:
            l_em = 0.0
        l_by_mode[mode] = l_em
        complement *= 1.0 - l_em
    return l_by_mode, 1.0 - complement


def final_score(l_overall: float, impact: float, cap: float = SCORE_CAP) -> float:
    """Scale likelihood x impact to 0-10 and clamp at the cap."""
    return min(l_overall * impact * 10.0, cap)


def apply_zeroing(
    attack: AttackDefinition,
    profile: SystemProfile,
    rules: Sequence,
) -> Optional[str]:
    """Return the id of the first rule that invalidates the attack, if any."""
    for rule in rules:
        if rule.applies_to_attack(attack) and rule.triggered_by(profile.categorical_answers):
            return rule.rule_id
    return None


# ---------------------------------------------------------------------------
# Full assessment
# ---------------------------------------------------------------------------

def rank_breakdowns(breakdowns: Sequence[ScoreBreakdown]) -> tuple:
    """Attack ids by descending score; ties break by ascending attack id."""
    return tuple(
        b.attack_id
        for b in sorted(breakdowns, key=lambda b: (-b.final_score, b.attack_id))
    )


def derive_assessment_id(profile_id: str, catalog_version: str, snapshot_id: str,
                         config_digest: str) -> str:
    payload = "|".join([profile_id, catalog_version, snapshot_id, config_digest])
    return "a-" + hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def assess(
    catalog: Catalog,
    profile: SystemProfile,
    store: RecordStore,
    config: Optional[EngineConfig] = None,
    created_at: Optional[str] = None,
) -> RiskAssessment:
    """Score every catalog attack against the profile and record store.

    Stage order: feasibility, cohort-wide normalization, success-rate
    estimation, likelihood, impact, final score, zeroing override. The
    assessment either completes for all attacks or fails atomically.
    """
    config = config or EngineConfig()
    created_at = created_at or datetime.now(timezone.utc).isoformat(timespec="seconds")

    f_generic = {a.id: feasibility_generic(a, profile, catalog) for a in catalog.attacks}

    # Per-mode refinement over the attacks supporting each mode, then a
    # cohort-wide normalization barrier per mode.
    f_mode = {mode: {} for mode in EXECUTION_MODES}
    for attack in catalog.attacks:
        for mode in attack.execution_modes:
            f_mode[mode][attack.id] = feasibility_mode(
                attack, profile, mode, f_generic[attack.id], catalog
            )
    norm_f = {
        mode: (
            normalize_feasibility(values, config.epsilon, config.normalization_degenerate_value)
            if values else {}
        )
        for mode, values in f_mode.items()
    }

    breakdowns = []
    for attack in catalog.attacks:
        mode_breakdowns = {}
        likelihood_inputs = {}
        for mode in EXECUTION_MODES:
            if mode in attack.execution_modes:
                batches = match_records(store, attack, profile, mode, config.downgrade)
                sr = estimate_success_rate(batches, config.downgrade, mode, store)
                nf = norm_f[mode][attack.id]
                likelihood_inputs[mode] = (nf, sr)
                mode_breakdowns[mode] = ModeBreakdown(
                    supported=True,
                    f_em=f_mode[mode][attack.id],
                    norm_f_em=nf,
                    sr_em=sr,
                    sr_fallback=not batches,
                    l_em=nf * sr,
                    batches=tuple(batches),
                )
            else:
                mode_breakdowns[mode] = ModeBreakdown(
                    supported=False, f_em=None, norm_f_em=None, sr_em=None,
                    sr_fallback=False, l_em=0.0,
                )
        l_by_mode, l_overall = combine_likelihood(likelihood_inputs)
        impact = impact_score(attack, profile, config.impact_mode)
        raw = final_score(l_overall, impact, config.score_cap)
        zeroed_by = apply_zeroing(attack, profile, catalog.zeroing_rules)
        breakdowns.append(
            ScoreBreakdown(
                attack_id=attack.id,
                attack_name=attack.name,
                objective=attack.objective,
                retraining_mitigated=attack.retraining_mitigated,
                f_generic=f_generic[attack.id],
                modes=mode_breakdowns,
                l_overall=l_overall,
                impact=impact,
                raw_score=raw,
                final_score=0.0 if zeroed_by else raw,
                zeroed_by=zeroed_by,
            )
        )

    breakdowns = tuple(breakdowns)
    config_digest = config.digest()
    return RiskAssessment(
        assessment_id=derive_assessment_id(
            profile.profile_id, catalog.version, store.snapshot_id, config_digest
        ),
        created_at=created_at,
        profile_id=profile.profile_id,
        catalog_version=catalog.version,
        snapshot_id=store.snapshot_id,
        config_digest=config_digest,
        breakdowns=breakdowns,
        ranking=rank_breakdowns(breakdowns),
    )


def reassess_with_countermeasure(
    assessment: RiskAssessment,
    countermeasure: CountermeasureProfile,
    catalog: Catalog,
) -> RiskAssessment:
    """Rescale mitigated attacks by their post-defense success rate.

    Only attacks flagged as mitigated in the catalog may receive a rate; all
    other breakdowns are carried over untouched. Output is re-ranked.
    """
    for attack_id in countermeasure.rates:
        attack = catalog.attacks_by_id.get(attack_id)
        if attack is None:
            raise EngineError(f"countermeasure names unknown attack {attack_id!r}")
        if not attack.retraining_mitigated:
            raise EngineError(
                f"attack {attack_id} is not flagged as mitigated by this countermeasure"
            )

    updated = []
    for breakdown in assessment.breakdowns:
        rate = countermeasure.rates.get(breakdown.attack_id)
        if rate is None:
            updated.append(breakdown)
        else:
            updated.append(
                replace(
                    breakdown,
                    final_score=breakdown.final_score * rate,
                    countermeasure_rate=rate,
                )
            )
    updated = tuple(updated)
    return replace(
        assessment,
        breakdowns=updated,
        ranking=rank_breakdowns(updated),
        countermeasure=countermeasure.name,
    )


def uniform_retraining_countermeasure(catalog: Catalog, rate: float,
                                      name: str = "adversarial-retraining") -> CountermeasureProfile:
    """Apply one observed post-retraining rate to every mitigated attack."""
    return CountermeasureProfile(
        name=name,
        rates={a.id: rate for a in catalog.attacks if a.retraining_mitigated},
        provenance=f"uniform rate {rate} applied to retraining-mitigated attacks",
    )
