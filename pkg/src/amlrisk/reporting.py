"""Ranking, report rendering, and scenario-card generation.

The machine format is canonical JSON carrying every breakdown field and all
provenance ids; parsing it reconstructs an equal assessment. The human
format is a terminal-friendly ranking with 3-decimal scores (half-up
rounding, matching the displayed precision elsewhere); an HTML fragment
serves the companion UI. Rendering is a pure function of the assessment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from html import escape
from typing import Optional, Sequence

from .catalog import Catalog
from .engine import (
    EngineError,
    ModeBreakdown,
    RiskAssessment,
    ScoreBreakdown,
    rank_breakdowns,
)
from .gateway import GatewayError, GenerationRequest
from .records import MatchBatch

REPORT_FORMATS = ("machine", "human")


def display_score(value: float) -> str:
    """Format a score at 3 decimals, rounding half away from zero."""
    return str(Decimal(repr(value)).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


def rank(breakdowns: Sequence[ScoreBreakdown]) -> tuple:
    """Attack ids by descending score, ties broken by ascending attack id."""
    return rank_breakdowns(breakdowns)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def render_report(assessment: RiskAssessment, format: str = "machine",
                  top_k: Optional[int] = None) -> str:
    """Render an assessment; machine output always carries every breakdown."""
    if format == "machine":
        return json.dumps(assessment.to_dict(), sort_keys=True, indent=2) + "\n"
    if format == "human":
        return _render_human(assessment, top_k)
    raise EngineError(f"unknown report format {format!r}")


def _ranked_breakdowns(assessment: RiskAssessment, top_k: Optional[int]) -> list:
    ordered = [assessment.breakdown(attack_id) for attack_id in assessment.ranking]
    if top_k is not None:
        ordered = ordered[: max(top_k, 0)]
    return ordered


def _mode_line(mode: str, mb: ModeBreakdown) -> str:
    if not mb.supported:
        return f"{mode}: unsupported"
    flag = " (fallback)" if mb.sr_fallback else ""
    return (
        f"{mode}: NormF={mb.norm_f_em:.3f} SR={mb.sr_em:.3f}{flag} L={mb.l_em:.3f}"
    )


def _render_human(assessment: RiskAssessment, top_k: Optional[int]) -> str:
    lines = [
        f"Risk assessment {assessment.assessment_id} ({assessment.created_at})",
        f"profile={assessment.profile_id} catalog={assessment.catalog_version} "
        f"snapshot={assessment.snapshot_id} config={assessment.config_digest}"
        + (f" countermeasure={assessment.countermeasure}" if assessment.countermeasure else ""),
        "",
    ]
    for position, breakdown in enumerate(_ranked_breakdowns(assessment, top_k), start=1):
        score = display_score(breakdown.final_score)
        lines.append(
            f"{position:>3}. {score:>6}  {breakdown.attack_name}  [{breakdown.objective}]"
        )
        detail = "      " + "   ".join(
            _mode_line(mode, breakdown.modes[mode]) for mode in sorted(breakdown.modes)
        )
        detail += f"   impact={breakdown.impact:.3f}"
        if breakdown.countermeasure_rate is not None:
            detail += (
                f"   countermeasure: {display_score(breakdown.raw_score)}"
                f" -> {score} (rate {breakdown.countermeasure_rate})"
            )
        if breakdown.zeroed_by:
            detail += f"   zeroed by rule: {breakdown.zeroed_by}"
        lines.append(detail)
    return "\n".join(lines) + "\n"


def render_html_fragment(assessment: RiskAssessment, top_k: Optional[int] = None) -> str:
    """Small HTML fragment for embedding in the companion UI."""
    rows = []
    for position, b in enumerate(_ranked_breakdowns(assessment, top_k), start=1):
        zeroed = (
            f'<span class="zeroed">zeroed by {escape(b.zeroed_by)}</span>'
            if b.zeroed_by else ""
        )
        rows.append(
            f'<li class="risk-card" data-attack-id="{escape(b.attack_id)}">'
            f'<span class="rank">{position}</span>'
            f'<span class="score">{display_score(b.final_score)}</span>'
            f'<span class="name">{escape(b.attack_name)}</span>'
            f'<span class="objective objective-{escape(b.objective)}">{escape(b.objective)}</span>'
            f"{zeroed}</li>"
        )
    return '<ol class="risk-ranking">' + "".join(rows) + "</ol>"


def parse_machine_report(text: str) -> RiskAssessment:
    """Reconstruct a :class:`RiskAssessment` from a machine report."""
    data = json.loads(text)
    breakdowns = []
    for b in data["breakdowns"]:
        modes = {}
        for mode, mb in b["modes"].items():
            modes[mode] = ModeBreakdown(
                supported=mb["supported"],
                f_em=mb["f_em"],
                norm_f_em=mb["norm_f_em"],
                sr_em=mb["sr_em"],
                sr_fallback=mb["sr_fallback"],
                l_em=mb["l_em"],
                batches=tuple(
                    MatchBatch(
                        level=batch["level"],
                        execution_mode=mode,
                        record_ids=tuple(batch["record_ids"]),
                        batch_mean=batch["batch_mean"],
                    )
                    for batch in mb["batches"]
                ),
            )
        breakdowns.append(
            ScoreBreakdown(
                attack_id=b["attack_id"],
                attack_name=b["attack_name"],
                objective=b["objective"],
                retraining_mitigated=b["retraining_mitigated"],
                f_generic=b["f_generic"],
                modes=modes,
                l_overall=b["l_overall"],
                impact=b["impact"],
                raw_score=b["raw_score"],
                final_score=b["final_score"],
                zeroed_by=b["zeroed_by"],
                countermeasure_rate=b.get("countermeasure_rate"),
            )
        )
    return RiskAssessment(
        assessment_id=data["assessment_id"],
        created_at=data["created_at"],
        profile_id=data["profile_id"],
        catalog_version=data["catalog_version"],
        snapshot_id=data["snapshot_id"],
        config_digest=data["config_digest"],
        breakdowns=tuple(breakdowns),
        ranking=tuple(data["ranking"]),
        countermeasure=data.get("countermeasure"),
    )


# ---------------------------------------------------------------------------
# Scenario cards
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioCard:
    attack_id: str
    rank: int
    score: str
    objective: str
    narrative: str
    generator: str

    def to_dict(self) -> dict:
        return {
            "attack_id": self.attack_id,
            "rank": self.rank,
            "score": self.score,
            "objective": self.objective,
            "narrative": self.narrative,
            "generator": self.generator,
        }


def generate_scenarios(
    assessment: RiskAssessment,
    top_k: int,
    system_description: str,
    threat_actor: str,
    gateway,
    catalog: Catalog,
) -> list:
    """Build narrative cards for the top-k ranked attacks.

    Gateway failures never abort the report: the affected card falls back to
    the catalog's attack description and is marked as stub-generated.
    """
    if top_k < 1:
        raise EngineError("top_k must be at least 1")
    cards = []
    for position, breakdown in enumerate(_ranked_breakdowns(assessment, top_k), start=1):
        attack = catalog.attacks_by_id.get(breakdown.attack_id)
        description = attack.description if attack else breakdown.attack_name
        request = GenerationRequest(
            purpose="scenario",
            template_id="scenario",
            variables={
                "attack_name": breakdown.attack_name,
                "attack_description": description,
                "objective": breakdown.objective,
                "score": display_score(breakdown.final_score),
                "rank": str(position),
                "system_description": system_description,
                "threat_actor": threat_actor,
            },
        )
        try:
            narrative = gateway.complete(request).strip()
            generator = (
                gateway.config.model
                if gateway.config.provider == "remote" and gateway.config.model
                else "stub"
            )
            if not narrative:
                raise GatewayError("empty narrative")
        except GatewayError:
            narrative = description
            generator = "stub"
        cards.append(
            ScenarioCard(
                attack_id=breakdown.attack_id,
                rank=position,
                score=display_score(breakdown.final_score),
                objective=breakdown.objective,
                narrative=narrative,
                generator=generator,
            )
        )
    return cards
