/**
 * Risk explorer view model: ranked cards with expandable breakdowns and a
 * what-if countermeasure toggle showing pre/post scores side by side. Every
 * number shown originates from a service response.
 */

import type { ApiClient } from "./api";
import type { Assessment, ScoreBreakdown } from "./types";
import { formatScore } from "./format";

export interface RiskCard {
  rank: number;
  attackId: string;
  name: string;
  objective: string;
  score: string;
  zeroedBy: string | null;
  mitigated: boolean;
}

export interface BreakdownRow {
  label: string;
  value: string;
}

export interface WhatIfCard extends RiskCard {
  /** Score after the countermeasure; always shown next to the base score. */
  scoreAfter: string;
  changed: boolean;
}

export function buildRanking(assessment: Assessment, topK?: number): RiskCard[] {
  const byId = new Map(assessment.breakdowns.map((b) => [b.attack_id, b]));
  const ids = topK ? assessment.ranking.slice(0, topK) : assessment.ranking;
  return ids.map((attackId, i) => {
    const breakdown = byId.get(attackId);
    if (!breakdown) throw new Error(`ranking references unknown attack ${attackId}`);
    return toCard(breakdown, i + 1);
  });
}

function toCard(breakdown: ScoreBreakdown, rank: number): RiskCard {
  return {
    rank,
    attackId: breakdown.attack_id,
    name: breakdown.attack_name,
    objective: breakdown.objective,
    score: formatScore(breakdown.final_score),
    zeroedBy: breakdown.zeroed_by,
    mitigated: breakdown.retraining_mitigated,
  };
}

/** Expanded drill-down rows for one attack's audit trail. */
export function buildBreakdownRows(breakdown: ScoreBreakdown): BreakdownRow[] {
  const rows: BreakdownRow[] = [
    { label: "Generic feasibility", value: breakdown.f_generic.toPrecision(6) },
  ];
  for (const mode of ["digital", "physical"]) {
    const mb = breakdown.modes[mode];
    if (!mb || !mb.supported) {
      rows.push({ label: `${mode} mode`, value: "unsupported" });
      continue;
    }
    const fallback = mb.sr_fallback ? " (fallback)" : "";
    rows.push({
      label: `${mode} mode`,
      value:
        `NormF ${formatScore(mb.norm_f_em ?? 0)} x SR ${formatScore(mb.sr_em ?? 0)}${fallback}` +
        ` = L ${formatScore(mb.l_em)}`,
    });
    if (mb.batches.length > 0) {
      rows.push({
        label: `${mode} evidence`,
        value: mb.batches
          .map((batch) => `level ${batch.level}: ${batch.record_ids.length} record(s)`)
          .join(", "),
      });
    }
  }
  rows.push({ label: "Combined likelihood", value: formatScore(breakdown.l_overall) });
  rows.push({ label: "Impact", value: formatScore(breakdown.impact) });
  if (breakdown.zeroed_by) {
    rows.push({ label: "Dropped out", value: `rule ${breakdown.zeroed_by} set the score to 0` });
  }
  if (breakdown.countermeasure_rate !== undefined) {
    rows.push({
      label: "Countermeasure",
      value: `score rescaled by observed post-defense rate ${breakdown.countermeasure_rate}`,
    });
  }
  return rows;
}

export class WhatIfExplorer {
  base: Assessment;
  after: Assessment | null = null;
  error: string | null = null;

  constructor(base: Assessment) {
    this.base = base;
  }

  /**
   * Calls the what-if endpoint; on failure the base view stays intact and
   * the error is surfaced as a banner message.
   */
  async toggleRetraining(api: ApiClient, rate: number): Promise<void> {
    try {
      this.after = await api.whatIf(this.base.assessment_id, rate);
      this.error = null;
    } catch (err) {
      this.after = null;
      this.error = err instanceof Error ? err.message : String(err);
    }
  }

  reset(): void {
    this.after = null;
    this.error = null;
  }

  /** Pre/post cards in the BASE ranking order so deltas line up visually. */
  cards(topK?: number): WhatIfCard[] {
    const baseCards = buildRanking(this.base, topK);
    if (!this.after) {
      return baseCards.map((card) => ({ ...card, scoreAfter: card.score, changed: false }));
    }
    const afterById = new Map(this.after.breakdowns.map((b) => [b.attack_id, b]));
    return baseCards.map((card) => {
      const post = afterById.get(card.attackId);
      const scoreAfter = post ? formatScore(post.final_score) : card.score;
      return { ...card, scoreAfter, changed: scoreAfter !== card.score };
    });
  }
}
