/**
 * Wire types mirroring the service's JSON bodies.
 * The UI never computes scores; everything numeric arrives from the service.
 */

export interface QuestionnaireItem {
  question_id: string;
  section: "attack-impact" | "system-safety" | "characteristics";
  answer_kind: string;
  text: string;
  allowed_answers: string[];
  maps_to: string;
}

export interface Questionnaire {
  version: string;
  items: QuestionnaireItem[];
  system_description?: string;
  warnings?: string[];
}

export interface MatchBatchSummary {
  level: number;
  record_ids: string[];
  batch_mean: number;
}

export interface ModeBreakdown {
  supported: boolean;
  f_em: number | null;
  norm_f_em: number | null;
  sr_em: number | null;
  sr_fallback: boolean;
  l_em: number;
  batches: MatchBatchSummary[];
}

export interface ScoreBreakdown {
  attack_id: string;
  attack_name: string;
  objective: "integrity" | "privacy" | "availability";
  retraining_mitigated: boolean;
  f_generic: number;
  modes: Record<string, ModeBreakdown>;
  l_overall: number;
  impact: number;
  raw_score: number;
  final_score: number;
  zeroed_by: string | null;
  countermeasure_rate?: number;
}

export interface Assessment {
  assessment_id: string;
  created_at: string;
  profile_id: string;
  catalog_version: string;
  snapshot_id: string;
  config_digest: string;
  breakdowns: ScoreBreakdown[];
  ranking: string[];
  countermeasure?: string;
}

/** Same schema as the CLI's --responses file. */
export interface ResponseDocument {
  system_description: string;
  threat_actor: string;
  answers: Record<string, string>;
}

export interface ServiceError {
  error: { code: string; message: string };
}
