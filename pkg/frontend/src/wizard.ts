/**
 * Questionnaire wizard state: stepping, validation, draft persistence, and
 * serialization into the exact response-document schema the CLI accepts.
 * Submission stays disabled until every question is answered.
 */

import type { Questionnaire, QuestionnaireItem, ResponseDocument } from "./types";

/** Minimal slice of the Web Storage API so tests can use a plain map. */
export interface DraftStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export class MemoryStorage implements DraftStorage {
  private data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.has(key) ? (this.data.get(key) as string) : null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
  removeItem(key: string): void {
    this.data.delete(key);
  }
}

interface DraftPayload {
  answers: Record<string, string>;
  index: number;
  systemDescription: string;
  threatActor: string;
}

export class QuestionnaireWizard {
  readonly items: QuestionnaireItem[];
  private answers = new Map<string, string>();
  private index = 0;
  systemDescription = "";
  threatActor = "";

  constructor(questionnaire: Questionnaire) {
    this.items = questionnaire.items;
  }

  get current(): QuestionnaireItem {
    return this.items[this.index];
  }

  get position(): number {
    return this.index;
  }

  answerOf(questionId: string): string | undefined {
    return this.answers.get(questionId);
  }

  /** Records an answer; rejects labels outside the item's allowed set. */
  answer(questionId: string, label: string): void {
    const item = this.items.find((candidate) => candidate.question_id === questionId);
    if (!item) throw new Error(`unknown question ${questionId}`);
    if (!item.allowed_answers.includes(label)) {
      throw new Error(`answer ${JSON.stringify(label)} not allowed for ${questionId}`);
    }
    this.answers.set(questionId, label);
  }

  next(): void {
    if (this.index < this.items.length - 1) this.index += 1;
  }

  previous(): void {
    if (this.index > 0) this.index -= 1;
  }

  goTo(index: number): void {
    if (index >= 0 && index < this.items.length) this.index = index;
  }

  progress(): { answered: number; total: number } {
    return { answered: this.answers.size, total: this.items.length };
  }

  /** Submit gate: every question answered. */
  isComplete(): boolean {
    return this.items.every((item) => this.answers.has(item.question_id));
  }

  missingQuestions(): string[] {
    return this.items
      .filter((item) => !this.answers.has(item.question_id))
      .map((item) => item.question_id);
  }

  /** Exactly the schema of the CLI's --responses file. */
  toResponseDocument(): ResponseDocument {
    if (!this.isComplete()) {
      throw new Error(`questionnaire incomplete: missing ${this.missingQuestions().join(", ")}`);
    }
    const answers: Record<string, string> = {};
    for (const item of this.items) {
      answers[item.question_id] = this.answers.get(item.question_id) as string;
    }
    return {
      system_description: this.systemDescription,
      threat_actor: this.threatActor,
      answers,
    };
  }

  loadAnswers(answers: Record<string, string>): void {
    for (const [questionId, label] of Object.entries(answers)) {
      this.answer(questionId, label);
    }
  }

  // --- draft persistence (survives abandoning the wizard mid-way) ---------

  private draftKey(sessionId: string): string {
    return `amlrisk-draft-${sessionId}`;
  }

  saveDraft(storage: DraftStorage, sessionId: string): void {
    const payload: DraftPayload = {
      answers: Object.fromEntries(this.answers),
      index: this.index,
      systemDescription: this.systemDescription,
      threatActor: this.threatActor,
    };
    storage.setItem(this.draftKey(sessionId), JSON.stringify(payload));
  }

  restoreDraft(storage: DraftStorage, sessionId: string): boolean {
    const raw = storage.getItem(this.draftKey(sessionId));
    if (!raw) return false;
    let payload: DraftPayload;
    try {
      payload = JSON.parse(raw) as DraftPayload;
    } catch {
      return false;
    }
    for (const [questionId, label] of Object.entries(payload.answers)) {
      try {
        this.answer(questionId, label);
      } catch {
        // Stale draft entries for renamed questions are dropped silently.
      }
    }
    this.index = Math.min(Math.max(payload.index, 0), this.items.length - 1);
    this.systemDescription = payload.systemDescription ?? "";
    this.threatActor = payload.threatActor ?? "";
    return true;
  }

  clearDraft(storage: DraftStorage, sessionId: string): void {
    storage.removeItem(this.draftKey(sessionId));
  }

  /** Swap in customized wording while keeping ids, order, and answers. */
  applyCustomizedItems(customized: QuestionnaireItem[]): void {
    if (customized.length !== this.items.length) {
      throw new Error("customized questionnaire does not match the base structure");
    }
    customized.forEach((item, i) => {
      const base = this.items[i];
      if (item.question_id !== base.question_id) {
        throw new Error(`customized item ${i} renames ${base.question_id}`);
      }
      if (JSON.stringify(item.allowed_answers) !== JSON.stringify(base.allowed_answers)) {
        throw new Error(`customized item ${item.question_id} changes its answer set`);
      }
      base.text = item.text;
    });
  }
}
