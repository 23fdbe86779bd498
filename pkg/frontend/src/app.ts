/**
 * DOM wiring: wizard on the left, risk explorer on the right.
 * All logic lives in wizard.ts / explorer.ts; this file only renders.
 */

import { ApiClient } from "./api";
import { WhatIfExplorer, buildBreakdownRows } from "./explorer";
import { formatScore, objectiveBadgeClass, progressLabel } from "./format";
import type { Assessment } from "./types";
import { QuestionnaireWizard } from "./wizard";

const SERVICE_URL = (window as unknown as { AMLRISK_SERVICE?: string }).AMLRISK_SERVICE
  ?? "http://127.0.0.1:8000";
const RETRAIN_RATE = 0.3;

const api = new ApiClient(SERVICE_URL);

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

async function start(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  root.textContent = "";

  let sessionId = "local";
  try {
    sessionId = (await api.createSession()).session_id;
  } catch {
    // offline draft still works against localStorage
  }

  const questionnaire = await api.getQuestionnaire();
  const wizard = new QuestionnaireWizard(questionnaire);
  wizard.restoreDraft(window.localStorage, sessionId);

  const wizardPane = el("section", "pane wizard-pane");
  const explorerPane = el("section", "pane explorer-pane");
  root.append(wizardPane, explorerPane);

  const renderExplorer = (assessment: Assessment | null, explorer: WhatIfExplorer | null) => {
    explorerPane.textContent = "";
    explorerPane.append(el("h2", undefined, "Ranked risks"));
    if (!assessment || !explorer) {
      explorerPane.append(el("p", "hint", "Submit the questionnaire to see the ranking."));
      return;
    }

    const toggleRow = el("div", "whatif-row");
    const toggle = el("button", "whatif-toggle",
      explorer.after ? "Remove adversarial retraining" : `Apply adversarial retraining (rate ${RETRAIN_RATE})`);
    toggle.addEventListener("click", async () => {
      if (explorer.after) {
        explorer.reset();
      } else {
        await explorer.toggleRetraining(api, RETRAIN_RATE);
      }
      renderExplorer(assessment, explorer);
    });
    toggleRow.append(toggle);
    explorerPane.append(toggleRow);

    if (explorer.error) {
      explorerPane.append(el("div", "error-banner", `What-if failed: ${explorer.error}`));
    }

    const list = el("ol", "risk-list");
    const byId = new Map(assessment.breakdowns.map((b) => [b.attack_id, b]));
    for (const card of explorer.cards()) {
      const item = el("li", "risk-card");
      const header = el("div", "risk-header");
      header.append(el("span", "risk-score", card.score));
      if (explorer.after) {
        header.append(el("span", "risk-arrow", "->"));
        header.append(el("span", card.changed ? "risk-score changed" : "risk-score",
          card.scoreAfter));
      }
      header.append(el("span", "risk-name", card.name));
      header.append(el("span", objectiveBadgeClass(card.objective), card.objective));
      if (card.zeroedBy) header.append(el("span", "badge badge-zeroed", `zeroed: ${card.zeroedBy}`));
      item.append(header);

      const details = el("dl", "risk-details hidden");
      const breakdown = byId.get(card.attackId);
      if (breakdown) {
        for (const row of buildBreakdownRows(breakdown)) {
          details.append(el("dt", undefined, row.label));
          details.append(el("dd", undefined, row.value));
        }
      }
      header.addEventListener("click", () => details.classList.toggle("hidden"));
      item.append(details);
      list.append(item);
    }
    explorerPane.append(list);
  };

  const renderWizard = () => {
    wizardPane.textContent = "";
    wizardPane.append(el("h2", undefined, "System profiling"));

    const description = el("textarea", "description-input") as HTMLTextAreaElement;
    description.placeholder = "Describe the system (used to customize the questions)";
    description.value = wizard.systemDescription;
    description.addEventListener("change", async () => {
      wizard.systemDescription = description.value;
      if (description.value) {
        try {
          const customized = await api.getQuestionnaire(description.value);
          wizard.applyCustomizedItems(customized.items);
        } catch {
          // base wording stays on customization failure
        }
      }
      wizard.saveDraft(window.localStorage, sessionId);
      renderWizard();
    });
    wizardPane.append(description);

    const actor = el("input", "actor-input") as HTMLInputElement;
    actor.placeholder = "Threat actor";
    actor.value = wizard.threatActor;
    actor.addEventListener("change", () => {
      wizard.threatActor = actor.value;
      wizard.saveDraft(window.localStorage, sessionId);
    });
    wizardPane.append(actor);

    const item = wizard.current;
    const progress = wizard.progress();
    wizardPane.append(el("div", "progress", progressLabel(progress.answered, progress.total)));
    wizardPane.append(el("h3", undefined, `${item.question_id} (${item.section})`));
    wizardPane.append(el("p", "question-text", item.text));

    const answers = el("div", "answers");
    for (const label of item.allowed_answers) {
      const button = el("button",
        wizard.answerOf(item.question_id) === label ? "answer selected" : "answer", label);
      button.addEventListener("click", () => {
        wizard.answer(item.question_id, label);
        wizard.saveDraft(window.localStorage, sessionId);
        wizard.next();
        renderWizard();
      });
      answers.append(button);
    }
    wizardPane.append(answers);

    const nav = el("div", "nav");
    const back = el("button", "nav-button", "Back");
    back.addEventListener("click", () => { wizard.previous(); renderWizard(); });
    const forward = el("button", "nav-button", "Next");
    forward.addEventListener("click", () => { wizard.next(); renderWizard(); });
    const submit = el("button", "submit-button", "Assess") as HTMLButtonElement;
    submit.disabled = !wizard.isComplete();
    submit.addEventListener("click", async () => {
      const assessment = await api.createAssessment(wizard.toResponseDocument());
      wizard.clearDraft(window.localStorage, sessionId);
      renderExplorer(assessment, new WhatIfExplorer(assessment));
    });
    nav.append(back, forward, submit);
    wizardPane.append(nav);
  };

  renderWizard();
  renderExplorer(null, null);
}

start().catch((err) => {
  const root = document.getElementById("app");
  if (root) root.textContent = `Failed to reach the assessment service: ${err}`;
});
