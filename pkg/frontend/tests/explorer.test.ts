import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { WhatIfExplorer, buildBreakdownRows, buildRanking } from "../src/explorer";
import { formatScore } from "../src/format";
import type { Assessment } from "../src/types";

const REPO_ROOT = join(__dirname, "..", "..");

function loadGolden(): Assessment {
  return JSON.parse(
    readFileSync(join(REPO_ROOT, "tests", "fixtures", "golden_assessment.json"), "utf-8"),
  ) as Assessment;
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("buildRanking", () => {
  it("renders five cards in score order with the top card integrity", () => {
    const cards = buildRanking(loadGolden(), 5);
    expect(cards).toHaveLength(5);
    expect(cards.map((c) => c.rank)).toEqual([1, 2, 3, 4, 5]);
    expect(cards[0].score).toBe("5.984");
    expect(cards[0].objective).toBe("integrity");
    const scores = cards.map((c) => parseFloat(c.score));
    expect([...scores].sort((a, b) => b - a)).toEqual(scores);
  });

  it("never computes scores: every rendered value comes from the report", () => {
    const golden = loadGolden();
    const byId = new Map(golden.breakdowns.map((b) => [b.attack_id, b]));
    for (const card of buildRanking(golden)) {
      const breakdown = byId.get(card.attackId);
      expect(breakdown).toBeDefined();
      expect(card.score).toBe(formatScore(breakdown!.final_score));
      expect(card.name).toBe(breakdown!.attack_name);
    }
  });

  it("labels zeroed attacks with the rule that fired", () => {
    const cards = buildRanking(loadGolden());
    const zeroed = cards.filter((c) => c.zeroedBy !== null);
    expect(zeroed.length).toBeGreaterThan(0);
    const ruleIds = new Set(zeroed.map((c) => c.zeroedBy));
    expect(ruleIds.has("white-box-without-knowledge")).toBe(true);
    expect(ruleIds.has("score-feedback-unavailable")).toBe(true);
  });
});

describe("buildBreakdownRows", () => {
  it("exposes the audit trail including the drop-out rule", () => {
    const golden = loadGolden();
    const zeroed = golden.breakdowns.find((b) => b.zeroed_by === "white-box-without-knowledge");
    expect(zeroed).toBeDefined();
    const rows = buildBreakdownRows(zeroed!);
    const dropout = rows.find((r) => r.label === "Dropped out");
    expect(dropout?.value).toContain("white-box-without-knowledge");
  });

  it("shows per-mode contributions and evidence levels", () => {
    const golden = loadGolden();
    const top = golden.breakdowns.find((b) => b.attack_id === golden.ranking[0])!;
    const rows = buildBreakdownRows(top);
    const digital = rows.find((r) => r.label === "digital mode");
    expect(digital?.value).toMatch(/NormF .* x SR .* = L /);
    expect(rows.find((r) => r.label === "digital evidence")?.value).toContain("level 0");
  });
});

describe("WhatIfExplorer", () => {
  it("shows before and after side by side for the retraining toggle", async () => {
    const golden = loadGolden();
    // Canonical what-if response: evasion scores rescaled by 0.3, others kept.
    const after: Assessment = {
      ...golden,
      countermeasure: "adversarial-retraining",
      breakdowns: golden.breakdowns.map((b) =>
        b.retraining_mitigated
          ? { ...b, final_score: b.final_score * 0.3, countermeasure_rate: 0.3 }
          : b,
      ),
    };
    const calls: string[] = [];
    const api = new ApiClient("http://service.test", async (url, init) => {
      calls.push(`${init?.method ?? "GET"} ${url}`);
      return jsonResponse(after);
    });

    const explorer = new WhatIfExplorer(golden);
    await explorer.toggleRetraining(api, 0.3);
    expect(calls).toEqual([
      `POST http://service.test/assessments/${golden.assessment_id}/whatif`,
    ]);
    expect(explorer.error).toBeNull();

    const cards = explorer.cards(5);
    expect(cards[0].score).toBe("5.984");
    expect(cards[0].scoreAfter).toBe("1.795");
    expect(cards[0].changed).toBe(true);
    // Availability and privacy cards stay unchanged.
    const untouched = cards.filter((c) => c.objective !== "integrity");
    expect(untouched.length).toBeGreaterThan(0);
    for (const card of untouched) {
      expect(card.scoreAfter).toBe(card.score);
      expect(card.changed).toBe(false);
    }
  });

  it("keeps the base view and raises a banner when the what-if fails", async () => {
    const golden = loadGolden();
    const api = new ApiClient("http://service.test", async () =>
      jsonResponse({ error: { code: "engine-error", message: "boom" } }, 422),
    );
    const explorer = new WhatIfExplorer(golden);
    await explorer.toggleRetraining(api, 0.3);
    expect(explorer.error).toBe("boom");
    const cards = explorer.cards(3);
    expect(cards[0].score).toBe("5.984");
    expect(cards[0].scoreAfter).toBe("5.984");
  });

  it("reset returns to the pre-countermeasure view", async () => {
    const golden = loadGolden();
    const api = new ApiClient("http://service.test", async () => jsonResponse(golden));
    const explorer = new WhatIfExplorer(golden);
    await explorer.toggleRetraining(api, 0.3);
    explorer.reset();
    expect(explorer.after).toBeNull();
    expect(explorer.cards(1)[0].changed).toBe(false);
  });
});
