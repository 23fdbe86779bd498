"""Walk through a full assessment: answer the questionnaire, score, rank.

Run from the repository root:  python3 demos/01_profile_and_assess.py
"""

import json
from pathlib import Path

import amlrisk
from amlrisk.records import load_record_store

ROOT = Path(__file__).parent.parent
CORPUS = ROOT / "src" / "amlrisk" / "data" / "corpus.jsonl"
RESPONSES = ROOT / "tests" / "fixtures" / "responses_feedback_scoring.json"

# The catalog bundles the attack list, the feasibility factors and impact
# dimensions they reference, and the drop-out rules.
catalog = amlrisk.load_bundled_catalog()
print(f"catalog {catalog.version}: {len(catalog.attacks)} attacks / "
      f"{len(catalog.factors)} factors / {len(catalog.impacts)} impacts")

# A system owner answers 33 questions: 11 impact severities, 18 security
# properties, 4 system characteristics. Here we reuse the committed example
# (a review-scoring system attacked by someone posing as a buyer).
raw = json.loads(RESPONSES.read_text())
profile = amlrisk.build_profile(
    raw["answers"], raw["system_description"], raw["threat_actor"]
)
print(f"\nprofile {profile.profile_id}: "
      f"{profile.characteristics.domain}/{profile.characteristics.data_type}, "
      f"threat actor: {profile.threat_actor[:60]}...")

# Empirical evidence: one record per published attack evaluation.
store = load_record_store(CORPUS)
print(f"evidence snapshot {store.snapshot_id}: {len(store.records)} records")

# Score every attack. Per attack: multiply the relevant factor scores,
# refine per execution mode, log + min-max normalize over the cohort,
# weigh in matched success rates, combine modes, scale by impact, clamp to
# 0-10, then apply the drop-out rules.
assessment = amlrisk.assess(catalog, profile, store)

print("\n" + amlrisk.render_report(assessment, "human", top_k=5))

# Every number above is auditable through the breakdown.
top = assessment.breakdown(assessment.ranking[0])
digital = top.modes["digital"]
print("audit trail for the top risk:")
print(f"  F_generic = {top.f_generic}")
print(f"  digital: F = {digital.f_em}, NormF = {digital.norm_f_em:.4f}, "
      f"SR = {digital.sr_em:.4f} (from levels {[b.level for b in digital.batches]})")
print(f"  impact = {top.impact}, score = {amlrisk.display_score(top.final_score)}")
