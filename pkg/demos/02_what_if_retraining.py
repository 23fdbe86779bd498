"""What-if analysis: rescore after applying adversarial retraining.

Attacks the catalog flags as mitigated by retraining get their score
multiplied by the observed post-retraining success rate; everything else is
untouched. Run:  python3 demos/02_what_if_retraining.py
"""

import json
from pathlib import Path

import amlrisk
from amlrisk.engine import uniform_retraining_countermeasure
from amlrisk.records import load_record_store

ROOT = Path(__file__).parent.parent

catalog = amlrisk.load_bundled_catalog()
raw = json.loads((ROOT / "tests" / "fixtures" / "responses_feedback_scoring.json").read_text())
profile = amlrisk.build_profile(raw["answers"], raw["system_description"], raw["threat_actor"])
store = load_record_store(ROOT / "src" / "amlrisk" / "data" / "corpus.jsonl")

before = amlrisk.assess(catalog, profile, store)

# Retraining scenarios in the literature report the attack succeeding 30% of
# the time after the defense: rescale every mitigated attack by 0.3.
countermeasure = uniform_retraining_countermeasure(catalog, rate=0.3)
after = amlrisk.reassess_with_countermeasure(before, countermeasure, catalog)

print(f"{'attack':58s} {'before':>7s} {'after':>7s}")
for attack_id in before.ranking[:8]:
    b = before.breakdown(attack_id)
    a = after.breakdown(attack_id)
    marker = "  <- mitigated" if a.countermeasure_rate is not None else ""
    print(f"{b.attack_name[:58]:58s} {amlrisk.display_score(b.final_score):>7s} "
          f"{amlrisk.display_score(a.final_score):>7s}{marker}")

print("\nre-ranked after retraining:")
for position, attack_id in enumerate(after.ranking[:5], start=1):
    breakdown = after.breakdown(attack_id)
    print(f"  {position}. {amlrisk.display_score(breakdown.final_score)}  "
          f"{breakdown.attack_name}  [{breakdown.objective}]")
