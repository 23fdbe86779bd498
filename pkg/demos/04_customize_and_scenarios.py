"""Text-generation touchpoints: questionnaire customization and scenario cards.

Both run against the deterministic offline stub here; point ProviderConfig at
a remote endpoint to use a hosted model instead.
Run:  python3 demos/04_customize_and_scenarios.py
"""

import json
from pathlib import Path

import amlrisk
from amlrisk.records import load_record_store

ROOT = Path(__file__).parent.parent

gateway = amlrisk.GatewayClient(amlrisk.ProviderConfig(provider="stub"))

# Rewrites question wording in terms of the described system; ids, sections,
# and answer options never change.
base = amlrisk.load_questionnaire()
custom = amlrisk.customize_questionnaire(
    base,
    "an e-commerce platform that scores buyer product reviews for display ranking",
    gateway,
)
q22 = next(item for item in custom.items if item.question_id == "Q22")
print("Q22 before:", base.item("Q22").text)
print("Q22 after: ", q22.text)
print("warnings:  ", list(custom.warnings) or "none")

# Scenario cards explain the top-ranked risks in the owner's own terms.
catalog = amlrisk.load_bundled_catalog()
raw = json.loads((ROOT / "tests" / "fixtures" / "responses_feedback_scoring.json").read_text())
profile = amlrisk.build_profile(raw["answers"], raw["system_description"], raw["threat_actor"])
store = load_record_store(ROOT / "src" / "amlrisk" / "data" / "corpus.jsonl")
assessment = amlrisk.assess(catalog, profile, store)

cards = amlrisk.generate_scenarios(
    assessment, 3, raw["system_description"], raw["threat_actor"], gateway, catalog,
)
for card in cards:
    print(f"\n#{card.rank} [{card.objective}] {card.attack_id} (score {card.score})")
    print(card.narrative)
