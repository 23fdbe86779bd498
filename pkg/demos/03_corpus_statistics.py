"""Summarize the evidence corpus: domains, objectives, modes, threat models.

Run:  python3 demos/03_corpus_statistics.py
"""

from pathlib import Path

from amlrisk.records import dataset_stats, load_record_store

ROOT = Path(__file__).parent.parent

store = load_record_store(ROOT / "src" / "amlrisk" / "data" / "corpus.jsonl")
stats = dataset_stats(store)

print(f"{stats.record_count} records in snapshot {store.snapshot_id}\n")

print("records by domain:")
for domain, share in sorted(stats.domain_shares.items(), key=lambda kv: -kv[1]):
    print(f"  {domain:18s} {share:6.1%}")

print("\nobjectives overall:")
for objective, share in sorted(stats.objective_shares.items(), key=lambda kv: -kv[1]):
    print(f"  {objective:18s} {share:6.1%}")

print("\nmean success rate by execution mode:")
for mode, mean in stats.mode_mean_success_rates.items():
    print(f"  {mode:18s} {mean:.3f}")

print("\nattacker knowledge split:")
for tm, share in sorted(stats.threat_model_shares.items(), key=lambda kv: -kv[1]):
    print(f"  {tm:18s} {share:6.1%}")

print("\nphysical share by domain (where physical attacks exist):")
for domain, shares in stats.mode_shares_by_domain.items():
    physical = shares.get("physical", 0.0)
    if physical:
        print(f"  {domain:18s} {physical:6.1%}")
