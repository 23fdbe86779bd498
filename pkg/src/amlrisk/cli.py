"""Command-line entry point: validate, customize, assess, whatif, ingest, stats, serve.

Outputs are reproducible given fixed inputs; timestamps are externalized to
``--created-at`` so machine-format outputs are byte-identical across runs.
Failures print a single machine-parsable line to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .catalog import CatalogError, load_bundled_catalog, load_catalog, validate_catalog
from .engine import (
    CountermeasureProfile,
    EngineError,
    assess,
    reassess_with_countermeasure,
    resolve_config,
    uniform_retraining_countermeasure,
)
from .gateway import GatewayClient, GatewayError, ProviderConfig
from .profiling import (
    ProfilingError,
    build_profile,
    customize_questionnaire,
    load_questionnaire,
    load_responses,
)
from .records import (
    RecordError,
    RecordStore,
    dataset_stats,
    dump_record_lines,
    ingest_records,
    load_bundled_corpus,
    load_record_store,
    parse_record_lines,
)
from .reporting import (
    generate_scenarios,
    parse_machine_report,
    render_report,
)


def _emit(text: str, out_path) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_catalog_arg(args):
    if getattr(args, "catalog", None):
        return load_catalog(args.catalog)
    return load_bundled_catalog()


def _load_store_arg(args, default="bundled"):
    if getattr(args, "corpus", None):
        return load_record_store(args.corpus)
    if default == "bundled":
        return load_bundled_corpus()
    return RecordStore.empty()


def _engine_config(args):
    file_values = None
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            file_values = json.load(fh)
    overrides = {}
    if getattr(args, "epsilon", None) is not None:
        overrides["epsilon"] = args.epsilon
    if getattr(args, "impact_mode", None):
        overrides["impact_mode"] = args.impact_mode
    if getattr(args, "normalization_degenerate_value", None) is not None:
        overrides["normalization_degenerate_value"] = args.normalization_degenerate_value
    if getattr(args, "downgrade_levels", None):
        overrides["downgrade.levels"] = json.loads(args.downgrade_levels)
    if getattr(args, "downgrade_weights", None):
        overrides["downgrade.weights"] = [float(w) for w in args.downgrade_weights.split(",")]
    return resolve_config(file_values, os.environ, overrides)


def _gateway(args) -> GatewayClient:
    provider = getattr(args, "provider", "stub") or "stub"
    if provider == "stub":
        return GatewayClient(ProviderConfig(provider="stub"))
    return GatewayClient(ProviderConfig(
        provider="remote",
        endpoint=os.environ.get("AMLRISK_GATEWAY_ENDPOINT", ""),
        credential_env=os.environ.get("AMLRISK_GATEWAY_CREDENTIAL_ENV", "AMLRISK_GATEWAY_TOKEN"),
        model=os.environ.get("AMLRISK_GATEWAY_MODEL", ""),
    ))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    catalog = _load_catalog_arg(args)
    report = validate_catalog(catalog, load_questionnaire().items)
    for finding in report.findings:
        print(f"finding: {finding.code}: {finding.subject}: {finding.message}")
    print(
        f"catalog {catalog.version}: {len(catalog.attacks)} attacks, "
        f"{len(catalog.factors)} factors, {len(catalog.impacts)} impacts, "
        f"{len(catalog.zeroing_rules)} zeroing rules"
    )
    if args.corpus:
        store = load_record_store(args.corpus)
        print(f"corpus {store.snapshot_id}: {len(store.records)} records")
    return 0 if report.ok else 1


def cmd_customize(args) -> int:
    base = load_questionnaire(args.questionnaire) if args.questionnaire else load_questionnaire()
    custom = customize_questionnaire(base, args.description, _gateway(args))
    _emit(json.dumps(custom.to_dict(), indent=2) + "\n", args.out)
    return 0


def cmd_assess(args) -> int:
    catalog = _load_catalog_arg(args)
    store = _load_store_arg(args)
    config = _engine_config(args)
    answers, description, actor = load_responses(args.responses)
    profile = build_profile(answers, description, actor)
    assessment = assess(catalog, profile, store, config, created_at=args.created_at)
    top = args.top if args.format == "human" else None
    _emit(render_report(assessment, args.format, top), args.out)
    if args.scenarios:
        cards = generate_scenarios(
            assessment, args.scenarios, description, actor, _gateway(args), catalog,
        )
        for card in cards:
            sys.stdout.write(
                f"\n#{card.rank} {card.score} [{card.objective}] {card.attack_id}\n"
                f"{card.narrative}\n"
            )
    return 0


def cmd_whatif(args) -> int:
    catalog = _load_catalog_arg(args)
    assessment = parse_machine_report(Path(args.assessment).read_text(encoding="utf-8"))
    if args.countermeasure:
        with open(args.countermeasure, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        countermeasure = CountermeasureProfile(
            name=payload.get("name", "countermeasure"),
            rates={k: float(v) for k, v in payload["rates"].items()},
            provenance=payload.get("provenance", ""),
        )
    elif args.retrain_rate is not None:
        countermeasure = uniform_retraining_countermeasure(catalog, args.retrain_rate)
    else:
        raise EngineError("whatif requires --retrain-rate or --countermeasure")
    reassessed = reassess_with_countermeasure(assessment, countermeasure, catalog)
    _emit(render_report(reassessed, args.format, args.top if args.format == "human" else None),
          args.out)
    return 0


def cmd_ingest(args) -> int:
    store = _load_store_arg(args, default="empty")
    candidates = parse_record_lines(args.records)
    report = ingest_records(store, candidates)
    for record_id, reason in report.rejected:
        print(f"rejected: {record_id}: {reason}")
    print(
        f"accepted {report.accepted_count}, rejected {report.rejected_count}; "
        f"snapshot {report.store.snapshot_id} with {len(report.store.records)} records"
    )
    if args.out:
        Path(args.out).write_text(dump_record_lines(report.store), encoding="utf-8")
    return 0


def cmd_stats(args) -> int:
    store = _load_store_arg(args)
    summary = dataset_stats(store)
    if args.format == "machine":
        _emit(json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
        return 0
    lines = [f"records: {summary.record_count}"]
    lines.append("domain shares:")
    for domain, share in summary.domain_shares.items():
        lines.append(f"  {domain}: {share:.2%}")
    lines.append("objective shares:")
    for objective, share in summary.objective_shares.items():
        lines.append(f"  {objective}: {share:.2%}")
    lines.append("mode shares:")
    for mode, share in summary.mode_shares.items():
        lines.append(f"  {mode}: {share:.2%}")
    lines.append("mean success rate by mode:")
    for mode, mean in summary.mode_mean_success_rates.items():
        lines.append(f"  {mode}: {mean:.3f}")
    lines.append("threat model shares:")
    for tm, share in summary.threat_model_shares.items():
        lines.append(f"  {tm}: {share:.2%}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    catalog = _load_catalog_arg(args)
    store = _load_store_arg(args)
    serve(
        host=args.host,
        port=args.port,
        catalog=catalog,
        store=store,
        config=_engine_config(args),
        gateway=_gateway(args),
        assessments_dir=args.assessments_dir,
    )
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_engine_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="engine config file (JSON)")
    parser.add_argument("--epsilon", type=float, help="log-scaling epsilon")
    parser.add_argument("--impact-mode", choices=["noisy-or", "literal-product"], dest="impact_mode")
    parser.add_argument("--normalization-degenerate-value", type=float,
                        dest="normalization_degenerate_value")
    parser.add_argument("--downgrade-levels", dest="downgrade_levels",
                        help="JSON list of context-axis lists, strictest first")
    parser.add_argument("--downgrade-weights", dest="downgrade_weights",
                        help="comma-separated strictly decreasing weights")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amlrisk",
        description="Risk assessment for adversarial-ML threats against deployed ML systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a catalog (and optionally a corpus)")
    p.add_argument("--catalog")
    p.add_argument("--corpus")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("customize", help="customize the questionnaire for a system description")
    p.add_argument("--description", required=True)
    p.add_argument("--questionnaire")
    p.add_argument("--provider", choices=["stub", "remote"], default="stub")
    p.add_argument("--out")
    p.set_defaults(func=cmd_customize)

    p = sub.add_parser("assess", help="score every catalog attack for a profiled system")
    p.add_argument("--responses", required=True)
    p.add_argument("--catalog")
    p.add_argument("--corpus")
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--format", choices=["human", "machine"], default="human")
    p.add_argument("--out")
    p.add_argument("--created-at", dest="created_at",
                   help="fixed ISO timestamp for reproducible output")
    p.add_argument("--scenarios", type=int, default=0,
                   help="also print scenario cards for the top-k attacks")
    p.add_argument("--provider", choices=["stub", "remote"], default="stub")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("whatif", help="reassess a stored assessment under a countermeasure")
    p.add_argument("--assessment", required=True, help="machine-format report path")
    p.add_argument("--catalog")
    p.add_argument("--retrain-rate", dest="retrain_rate", type=float,
                   help="uniform post-retraining success rate for mitigated attacks")
    p.add_argument("--countermeasure", help="countermeasure profile file (JSON)")
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--format", choices=["human", "machine"], default="human")
    p.add_argument("--out")
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("ingest", help="validate and dedup records into a new corpus snapshot")
    p.add_argument("--records", required=True, help="records to ingest (JSON lines)")
    p.add_argument("--corpus", help="existing corpus to extend")
    p.add_argument("--out", help="where to write the merged corpus")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="summarize corpus composition")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["human", "machine"], default="human")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--catalog")
    p.add_argument("--corpus")
    p.add_argument("--assessments-dir", dest="assessments_dir")
    p.add_argument("--provider", choices=["stub", "remote"], default="stub")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


_ERROR_CODES = (
    (CatalogError, "catalog"),
    (ProfilingError, "profile"),
    (RecordError, "records"),
    (EngineError, "engine"),
    (GatewayError, "gateway"),
    (json.JSONDecodeError, "parse"),
    (FileNotFoundError, "io"),
    (OSError, "io"),
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except tuple(exc for exc, _ in _ERROR_CODES) as exc:
        code = next(code for klass, code in _ERROR_CODES if isinstance(exc, klass))
        message = str(exc).replace("\n", " ")
        sys.stderr.write(f"error: {code}: {message}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
