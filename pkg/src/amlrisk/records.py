"""Empirical attack-record store.

Stores one success-rate observation per (publication, attack variant,
execution mode); validates and dedups ingested records; matches records to
an (attack, profile) pair with stepwise downgrading of the match criteria;
estimates per-mode success rates as a weighted mean over match batches; and
summarizes corpus composition.

Snapshots are immutable: ingestion builds a new store, never mutates one.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, List, Mapping, Optional, Sequence, Union

from .catalog import (
    ATTACK_FAMILIES,
    EXECUTION_MODES,
    OBJECTIVES,
    THREAT_MODELS,
    AttackDefinition,
)
from .profiling import ARCHITECTURES, DATA_TYPES, DOMAINS, TASKS, SystemProfile

MIN_PUBLICATION_YEAR = 2010

# Context axes a downgrade level may match on. "architecture" compares the
# profile's architecture slot against the record's model_architecture.
CONTEXT_AXES = ("domain", "data_type", "architecture", "task")


class RecordError(ValueError):
    """Raised for malformed record documents or policies."""


@dataclass(frozen=True)
class Publication:
    title: str
    year: int
    venue: str


@dataclass(frozen=True)
class RecordContext:
    domain: str
    data_type: str
    model_architecture: str
    task: str
    dataset_name: str = ""


@dataclass(frozen=True)
class AttackRecord:
    """One empirical data point extracted from a publication.

    A paper reporting both execution modes yields two records.
    """

    record_id: str
    publication: Publication
    attack_family: str
    threat_model: str
    execution_mode: str
    objective: str
    context: RecordContext
    success_rate: float

    def dedup_key(self) -> tuple:
        return (
            self.publication.title,
            self.attack_family,
            self.threat_model,
            self.execution_mode,
            self.context.domain,
        )

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "publication": {
                "title": self.publication.title,
                "year": self.publication.year,
                "venue": self.publication.venue,
            },
            "attack_family": self.attack_family,
            "threat_model": self.threat_model,
            "execution_mode": self.execution_mode,
            "objective": self.objective,
            "context": {
                "domain": self.context.domain,
                "data_type": self.context.data_type,
                "model_architecture": self.context.model_architecture,
                "task": self.context.task,
                "dataset_name": self.context.dataset_name,
            },
            "success_rate": self.success_rate,
        }


def record_from_dict(obj: Mapping) -> AttackRecord:
    try:
        pub = obj["publication"]
        ctx = obj["context"]
        return AttackRecord(
            record_id=obj["record_id"],
            publication=Publication(
                title=pub["title"], year=int(pub["year"]), venue=pub.get("venue", ""),
            ),
            attack_family=obj["attack_family"],
            threat_model=obj["threat_model"],
            execution_mode=obj["execution_mode"],
            objective=obj["objective"],
            context=RecordContext(
                domain=ctx["domain"],
                data_type=ctx["data_type"],
                model_architecture=ctx["model_architecture"],
                task=ctx["task"],
                dataset_name=ctx.get("dataset_name", ""),
            ),
            success_rate=float(obj["success_rate"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordError(f"malformed record: {exc}") from exc


def validate_record(record: AttackRecord) -> Optional[str]:
    """Return a rejection reason, or None if the record is acceptable."""
    if not (0.0 <= record.success_rate <= 1.0):
        return f"success rate out of range: {record.success_rate}"
    if record.publication.year < MIN_PUBLICATION_YEAR:
        return f"publication year {record.publication.year} precedes {MIN_PUBLICATION_YEAR}"
    if record.execution_mode not in EXECUTION_MODES:
        return f"unknown execution mode {record.execution_mode!r}"
    if record.attack_family not in ATTACK_FAMILIES:
        return f"unknown attack family {record.attack_family!r}"
    if record.threat_model not in THREAT_MODELS:
        return f"unknown threat model {record.threat_model!r}"
    if record.objective not in OBJECTIVES:
        return f"unknown objective {record.objective!r}"
    if record.context.domain not in DOMAINS:
        return f"unknown domain {record.context.domain!r}"
    if record.context.data_type not in DATA_TYPES:
        return f"unknown data type {record.context.data_type!r}"
    if record.context.model_architecture not in ARCHITECTURES:
        return f"unknown model architecture {record.context.model_architecture!r}"
    if record.context.task not in TASKS:
        return f"unknown task {record.context.task!r}"
    if not record.record_id:
        return "missing record id"
    return None


def _snapshot_id(records: Sequence[AttackRecord]) -> str:
    payload = json.dumps(
        sorted((r.to_dict() for r in records), key=lambda d: d["record_id"]),
        sort_keys=True,
    )
    return "s-" + hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class RecordStore:
    """Immutable snapshot of the record corpus, indexed for matching."""

    snapshot_id: str
    records: tuple
    _index: Mapping[tuple, tuple] = field(repr=False, default=None)

    def __post_init__(self):
        index = {}
        for record in self.records:
            key = (record.attack_family, record.threat_model, record.execution_mode)
            index.setdefault(key, []).append(record)
        object.__setattr__(
            self, "_index", {k: tuple(v) for k, v in index.items()}
        )

    @classmethod
    def from_records(cls, records: Iterable[AttackRecord]) -> "RecordStore":
        records = tuple(records)
        return cls(snapshot_id=_snapshot_id(records), records=records)

    @classmethod
    def empty(cls) -> "RecordStore":
        return cls.from_records(())

    def candidates(self, family: str, threat_model: str, mode: str) -> tuple:
        return self._index.get((family, threat_model, mode), ())

    def mode_mean(self, mode: str) -> Optional[float]:
        rates = [r.success_rate for r in self.records if r.execution_mode == mode]
        if not rates:
            return None
        return sum(rates) / len(rates)


@dataclass(frozen=True)
class IngestReport:
    store: RecordStore
    accepted: tuple
    rejected: tuple  # (record_id, reason) pairs

    @property
    def accepted_count(self) -> int:
        return len(self.accepted)

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)


def ingest_records(store: RecordStore, candidates: Iterable[AttackRecord]) -> IngestReport:
    """Validate and dedup candidates into a new snapshot.

    The original snapshot is unchanged. Per-record problems are findings in
    the report, never exceptions.
    """
    existing_keys = {r.dedup_key() for r in store.records}
    existing_ids = {r.record_id for r in store.records}
    accepted = []
    rejected = []
    for record in candidates:
        reason = validate_record(record)
        if reason is None and record.record_id in existing_ids:
            reason = f"duplicate record id {record.record_id}"
        if reason is None and record.dedup_key() in existing_keys:
            reason = "duplicate: same publication, attack variant, mode, and domain"
        if reason is None:
            accepted.append(record)
            existing_keys.add(record.dedup_key())
            existing_ids.add(record.record_id)
        else:
            rejected.append((record.record_id, reason))
    new_store = RecordStore.from_records(store.records + tuple(accepted))
    return IngestReport(
        store=new_store,
        accepted=tuple(r.record_id for r in accepted),
        rejected=tuple(rejected),
    )


def load_record_store(source: Union[str, Path, IO[str]]) -> RecordStore:
    """Load a line-delimited record corpus (one JSON record per line)."""
    report = ingest_records(RecordStore.empty(), parse_record_lines(source))
    if report.rejected:
        rid, reason = report.rejected[0]
        raise RecordError(f"corpus contains invalid record {rid}: {reason}")
    return report.store


def load_bundled_corpus() -> RecordStore:
    """Load the synthetic evidence corpus shipped with the package."""
    from importlib import resources

    with resources.files("amlrisk.data").joinpath("corpus.jsonl").open("r") as fh:
        return load_record_store(fh)


def parse_record_lines(source: Union[str, Path, IO[str]]) -> List[AttackRecord]:
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    records = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            records.append(record_from_dict(json.loads(line)))
        except json.JSONDecodeError as exc:
            raise RecordError(f"line {lineno}: invalid JSON: {exc}") from exc
    return records


def dump_record_lines(store: RecordStore) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in store.records)


# ---------------------------------------------------------------------------
# Matching with stepwise downgrading
# ---------------------------------------------------------------------------

DEFAULT_LEVELS = (
    ("domain", "data_type", "architecture", "task"),
    ("domain", "data_type", "task"),
    ("domain", "data_type"),
    ("data_type",),
    (),
)
DEFAULT_WEIGHTS = (1.0, 0.5, 0.25, 0.125, 0.0625)


@dataclass(frozen=True)
class DowngradePolicy:
    """Ordered match levels (strictest first) with strictly decreasing weights.

    Level 0 always also matches attack family, threat model, and execution
    mode; the listed axes are the context axes additionally required at that
    level. Each level's match set must contain the previous level's.
    """

    levels: tuple = DEFAULT_LEVELS
    weights: tuple = DEFAULT_WEIGHTS
    empty_corpus_fallback: float = 0.5

    def __post_init__(self):
        if len(self.levels) != len(self.weights):
            raise RecordError("levels and weights must have the same length")
        if not self.levels:
            raise RecordError("policy must define at least one level")
        for weight in self.weights:
            if weight <= 0:
                raise RecordError("weights must be positive")
        for earlier, later in zip(self.weights, self.weights[1:]):
            if later >= earlier:
                raise RecordError("weights must be strictly decreasing")
        previous = None
        for i, axes in enumerate(self.levels):
            axes = tuple(axes)
            for axis in axes:
                if axis not in CONTEXT_AXES:
                    raise RecordError(f"unknown context axis {axis!r} at level {i}")
            if previous is not None and not set(axes) <= set(previous):
                raise RecordError(
                    f"level {i} must relax level {i - 1}, not tighten it"
                )
            previous = axes
        if not (0.0 <= self.empty_corpus_fallback <= 1.0):
            raise RecordError("empty corpus fallback must be within [0, 1]")

    def to_dict(self) -> dict:
        return {
            "levels": [list(axes) for axes in self.levels],
            "weights": list(self.weights),
            "empty_corpus_fallback": self.empty_corpus_fallback,
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "DowngradePolicy":
        return cls(
            levels=tuple(tuple(axes) for axes in obj.get("levels", DEFAULT_LEVELS)),
            weights=tuple(obj.get("weights", DEFAULT_WEIGHTS)),
            empty_corpus_fallback=obj.get("empty_corpus_fallback", 0.5),
        )


@dataclass(frozen=True)
class MatchBatch:
    level: int
    execution_mode: str
    record_ids: tuple
    batch_mean: float


def _context_value(profile: SystemProfile, axis: str) -> str:
    chars = profile.characteristics
    return {
        "domain": chars.domain,
        "data_type": chars.data_type,
        "architecture": chars.architecture,
        "task": chars.task,
    }[axis]


def _record_value(record: AttackRecord, axis: str) -> str:
    ctx = record.context
    return {
        "domain": ctx.domain,
        "data_type": ctx.data_type,
        "architecture": ctx.model_architecture,
        "task": ctx.task,
    }[axis]


def match_level(record: AttackRecord, profile: SystemProfile, policy: DowngradePolicy) -> Optional[int]:
    """First (strictest) level at which the record matches, or None."""
    for i, axes in enumerate(policy.levels):
        if all(_record_value(record, axis) == _context_value(profile, axis) for axis in axes):
            return i
    return None


def match_records(
    store: RecordStore,
    attack: AttackDefinition,
    profile: SystemProfile,
    mode: str,
    policy: Optional[DowngradePolicy] = None,
) -> List[MatchBatch]:
    """Group matching records into batches by downgrade level.

    Candidates must already match the attack's family, threat model, and the
    requested mode. Each record lands only in the first level it matches.
    When exact (level 0) matches exist, they alone are returned.
    """
    if mode not in attack.execution_modes:
        raise RecordError(f"attack {attack.id} does not support mode {mode!r}")
    policy = policy or DowngradePolicy()
    by_level = {}
    for record in store.candidates(attack.attack_family, attack.threat_model, mode):
        level = match_level(record, profile, policy)
        if level is not None:
            by_level.setdefault(level, []).append(record)

    if 0 in by_level:
        selected = {0: by_level[0]}
    else:
        selected = by_level

    batches = []
    for level in sorted(selected):
        records = selected[level]
        mean = sum(r.success_rate for r in records) / len(records)
        batches.append(
            MatchBatch(
                level=level,
                execution_mode=mode,
                record_ids=tuple(sorted(r.record_id for r in records)),
                batch_mean=mean,
            )
        )
    return batches


def estimate_success_rate(
    batches: Sequence[MatchBatch],
    policy: Optional[DowngradePolicy] = None,
    mode: str = "digital",
    store: Optional[RecordStore] = None,
) -> float:
    """Weight batch means by level weight; fall back when nothing matched.

    Fallback is the per-mode corpus mean, then the policy's neutral prior
    when the corpus holds no records for the mode. Callers flag fallback use
    in the score breakdown.
    """
    policy = policy or DowngradePolicy()
    if not batches:
        if store is not None:
            mean = store.mode_mean(mode)
            if mean is not None:
                return mean
        return policy.empty_corpus_fallback
    numerator = 0.0
    denominator = 0.0
    for batch in batches:
        weight = policy.weights[batch.level]
        numerator += batch.batch_mean * weight
        denominator += weight
    return numerator / denominator


# ---------------------------------------------------------------------------
# Corpus statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StatsSummary:
    record_count: int
    domain_shares: Mapping[str, float]
    objective_shares: Mapping[str, float]
    objective_shares_by_domain: Mapping[str, Mapping[str, float]]
    mode_shares: Mapping[str, float]
    mode_shares_by_domain: Mapping[str, Mapping[str, float]]
    mode_mean_success_rates: Mapping[str, float]
    threat_model_shares: Mapping[str, float]
    threat_model_shares_by_domain: Mapping[str, Mapping[str, float]]

    def to_dict(self) -> dict:
        return {
            "record_count": self.record_count,
            "domain_shares": dict(self.domain_shares),
            "objective_shares": dict(self.objective_shares),
            "objective_shares_by_domain": {
                d: dict(v) for d, v in self.objective_shares_by_domain.items()
            },
            "mode_shares": dict(self.mode_shares),
            "mode_shares_by_domain": {
                d: dict(v) for d, v in self.mode_shares_by_domain.items()
            },
            "mode_mean_success_rates": dict(self.mode_mean_success_rates),
            "threat_model_shares": dict(self.threat_model_shares),
            "threat_model_shares_by_domain": {
                d: dict(v) for d, v in self.threat_model_shares_by_domain.items()
            },
        }


def _shares(counts: Mapping[str, int]) -> dict:
    total = sum(counts.values())
    if total == 0:
        return {}
    return {key: counts[key] / total for key in sorted(counts)}


def dataset_stats(store: RecordStore) -> StatsSummary:
    """Tally corpus composition; every share breakdown sums to one."""
    if not store.records:
        return StatsSummary(
            record_count=0, domain_shares={}, objective_shares={},
            objective_shares_by_domain={}, mode_shares={},
            mode_shares_by_domain={}, mode_mean_success_rates={},
            threat_model_shares={}, threat_model_shares_by_domain={},
        )

    domain_counts = {}
    objective_counts = {}
    mode_counts = {}
    tm_counts = {}
    by_domain_objective = {}
    by_domain_mode = {}
    by_domain_tm = {}
    mode_rates = {}
    for record in store.records:
        domain = record.context.domain
        domain_counts[domain] = domain_counts.get(domain, 0) + 1
        objective_counts[record.objective] = objective_counts.get(record.objective, 0) + 1
        mode_counts[record.execution_mode] = mode_counts.get(record.execution_mode, 0) + 1
        tm_counts[record.threat_model] = tm_counts.get(record.threat_model, 0) + 1
        by_domain_objective.setdefault(domain, {}).setdefault(record.objective, 0)
        by_domain_objective[domain][record.objective] += 1
        by_domain_mode.setdefault(domain, {}).setdefault(record.execution_mode, 0)
        by_domain_mode[domain][record.execution_mode] += 1
        by_domain_tm.setdefault(domain, {}).setdefault(record.threat_model, 0)
        by_domain_tm[domain][record.threat_model] += 1
        mode_rates.setdefault(record.execution_mode, []).append(record.success_rate)

    return StatsSummary(
        record_count=len(store.records),
        domain_shares=_shares(domain_counts),
        objective_shares=_shares(objective_counts),
        objective_shares_by_domain={
            d: _shares(c) for d, c in sorted(by_domain_objective.items())
        },
        mode_shares=_shares(mode_counts),
        mode_shares_by_domain={
            d: _shares(c) for d, c in sorted(by_domain_mode.items())
        },
        mode_mean_success_rates={
            mode: sum(rates) / len(rates) for mode, rates in sorted(mode_rates.items())
        },
        threat_model_shares=_shares(tm_counts),
        threat_model_shares_by_domain={
            d: _shares(c) for d, c in sorted(by_domain_tm.items())
        },
    )
