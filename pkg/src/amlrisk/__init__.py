"""Risk assessment engine for adversarial-ML threats against deployed ML systems."""

from .catalog import (
    AttackDefinition,
    Catalog,
    CatalogError,
    FeasibilityFactor,
    ImpactDimension,
    ValidationReport,
    ZeroingRule,
    load_bundled_catalog,
    load_catalog,
    lookup_mapping,
    validate_catalog,
)
from .engine import (
    CountermeasureProfile,
    EngineConfig,
    EngineError,
    ModeBreakdown,
    RiskAssessment,
    ScoreBreakdown,
    apply_zeroing,
    assess,
    combine_likelihood,
    feasibility_generic,
    feasibility_mode,
    final_score,
    impact_score,
    normalize_feasibility,
    reassess_with_countermeasure,
    resolve_config,
    uniform_retraining_countermeasure,
)
from .gateway import (
    GatewayClient,
    GatewayError,
    GenerationRequest,
    ProviderConfig,
    complete,
)
from .profiling import (
    CustomQuestionnaire,
    Questionnaire,
    QuestionnaireItem,
    SystemCharacteristics,
    SystemProfile,
    build_profile,
    customize_questionnaire,
    load_questionnaire,
    load_responses,
    scale_answer,
)
from .records import (
    AttackRecord,
    DowngradePolicy,
    IngestReport,
    MatchBatch,
    RecordStore,
    StatsSummary,
    dataset_stats,
    estimate_success_rate,
    ingest_records,
    load_bundled_corpus,
    load_record_store,
    match_records,
)
from .reporting import (
    ScenarioCard,
    display_score,
    generate_scenarios,
    parse_machine_report,
    rank,
    render_html_fragment,
    render_report,
)

__version__ = "0.1.0"
