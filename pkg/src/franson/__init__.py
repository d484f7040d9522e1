"""Event-level simulation and analysis of energy-time entanglement tests.

The package simulates interferometric Bell tests photon pair by photon
pair, postselects coincidences from raw detection times, evaluates chained
correlation statistics against the bounds of several local-realist model
classes, and searches those classes' strategy spaces to verify the bounds.
"""

from .core import (
    DelayClass,
    HiddenVariable,
    OutcomeValue,
    RandomSource,
    Setting,
    SettingsChain,
    chain_settings,
    draw_uniform,
    draw_uniforms,
    phase_distance,
    random_settings_chain,
    reduce_phase,
    setting_key,
)
from .inequalities import (
    CellEstimate,
    CorrelationTable,
    ModelClass,
    ModelKind,
    Verdict,
    bound_for,
    chained_statistic,
    chsh_statistic,
    critical_visibility,
    evaluate,
    statistic_stderr,
    threshold_efficiency,
)
from .lhv import (
    LocalResponse,
    LocalStrategy,
    ModelStatistics,
    TrialBatch,
    aklz_quadrature,
    aklz_site1,
    aklz_site2,
    aklz_strategy,
    draw_hidden_variable,
    monte_carlo_statistics,
    run_lhv_trial,
    simulate_strategy_pairs,
    strategy_grid_statistics,
)
from .quantum import (
    FransonJointDistribution,
    Visibility,
    chained_quantum_value,
    exact_correlation_entries,
    franson_correlation,
    franson_joint,
    sample_franson_event,
    sample_franson_events,
    singlet_correlation,
)
from .setups import (
    SetupRun,
    SetupVariant,
    expected_coincidence_fraction,
    model_class_for,
    path_is_element_of_reality,
    sample_setup_pairs,
    simulate_setup,
)
from .spacetime import (
    EventOrder,
    PremiseCheck,
    StationGeometry,
    TimelineEvent,
    check_emission_time_premise,
    classify_event_order,
)
from .strategyopt import (
    BoundReport,
    DeterministicVertex,
    GameEvaluation,
    GameSpec,
    MaxStatisticResult,
    MixedStrategy,
    OptimizerBudget,
    ResourceLimitError,
    SiteVertex,
    aklz_mixed_strategy,
    emission_time_lp_value,
    enumerate_vertices,
    evaluate_mixed,
    max_statistic,
    strategy_from_mixture,
    verify_bound,
)
from .timing import (
    EVENT_DTYPE,
    PAIR_DTYPE,
    DetectionEvent,
    EfficiencyReport,
    InterferometerTiming,
    PostselectionResult,
    correlation_from_pairs,
    emit_events,
    emit_events_from_batch,
    postselect,
    read_events_csv,
    write_events_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CellEstimate",
    "CorrelationTable",
    "DelayClass",
    "DetectionEvent",
    "DeterministicVertex",
    "EVENT_DTYPE",
    "EfficiencyReport",
    "EventOrder",
    "FransonJointDistribution",
    "GameEvaluation",
    "GameSpec",
    "HiddenVariable",
    "InterferometerTiming",
    "LocalResponse",
    "LocalStrategy",
    "MaxStatisticResult",
    "MixedStrategy",
    "ModelClass",
    "ModelKind",
    "ModelStatistics",
    "OptimizerBudget",
    "OutcomeValue",
    "PAIR_DTYPE",
    "PostselectionResult",
    "PremiseCheck",
    "RandomSource",
    "ResourceLimitError",
    "Setting",
    "SettingsChain",
    "SetupRun",
    "SetupVariant",
    "SiteVertex",
    "StationGeometry",
    "TimelineEvent",
    "TrialBatch",
    "Verdict",
    "Visibility",
    "aklz_mixed_strategy",
    "aklz_quadrature",
    "aklz_site1",
    "aklz_site2",
    "aklz_strategy",
    "bound_for",
    "chain_settings",
    "chained_quantum_value",
    "chained_statistic",
    "check_emission_time_premise",
    "chsh_statistic",
    "classify_event_order",
    "correlation_from_pairs",
    "critical_visibility",
    "draw_hidden_variable",
    "draw_uniform",
    "draw_uniforms",
    "emission_time_lp_value",
    "emit_events",
    "emit_events_from_batch",
    "enumerate_vertices",
    "evaluate",
    "evaluate_mixed",
    "exact_correlation_entries",
    "expected_coincidence_fraction",
    "franson_correlation",
    "franson_joint",
    "max_statistic",
    "model_class_for",
    "monte_carlo_statistics",
    "path_is_element_of_reality",
    "phase_distance",
    "postselect",
    "random_settings_chain",
    "read_events_csv",
    "reduce_phase",
    "run_lhv_trial",
    "sample_franson_event",
    "sample_franson_events",
    "sample_setup_pairs",
    "setting_key",
    "simulate_setup",
    "simulate_strategy_pairs",
    "singlet_correlation",
    "statistic_stderr",
    "strategy_from_mixture",
    "strategy_grid_statistics",
    "threshold_efficiency",
    "verify_bound",
    "write_events_csv",
]
