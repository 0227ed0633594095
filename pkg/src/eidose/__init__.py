"""Early-identification dose-finding toolkit.

Interval designs (mTPI, Keyboard, BOIN) with time-to-event bookkeeping,
an early dose-retainment stopping rule, a trial simulator, a CLI, and an
event-sourced decision service.
"""

from .designs import (
    BoundaryRow,
    BoundaryTable,
    Decision,
    DesignKind,
    DesignParams,
    boin_thresholds,
    boundary_table,
    decide,
    elimination_check,
    weighted_decision,
)
from .early_stop import (
    DosePosition,
    EarlyStopOutcome,
    RemainingBudget,
    ThresholdConfig,
    dose_position,
    effective_shape,
    evaluate_early_stop,
    retainment_probability,
)
from .mathcore import (
    BetaShape,
    DomainError,
    beta_binomial_cdf,
    beta_binomial_pmf,
    beta_cdf,
    beta_sf,
    pava_isotonic,
)
from .simulator import (
    DEFAULT_SCENARIOS,
    CampaignSummary,
    DeterministicEnrollment,
    PoissonEnrollment,
    Scenario,
    TrialConfig,
    TrialMode,
    TrialResult,
    UniformToxTime,
    WeibullToxTime,
    percent_change,
    random_scenario,
    run_campaign,
    select_mtd,
    simulate_trial,
    true_mtd_level,
)
from .tite import (
    SUSPEND,
    CompletedNoDlt,
    Dlt,
    DoseSnapshot,
    PatientRecord,
    Pending,
    SuspensionPolicy,
    dose_snapshot,
    observed_outcome,
    tite_decide,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "DomainError",
    "BetaShape",
    "beta_binomial_pmf",
    "beta_binomial_cdf",
    "beta_cdf",
    "beta_sf",
    "pava_isotonic",
    "DesignKind",
    "Decision",
    "DesignParams",
    "BoundaryRow",
    "BoundaryTable",
    "boin_thresholds",
    "boundary_table",
    "decide",
    "weighted_decision",
    "elimination_check",
    "Pending",
    "CompletedNoDlt",
    "Dlt",
    "PatientRecord",
    "DoseSnapshot",
    "SuspensionPolicy",
    "SUSPEND",
    "observed_outcome",
    "dose_snapshot",
    "tite_decide",
    "RemainingBudget",
    "ThresholdConfig",
    "DosePosition",
    "EarlyStopOutcome",
    "dose_position",
    "effective_shape",
    "evaluate_early_stop",
    "retainment_probability",
    "TrialMode",
    "TrialConfig",
    "TrialResult",
    "Scenario",
    "CampaignSummary",
    "PoissonEnrollment",
    "DeterministicEnrollment",
    "UniformToxTime",
    "WeibullToxTime",
    "DEFAULT_SCENARIOS",
    "random_scenario",
    "true_mtd_level",
    "select_mtd",
    "simulate_trial",
    "run_campaign",
    "percent_change",
]
