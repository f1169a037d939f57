"""Equilibria and planner productivity of research-grant funding contests."""

from .closed_form import (
    SimpleContestParams,
    competition_externality_cross_partial,
    contest_value,
    contest_value_with_externality,
    equilibrium_effort,
    lottery_value,
)
from .equilibrium import (
    BidSchedule,
    ContestEnvironment,
    MechanismSpec,
    applicant_value,
    funding_probability,
    solve_bid_schedule,
)
from .errors import (
    ConvergenceError,
    NumericalError,
    ParameterError,
    RankDeficiencyError,
    SchemaError,
)
from .mc import ProbeResult, SimulationConfig, SimulationResult, best_response_probe, simulate
from .planner import (
    DEFAULT_PAYLINES,
    ContestOutcome,
    EquivalenceReport,
    ExternalitySpec,
    evaluate,
    lottery_equivalence_check,
    payline_sweep,
    productivity_spread,
)
from .quality import ClaytonCopula, QualityDistribution
from .survey import (
    PoissonFit,
    RejectionReport,
    SurveyRecord,
    VariableSummary,
    jackknife_instrument,
    load_and_filter,
    load_survey,
    poisson_fit,
    restricted_cubic_spline,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "BidSchedule",
    "ClaytonCopula",
    "ContestEnvironment",
    "ContestOutcome",
    "ConvergenceError",
    "DEFAULT_PAYLINES",
    "EquivalenceReport",
    "ExternalitySpec",
    "MechanismSpec",
    "NumericalError",
    "ParameterError",
    "PoissonFit",
    "ProbeResult",
    "QualityDistribution",
    "RankDeficiencyError",
    "RejectionReport",
    "SchemaError",
    "SimpleContestParams",
    "SimulationConfig",
    "SimulationResult",
    "SurveyRecord",
    "VariableSummary",
    "applicant_value",
    "best_response_probe",
    "competition_externality_cross_partial",
    "contest_value",
    "contest_value_with_externality",
    "equilibrium_effort",
    "evaluate",
    "funding_probability",
    "jackknife_instrument",
    "load_and_filter",
    "load_survey",
    "lottery_equivalence_check",
    "lottery_value",
    "payline_sweep",
    "poisson_fit",
    "productivity_spread",
    "restricted_cubic_spline",
    "simulate",
    "solve_bid_schedule",
    "summarize",
]
