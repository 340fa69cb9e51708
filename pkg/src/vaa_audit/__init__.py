"""Exact weighted-distance VAA matching and a perturbation-audit harness."""

from .engine import (
    Importance,
    MatchScore,
    RespondentProfile,
    QuestionMask,
    TopSet,
    UserResponse,
    WeightMatrix,
    agreement,
    answer_distance,
    max_weighted_distance,
    rank_all,
    top_set,
    total_weighted_distance,
)
from .impact import ElectorateParameters, ImpactEstimate, estimate_impact
from .io import (
    export_report,
    load_report,
    load_roster,
    load_weights,
    write_roster,
    write_weights,
)
from .outcomes import (
    OutcomeChange,
    OutcomeComparison,
    RankCorrelation,
    candidate_outcome_changed,
    party_outcome_changed,
    topk_rank_correlation,
)
from .perturb import (
    NotEnoughEligibleQuestions,
    OverallModification,
    QuestionDrop,
    RowModification,
    SingleModification,
    apply_weights,
    sample_drop_mask,
)
from .simulate import (
    AuditConfig,
    AuditReport,
    RosterSpec,
    generate_roster,
    run_audit,
    run_cell,
    run_topk_cell,
)

__version__ = "0.1.0"

__all__ = [
    "AuditConfig",
    "AuditReport",
    "ElectorateParameters",
    "ImpactEstimate",
    "Importance",
    "MatchScore",
    "NotEnoughEligibleQuestions",
    "OutcomeChange",
    "OutcomeComparison",
    "OverallModification",
    "QuestionDrop",
    "QuestionMask",
    "RankCorrelation",
    "RespondentProfile",
    "RosterSpec",
    "RowModification",
    "SingleModification",
    "TopSet",
    "UserResponse",
    "WeightMatrix",
    "agreement",
    "answer_distance",
    "apply_weights",
    "candidate_outcome_changed",
    "estimate_impact",
    "export_report",
    "generate_roster",
    "load_report",
    "load_roster",
    "load_weights",
    "max_weighted_distance",
    "party_outcome_changed",
    "rank_all",
    "run_audit",
    "run_cell",
    "run_topk_cell",
    "sample_drop_mask",
    "top_set",
    "topk_rank_correlation",
    "total_weighted_distance",
    "write_roster",
    "write_weights",
]
