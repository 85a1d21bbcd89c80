from .space import ACTIVE, CATEGORIES, INACTIVE, SearchSettings, SearchSpace, count_active, default_gamma
from .storage import (
    COMPLETE,
    FAILED,
    RUNNING,
    ReplayError,
    StateError,
    TrialLog,
    TrialRecord,
    normalized_events,
    replay,
)
from .study import ObjectiveFailure, ObjectiveResult, Study, StudyAborted, run_study
from .tpe import categorical_estimator, estimators, split_trials, suggest

__all__ = [
    "ACTIVE",
    "CATEGORIES",
    "COMPLETE",
    "FAILED",
    "INACTIVE",
    "ObjectiveFailure",
    "ObjectiveResult",
    "RUNNING",
    "ReplayError",
    "SearchSettings",
    "SearchSpace",
    "StateError",
    "Study",
    "StudyAborted",
    "TrialLog",
    "TrialRecord",
    "categorical_estimator",
    "count_active",
    "default_gamma",
    "estimators",
    "normalized_events",
    "replay",
    "run_study",
    "split_trials",
    "suggest",
]
