"""Adaptive questionnaire engine with cost-aware dynamic question ordering.

Questions are ordered per respondent to shrink prediction uncertainty
fastest, trading expected interval width against question cost; sequential
predictions with calibrated intervals come from partial answers, with kNN
imputation standing in for everything not yet asked.
"""

__version__ = "0.1.0"

from .bundle import ModelBundle, train_bundle
from .data import (
    DatasetError,
    DatasetTable,
    FeatureSpec,
    compute_feature_stats,
    generate_synthetic,
    load_dataset,
    save_dataset,
    split_train_test,
    synthetic_benchmark,
)
from .engine import (
    DONT_KNOW,
    MEAN_OF_ROOTS,
    ROOT_OF_MEAN,
    AnswerError,
    DqoOrderer,
    ExpectedWidths,
    FixedOrderer,
    OracleOrderer,
    Orderer,
    RandomOrderer,
    SessionComplete,
    SessionState,
    apply_answer,
    choose_next,
    expected_interval_widths,
    fixed_decreasing_orderer,
    make_orderer,
    next_question,
    run_dqo_all,
    start_session,
)
from .harness import (
    AucSummary,
    Trajectory,
    TrajectoryStep,
    compute_auc,
    oracle_position_frequencies,
    simulate,
    summarize,
)
from .imputation import (
    ImputerConfig,
    KnnImputer,
    estimate_features,
    estimate_measurement_error,
)
from .regression import (
    PredictionInterval,
    SingularModelError,
    TrainedModel,
    fit_ols,
    loocv_error,
    predict_interval,
    t_quantile,
)
from .selection import SelectionTrace, forward_select

__all__ = [
    "AnswerError",
    "AucSummary",
    "DONT_KNOW",
    "DatasetError",
    "DatasetTable",
    "DqoOrderer",
    "ExpectedWidths",
    "FeatureSpec",
    "FixedOrderer",
    "ImputerConfig",
    "KnnImputer",
    "MEAN_OF_ROOTS",
    "ModelBundle",
    "OracleOrderer",
    "Orderer",
    "PredictionInterval",
    "ROOT_OF_MEAN",
    "RandomOrderer",
    "SelectionTrace",
    "SessionComplete",
    "SessionState",
    "SingularModelError",
    "TrainedModel",
    "Trajectory",
    "TrajectoryStep",
    "apply_answer",
    "choose_next",
    "compute_auc",
    "compute_feature_stats",
    "estimate_features",
    "estimate_measurement_error",
    "expected_interval_widths",
    "fit_ols",
    "fixed_decreasing_orderer",
    "forward_select",
    "generate_synthetic",
    "load_dataset",
    "loocv_error",
    "make_orderer",
    "next_question",
    "oracle_position_frequencies",
    "predict_interval",
    "run_dqo_all",
    "save_dataset",
    "simulate",
    "split_train_test",
    "start_session",
    "summarize",
    "synthetic_benchmark",
    "t_quantile",
    "train_bundle",
]
