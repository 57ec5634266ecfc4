"""Python bindings for the painbvp pipeline."""

from ._painbvp import (
    PainbvpError,
    balanced_accuracy,
    bvp_features,
    detect_beats,
    dunn_test,
    extract_features,
    feature_names,
    hrv_features,
    kruskal_wallis,
    lowpass,
    mae_rmse,
    roc_auc,
    run_task,
    smote,
    synth_recording,
)

__all__ = [
    "PainbvpError",
    "balanced_accuracy",
    "bvp_features",
    "detect_beats",
    "dunn_test",
    "extract_features",
    "feature_names",
    "hrv_features",
    "kruskal_wallis",
    "lowpass",
    "mae_rmse",
    "roc_auc",
    "run_task",
    "smote",
    "synth_recording",
]
