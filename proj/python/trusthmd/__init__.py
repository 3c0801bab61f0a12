"""Bagging ensembles with entropy-based rejection of uncertain predictions."""

import json

from ._core import (
    ClassificationMetrics,
    Dataset,
    DatasetTaxonomy,
    EnsembleConfig,
    EnsembleModel,
    FeatureSubsample,
    GradientParams,
    LearnerConfig,
    LearnerKind,
    LogBase,
    PosteriorMode,
    Prediction,
    SyntheticRegime,
    SyntheticSpec,
    TreeParams,
    TrustError,
    Verdict,
    compute_metrics,
    default_threshold_grid,
    entropy_of,
    fit,
    generate_synthetic,
    load_csv,
    split_taxonomy,
    stability_sweep_json,
    threshold_sweep_json,
)


def threshold_sweep(model, taxonomy, grid=None, positive_class=1):
    """Threshold sweep report as a dict. Uses the default grid when none is given."""
    if grid is None:
        grid = default_threshold_grid(len(model.class_names), model.config.entropy_log_base)
    return json.loads(threshold_sweep_json(model, taxonomy, list(grid), positive_class))


def stability_sweep(config, data, eval_set, m_grid, workers=0):
    """Stability sweep report as a dict."""
    return json.loads(stability_sweep_json(config, data, eval_set, list(m_grid), workers))


__all__ = [name for name in dir() if not name.startswith("_")]
