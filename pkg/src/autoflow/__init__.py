"""autoflow: a small AutoML engine for binary classification.

Typical use::

    from autoflow import get_data, setup, ExperimentConfig, compare_models

    exp, report = setup(get_data("diabetes"), ExperimentConfig("Class variable"))
    best, board = compare_models(exp)
    print(board.render_text())
"""

from .analysis import ChartSpec, feature_importance, gain_curve, learning_curve, render_csv, render_svg
from .datasets import get_data
from .errors import AutoflowError
from .experiment import (
    Experiment,
    ExperimentConfig,
    Leaderboard,
    compare_models,
    create_model,
    load_model,
    predict_model,
    save_model,
    setup,
    tune_model,
)
from .metrics import CVReport, MetricRow, cross_validate
from .models import MODEL_IDS, create_estimator, fit_model
from .pipeline import Pipeline, make_pipeline
from .tabular import Table, TargetSpec, read_csv, split_xy, write_csv
from .tree_kernel import BACKEND

__version__ = "0.1.0"

__all__ = [
    "AutoflowError", "BACKEND", "CVReport", "ChartSpec", "Experiment", "ExperimentConfig", "Leaderboard",
    "MODEL_IDS", "MetricRow", "Pipeline", "Table", "TargetSpec", "compare_models", "create_estimator",
    "create_model", "cross_validate", "feature_importance", "fit_model", "gain_curve", "get_data",
    "learning_curve", "load_model", "make_pipeline", "predict_model", "read_csv", "render_csv",
    "render_svg", "save_model", "setup", "split_xy", "tune_model", "write_csv",
]
