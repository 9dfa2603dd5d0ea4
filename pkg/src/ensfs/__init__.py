"""Ensemble feature selection for small mixed-type survival tables."""

from .dataset import Dataset, FeatureMeta, load_dataset, save_dataset, validate_dataset
from .encoding import (EncodedColumn, EncodedMatrix, encode_onehot,
                       encode_ordinal, encode_target, encode_target_vector)
from .harness import (FoldPlan, GridSpec, HarnessSettings, PrestudyResult,
                      RentConfig, check_leakage, evaluate_grid, make_folds,
                      prestudy_grid_search, residual_report, run_experiment1,
                      run_experiment2)
from .impute import impute_rows, knn_impute
from .metrics import (redundancy_rate, rmse, selection_stability,
                      sign_pattern, sign_summary, elevated_fraction)
from .models import (ElasticNetRegressor, KNNRegressor, OLSRegressor,
                     fit_elastic_net, mrmr_select)
from .power import apply_yeo_johnson, fit_yeo_johnson
from .preprocessing import TablePreprocessor, TransformParams, run_pipeline
from .rent import RentSelector
from .reports import write_report
from .synth import SynthSpec, generate, ground_truth, default_profile
from .ubayfs import UBaySelector, make_prior_weights

__version__ = "0.1.0"

__all__ = [
    "Dataset", "FeatureMeta", "load_dataset", "save_dataset",
    "validate_dataset",
    "EncodedColumn", "EncodedMatrix", "encode_onehot", "encode_ordinal",
    "encode_target", "encode_target_vector",
    "FoldPlan", "GridSpec", "HarnessSettings", "PrestudyResult", "RentConfig",
    "check_leakage", "evaluate_grid", "make_folds", "prestudy_grid_search",
    "residual_report", "run_experiment1", "run_experiment2",
    "impute_rows", "knn_impute",
    "redundancy_rate", "rmse", "selection_stability", "sign_pattern",
    "sign_summary", "elevated_fraction",
    "ElasticNetRegressor", "KNNRegressor", "OLSRegressor", "fit_elastic_net",
    "mrmr_select",
    "apply_yeo_johnson", "fit_yeo_johnson",
    "TablePreprocessor", "TransformParams", "run_pipeline",
    "RentSelector", "write_report",
    "SynthSpec", "generate", "ground_truth", "default_profile",
    "UBaySelector", "make_prior_weights",
    "__version__",
]
