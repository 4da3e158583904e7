"""ptsdkit: a from-scratch tabular classification toolkit for disaster-survey
PTSD prediction.

Pipeline: CSV/synthetic ingestion -> mode imputation -> label encoding ->
stratified split -> SMOTE (train only) -> standardization -> six learners and
a soft-voting ensemble -> evaluation reports, curves and figures, all driven
by a deterministic batch CLI.
"""

from .tabular import (ColumnSchema, Schema, Table, default_schema,
                      drop_missing_target, load_csv, validate, write_csv)
from .preprocess import (FittedPreprocessor, LabelEncoder, PreparedData,
                         ScalerParams, SplitIndices, apply_imputer,
                         apply_scaler, encode, fit_encoder, fit_imputer,
                         fit_scaler, knn_minority, prepare, smote_oversample,
                         stratified_split)
from .learners import (Classifier, DecisionTreeModel, GradientBoostingModel,
                       LinearSvmModel, LogisticRegressionModel, MlpHyper,
                       MlpModel, RandomForestModel, TrainingHistory, fit_mlp,
                       load_model, mlp_forward, save_model)
from .ensemble import (ENSEMBLE_PRESETS, VotingEnsemble, fit_ensemble,
                       soft_vote)
from .callbacks import (EarlyStopping, ReduceLROnPlateau, SearchSpace,
                        random_search)
from .metrics import (ConfusionMatrix, EvaluationReport, compare_table,
                      confusion, evaluate, scores)
from .synthetic import PlantedRule, SyntheticSpec, generate_csv, generate_table
from .config import ExperimentConfig, config_from_dict, load_config
from .experiment import (compare_experiment, generate_experiment,
                         run_experiment, tune_experiment)

__version__ = "0.1.0"
