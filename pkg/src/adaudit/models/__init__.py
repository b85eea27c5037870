"""Classifiers: Multinomial Naive Bayes, logistic regression, and the CNN."""

from .base import (
    LABEL_NON_POLITICAL,
    LABEL_POLITICAL,
    DegenerateDataError,
    GridSpec,
    ShapeMismatchError,
    TrainConfig,
    TrainingDivergedError,
    TrainingError,
    as_label_array,
    sigmoid,
)
from .cnn import (
    CnnModel,
    EmptySequenceError,
    RmsPropState,
    cnn_backward,
    cnn_forward,
    cnn_loss,
    cnn_predict,
    cnn_train,
    init_cnn,
)
from .io import (
    ModelIOError,
    ModelKindError,
    ModelShapeError,
    TruncatedContainerError,
    load_model,
    load_model_path,
    model_kind,
    save_model,
    save_model_path,
)
from .logreg import LogRegModel, logreg_grad, logreg_loss, predict_proba_logreg, train_logreg
from .mnb import MnbModel, predict_proba_mnb, train_mnb
from .scorer import TextScorer

__all__ = [
    "LABEL_NON_POLITICAL",
    "LABEL_POLITICAL",
    "DegenerateDataError",
    "GridSpec",
    "ShapeMismatchError",
    "TrainConfig",
    "TrainingDivergedError",
    "TrainingError",
    "as_label_array",
    "sigmoid",
    "CnnModel",
    "EmptySequenceError",
    "RmsPropState",
    "cnn_backward",
    "cnn_forward",
    "cnn_loss",
    "cnn_predict",
    "cnn_train",
    "init_cnn",
    "ModelIOError",
    "ModelKindError",
    "ModelShapeError",
    "TruncatedContainerError",
    "load_model",
    "load_model_path",
    "model_kind",
    "save_model",
    "save_model_path",
    "LogRegModel",
    "logreg_grad",
    "logreg_loss",
    "predict_proba_logreg",
    "train_logreg",
    "MnbModel",
    "predict_proba_mnb",
    "train_mnb",
    "TextScorer",
]
