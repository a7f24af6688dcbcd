"""From-scratch classifiers and ensembles."""

from .cnn import CnnModel, cnn_classify, cnn_loss_grad, cnn_predict, cnn_train
from .config import TrainConfig
from .io import load_model, save_model
from .mlp import (
    ChunkedMlpModel,
    MlpModel,
    chunked_forward,
    chunked_loss_grad,
    chunked_predict,
    mlp_error,
    mlp_forward,
    mlp_loss_grad,
    mlp_predict,
    mlp_train,
    mlp_train_averaged,
    one_hot,
)
from .softmax import SoftmaxModel, softmax_classify, softmax_cost_grad, softmax_predict, softmax_train
from .voting import vote, vote_batch


def predict_proba(model, X):
    """Per-class scores for a batch, whatever the model type.

    Softmax and CNN return probabilities; the sigmoid networks return their
    raw outputs, which only the argmax interprets.
    """
    if isinstance(model, SoftmaxModel):
        return softmax_predict(model, X)
    if isinstance(model, MlpModel):
        return mlp_forward(model, X)
    if isinstance(model, ChunkedMlpModel):
        return chunked_forward(model, X)
    if isinstance(model, CnnModel):
        return cnn_predict(model, X)
    raise TypeError(f"unknown model type {type(model).__name__}")


def predict(model, X):
    return predict_proba(model, X).argmax(axis=-1)
