"""Multi-branch neural hate-video classifier with from-scratch backprop.

Text branches (title, description, tags) run trainable embeddings through a
bidirectional LSTM; the statistics branch is a small rectified dense stack;
the thumbnail branch passes its precomputed vector straight through. Branch
outputs are concatenated, dropout-regularized, and squashed to a single
logistic probability. Everything is float64 and deterministic per seed.
"""

from recaudit.netlab.ablation import ABLATION_ROWS, run_ablation
from recaudit.netlab.layers import LSTM, BiLSTM, Dense, Dropout, Embedding, Param, ReLU
from recaudit.netlab.metrics import EvalMetrics, auroc, evaluate
from recaudit.netlab.model import HateVideoModel, ModelConfig, make_batch
from recaudit.netlab.optim import Adam
from recaudit.netlab.train import History, TrainConfig, train

__all__ = [
    "ABLATION_ROWS",
    "Adam",
    "BiLSTM",
    "Dense",
    "Dropout",
    "Embedding",
    "EvalMetrics",
    "History",
    "HateVideoModel",
    "LSTM",
    "ModelConfig",
    "Param",
    "ReLU",
    "TrainConfig",
    "auroc",
    "evaluate",
    "make_batch",
    "run_ablation",
    "train",
]
