"""Training loop: shuffled minibatches, Adam, early stopping on validation loss."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from recaudit.errors import InsufficientDataError
from recaudit.features import FeatureBundle
from recaudit.netlab.model import HateVideoModel, make_batch
from recaudit.netlab.optim import Adam


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 50
    patience: int = 5  # early stop after this many epochs without val improvement

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.lr < 0:
            raise ValueError("lr must be >= 0")


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = -1
    stopped_early: bool = False


def _dataset_loss(model: HateVideoModel, bundles: Sequence[FeatureBundle], batch_size: int) -> float:
    total, n = 0.0, 0
    for start in range(0, len(bundles), batch_size):
        chunk = bundles[start : start + batch_size]
        batch, labels = make_batch(chunk, model.config.active_branches)
        probs = model.forward(batch, train_mode=False)
        clamped = np.clip(probs, 1e-7, 1.0 - 1e-7)
        total += float(-np.sum(labels * np.log(clamped) + (1 - labels) * np.log(1 - clamped)))
        n += len(chunk)
    return total / n


def train(
    model: HateVideoModel,
    train_bundles: Sequence[FeatureBundle],
    val_bundles: Sequence[FeatureBundle] | None,
    config: TrainConfig,
) -> tuple[HateVideoModel, History]:
    """Train in epoch-shuffled minibatches; the weights that achieved the best
    validation loss are restored before returning. Deterministic for a fixed
    model seed and configuration."""
    if not train_bundles:
        raise InsufficientDataError("empty training split")
    rng = np.random.default_rng(model.config.seed + 0x5EED)
    optimizer = Adam(lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.eps)
    history = History()
    best_val = np.inf
    best_state = model.state()
    since_best = 0

    order = np.arange(len(train_bundles))
    for epoch in range(config.epochs):
        rng.shuffle(order)
        epoch_loss, seen = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            index = order[start : start + config.batch_size]
            chunk = [train_bundles[i] for i in index]
            batch, labels = make_batch(chunk, model.config.active_branches)
            loss, _ = model.loss_and_gradients(batch, labels, train_mode=True)
            optimizer.step(model.params())
            epoch_loss += loss * len(chunk)
            seen += len(chunk)
        history.train_loss.append(epoch_loss / seen)

        if val_bundles:
            val = _dataset_loss(model, val_bundles, config.batch_size)
            history.val_loss.append(val)
            if val < best_val - 1e-12:
                best_val = val
                best_state = model.state()
                history.best_epoch = epoch
                since_best = 0
            else:
                since_best += 1
                if since_best > config.patience:
                    history.stopped_early = True
                    break
        else:
            best_state = model.state()
            history.best_epoch = epoch

    model.load_state(best_state)
    return model, history


__all__ = ["History", "TrainConfig", "train"]
