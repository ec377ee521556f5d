"""Ablation harness: train and evaluate every feature-combination row.

The row set mirrors the evaluation table structure: five single-feature
models, three textual combinations, and three best-textual-plus-other
combinations, eleven in total.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

from recaudit.features import FeatureBundle
from recaudit.netlab.metrics import EvalMetrics, evaluate
from recaudit.netlab.model import HateVideoModel, ModelConfig, make_batch
from recaudit.netlab.train import TrainConfig, train

ABLATION_ROWS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("title", ("title",)),
    ("description", ("description",)),
    ("tags", ("tags",)),
    ("thumbnail", ("thumbnail",)),
    ("statistics", ("stats",)),
    ("title+description", ("title", "description")),
    ("title+tags", ("title", "tags")),
    ("title+description+tags", ("title", "description", "tags")),
    ("title+description+thumbnail", ("title", "description", "thumbnail")),
    ("title+description+statistics", ("title", "description", "stats")),
    ("title+description+thumbnail+statistics", ("title", "description", "thumbnail", "stats")),
)


def run_ablation(
    train_bundles: Sequence[FeatureBundle],
    val_bundles: Sequence[FeatureBundle] | None,
    test_bundles: Sequence[FeatureBundle],
    base_config: ModelConfig,
    train_config: TrainConfig,
) -> list[tuple[str, EvalMetrics]]:
    """Train one model per ablation row and evaluate it on the test bundles.

    ``base_config.active_branches`` is ignored; each row supplies its own
    subset while every other hyperparameter carries over unchanged.
    """
    results: list[tuple[str, EvalMetrics]] = []
    for name, branches in ABLATION_ROWS:
        config = replace(base_config, active_branches=branches)
        model = HateVideoModel(config)
        model, _ = train(model, train_bundles, val_bundles, train_config)
        batch, labels = make_batch(test_bundles, branches)
        probs = model.forward(batch, train_mode=False)
        results.append((name, evaluate(probs, labels)))
    return results


__all__ = ["ABLATION_ROWS", "run_ablation"]
