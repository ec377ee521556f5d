from __future__ import annotations

import math

import numpy as np
import pytest

from recaudit.errors import DimensionError
from recaudit.features import STATS_DIM, FeatureBundle
from recaudit.netlab import (
    Adam,
    HateVideoModel,
    ModelConfig,
    TrainConfig,
    evaluate,
    make_batch,
    train,
)
from recaudit.netlab.ablation import ABLATION_ROWS, run_ablation
from recaudit.netlab.layers import Dropout
from recaudit.netlab.metrics import auroc, metrics_from_confusion

THUMB_DIM = 6


def tiny_config(branches=("title", "description", "tags", "thumbnail", "stats"), seed=0, dropout=0.0):
    return ModelConfig(
        active_branches=tuple(branches),
        vocab_sizes={"title": 7, "description": 7, "tags": 7},
        seq_lens={"title": 4, "description": 5, "tags": 3},
        embedding_dim=3,
        recurrent_units=2,
        stats_dense=(3, 2),
        stats_dim=STATS_DIM,
        thumbnail_dim=THUMB_DIM,
        dropout_rate=dropout,
        seed=seed,
    )


def synthetic_bundles(n, seed=0, separable=True):
    """Tiny bundles; when separable, class token and stats split the classes."""
    rng = np.random.default_rng(seed)
    bundles = []
    for i in range(n):
        label = i % 2
        marker = 2 if label else 3
        title = np.array([marker, rng.integers(4, 7), 0, 0], dtype=np.int64)
        desc = np.array([marker] * 2 + [0] * 3, dtype=np.int64)
        tags = np.array([marker, 0, 0], dtype=np.int64)
        stats = np.zeros(STATS_DIM)
        stats[0] = 0.9 if label and separable else 0.1
        stats[8 + label] = 1.0
        bundles.append(
            FeatureBundle(
                video_id=f"b{i}",
                title_ids=title,
                desc_ids=desc,
                tag_ids=tags,
                stats=stats,
                thumbnail=rng.uniform(0, 1, THUMB_DIM),
                label=label,
            )
        )
    return bundles


def batch_loss(model, batch, labels):
    probs = model.forward(batch, train_mode=False)
    clamped = np.clip(probs, 1e-7, 1 - 1e-7)
    return float(-np.mean(labels * np.log(clamped) + (1 - labels) * np.log(1 - clamped)))


def numerical_gradients(model, batch, labels, eps=1e-5):
    grads = {}
    for param in model.params():
        grad = np.zeros_like(param.value)
        it = np.nditer(param.value, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = param.value[idx]
            param.value[idx] = orig + eps
            up = batch_loss(model, batch, labels)
            param.value[idx] = orig - eps
            down = batch_loss(model, batch, labels)
            param.value[idx] = orig
            grad[idx] = (up - down) / (2 * eps)
            it.iternext()
        grads[param.name] = grad
    return grads


def max_relative_error(analytic, numerical):
    worst = 0.0
    for name, a in analytic.items():
        n = numerical[name]
        denom = np.maximum(np.abs(a) + np.abs(n), 1e-8)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


class FixedMaskRng:
    """Stand-in dropout rng that replays one uniform draw per shape, making
    the stochastic mask deterministic across repeated forward passes."""

    def __init__(self, seed=0):
        self._cache = {}
        self._rng = np.random.default_rng(seed)

    def random(self, shape):
        key = tuple(shape)
        if key not in self._cache:
            self._cache[key] = self._rng.random(shape)
        return self._cache[key]


def nudge_off_relu_kinks(model, seed=0):
    """Shift every parameter slightly so no ReLU pre-activation sits at the
    non-differentiable point, where central differences straddle the kink."""
    rng = np.random.default_rng(seed)
    for param in model.params():
        param.value += rng.uniform(0.01, 0.03, size=param.value.shape)


class TestGradients:
    def test_finite_difference_all_layers(self):
        model = HateVideoModel(tiny_config(seed=3))
        nudge_off_relu_kinks(model, seed=30)
        bundles = synthetic_bundles(3, seed=1)
        batch, labels = make_batch(bundles, model.config.active_branches)
        _, analytic = model.loss_and_gradients(batch, labels, train_mode=False)
        numerical = numerical_gradients(model, batch, labels)
        assert max_relative_error(analytic, numerical) < 1e-4

    def test_finite_difference_through_fixed_dropout(self):
        model = HateVideoModel(tiny_config(seed=5, dropout=0.25))
        nudge_off_relu_kinks(model, seed=31)
        model._dropout_rng = FixedMaskRng(seed=11)
        bundles = synthetic_bundles(3, seed=2)
        batch, labels = make_batch(bundles, model.config.active_branches)

        def loss_with_dropout():
            probs = model.forward(batch, train_mode=True)
            clamped = np.clip(probs, 1e-7, 1 - 1e-7)
            return float(-np.mean(labels * np.log(clamped) + (1 - labels) * np.log(1 - clamped)))

        _, analytic = model.loss_and_gradients(batch, labels, train_mode=True)
        numerical = {}
        eps = 1e-5
        for param in model.params():
            grad = np.zeros_like(param.value)
            it = np.nditer(param.value, flags=["multi_index"])
            while not it.finished:
                idx = it.multi_index
                orig = param.value[idx]
                param.value[idx] = orig + eps
                up = loss_with_dropout()
                param.value[idx] = orig - eps
                down = loss_with_dropout()
                param.value[idx] = orig
                grad[idx] = (up - down) / (2 * eps)
                it.iternext()
            numerical[param.name] = grad
        assert max_relative_error(analytic, numerical) < 1e-4

    def test_logit_gradient_closed_form(self):
        # At p = 0.5 and y = 1 the logit-level BCE gradient is p - y = -0.5.
        model = HateVideoModel(tiny_config(branches=("stats",)))
        for p in model.params():
            p.value[...] = 0.0
        bundle = synthetic_bundles(1)[0]
        batch, _ = make_batch([bundle], model.config.active_branches)
        _, grads = model.loss_and_gradients(batch, np.array([1.0]), train_mode=False)
        assert grads["head.b"][0] == pytest.approx(-0.5, abs=1e-12)


class TestForward:
    def test_all_padding_zero_weights_gives_exact_half(self):
        model = HateVideoModel(tiny_config())
        for p in model.params():
            p.value[...] = 0.0
        zero = FeatureBundle(
            video_id="z",
            title_ids=np.zeros(4, dtype=np.int64),
            desc_ids=np.zeros(5, dtype=np.int64),
            tag_ids=np.zeros(3, dtype=np.int64),
            stats=np.zeros(STATS_DIM),
            thumbnail=np.zeros(THUMB_DIM),
            label=0,
        )
        batch, _ = make_batch([zero], model.config.active_branches)
        probs = model.forward(batch, train_mode=False)
        assert probs[0] == 0.5

    def test_deterministic_eval_outputs(self):
        bundles = synthetic_bundles(4, seed=9)
        batch, _ = make_batch(bundles, tiny_config().active_branches)
        a = HateVideoModel(tiny_config(seed=21)).forward(batch, train_mode=False)
        b = HateVideoModel(tiny_config(seed=21)).forward(batch, train_mode=False)
        assert np.array_equal(a, b)

    def test_loss_at_half_is_ln2(self):
        model = HateVideoModel(tiny_config(branches=("stats",)))
        for p in model.params():
            p.value[...] = 0.0
        bundles = synthetic_bundles(2)
        batch, labels = make_batch(bundles, model.config.active_branches)
        loss, _ = model.loss_and_gradients(batch, labels, train_mode=False)
        assert loss == pytest.approx(math.log(2), abs=1e-12)

    def test_dropout_expectation_matches_eval(self):
        # Inverted dropout: the mean over many masks approximates identity.
        dropout = Dropout(0.25)
        x = np.linspace(1.0, 2.0, 8)[None, :]
        rng = np.random.default_rng(0)
        total = np.zeros_like(x)
        n = 10_000
        for _ in range(n):
            total += dropout.forward(x, train_mode=True, rng=rng)
        mean = total / n
        assert np.abs(mean - x).max() / np.abs(x).max() < 0.02

    def test_shape_mismatch_names_branch(self):
        model = HateVideoModel(tiny_config(branches=("stats",)))
        with pytest.raises(DimensionError, match="stats"):
            model.forward({"stats": np.zeros((2, 5))})

    def test_missing_branch_rejected(self):
        model = HateVideoModel(tiny_config(branches=("title", "stats")))
        bundles = synthetic_bundles(2)
        batch, _ = make_batch(bundles, ("title",))
        with pytest.raises(DimensionError, match="stats"):
            model.forward(batch)


class TestTraining:
    def test_overfits_separable_bundles(self):
        bundles = synthetic_bundles(32, seed=4)
        config = tiny_config(branches=("title", "stats"), seed=7)
        model = HateVideoModel(config)
        model, _ = train(model, bundles, None, TrainConfig(epochs=200, patience=200))
        labels, _ = model.predict(bundles)
        truth = np.array([b.label for b in bundles])
        assert (labels == truth).all()

    def test_zero_lr_leaves_weights_unchanged(self):
        bundles = synthetic_bundles(8)
        model = HateVideoModel(tiny_config(seed=2))
        before = model.state()
        model, _ = train(model, bundles, None, TrainConfig(lr=0.0, epochs=1))
        after = model.state()
        for name in before:
            assert np.array_equal(before[name], after[name])

    def test_same_seed_identical_history(self):
        bundles = synthetic_bundles(16, seed=3)
        val = synthetic_bundles(8, seed=8)
        config = TrainConfig(epochs=5, patience=5)
        _, h1 = train(HateVideoModel(tiny_config(seed=13)), bundles, val, config)
        _, h2 = train(HateVideoModel(tiny_config(seed=13)), bundles, val, config)
        assert h1.train_loss == h2.train_loss
        assert h1.val_loss == h2.val_loss

    def test_early_stopping_restores_best_weights(self):
        bundles = synthetic_bundles(16, seed=3)
        val = synthetic_bundles(8, seed=8)
        model = HateVideoModel(tiny_config(seed=1))
        model, history = train(model, bundles, val, TrainConfig(epochs=60, patience=2))
        assert history.best_epoch >= 0
        if history.stopped_early:
            assert len(history.val_loss) < 60

    def test_empty_split_rejected(self):
        from recaudit.errors import InsufficientDataError

        with pytest.raises(InsufficientDataError):
            train(HateVideoModel(tiny_config()), [], None, TrainConfig())

    def test_adam_rejects_negative_lr(self):
        with pytest.raises(ValueError):
            Adam(lr=-1)


class TestPredict:
    def test_threshold_boundary(self):
        model = HateVideoModel(tiny_config(branches=("stats",)))
        for p in model.params():
            p.value[...] = 0.0
        bundles = synthetic_bundles(2)
        labels, probs = model.predict(bundles, threshold=0.5)
        assert probs.tolist() == [0.5, 0.5]
        assert labels.tolist() == [1, 1]

    def test_below_threshold(self):
        model = HateVideoModel(tiny_config(branches=("stats",)))
        for p in model.params():
            p.value[...] = 0.0
        model.head.b.value[0] = -0.05  # probability just below 0.5
        bundles = synthetic_bundles(1)
        labels, probs = model.predict(bundles)
        assert probs[0] < 0.5
        assert labels[0] == 0

    def test_permutation_stable_per_id(self):
        model = HateVideoModel(tiny_config(seed=6))
        bundles = synthetic_bundles(6, seed=5)
        labels, probs = model.predict(bundles)
        shuffled = bundles[::-1]
        labels2, probs2 = model.predict(shuffled)
        by_id = {b.video_id: (l, p) for b, l, p in zip(bundles, labels, probs)}
        for b, l, p in zip(shuffled, labels2, probs2):
            assert by_id[b.video_id][0] == l
            assert by_id[b.video_id][1] == pytest.approx(p, abs=1e-12)


class TestEvaluate:
    def test_published_all_levels_row(self):
        m = metrics_from_confusion(tp=6, fn=2, fp=4, tn=88)
        assert m.precision == pytest.approx(0.60, abs=0.005)
        assert m.recall == pytest.approx(0.75, abs=0.005)
        assert m.f1 == pytest.approx(0.67, abs=0.005)
        assert m.accuracy == pytest.approx(0.94, abs=0.005)
        assert m.false_positive_rate == pytest.approx(4 / 92, abs=1e-12)
        assert m.false_positive_rate == pytest.approx(0.04, abs=0.005)

    def test_evaluate_matches_confusion(self):
        probs = np.array([0.9, 0.8, 0.4, 0.6, 0.2])
        labels = np.array([1, 1, 1, 0, 0])
        m = evaluate(probs, labels)
        assert (m.tp, m.fn, m.fp, m.tn) == (2, 1, 1, 1)

    def test_perfect_separation_auroc_one(self):
        probs = np.array([0.9, 0.8, 0.2, 0.1])
        labels = np.array([1, 1, 0, 0])
        assert evaluate(probs, labels).auroc == pytest.approx(1.0)

    def test_single_class_auroc_absent(self):
        assert evaluate(np.array([0.4, 0.6]), np.array([1, 1])).auroc is None

    def test_auroc_monotone_invariance(self):
        rng = np.random.default_rng(0)
        probs = rng.uniform(0.01, 0.99, 40)
        labels = rng.integers(0, 2, 40)
        base = auroc(probs, labels)
        squeezed = 1 / (1 + np.exp(-7 * (probs - 0.3)))  # strictly monotone
        assert auroc(squeezed, labels) == pytest.approx(base, abs=1e-12)

    def test_auroc_matches_sklearn(self):
        from sklearn.metrics import roc_auc_score

        rng = np.random.default_rng(1)
        probs = rng.uniform(0, 1, 100)
        labels = rng.integers(0, 2, 100)
        assert auroc(probs, labels) == pytest.approx(roc_auc_score(labels, probs), abs=1e-12)


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        model = HateVideoModel(tiny_config(seed=17))
        bundles = synthetic_bundles(4)
        _, before = model.predict(bundles)
        path = tmp_path / "model.npz"
        model.save(path, vocab_hash="abc123")
        loaded, vocab_hash = HateVideoModel.load(path)
        assert vocab_hash == "abc123"
        _, after = loaded.predict(bundles)
        assert np.array_equal(before, after)
        assert loaded.config == model.config


class TestAblation:
    def test_all_eleven_rows_train(self):
        rows = [name for name, _ in ABLATION_ROWS]
        assert len(rows) == 11
        bundles = synthetic_bundles(12, seed=2)
        results = run_ablation(
            bundles,
            None,
            bundles,
            tiny_config(),
            TrainConfig(epochs=2, patience=2),
        )
        assert [name for name, _ in results] == rows
        for _, metrics in results:
            assert 0.0 <= metrics.accuracy <= 1.0
