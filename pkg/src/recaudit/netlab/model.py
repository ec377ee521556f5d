"""Model assembly: branch construction, forward pass, loss, and checkpoints."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from recaudit.errors import DimensionError
from recaudit.features import STATS_DIM, FeatureBundle
from recaudit.netlab.layers import BiLSTM, Dense, Dropout, Embedding, Param, ReLU, sigmoid

TEXT_BRANCHES = ("title", "description", "tags")
ALL_BRANCHES = ("title", "description", "tags", "thumbnail", "stats")
PROB_CLAMP = 1e-7
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    """Architecture description; ``vocab_sizes`` and ``seq_lens`` cover the
    active text branches (sizes include the padding and OOV rows)."""

    active_branches: tuple[str, ...]
    vocab_sizes: Mapping[str, int] = field(default_factory=dict)
    seq_lens: Mapping[str, int] = field(default_factory=dict)
    embedding_dim: int = 300
    recurrent_units: int = 240
    stats_dense: tuple[int, ...] = (64, 32)
    stats_dim: int = STATS_DIM
    thumbnail_dim: int = 2048
    dropout_rate: float = 0.25
    seed: int = 0

    def __post_init__(self):
        unknown = set(self.active_branches) - set(ALL_BRANCHES)
        if unknown:
            raise ValueError(f"unknown branches: {sorted(unknown)}")
        if not self.active_branches:
            raise ValueError("at least one branch must be active")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        for kind in TEXT_BRANCHES:
            if kind in self.active_branches and kind not in self.vocab_sizes:
                raise ValueError(f"vocab_sizes missing for active branch {kind!r}")


class HateVideoModel:
    """Multi-branch classifier over feature bundles.

    Text branches: trainable embedding -> BiLSTM (final states of both
    directions concatenated). Stats branch: dense+ReLU stack. Thumbnail
    branch: passthrough. Fused output: concat -> dropout -> dense(1) ->
    logistic probability.
    """

    def __init__(
        self,
        config: ModelConfig,
        initial_embeddings: Mapping[str, np.ndarray] | None = None,
    ):
        self.config = config
        rng = np.random.default_rng(config.seed)
        initial_embeddings = initial_embeddings or {}

        self.embeddings: dict[str, Embedding] = {}
        self.recurrent: dict[str, BiLSTM] = {}
        fused_dim = 0
        for kind in TEXT_BRANCHES:
            if kind not in config.active_branches:
                continue
            matrix = initial_embeddings.get(kind)
            if matrix is None:
                matrix = rng.uniform(-0.25, 0.25, size=(config.vocab_sizes[kind], config.embedding_dim))
                matrix[0] = 0.0
            elif matrix.shape != (config.vocab_sizes[kind], config.embedding_dim):
                raise DimensionError(
                    f"{kind}: embedding matrix shape {matrix.shape} does not match "
                    f"({config.vocab_sizes[kind]}, {config.embedding_dim})"
                )
            self.embeddings[kind] = Embedding(matrix, name=kind)
            self.recurrent[kind] = BiLSTM(rng, config.embedding_dim, config.recurrent_units, name=kind)
            fused_dim += 2 * config.recurrent_units

        self.stats_stack: list = []
        if "stats" in config.active_branches:
            n_in = config.stats_dim
            for i, width in enumerate(config.stats_dense):
                self.stats_stack.append(Dense(rng, n_in, width, name=f"stats.dense{i}"))
                self.stats_stack.append(ReLU())
                n_in = width
            fused_dim += n_in
        if "thumbnail" in config.active_branches:
            fused_dim += config.thumbnail_dim

        self.dropout = Dropout(config.dropout_rate)
        self.head = Dense(rng, fused_dim, 1, name="head")
        self._dropout_rng = np.random.default_rng(rng.integers(2**63))
        self._branch_widths: list[tuple[str, int]] = []

    # -- parameters --

    def params(self) -> list[Param]:
        out: list[Param] = []
        for kind in TEXT_BRANCHES:
            if kind in self.embeddings:
                out.extend(self.embeddings[kind].params())
                out.extend(self.recurrent[kind].params())
        for layer in self.stats_stack:
            out.extend(layer.params())
        out.extend(self.head.params())
        return out

    def zero_grads(self) -> None:
        for p in self.params():
            p.zero_grad()

    def state(self) -> dict[str, np.ndarray]:
        return {p.name: p.value.copy() for p in self.params()}

    def load_state(self, state: Mapping[str, np.ndarray]) -> None:
        for p in self.params():
            p.value[...] = state[p.name]

    # -- forward / backward --

    def _check_batch(self, batch: Mapping[str, np.ndarray]) -> int:
        sizes = set()
        for kind in self.config.active_branches:
            if kind not in batch:
                raise DimensionError(f"{kind}: missing from batch")
            arr = batch[kind]
            sizes.add(arr.shape[0])
            if kind in TEXT_BRANCHES:
                expected = self.config.seq_lens.get(kind)
                if arr.ndim != 2 or (expected is not None and arr.shape[1] != expected):
                    raise DimensionError(
                        f"{kind}: expected (batch, {expected}) ids, got {arr.shape}"
                    )
            elif kind == "stats" and (arr.ndim != 2 or arr.shape[1] != self.config.stats_dim):
                raise DimensionError(f"stats: expected (batch, {self.config.stats_dim}), got {arr.shape}")
            elif kind == "thumbnail" and (arr.ndim != 2 or arr.shape[1] != self.config.thumbnail_dim):
                raise DimensionError(
                    f"thumbnail: expected (batch, {self.config.thumbnail_dim}), got {arr.shape}"
                )
        if len(sizes) != 1:
            raise DimensionError(f"branches disagree on batch size: {sorted(sizes)}")
        return sizes.pop()

    def forward(self, batch: Mapping[str, np.ndarray], train_mode: bool = False) -> np.ndarray:
        """Probabilities in (0, 1) for a batch dict of branch arrays."""
        self._check_batch(batch)
        pieces = []
        self._branch_widths = []
        for kind in TEXT_BRANCHES:
            if kind not in self.embeddings:
                continue
            ids = batch[kind]
            vectors = self.embeddings[kind].forward(ids)
            mask = (ids != 0).astype(np.float64)
            h = self.recurrent[kind].forward(vectors, mask)
            pieces.append(h)
            self._branch_widths.append((kind, h.shape[1]))
        if self.stats_stack:
            x = batch["stats"].astype(np.float64)
            for layer in self.stats_stack:
                x = layer.forward(x)
            pieces.append(x)
            self._branch_widths.append(("stats", x.shape[1]))
        if "thumbnail" in self.config.active_branches:
            x = batch["thumbnail"].astype(np.float64)
            pieces.append(x)
            self._branch_widths.append(("thumbnail", x.shape[1]))

        fused = np.concatenate(pieces, axis=1)
        dropped = self.dropout.forward(fused, train_mode, self._dropout_rng)
        logits = self.head.forward(dropped)[:, 0]
        self._last_probs = sigmoid(logits)
        return self._last_probs

    def _backward_from_dlogit(self, d_logit: np.ndarray) -> None:
        d_fused = self.head.backward(d_logit[:, None])
        d_fused = self.dropout.backward(d_fused)
        offset = 0
        for kind, width in self._branch_widths:
            d_piece = d_fused[:, offset : offset + width]
            offset += width
            if kind in self.recurrent:
                d_vectors = self.recurrent[kind].backward(d_piece)
                self.embeddings[kind].backward(d_vectors)
            elif kind == "stats":
                d_x = d_piece
                for layer in reversed(self.stats_stack):
                    d_x = layer.backward(d_x)
            # thumbnail: passthrough, no parameters upstream

    def loss_and_gradients(
        self, batch: Mapping[str, np.ndarray], labels: np.ndarray, train_mode: bool = True
    ) -> tuple[float, dict[str, np.ndarray]]:
        """Mean binary cross-entropy and gradients for every parameter.

        Probabilities are clamped at 1e-7 from either end, so the loss stays
        finite; the logit gradient is the exact (p - y) / batch.
        """
        labels = np.asarray(labels, dtype=np.float64)
        if set(np.unique(labels)) - {0.0, 1.0}:
            raise ValueError("labels must be binary")
        self.zero_grads()
        probs = self.forward(batch, train_mode=train_mode)
        clamped = np.clip(probs, PROB_CLAMP, 1.0 - PROB_CLAMP)
        loss = float(-np.mean(labels * np.log(clamped) + (1.0 - labels) * np.log(1.0 - clamped)))
        d_logit = (probs - labels) / labels.size
        self._backward_from_dlogit(d_logit)
        return loss, {p.name: p.grad.copy() for p in self.params()}

    def predict(
        self, bundles: Sequence[FeatureBundle], threshold: float = 0.5
    ) -> tuple[np.ndarray, np.ndarray]:
        """(labels, probabilities); label 1 iff probability >= threshold."""
        batch, _ = make_batch(bundles, self.config.active_branches)
        probs = self.forward(batch, train_mode=False)
        return (probs >= threshold).astype(np.int64), probs

    # -- checkpoints --

    def save(self, path: str | Path, vocab_hash: str = "") -> None:
        config = asdict(self.config)
        config["active_branches"] = list(config["active_branches"])
        config["stats_dense"] = list(config["stats_dense"])
        config["vocab_sizes"] = dict(config["vocab_sizes"])
        config["seq_lens"] = dict(config["seq_lens"])
        meta = {
            "version": CHECKPOINT_VERSION,
            "config": config,
            "vocab_hash": vocab_hash,
            "params": {p.name: list(p.value.shape) for p in self.params()},
        }
        arrays = {f"param/{p.name}": p.value for p in self.params()}
        np.savez(Path(path), __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)

    @classmethod
    def load(cls, path: str | Path) -> tuple["HateVideoModel", str]:
        with np.load(Path(path)) as data:
            meta = json.loads(bytes(data["__meta__"]).decode())
            if meta["version"] != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {meta['version']}")
            cfg = meta["config"]
            config = ModelConfig(
                active_branches=tuple(cfg["active_branches"]),
                vocab_sizes=cfg["vocab_sizes"],
                seq_lens=cfg["seq_lens"],
                embedding_dim=cfg["embedding_dim"],
                recurrent_units=cfg["recurrent_units"],
                stats_dense=tuple(cfg["stats_dense"]),
                stats_dim=cfg["stats_dim"],
                thumbnail_dim=cfg["thumbnail_dim"],
                dropout_rate=cfg["dropout_rate"],
                seed=cfg["seed"],
            )
            model = cls(config)
            for p in model.params():
                stored = data[f"param/{p.name}"]
                if stored.shape != p.value.shape:
                    raise DimensionError(f"{p.name}: checkpoint shape {stored.shape} != {p.value.shape}")
                p.value[...] = stored
        return model, meta["vocab_hash"]


def make_batch(
    bundles: Sequence[FeatureBundle], active_branches: Sequence[str]
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Stack bundles into branch arrays plus the label vector."""
    if not bundles:
        raise ValueError("empty bundle list")
    batch: dict[str, np.ndarray] = {}
    if "title" in active_branches:
        batch["title"] = np.stack([b.title_ids for b in bundles])
    if "description" in active_branches:
        batch["description"] = np.stack([b.desc_ids for b in bundles])
    if "tags" in active_branches:
        batch["tags"] = np.stack([b.tag_ids for b in bundles])
    if "stats" in active_branches:
        batch["stats"] = np.stack([b.stats for b in bundles])
    if "thumbnail" in active_branches:
        missing = [b.video_id for b in bundles if b.thumbnail is None]
        if missing:
            raise DimensionError(f"thumbnail: bundles missing vectors: {missing[:5]}")
        batch["thumbnail"] = np.stack([b.thumbnail for b in bundles])
    labels = np.asarray([b.label for b in bundles], dtype=np.float64)
    return batch, labels


__all__ = ["ALL_BRANCHES", "HateVideoModel", "ModelConfig", "TEXT_BRANCHES", "make_batch"]
