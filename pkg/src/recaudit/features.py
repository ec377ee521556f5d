"""Turn video records into model-ready feature bundles.

Covers Arabic-aware text normalization, pretrained word-vector loading,
vocabulary construction with pad/truncate policies frozen on the training
split, the 11-entry statistical vector (8 min-max scaled engagement counts
plus a 3-way one-hot of the comment majority class), and the pluggable
comment scorer.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

import numpy as np

from recaudit.corpus import Comment, HateClass, VideoRecord
from recaudit.errors import ConfigError, ParseError

log = logging.getLogger(__name__)

PAD_ID = 0
OOV_ID = 1
EMBEDDING_DIM = 300
STATS_DIM = 11
COMMENT_WORD_LIMIT = 50

HATEFUL = "hateful"
NON_HATEFUL = "non_hateful"
UNAVAILABLE = "unavailable"
COMMENT_CLASSES = (HATEFUL, NON_HATEFUL, UNAVAILABLE)

STAT_FIELDS = (
    "view_count",
    "like_count",
    "dislike_count",
    "duration_s",
    "comment_count",
    "channel_view_count",
    "channel_subscriber_count",
    "channel_video_count",
)

# Arabic normalization: alef variants -> bare alef, ta-marbuta -> ha,
# alef-maqsura -> ya; diacritics (tashkeel) and tatweel removed.
_ALEF_VARIANTS = str.maketrans({"أ": "ا", "إ": "ا", "آ": "ا", "ٱ": "ا"})
_TA_MARBUTA = str.maketrans({"ة": "ه"})
_ALEF_MAQSURA = str.maketrans({"ى": "ي"})
_DIACRITICS_RE = re.compile(r"[ؐ-ًؚ-ٰٟ]")
_TATWEEL = "ـ"

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_DIGITS_RE = re.compile(r"[0-9٠-٩]+")
# Everything that is neither a word character nor whitespace, plus Arabic
# punctuation marks that count as word characters in some regex engines.
_PUNCT_RE = re.compile(r"[^\w\s]|[؟،؛_]")


def normalize_arabic(text: str) -> str:
    text = _DIACRITICS_RE.sub("", text)
    text = text.replace(_TATWEEL, "")
    text = text.translate(_ALEF_VARIANTS).translate(_TA_MARBUTA).translate(_ALEF_MAQSURA)
    return text


def _load_wordlist(name: str) -> frozenset[str]:
    data = resources.files("recaudit.data").joinpath(name).read_text(encoding="utf-8")
    return frozenset(
        normalize_arabic(line.strip())
        for line in data.splitlines()
        if line.strip() and not line.startswith("#")
    )


def default_stopwords() -> frozenset[str]:
    return _load_wordlist("arabic_stopwords.txt")


def default_hate_lexicon() -> frozenset[str]:
    return _load_wordlist("hate_lexicon.txt")


def preprocess(
    text: str, kind: str, stopwords: frozenset[str] | None = None
) -> list[str]:
    """Normalize and tokenize text for one feature kind.

    Lowercases Latin segments, strips URLs, mentions, digits and punctuation,
    applies Arabic normalization, and removes stop words for descriptions
    only (titles and tags stay intact).
    """
    if kind not in ("title", "description", "tags"):
        raise ValueError(f"unknown text kind {kind!r}")
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    # Diacritics are not word characters, so they must vanish before the
    # punctuation pass or diacritized words would split apart.
    text = normalize_arabic(text)
    text = _DIGITS_RE.sub(" ", text)
    text = _PUNCT_RE.sub(" ", text)
    tokens = text.lower().split()
    if kind == "description":
        if stopwords is None:
            stopwords = default_stopwords()
        tokens = [t for t in tokens if t not in stopwords]
    return tokens


@dataclass(frozen=True)
class EmbeddingTable:
    dimension: int
    vectors: Mapping[str, np.ndarray]

    def coverage(self, vocabulary: Iterable[str]) -> float:
        """Fraction of the given vocabulary present in the table."""
        vocab = list(vocabulary)
        if not vocab:
            return 0.0
        found = sum(1 for t in vocab if t in self.vectors)
        return found / len(vocab)


def load_embeddings(path: str | Path, expected_dim: int = EMBEDDING_DIM) -> EmbeddingTable:
    """Load a textual word-vector file: header ``count dim``, then one token
    and its vector per line. Pass ``expected_dim`` explicitly to override the
    300-dimension default; a mismatching file is a configuration error."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError(str(path), 1, "header must be 'count dim'")
        try:
            _count, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise ParseError(str(path), 1, f"invalid header: {exc}") from exc
        if dim != expected_dim:
            raise ConfigError(
                f"embedding file has dimension {dim}, expected {expected_dim}; "
                f"pass expected_dim={dim} to accept it"
            )
        for line_no, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ParseError(str(path), line_no, f"expected {dim + 1} fields, got {len(parts)}")
            token = parts[0]
            try:
                vector = np.asarray([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(str(path), line_no, f"non-numeric vector entry: {exc}") from exc
            if token in vectors:
                log.warning("duplicate token %r in %s at line %d, last occurrence wins", token, path, line_no)
            vectors[token] = vector
    return EmbeddingTable(dimension=expected_dim, vectors=vectors)


@dataclass(frozen=True)
class SequencePolicy:
    """Frozen pad/truncate lengths, computed once from the training corpus."""

    title_max: int
    desc_len: int
    tags_max: int

    def length_for(self, kind: str) -> int:
        return {"title": self.title_max, "description": self.desc_len, "tags": self.tags_max}[kind]


def fit_sequence_policy(token_lists: Mapping[str, Sequence[Sequence[str]]]) -> SequencePolicy:
    """Title and tags pad to the corpus maximum; description to the mean."""
    titles = token_lists["title"]
    descs = token_lists["description"]
    tags = token_lists["tags"]
    desc_mean = int(round(np.mean([len(t) for t in descs]))) if descs else 1
    return SequencePolicy(
        title_max=max((len(t) for t in titles), default=1) or 1,
        desc_len=max(desc_mean, 1),
        tags_max=max((len(t) for t in tags), default=1) or 1,
    )


def build_vocab(token_lists: Iterable[Sequence[str]]) -> dict[str, int]:
    """Token -> id map from the training split only; 0 is padding, 1 is OOV.

    Ids are assigned by descending frequency with an alphabetical tiebreak so
    rebuilding from the same corpus is byte-identical.
    """
    freq: dict[str, int] = {}
    for tokens in token_lists:
        for token in tokens:
            freq[token] = freq.get(token, 0) + 1
    ordered = sorted(freq, key=lambda t: (-freq[t], t))
    return {token: i + 2 for i, token in enumerate(ordered)}


def encode_sequence(tokens: Sequence[str], vocab: Mapping[str, int], length: int) -> np.ndarray:
    """Fixed-length id sequence: truncate beyond ``length``, pad with 0."""
    ids = [vocab.get(t, OOV_ID) for t in tokens[:length]]
    ids.extend([PAD_ID] * (length - len(ids)))
    return np.asarray(ids, dtype=np.int64)


def build_embedding_matrix(
    vocab: Mapping[str, int], table: EmbeddingTable, seed: int
) -> np.ndarray:
    """Initial embedding weights: pretrained rows where found, uniform
    [-0.25, 0.25] for OOV and unmatched tokens, zeros for padding."""
    rng = np.random.default_rng(seed)
    matrix = rng.uniform(-0.25, 0.25, size=(len(vocab) + 2, table.dimension))
    matrix[PAD_ID] = 0.0
    for token, idx in vocab.items():
        vector = table.vectors.get(token)
        if vector is not None:
            matrix[idx] = vector
    return matrix


class CommentScorer(Protocol):
    """Binary comment classifier; must be deterministic for fixed inputs."""

    def score(self, text: str) -> str:
        """Return 'hateful' or 'non_hateful' for a comment of <= 50 words."""
        ...


class KeywordScorer:
    """Transparent lexicon scorer: hateful iff any lexicon token appears."""

    def __init__(self, lexicon: frozenset[str] | None = None):
        self.lexicon = lexicon if lexicon is not None else default_hate_lexicon()

    def score(self, text: str) -> str:
        tokens = preprocess(text, kind="title")
        return HATEFUL if any(t in self.lexicon for t in tokens) else NON_HATEFUL


def truncate_words(text: str, limit: int = COMMENT_WORD_LIMIT) -> str:
    words = text.split()
    return " ".join(words[:limit])


def comment_majority(comments: Sequence[Comment], scorer: CommentScorer) -> str:
    """Majority class over a video's comments; 'unavailable' when there are
    none; ties resolve to non-hateful. Scorer failures skip the comment."""
    if not comments:
        return UNAVAILABLE
    hateful = non_hateful = 0
    for comment in comments:
        try:
            verdict = scorer.score(truncate_words(comment.text))
        except Exception:
            log.warning("comment scorer failed, skipping one comment", exc_info=True)
            continue
        if verdict == HATEFUL:
            hateful += 1
        else:
            non_hateful += 1
    if hateful == 0 and non_hateful == 0:
        return UNAVAILABLE
    return HATEFUL if hateful > non_hateful else NON_HATEFUL


@dataclass(frozen=True)
class MinMaxStats:
    """Per-feature training minima and maxima for the 8 numeric features."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def __post_init__(self):
        if len(self.mins) != len(STAT_FIELDS) or len(self.maxs) != len(STAT_FIELDS):
            raise ValueError(f"need {len(STAT_FIELDS)} feature bounds")


def fit_min_max(records: Sequence[VideoRecord]) -> MinMaxStats:
    values = np.asarray(
        [[float(getattr(r, f)) for f in STAT_FIELDS] for r in records], dtype=np.float64
    )
    return MinMaxStats(mins=tuple(values.min(axis=0)), maxs=tuple(values.max(axis=0)))


def statistical_vector(
    record: VideoRecord, majority: str, train_min_max: MinMaxStats
) -> np.ndarray:
    """8 min-max scaled engagement features plus one-hot comment majority.

    Test-time values outside the training range clamp to [0, 1]; a feature
    whose training min equals its max contributes 0 by convention.
    """
    if majority not in COMMENT_CLASSES:
        raise ValueError(f"unknown comment majority {majority!r}")
    out = np.zeros(STATS_DIM, dtype=np.float64)
    for i, name in enumerate(STAT_FIELDS):
        lo, hi = train_min_max.mins[i], train_min_max.maxs[i]
        if hi > lo:
            out[i] = min(1.0, max(0.0, (float(getattr(record, name)) - lo) / (hi - lo)))
    out[len(STAT_FIELDS) + COMMENT_CLASSES.index(majority)] = 1.0
    return out


@dataclass(frozen=True)
class FeatureBundle:
    """One model-ready example with fixed-length encoded inputs."""

    video_id: str
    title_ids: np.ndarray
    desc_ids: np.ndarray
    tag_ids: np.ndarray
    stats: np.ndarray
    label: int
    thumbnail: np.ndarray | None = None

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")
        if self.stats.shape != (STATS_DIM,):
            raise ValueError(f"stats vector must have length {STATS_DIM}")


class FeaturePipeline:
    """Fits vocabularies, sequence lengths, and scaling on the training split,
    then transforms any record set into bundles. Refusing to refit keeps the
    train-only provenance of every statistic."""

    def __init__(self, scorer: CommentScorer | None = None, stopwords: frozenset[str] | None = None):
        self.scorer = scorer if scorer is not None else KeywordScorer()
        self.stopwords = stopwords
        self.vocabs: dict[str, dict[str, int]] = {}
        self.policy: SequencePolicy | None = None
        self.min_max: MinMaxStats | None = None

    def _tokens(self, record: VideoRecord, kind: str) -> list[str]:
        if kind == "title":
            return preprocess(record.title, "title")
        if kind == "description":
            return preprocess(record.description, "description", stopwords=self.stopwords)
        return preprocess(" ".join(record.tags), "tags")

    def fit(self, train_records: Sequence[VideoRecord]) -> "FeaturePipeline":
        if self.policy is not None:
            raise ConfigError("pipeline is already fitted")
        if not train_records:
            raise ConfigError("cannot fit a feature pipeline on an empty training split")
        token_lists = {
            kind: [self._tokens(r, kind) for r in train_records]
            for kind in ("title", "description", "tags")
        }
        self.policy = fit_sequence_policy(token_lists)
        self.vocabs = {kind: build_vocab(lists) for kind, lists in token_lists.items()}
        self.min_max = fit_min_max(train_records)
        return self

    def transform(
        self, records: Sequence[VideoRecord], labels: Mapping[str, HateClass]
    ) -> list[FeatureBundle]:
        if self.policy is None or self.min_max is None:
            raise ConfigError("pipeline must be fitted before transform")
        bundles = []
        for record in records:
            label = labels[record.video_id]
            if label is HateClass.UNRELATED:
                raise ValueError(f"unrelated video {record.video_id} cannot enter a classifier dataset")
            majority = comment_majority(record.comments, self.scorer)
            bundles.append(
                FeatureBundle(
                    video_id=record.video_id,
                    title_ids=encode_sequence(
                        self._tokens(record, "title"), self.vocabs["title"], self.policy.title_max
                    ),
                    desc_ids=encode_sequence(
                        self._tokens(record, "description"),
                        self.vocabs["description"],
                        self.policy.desc_len,
                    ),
                    tag_ids=encode_sequence(
                        self._tokens(record, "tags"), self.vocabs["tags"], self.policy.tags_max
                    ),
                    stats=statistical_vector(record, majority, self.min_max),
                    thumbnail=np.asarray(record.thumbnail_features, dtype=np.float64)
                    if record.thumbnail_features is not None
                    else None,
                    label=1 if label is HateClass.HATEFUL else 0,
                )
            )
        return bundles


__all__ = [
    "COMMENT_CLASSES",
    "CommentScorer",
    "EmbeddingTable",
    "FeatureBundle",
    "FeaturePipeline",
    "KeywordScorer",
    "MinMaxStats",
    "SequencePolicy",
    "build_embedding_matrix",
    "build_vocab",
    "comment_majority",
    "default_hate_lexicon",
    "default_stopwords",
    "encode_sequence",
    "fit_min_max",
    "fit_sequence_policy",
    "load_embeddings",
    "normalize_arabic",
    "preprocess",
    "statistical_vector",
    "truncate_words",
]
