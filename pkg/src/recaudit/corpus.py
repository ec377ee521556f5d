"""Canonical data model and persistence for videos, labels, edges, and splits.

Storage is newline-delimited JSON (one record per line, UTF-8) so corpora are
streamable and diff-able. Timestamps are serialized as RFC-3339 UTC strings.
Records are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from recaudit.errors import DuplicateKeyError, InsufficientDataError, ParseError

MAX_COMMENTS = 100
THUMBNAIL_DIM = 2048

TRAIN_FRACTION = 0.7
VAL_FRACTION = 0.1


class HateClass(str, Enum):
    """Video-level hate annotation outcome."""

    HATEFUL = "hateful"
    NON_HATEFUL = "non_hateful"
    UNRELATED = "unrelated"


class ReligionTarget(str, Enum):
    """The seven targeted-religion annotation options."""

    MUSLIMS = "muslims"
    CHRISTIANS = "christians"
    JEWS = "jews"
    ATHEISTS = "atheists"
    SUNNI = "sunni"
    SHIA = "shia"
    OTHER = "other"


# Numeric engagement fields that default to 0 when a platform omits them.
COUNT_FIELDS = (
    "view_count",
    "like_count",
    "dislike_count",
    "comment_count",
    "duration_s",
    "channel_view_count",
    "channel_subscriber_count",
    "channel_video_count",
)


@dataclass(frozen=True)
class Comment:
    text: str
    published_at: datetime


@dataclass(frozen=True)
class VideoRecord:
    """One platform video: identity, text metadata, engagement, comments.

    ``missing_fields`` names numeric fields that were absent at the source and
    were defaulted to 0 (modern platforms no longer expose dislike counts).
    ``thumbnail_features`` is an optional precomputed 2048-entry vector.
    """

    video_id: str
    title: str = ""
    description: str = ""
    tags: tuple[str, ...] = ()
    language: str = ""
    published_at: datetime | None = None
    view_count: int = 0
    like_count: int = 0
    dislike_count: int = 0
    comment_count: int = 0
    duration_s: int = 0
    channel_id: str = ""
    channel_view_count: int = 0
    channel_subscriber_count: int = 0
    channel_video_count: int = 0
    comments: tuple[Comment, ...] = ()
    thumbnail_features: tuple[float, ...] | None = None
    missing_fields: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.video_id:
            raise ValueError("video_id must be non-empty")
        for name in COUNT_FIELDS:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if len(self.comments) > MAX_COMMENTS:
            raise ValueError(f"at most {MAX_COMMENTS} comments per record")
        if self.thumbnail_features is not None and len(self.thumbnail_features) != THUMBNAIL_DIM:
            raise ValueError(f"thumbnail_features must have exactly {THUMBNAIL_DIM} entries")


@dataclass(frozen=True)
class RecEdge:
    """A recommendation link discovered at a given crawl level and slot rank."""

    src_id: str
    dst_id: str
    level: int
    rank: int

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train/validation/test id partitions."""

    train_ids: tuple[str, ...]
    val_ids: tuple[str, ...]
    test_ids: tuple[str, ...]

    def __post_init__(self):
        train, val, test = set(self.train_ids), set(self.val_ids), set(self.test_ids)
        if train & val or train & test or val & test:
            raise ValueError("split partitions must be pairwise disjoint")

    @property
    def all_ids(self) -> frozenset[str]:
        return frozenset(self.train_ids) | frozenset(self.val_ids) | frozenset(self.test_ids)


def format_timestamp(ts: datetime) -> str:
    """RFC-3339 UTC, e.g. 2019-09-01T12:30:00Z."""
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(text: str) -> datetime:
    return datetime.fromisoformat(text.replace("Z", "+00:00")).astimezone(timezone.utc)


def record_to_dict(record: VideoRecord) -> dict:
    d = {
        "video_id": record.video_id,
        "title": record.title,
        "description": record.description,
        "tags": list(record.tags),
        "language": record.language,
        "published_at": format_timestamp(record.published_at) if record.published_at else None,
        "channel_id": record.channel_id,
        "comments": [
            {"text": c.text, "published_at": format_timestamp(c.published_at)}
            for c in record.comments
        ],
        "thumbnail_features": list(record.thumbnail_features)
        if record.thumbnail_features is not None
        else None,
        "missing_fields": list(record.missing_fields),
    }
    for name in COUNT_FIELDS:
        d[name] = getattr(record, name)
    return d


def record_from_dict(d: Mapping) -> VideoRecord:
    if "video_id" not in d or not d["video_id"]:
        raise KeyError("video_id")
    counts = {}
    missing = list(d.get("missing_fields", ()))
    for name in COUNT_FIELDS:
        value = d.get(name)
        if value is None:
            value = 0
            if name not in missing:
                missing.append(name)
        counts[name] = int(value)
    thumb = d.get("thumbnail_features")
    return VideoRecord(
        video_id=d["video_id"],
        title=d.get("title", ""),
        description=d.get("description", ""),
        tags=tuple(d.get("tags", ())),
        language=d.get("language", ""),
        published_at=parse_timestamp(d["published_at"]) if d.get("published_at") else None,
        channel_id=d.get("channel_id", ""),
        comments=tuple(
            Comment(text=c["text"], published_at=parse_timestamp(c["published_at"]))
            for c in d.get("comments", ())
        ),
        thumbnail_features=tuple(float(x) for x in thumb) if thumb is not None else None,
        missing_fields=tuple(missing),
        **counts,
    )


def _write_jsonl(path: Path, dicts: Iterable[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for d in dicts:
            fh.write(json.dumps(d, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def _read_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(path), line_no, f"invalid JSON: {exc.msg}") from exc


def save_records(path: str | Path, records: Iterable[VideoRecord]) -> None:
    _write_jsonl(Path(path), (record_to_dict(r) for r in records))


def load_records(path: str | Path) -> list[VideoRecord]:
    """Load a record file, rejecting malformed lines and duplicate ids."""
    records: list[VideoRecord] = []
    seen: set[str] = set()
    for line_no, d in _read_jsonl(Path(path)):
        try:
            record = record_from_dict(d)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(str(path), line_no, f"invalid record: {exc}") from exc
        if record.video_id in seen:
            raise DuplicateKeyError(f"{path}:{line_no}: duplicate video_id {record.video_id!r}")
        seen.add(record.video_id)
        records.append(record)
    return records


def save_edges(path: str | Path, edges: Iterable[RecEdge]) -> None:
    _write_jsonl(
        Path(path),
        (
            {"src_id": e.src_id, "dst_id": e.dst_id, "level": e.level, "rank": e.rank}
            for e in edges
        ),
    )


def load_edges(path: str | Path) -> list[RecEdge]:
    edges: list[RecEdge] = []
    seen: set[tuple] = set()
    for line_no, d in _read_jsonl(Path(path)):
        try:
            edge = RecEdge(
                src_id=d["src_id"], dst_id=d["dst_id"], level=int(d["level"]), rank=int(d["rank"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(str(path), line_no, f"invalid edge: {exc}") from exc
        key = (edge.src_id, edge.dst_id, edge.level, edge.rank)
        if key in seen:
            raise DuplicateKeyError(f"{path}:{line_no}: duplicate edge {key}")
        seen.add(key)
        edges.append(edge)
    return edges


def make_split(
    ids: Sequence[str],
    seed: int,
    stratify: Mapping[str, HateClass] | None = None,
) -> DatasetSplit:
    """Deterministic 70/10/20 split of ``ids``.

    Sizes are floor(0.7 n), floor(0.1 n), and the remainder. With ``stratify``
    (an id -> class mapping) the same proportions are applied per class.
    """
    ids = list(ids)
    if len(ids) < 10:
        raise InsufficientDataError(f"need at least 10 ids to split, got {len(ids)}")
    if len(set(ids)) != len(ids):
        raise DuplicateKeyError("split input contains duplicate ids")

    if stratify is not None:
        by_class: dict[HateClass, list[str]] = {}
        for vid in ids:
            by_class.setdefault(stratify[vid], []).append(vid)
        parts = [_shuffle_split(members, seed) for _, members in sorted(by_class.items())]
        return DatasetSplit(
            train_ids=tuple(x for p in parts for x in p[0]),
            val_ids=tuple(x for p in parts for x in p[1]),
            test_ids=tuple(x for p in parts for x in p[2]),
        )

    train, val, test = _shuffle_split(ids, seed)
    return DatasetSplit(train_ids=tuple(train), val_ids=tuple(val), test_ids=tuple(test))


def _shuffle_split(ids: Sequence[str], seed: int) -> tuple[list[str], list[str], list[str]]:
    shuffled = list(ids)
    random.Random(seed).shuffle(shuffled)
    n = len(shuffled)
    n_train = int(TRAIN_FRACTION * n)
    n_val = int(VAL_FRACTION * n)
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_val],
        shuffled[n_train + n_val :],
    )


__all__ = [
    "Comment",
    "DatasetSplit",
    "HateClass",
    "RecEdge",
    "ReligionTarget",
    "VideoRecord",
    "format_timestamp",
    "load_edges",
    "load_records",
    "make_split",
    "parse_timestamp",
    "record_from_dict",
    "record_to_dict",
    "save_edges",
    "save_records",
]
