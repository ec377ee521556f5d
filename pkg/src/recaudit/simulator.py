"""Deterministic synthetic video platform with planted ground truth.

The simulator implements the platform-client interface over a generated
universe: every video carries a hidden truth class, recommendation slots draw
their destination class from a planted transition matrix, search results
draw from per-keyword hate rates, and logged-in profiles multiply the odds
of hateful items by configured attribute multipliers scaled by watch-history
size. Every call is a pure function of (config, method, arguments): random
streams are keyed by a hash of those, so call order never perturbs results.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from recaudit import corpus
from recaudit.corpus import Comment, HateClass, VideoRecord
from recaudit.errors import ConfigError, NotFoundError
from recaudit.features import default_hate_lexicon

EPOCH = datetime(2019, 9, 1, tzinfo=timezone.utc)

_NEUTRAL_WORDS = (
    "قناة",      # channel
    "فيديو",  # video
    "حلقة",      # episode
    "درس",            # lesson
    "برنامج",  # program
    "لقاء",      # meeting
    "شرح",            # explanation
    "جديد",      # new
    "مباشر",  # live
    "حوار",      # dialogue
)


class ProfileSession(Protocol):
    """What a personalized view needs from an audit profile."""

    @property
    def attributes(self) -> Mapping[str, str]: ...

    @property
    def watch_minutes(self) -> float: ...


@dataclass(frozen=True)
class KeywordSpec:
    """Search behavior for one keyword: hateful share and topical affinity."""

    search_hate_rate: float
    topic: str


@dataclass(frozen=True)
class SimConfig:
    universe_size: int = 1000
    base_hate_rate: float = 0.2
    # transition[src][dst], index 0 = non-hateful, 1 = hateful; rows sum to 1.
    transition: tuple[tuple[float, float], tuple[float, float]] = ((0.88, 0.12), (0.69, 0.31))
    keyword_table: Mapping[str, KeywordSpec] = field(default_factory=dict)
    # "attribute=value" -> odds multiplier on hateful items for profiles.
    personalization: Mapping[str, float] = field(default_factory=dict)
    history_full_hours: float = 4.5
    seed: int = 0
    view_count_lognorm: tuple[float, float] = (8.0, 2.0)
    duration_lognorm: tuple[float, float] = (5.5, 0.8)
    comments_per_video: int = 4

    def validate(self) -> None:
        problems = []
        if self.universe_size < 100:
            problems.append(f"universe_size must be >= 100, got {self.universe_size}")
        if not 0.0 <= self.base_hate_rate <= 1.0:
            problems.append(f"base_hate_rate must be in [0, 1], got {self.base_hate_rate}")
        for i, row in enumerate(self.transition):
            if abs(sum(row) - 1.0) > 1e-12:
                problems.append(f"transition row {i} sums to {sum(row)!r}, expected 1")
            if any(p < 0 or p > 1 for p in row):
                problems.append(f"transition row {i} has entries outside [0, 1]")
        for keyword, spec in self.keyword_table.items():
            if not 0.0 <= spec.search_hate_rate <= 1.0:
                problems.append(f"keyword {keyword!r} rate outside [0, 1]")
        for key, multiplier in self.personalization.items():
            if multiplier <= 0:
                problems.append(f"personalization {key!r} multiplier must be > 0")
            if "=" not in key:
                problems.append(f"personalization key {key!r} must look like 'attribute=value'")
        if self.history_full_hours <= 0:
            problems.append("history_full_hours must be > 0")
        if problems:
            raise ConfigError("; ".join(problems))


@dataclass(frozen=True)
class SimVideo:
    record: VideoRecord
    truth_class: HateClass
    affinities: Mapping[str, float]


def _personalized_rate(rate: float, multiplier: float) -> float:
    """Apply an odds multiplier to a hateful-item probability."""
    if rate <= 0.0 or rate >= 1.0 or multiplier == 1.0:
        return rate
    odds = rate / (1.0 - rate) * multiplier
    return odds / (1.0 + odds)


class SyntheticPlatform:
    """Platform client over a generated universe; read-only after generation."""

    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        self._videos: dict[str, SimVideo] = {}
        self._pools: dict[HateClass, list[str]] = {HateClass.NON_HATEFUL: [], HateClass.HATEFUL: []}
        self._by_topic: dict[tuple[str, HateClass], list[str]] = {}
        self._lexicon = sorted(default_hate_lexicon())
        self._generate()

    # -- keyed random streams --

    def _stream(self, method: str, *args) -> np.random.Generator:
        payload = json.dumps([self.config.seed, method, *args], sort_keys=True, default=str)
        digest = hashlib.sha256(payload.encode()).digest()
        return np.random.default_rng(int.from_bytes(digest[:8], "big"))

    # -- universe generation --

    def _generate(self) -> None:
        topics = sorted({spec.topic for spec in self.config.keyword_table.values()})
        for index in range(self.config.universe_size):
            video_id = f"v{index:07d}"
            rng = self._stream("video", index)
            hateful = rng.random() < self.config.base_hate_rate
            truth = HateClass.HATEFUL if hateful else HateClass.NON_HATEFUL

            mu_v, sigma_v = self.config.view_count_lognorm
            views = int(rng.lognormal(mu_v, sigma_v))
            mu_d, sigma_d = self.config.duration_lognorm
            title_words = list(rng.choice(_NEUTRAL_WORDS, size=3))
            if topics:
                topic_hint = topics[int(rng.integers(len(topics)))]
                title_words.append(topic_hint)
            if hateful:
                title_words.append(self._lexicon[int(rng.integers(len(self._lexicon)))])
            comment_rate = 0.7 if hateful else 0.1
            comment_count = int(rng.integers(0, self.config.comments_per_video + 1))
            comments = tuple(
                Comment(
                    text=(
                        self._lexicon[int(rng.integers(len(self._lexicon)))]
                        if rng.random() < comment_rate
                        else _NEUTRAL_WORDS[int(rng.integers(len(_NEUTRAL_WORDS)))]
                    ),
                    published_at=EPOCH + timedelta(minutes=index % 1440),
                )
                for _ in range(comment_count)
            )
            record = VideoRecord(
                video_id=video_id,
                title=" ".join(title_words),
                description=" ".join(rng.choice(_NEUTRAL_WORDS, size=6)),
                tags=tuple(rng.choice(_NEUTRAL_WORDS, size=2)),
                language="ar",
                published_at=EPOCH - timedelta(days=int(rng.integers(0, 1000))),
                view_count=views,
                like_count=int(views * rng.uniform(0.001, 0.05)),
                dislike_count=int(views * rng.uniform(0.0, 0.01)),
                comment_count=len(comments),
                duration_s=int(rng.lognormal(mu_d, sigma_d)),
                channel_id=f"c{int(rng.integers(0, max(10, self.config.universe_size // 50))):05d}",
                channel_view_count=int(rng.lognormal(mu_v + 2, sigma_v)),
                channel_subscriber_count=int(rng.lognormal(6, 2)),
                channel_video_count=int(rng.integers(1, 2000)),
                comments=comments,
            )
            affinities = {topic: float(rng.random()) for topic in topics}
            video = SimVideo(record=record, truth_class=truth, affinities=affinities)
            self._videos[video_id] = video
            self._pools[truth].append(video_id)

        for topic in topics:
            for cls in (HateClass.NON_HATEFUL, HateClass.HATEFUL):
                ordered = sorted(
                    self._pools[cls], key=lambda vid: (-self._videos[vid].affinities[topic], vid)
                )
                self._by_topic[(topic, cls)] = ordered

    # -- oracle accessors --

    def truth_labels(self) -> dict[str, HateClass]:
        return {vid: video.truth_class for vid, video in self._videos.items()}

    def video_ids(self) -> list[str]:
        return sorted(self._videos)

    def hateful_fraction(self) -> float:
        return len(self._pools[HateClass.HATEFUL]) / len(self._videos)

    # -- platform client interface --

    def search(self, keyword: str, order: str = "relevance", max_results: int = 50) -> list[str]:
        return self._search(keyword, order, max_results, multiplier=1.0, profile_key="")

    def related(self, video_id: str, k: int) -> list[str]:
        return self._related(video_id, k, multiplier=1.0, profile_key="")

    def metadata(self, ids: Sequence[str]) -> dict[str, VideoRecord | None]:
        return {
            vid: self._videos[vid].record if vid in self._videos else None for vid in ids
        }

    def comments(self, video_id: str, max_comments: int = 100) -> list[Comment]:
        if video_id not in self._videos:
            raise NotFoundError(f"unknown video {video_id!r}")
        return list(self._videos[video_id].record.comments[:max_comments])

    def as_profile(self, session: ProfileSession) -> "PersonalizedView":
        return PersonalizedView(self, session)

    # -- internals shared with the personalized view --

    def _profile_multiplier(self, session: ProfileSession) -> float:
        multiplier = 1.0
        for attribute, value in session.attributes.items():
            multiplier *= self.config.personalization.get(f"{attribute}={value}", 1.0)
        hours = session.watch_minutes / 60.0
        strength = min(1.0, hours / self.config.history_full_hours)
        return 1.0 + (multiplier - 1.0) * strength

    def _search(
        self, keyword: str, order: str, max_results: int, multiplier: float, profile_key: str
    ) -> list[str]:
        spec = self.config.keyword_table.get(keyword)
        if spec is None:
            raise NotFoundError(f"unknown keyword {keyword!r}")
        if order not in ("relevance", "date", "rating", "view_count"):
            raise ValueError(f"unknown order {order!r}")
        rate = _personalized_rate(spec.search_hate_rate, multiplier)
        stream = self._stream("search", keyword, order, max_results, profile_key)
        draws = stream.random(max_results)

        pools = {
            cls: self._ranked_pool(spec.topic, cls, order) for cls in self._pools
        }
        cursors = {cls: 0 for cls in self._pools}
        chosen: list[str] = []
        seen: set[str] = set()
        for slot in range(max_results):
            cls = HateClass.HATEFUL if draws[slot] < rate else HateClass.NON_HATEFUL
            vid = self._next_from_pool(pools, cursors, cls, seen)
            if vid is None:
                break
            chosen.append(vid)
            seen.add(vid)
        return chosen

    def _ranked_pool(self, topic: str, cls: HateClass, order: str) -> list[str]:
        base = self._by_topic.get((topic, cls))
        if base is None:
            base = sorted(self._pools[cls])
        if order == "relevance":
            return base
        videos = self._videos
        if order == "date":
            key = lambda vid: (videos[vid].record.published_at, vid)
            return sorted(base, key=key, reverse=True)
        if order == "view_count":
            key = lambda vid: (-videos[vid].record.view_count, vid)
            return sorted(base, key=key)
        like_ratio = lambda vid: (
            -videos[vid].record.like_count / max(1, videos[vid].record.view_count),
            vid,
        )
        return sorted(base, key=like_ratio)

    @staticmethod
    def _next_from_pool(pools, cursors, cls, seen) -> str | None:
        pool = pools[cls]
        cursor = cursors[cls]
        while cursor < len(pool) and pool[cursor] in seen:
            cursor += 1
        if cursor >= len(pool):
            # Preferred class exhausted; fall back to the other class.
            other = HateClass.HATEFUL if cls is HateClass.NON_HATEFUL else HateClass.NON_HATEFUL
            cursors[cls] = cursor
            pool, cursor = pools[other], cursors[other]
            while cursor < len(pool) and pool[cursor] in seen:
                cursor += 1
            if cursor >= len(pool):
                return None
            cursors[other] = cursor + 1
            return pool[cursor]
        cursors[cls] = cursor + 1
        return pool[cursor]

    def _related(self, video_id: str, k: int, multiplier: float, profile_key: str) -> list[str]:
        source = self._videos.get(video_id)
        if source is None:
            raise NotFoundError(f"unknown video {video_id!r}")
        src_idx = 1 if source.truth_class is HateClass.HATEFUL else 0
        p_hateful = _personalized_rate(self.config.transition[src_idx][1], multiplier)
        stream = self._stream("related", video_id, k, profile_key)
        draws = stream.random(k)
        chosen: list[str] = []
        seen: set[str] = {video_id}
        for slot in range(k):
            cls = HateClass.HATEFUL if draws[slot] < p_hateful else HateClass.NON_HATEFUL
            other = HateClass.NON_HATEFUL if cls is HateClass.HATEFUL else HateClass.HATEFUL
            vid = self._pick_unseen(stream, self._pools[cls], seen)
            if vid is None:
                vid = self._pick_unseen(stream, self._pools[other], seen)
            if vid is None:
                break
            chosen.append(vid)
            seen.add(vid)
        return chosen

    @staticmethod
    def _pick_unseen(stream: np.random.Generator, pool: Sequence[str], seen: set[str]) -> str | None:
        if not pool:
            return None
        # Rejection sampling terminates fast while the pool is mostly unseen;
        # fall back to explicit filtering once collisions pile up.
        for _ in range(64):
            vid = pool[int(stream.integers(len(pool)))]
            if vid not in seen:
                return vid
        candidates = [vid for vid in pool if vid not in seen]
        if not candidates:
            return None
        return candidates[int(stream.integers(len(candidates)))]

    # -- export --

    def export_universe(self, out_dir: str | Path) -> None:
        """Dump the universe in corpus format plus planted truth labels."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        ids = self.video_ids()
        corpus.save_records(out / "records.jsonl", [self._videos[v].record for v in ids])
        with (out / "truth_labels.jsonl").open("w", encoding="utf-8") as fh:
            for vid in ids:
                fh.write(
                    json.dumps(
                        {
                            "video_id": vid,
                            "hate_class": self._videos[vid].truth_class.value,
                            "targets": {},
                            "confidence": 1.0,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )


class PersonalizedView:
    """The platform as seen by a logged-in profile.

    Holds a live reference to the session: as the profile's watch history
    grows, the personalization multiplier interpolates from 1 toward its
    configured product (full strength at ``history_full_hours``).
    """

    def __init__(self, platform: SyntheticPlatform, session: ProfileSession):
        self._platform = platform
        self._session = session

    def _key(self) -> str:
        attrs = ";".join(f"{k}={v}" for k, v in sorted(self._session.attributes.items()))
        return f"{attrs}|{round(self._session.watch_minutes, 6)}"

    def search(self, keyword: str, order: str = "relevance", max_results: int = 50) -> list[str]:
        multiplier = self._platform._profile_multiplier(self._session)
        return self._platform._search(keyword, order, max_results, multiplier, self._key())

    def related(self, video_id: str, k: int) -> list[str]:
        multiplier = self._platform._profile_multiplier(self._session)
        return self._platform._related(video_id, k, multiplier, self._key())

    def metadata(self, ids: Sequence[str]) -> dict[str, VideoRecord | None]:
        return self._platform.metadata(ids)

    def comments(self, video_id: str, max_comments: int = 100) -> list[Comment]:
        return self._platform.comments(video_id, max_comments)


def load_sim_config(path: str | Path) -> SimConfig:
    """Read a SimConfig from a JSON file (see docs/formats.md for fields)."""
    with Path(path).open("r", encoding="utf-8") as fh:
        raw = json.load(fh)
    keyword_table = {
        kw: KeywordSpec(search_hate_rate=float(v["search_hate_rate"]), topic=v.get("topic", kw))
        for kw, v in raw.get("keyword_table", {}).items()
    }
    config = SimConfig(
        universe_size=raw.get("universe_size", 1000),
        base_hate_rate=raw.get("base_hate_rate", 0.2),
        transition=tuple(tuple(row) for row in raw.get("transition", ((0.88, 0.12), (0.69, 0.31)))),
        keyword_table=keyword_table,
        personalization=dict(raw.get("personalization", {})),
        history_full_hours=raw.get("history_full_hours", 4.5),
        seed=raw.get("seed", 0),
    )
    config.validate()
    return config


__all__ = [
    "KeywordSpec",
    "PersonalizedView",
    "ProfileSession",
    "SimConfig",
    "SimVideo",
    "SyntheticPlatform",
    "load_sim_config",
]
