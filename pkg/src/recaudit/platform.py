"""Platform client abstraction: wire client, throttling, and response cache.

``PlatformClient`` is the structural interface every backend satisfies (the
HTTP client here, the synthetic platform in :mod:`recaudit.simulator`).
``ThrottledClient`` adds interval pacing, retry-with-backoff, and a daily
request budget around any client. The HTTP client speaks the public video
data API's search, video-list, channel-list, and comment-thread endpoints
and caches raw response bodies on disk keyed by (endpoint, params) so
interrupted crawls resume without refetching.

Credentials come from the RECAUDIT_API_KEY environment variable and are
never written to disk; the base URL is overridable for replay servers. All
wire behavior is testable offline by injecting a transport callable.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence, runtime_checkable

from recaudit.corpus import Comment, VideoRecord, parse_timestamp
from recaudit.errors import (
    CapabilityError,
    NotFoundError,
    QuotaExceededError,
    RecauditError,
    TransientError,
)

API_KEY_ENV = "RECAUDIT_API_KEY"
DEFAULT_BASE_URL = "https://www.googleapis.com/youtube/v3"
SEARCH_PAGE_SIZE = 50
METADATA_BATCH = 50

# (status, parsed-JSON body) returned for (endpoint URL, query params).
Transport = Callable[[str, Mapping[str, str]], tuple[int, dict]]


@runtime_checkable
class PlatformClient(Protocol):
    """Uniform video-platform surface; ordering of returned ids is significant."""

    def search(self, keyword: str, order: str = "relevance", max_results: int = 50) -> list[str]: ...

    def related(self, video_id: str, k: int) -> list[str]: ...

    def metadata(self, ids: Sequence[str]) -> dict[str, VideoRecord | None]: ...

    def comments(self, video_id: str, max_comments: int = 100) -> list[Comment]: ...


@dataclass(frozen=True)
class RatePolicy:
    min_interval_s: float = 0.0
    max_retries: int = 3
    backoff_base_s: float = 1.0
    backoff_cap_s: float = 64.0
    daily_quota: int | None = None

    def __post_init__(self):
        if self.min_interval_s < 0:
            raise ValueError("min_interval_s must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def backoff_delay(self, attempt: int) -> float:
        """Delay before retry ``attempt`` (0-based): base, 2x, 4x ... capped."""
        return min(self.backoff_base_s * (2.0**attempt), self.backoff_cap_s)


@dataclass(frozen=True)
class Clock:
    """Injected time source so interval semantics are testable offline."""

    monotonic: Callable[[], float] = time.monotonic
    sleep: Callable[[float], None] = time.sleep


class ThrottledClient:
    """Wrap any client with interval pacing, retries, and a request budget.

    Consecutive dispatches are separated by at least ``min_interval_s``;
    bursts queue (callers block on a lock, so request order is preserved).
    Transient and quota failures from the wrapped client are retried with
    exponential backoff up to ``max_retries``; an exhausted daily budget
    raises immediately without dispatching.
    """

    def __init__(self, client, policy: RatePolicy, clock: Clock | None = None):
        self._client = client
        self._policy = policy
        self._clock = clock or Clock()
        self._lock = threading.Lock()
        self._next_allowed = 0.0
        self._requests_made = 0

    @property
    def requests_made(self) -> int:
        return self._requests_made

    def _dispatch(self, method: Callable, *args, **kwargs):
        policy = self._policy
        with self._lock:
            if policy.daily_quota is not None and self._requests_made >= policy.daily_quota:
                raise QuotaExceededError(
                    f"daily request budget of {policy.daily_quota} exhausted"
                )
            attempt = 0
            while True:
                now = self._clock.monotonic()
                if now < self._next_allowed:
                    self._clock.sleep(self._next_allowed - now)
                self._next_allowed = self._clock.monotonic() + policy.min_interval_s
                self._requests_made += 1
                try:
                    return method(*args, **kwargs)
                except (TransientError, QuotaExceededError):
                    if attempt >= policy.max_retries:
                        raise
                    self._clock.sleep(policy.backoff_delay(attempt))
                    attempt += 1

    def search(self, keyword: str, order: str = "relevance", max_results: int = 50) -> list[str]:
        return self._dispatch(self._client.search, keyword, order, max_results)

    def related(self, video_id: str, k: int) -> list[str]:
        return self._dispatch(self._client.related, video_id, k)

    def metadata(self, ids: Sequence[str]) -> dict[str, VideoRecord | None]:
        return self._dispatch(self._client.metadata, ids)

    def comments(self, video_id: str, max_comments: int = 100) -> list[Comment]:
        return self._dispatch(self._client.comments, video_id, max_comments)

    def as_profile(self, session):
        if not hasattr(self._client, "as_profile"):
            raise CapabilityError("wrapped client does not support profile sessions")
        return ThrottledClient(self._client.as_profile(session), self._policy, self._clock)


def _requests_transport() -> Transport:
    import requests

    session = requests.Session()

    def transport(url: str, params: Mapping[str, str]) -> tuple[int, dict]:
        try:
            response = session.get(url, params=dict(params), timeout=30)
        except requests.RequestException as exc:
            raise TransientError(f"connection failure: {exc}") from exc
        try:
            body = response.json() if response.content else {}
        except ValueError:
            body = {}
        return response.status_code, body

    return transport


_DURATION_RE = re.compile(
    r"^P(?:(?P<days>\d+)D)?(?:T(?:(?P<hours>\d+)H)?(?:(?P<minutes>\d+)M)?(?:(?P<seconds>\d+)S)?)?$"
)


def parse_iso8601_duration(text: str) -> int:
    """ISO-8601 duration (PT#H#M#S form) to whole seconds."""
    match = _DURATION_RE.match(text or "")
    if not match:
        raise ValueError(f"unparseable duration {text!r}")
    parts = {k: int(v) for k, v in match.groupdict().items() if v}
    return (
        parts.get("days", 0) * 86400
        + parts.get("hours", 0) * 3600
        + parts.get("minutes", 0) * 60
        + parts.get("seconds", 0)
    )


class ResponseCache:
    """Disk cache of raw response bodies keyed by endpoint and parameters.

    Layout: ``<root>/<endpoint>/<sha256-of-params>.json``. Credentials are
    excluded from the key and never stored.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _path(self, endpoint: str, params: Mapping[str, str]) -> Path:
        clean = {k: v for k, v in sorted(params.items()) if k != "key"}
        digest = hashlib.sha256(json.dumps(clean, sort_keys=True).encode()).hexdigest()
        return self.root / endpoint / f"{digest}.json"

    def get(self, endpoint: str, params: Mapping[str, str]) -> dict | None:
        path = self._path(endpoint, params)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def put(self, endpoint: str, params: Mapping[str, str], body: dict) -> None:
        path = self._path(endpoint, params)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(body, sort_keys=True), encoding="utf-8")


class HttpPlatformClient:
    """Wire client for the public video data API.

    Raises typed errors per response status (403 quota, 404 not-found,
    5xx transient); retry and pacing policy live in ``ThrottledClient``.
    Note the related-videos request parameter is deprecated on the live
    API; the synthetic platform implements the same surface fully.
    """

    def __init__(
        self,
        api_key: str | None = None,
        base_url: str = DEFAULT_BASE_URL,
        transport: Transport | None = None,
        cache_dir: str | Path | None = None,
        relevance_language: str = "ar",
    ):
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.base_url = base_url.rstrip("/")
        self._transport = transport or _requests_transport()
        self._cache = ResponseCache(cache_dir) if cache_dir else None
        self.relevance_language = relevance_language

    # -- request plumbing --

    def _get(self, endpoint: str, params: Mapping[str, str]) -> dict:
        if self._cache is not None:
            cached = self._cache.get(endpoint, params)
            if cached is not None:
                return cached
        full = dict(params)
        if self.api_key:
            full["key"] = self.api_key
        status, body = self._transport(f"{self.base_url}/{endpoint}", full)
        if status == 200:
            if self._cache is not None:
                self._cache.put(endpoint, params, body)
            return body
        reason = ""
        errors = body.get("error", {}).get("errors", [])
        if errors:
            reason = errors[0].get("reason", "")
        if status == 403:
            raise QuotaExceededError(f"{endpoint}: quota refused ({reason or 'forbidden'})")
        if status == 404:
            raise NotFoundError(f"{endpoint}: resource not found")
        if status >= 500:
            raise TransientError(f"{endpoint}: server error {status}")
        raise RecauditError(f"{endpoint}: unexpected status {status} ({reason})")

    def _paged_video_ids(self, endpoint: str, params: dict, max_results: int) -> list[str]:
        ids: list[str] = []
        page_token = None
        while len(ids) < max_results:
            page = dict(params)
            page["maxResults"] = str(min(SEARCH_PAGE_SIZE, max_results - len(ids)))
            if page_token:
                page["pageToken"] = page_token
            body = self._get(endpoint, page)
            for item in body.get("items", []):
                vid = item.get("id", {}).get("videoId")
                if vid and vid not in ids:
                    ids.append(vid)
                    if len(ids) >= max_results:
                        break
            page_token = body.get("nextPageToken")
            if not page_token:
                break
        return ids

    # -- PlatformClient surface --

    def search(self, keyword: str, order: str = "relevance", max_results: int = 50) -> list[str]:
        params = {
            "part": "snippet",
            "q": keyword,
            "type": "video",
            "order": order,
            "relevanceLanguage": self.relevance_language,
        }
        return self._paged_video_ids("search", params, max_results)

    def related(self, video_id: str, k: int) -> list[str]:
        params = {"part": "snippet", "relatedToVideoId": video_id, "type": "video"}
        return self._paged_video_ids("search", params, k)

    def metadata(self, ids: Sequence[str]) -> dict[str, VideoRecord | None]:
        out: dict[str, VideoRecord | None] = {vid: None for vid in ids}
        channel_stats: dict[str, dict] = {}
        parsed: dict[str, dict] = {}
        for start in range(0, len(ids), METADATA_BATCH):
            chunk = list(ids[start : start + METADATA_BATCH])
            try:
                body = self._get(
                    "videos",
                    {"part": "snippet,statistics,contentDetails", "id": ",".join(chunk)},
                )
            except NotFoundError:
                continue  # every id in the chunk stays unavailable
            for item in body.get("items", []):
                parsed[item["id"]] = item

        channel_ids = sorted(
            {item["snippet"]["channelId"] for item in parsed.values() if "snippet" in item}
        )
        for start in range(0, len(channel_ids), METADATA_BATCH):
            chunk = channel_ids[start : start + METADATA_BATCH]
            try:
                body = self._get("channels", {"part": "statistics", "id": ",".join(chunk)})
            except NotFoundError:
                continue
            for item in body.get("items", []):
                channel_stats[item["id"]] = item.get("statistics", {})

        for vid, item in parsed.items():
            out[vid] = self._record_from_item(item, channel_stats)
        return out

    def comments(self, video_id: str, max_comments: int = 100) -> list[Comment]:
        body = self._get(
            "commentThreads",
            {
                "part": "snippet",
                "videoId": video_id,
                "order": "time",
                "maxResults": str(min(100, max_comments)),
            },
        )
        comments = []
        for item in body.get("items", [])[:max_comments]:
            snippet = item["snippet"]["topLevelComment"]["snippet"]
            comments.append(
                Comment(
                    text=snippet.get("textDisplay", ""),
                    published_at=parse_timestamp(snippet["publishedAt"]),
                )
            )
        return comments

    @staticmethod
    def _record_from_item(item: dict, channel_stats: Mapping[str, dict]) -> VideoRecord:
        snippet = item.get("snippet", {})
        statistics = item.get("statistics", {})
        details = item.get("contentDetails", {})
        missing: list[str] = []

        def count(source: Mapping, key: str, field: str) -> int:
            value = source.get(key)
            if value is None:
                missing.append(field)
                return 0
            return int(value)

        channel = channel_stats.get(snippet.get("channelId", ""), {})
        duration = 0
        if "duration" in details:
            duration = parse_iso8601_duration(details["duration"])
        else:
            missing.append("duration_s")
        return VideoRecord(
            video_id=item["id"],
            title=snippet.get("title", ""),
            description=snippet.get("description", ""),
            tags=tuple(snippet.get("tags", ())),
            language=snippet.get("defaultAudioLanguage", snippet.get("defaultLanguage", "")),
            published_at=parse_timestamp(snippet["publishedAt"]) if "publishedAt" in snippet else None,
            view_count=count(statistics, "viewCount", "view_count"),
            like_count=count(statistics, "likeCount", "like_count"),
            dislike_count=count(statistics, "dislikeCount", "dislike_count"),
            comment_count=count(statistics, "commentCount", "comment_count"),
            duration_s=duration,
            channel_id=snippet.get("channelId", ""),
            channel_view_count=count(channel, "viewCount", "channel_view_count"),
            channel_subscriber_count=count(channel, "subscriberCount", "channel_subscriber_count"),
            channel_video_count=count(channel, "videoCount", "channel_video_count"),
            missing_fields=tuple(missing),
        )


def http_client(
    api_key: str | None = None,
    base_url: str = DEFAULT_BASE_URL,
    policy: RatePolicy | None = None,
    cache_dir: str | Path | None = None,
    transport: Transport | None = None,
    clock: Clock | None = None,
) -> ThrottledClient:
    """The production composition: HTTP client behind the throttle."""
    raw = HttpPlatformClient(
        api_key=api_key, base_url=base_url, transport=transport, cache_dir=cache_dir
    )
    return ThrottledClient(raw, policy or RatePolicy(), clock)


__all__ = [
    "API_KEY_ENV",
    "Clock",
    "HttpPlatformClient",
    "PlatformClient",
    "RatePolicy",
    "ResponseCache",
    "ThrottledClient",
    "http_client",
    "parse_iso8601_duration",
]
