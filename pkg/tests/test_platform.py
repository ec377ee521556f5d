from __future__ import annotations

import json
from pathlib import Path

import pytest

from recaudit.errors import (
    CapabilityError,
    NotFoundError,
    QuotaExceededError,
    TransientError,
)
from recaudit.platform import (
    Clock,
    HttpPlatformClient,
    RatePolicy,
    ThrottledClient,
    http_client,
    parse_iso8601_duration,
)

FIXTURES = Path(__file__).parent / "fixtures" / "http"


def fixture(name: str) -> dict:
    return json.loads((FIXTURES / f"{name}.json").read_text(encoding="utf-8"))


class FakeClock:
    """Virtual clock: sleep() advances time instantly and records calls."""

    def __init__(self):
        self.now = 0.0
        self.sleeps: list[float] = []

    def monotonic(self) -> float:
        return self.now

    def sleep(self, seconds: float) -> None:
        self.sleeps.append(seconds)
        self.now += seconds

    def as_clock(self) -> Clock:
        return Clock(monotonic=self.monotonic, sleep=self.sleep)


class ReplayTransport:
    """Routes requests to committed fixture bodies; records dispatch log."""

    def __init__(self):
        self.log: list[tuple[str, dict]] = []

    def __call__(self, url: str, params: dict) -> tuple[int, dict]:
        endpoint = url.rsplit("/", 1)[-1]
        self.log.append((endpoint, dict(params)))
        if endpoint == "search":
            if params.get("relatedToVideoId"):
                return 200, fixture("related")
            if params.get("pageToken") == "CBkQAA":
                return 200, fixture("search_page2")
            return 200, fixture("search_page1")
        if endpoint == "videos":
            return 200, fixture("videos")
        if endpoint == "channels":
            return 200, fixture("channels")
        if endpoint == "commentThreads":
            return 200, fixture("commentthreads")
        raise AssertionError(f"unrouted endpoint {endpoint}")


class FailingTransport:
    def __init__(self, status: int, body: dict | None = None, fail_times: int | None = None):
        self.status = status
        self.body = body if body is not None else {}
        self.fail_times = fail_times
        self.calls = 0

    def __call__(self, url: str, params: dict) -> tuple[int, dict]:
        self.calls += 1
        if self.fail_times is not None and self.calls > self.fail_times:
            return 200, fixture("search_page2")
        return self.status, self.body


class TestDuration:
    @pytest.mark.parametrize(
        "text,seconds",
        [("PT14M33S", 873), ("PT1H2M5S", 3725), ("PT45S", 45), ("P1DT1S", 86401), ("PT0S", 0)],
    )
    def test_parses(self, text, seconds):
        assert parse_iso8601_duration(text) == seconds

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_iso8601_duration("fourteen minutes")


class TestHttpClient:
    def test_search_returns_fifty_ids_in_response_order(self):
        client = HttpPlatformClient(api_key="k", transport=ReplayTransport())
        ids = client.search("keyword", max_results=50)
        assert ids == [f"seed{i:04d}" for i in range(50)]

    def test_search_respects_max(self):
        client = HttpPlatformClient(api_key="k", transport=ReplayTransport())
        assert len(client.search("keyword", max_results=10)) == 10

    def test_related_uses_parameter_and_preserves_order(self):
        transport = ReplayTransport()
        client = HttpPlatformClient(api_key="k", transport=transport)
        ids = client.related("seed0000", 4)
        assert ids == [f"rel{i:04d}" for i in range(4)]
        endpoint, params = transport.log[0]
        assert endpoint == "search"
        assert params["relatedToVideoId"] == "seed0000"

    def test_metadata_parses_records_and_channel_stats(self):
        client = HttpPlatformClient(api_key="k", transport=ReplayTransport())
        records = client.metadata(["seed0000", "seed0001"])
        first = records["seed0000"]
        assert first is not None
        assert first.view_count == 125930
        assert first.duration_s == 873
        assert first.channel_subscriber_count == 510000
        assert first.language == "ar"
        # dislikeCount absent on the modern API: defaulted and flagged.
        assert first.dislike_count == 0
        assert "dislike_count" in first.missing_fields
        second = records["seed0001"]
        assert second.dislike_count == 5
        assert second.duration_s == 3725

    def test_metadata_404_marks_unavailable_without_raising(self):
        client = HttpPlatformClient(api_key="k", transport=FailingTransport(404))
        records = client.metadata(["gone1", "gone2"])
        assert records == {"gone1": None, "gone2": None}

    def test_comments_parsed(self):
        client = HttpPlatformClient(api_key="k", transport=ReplayTransport())
        comments = client.comments("seed0000")
        assert len(comments) == 3
        assert comments[0].text.endswith("0")

    def test_quota_maps_to_error(self):
        client = HttpPlatformClient(api_key="k", transport=FailingTransport(403, fixture("quota_error")))
        with pytest.raises(QuotaExceededError, match="quota"):
            client.search("keyword", max_results=5)

    def test_5xx_maps_to_transient(self):
        client = HttpPlatformClient(api_key="k", transport=FailingTransport(500))
        with pytest.raises(TransientError):
            client.search("keyword", max_results=5)

    def test_api_key_sent_but_never_cached(self, tmp_path):
        transport = ReplayTransport()
        client = HttpPlatformClient(api_key="secret", transport=transport, cache_dir=tmp_path)
        client.search("keyword", max_results=5)
        assert transport.log[0][1]["key"] == "secret"
        for path in tmp_path.rglob("*.json"):
            assert "secret" not in path.read_text(encoding="utf-8")

    def test_cache_prevents_refetch(self, tmp_path):
        transport = ReplayTransport()
        client = HttpPlatformClient(api_key="k", transport=transport, cache_dir=tmp_path)
        first = client.search("keyword", max_results=10)
        calls = len(transport.log)
        second = client.search("keyword", max_results=10)
        assert first == second
        assert len(transport.log) == calls  # served from cache

    def test_env_var_key_pickup(self, monkeypatch):
        monkeypatch.setenv("RECAUDIT_API_KEY", "from-env")
        client = HttpPlatformClient(transport=ReplayTransport())
        assert client.api_key == "from-env"


class TestThrottle:
    def test_min_interval_spacing(self):
        clock = FakeClock()
        dispatch_times: list[float] = []

        class Recorder:
            def search(self, keyword, order="relevance", max_results=50):
                dispatch_times.append(clock.now)
                return []

        client = ThrottledClient(Recorder(), RatePolicy(min_interval_s=0.1), clock.as_clock())
        for _ in range(3):
            client.search("x")
        assert dispatch_times == pytest.approx([0.0, 0.1, 0.2])

    def test_zero_interval_passthrough(self):
        clock = FakeClock()

        class Recorder:
            def related(self, video_id, k):
                return ["a"] * k

        client = ThrottledClient(Recorder(), RatePolicy(min_interval_s=0.0), clock.as_clock())
        assert client.related("v", 2) == ["a", "a"]
        assert clock.sleeps == []

    def test_backoff_sequence_on_retries(self):
        clock = FakeClock()

        class Flaky:
            def __init__(self):
                self.calls = 0

            def search(self, keyword, order="relevance", max_results=50):
                self.calls += 1
                if self.calls <= 3:
                    raise TransientError("boom")
                return ["ok"]

        policy = RatePolicy(min_interval_s=0.0, max_retries=3, backoff_base_s=1.0, backoff_cap_s=64.0)
        client = ThrottledClient(Flaky(), policy, clock.as_clock())
        assert client.search("x") == ["ok"]
        assert clock.sleeps == [1.0, 2.0, 4.0]

    def test_backoff_cap(self):
        policy = RatePolicy(backoff_base_s=1.0, backoff_cap_s=4.0)
        assert [policy.backoff_delay(i) for i in range(4)] == [1.0, 2.0, 4.0, 4.0]

    def test_quota_error_surfaces_after_max_retries(self):
        clock = FakeClock()
        transport = FailingTransport(403, fixture("quota_error"))
        client = http_client(
            api_key="k",
            policy=RatePolicy(min_interval_s=0.0, max_retries=2, backoff_base_s=0.5),
            transport=transport,
            clock=clock.as_clock(),
        )
        with pytest.raises(QuotaExceededError):
            client.search("keyword", max_results=5)
        assert transport.calls == 3  # initial try + 2 retries

    def test_daily_budget_immediate_error(self):
        class Counter:
            def search(self, keyword, order="relevance", max_results=50):
                return []

        client = ThrottledClient(Counter(), RatePolicy(daily_quota=2), FakeClock().as_clock())
        client.search("a")
        client.search("b")
        with pytest.raises(QuotaExceededError, match="budget"):
            client.search("c")

    def test_as_profile_unsupported_on_http(self):
        client = http_client(api_key="k", transport=ReplayTransport(), clock=FakeClock().as_clock())
        with pytest.raises(CapabilityError):
            client.as_profile(object())

    def test_as_profile_wraps_simulator(self):
        from recaudit.simulator import KeywordSpec, SimConfig, SyntheticPlatform

        platform = SyntheticPlatform(
            SimConfig(
                universe_size=150,
                keyword_table={"shia": KeywordSpec(0.5, "shia")},
                seed=0,
            )
        )

        class Session:
            attributes = {"gender": "male"}
            watch_minutes = 0.0

        wrapped = ThrottledClient(platform, RatePolicy(), FakeClock().as_clock())
        view = wrapped.as_profile(Session())
        assert len(view.search("shia", max_results=5)) == 5

    def test_search_no_duplicates_property(self):
        client = HttpPlatformClient(api_key="k", transport=ReplayTransport())
        for n in (5, 20, 50):
            ids = client.search("keyword", max_results=n)
            assert len(ids) == len(set(ids)) <= n
