from __future__ import annotations

from datetime import datetime, timezone

import pytest

from recaudit.corpus import Comment, VideoRecord


@pytest.fixture
def fixture_records() -> list[VideoRecord]:
    ts = datetime(2019, 9, 1, 12, 0, 0, tzinfo=timezone.utc)
    return [
        VideoRecord(
            video_id="vid001",
            title="documentary about faith",
            description="a long form discussion",
            tags=("religion", "history"),
            language="ar",
            published_at=ts,
            view_count=1200,
            like_count=40,
            dislike_count=3,
            comment_count=2,
            duration_s=600,
            channel_id="chan1",
            channel_view_count=90000,
            channel_subscriber_count=4500,
            channel_video_count=120,
            comments=(
                Comment(text="interesting", published_at=ts),
                Comment(text="thanks for sharing", published_at=ts),
            ),
        ),
        VideoRecord(
            video_id="vid002",
            title="street interview",
            published_at=ts,
            view_count=300,
            channel_id="chan2",
            missing_fields=("dislike_count",),
        ),
        VideoRecord(
            video_id="vid003",
            title="lecture",
            published_at=ts,
            thumbnail_features=tuple(float(i % 7) / 7.0 for i in range(2048)),
        ),
    ]
