from __future__ import annotations

import numpy as np
import pytest

from recaudit.corpus import HateClass, load_records
from recaudit.errors import ConfigError, NotFoundError
from recaudit.simulator import (
    KeywordSpec,
    SimConfig,
    SyntheticPlatform,
    _personalized_rate,
    load_sim_config,
)

H, NH = HateClass.HATEFUL, HateClass.NON_HATEFUL

KEYWORDS = {
    "shia": KeywordSpec(search_hate_rate=0.56, topic="shia"),
    "sunni": KeywordSpec(search_hate_rate=0.20, topic="sunni"),
}


def make_platform(universe=400, base_rate=0.2, seed=0, transition=((0.88, 0.12), (0.69, 0.31)), personalization=None):
    config = SimConfig(
        universe_size=universe,
        base_hate_rate=base_rate,
        transition=transition,
        keyword_table=KEYWORDS,
        personalization=personalization or {},
        seed=seed,
    )
    return SyntheticPlatform(config)


class FakeProfile:
    def __init__(self, attributes, watch_minutes=270.0):
        self._attributes = attributes
        self._watch_minutes = watch_minutes

    @property
    def attributes(self):
        return self._attributes

    @property
    def watch_minutes(self):
        return self._watch_minutes


class TestConfig:
    def test_bad_transition_rows_listed(self):
        config = SimConfig(universe_size=200, transition=((0.5, 0.4), (0.7, 0.3)))
        with pytest.raises(ConfigError, match="row 0"):
            config.validate()

    def test_small_universe_rejected(self):
        with pytest.raises(ConfigError, match="universe_size"):
            SyntheticPlatform(SimConfig(universe_size=10))

    def test_bad_multiplier_rejected(self):
        config = SimConfig(universe_size=200, personalization={"gender=male": 0.0})
        with pytest.raises(ConfigError, match="multiplier"):
            config.validate()

    def test_config_file_round_trip(self, tmp_path):
        path = tmp_path / "sim.json"
        path.write_text(
            """
            {"universe_size": 150, "base_hate_rate": 0.3, "seed": 9,
             "transition": [[0.9, 0.1], [0.6, 0.4]],
             "keyword_table": {"shia": {"search_hate_rate": 0.5, "topic": "shia"}},
             "personalization": {"ideology=radical": 1.5}}
            """,
            encoding="utf-8",
        )
        config = load_sim_config(path)
        assert config.universe_size == 150
        assert config.keyword_table["shia"].search_hate_rate == 0.5
        SyntheticPlatform(config)  # constructs cleanly


class TestUniverse:
    def test_hateful_fraction_concentrates(self):
        platform = make_platform(universe=10_000, base_rate=0.2, seed=1)
        assert platform.hateful_fraction() == pytest.approx(0.2, abs=0.01)

    def test_same_seed_identical_universe(self):
        a, b = make_platform(seed=5), make_platform(seed=5)
        assert a.video_ids() == b.video_ids()
        ids = a.video_ids()[:20]
        assert a.metadata(ids) == b.metadata(ids)
        assert a.truth_labels() == b.truth_labels()

    def test_metadata_unknown_id_maps_to_none(self):
        platform = make_platform()
        result = platform.metadata(["v0000001", "nonexistent"])
        assert result["v0000001"] is not None
        assert result["nonexistent"] is None

    def test_comments_unknown_video(self):
        with pytest.raises(NotFoundError):
            make_platform().comments("nope")

    def test_export_round_trips_through_corpus(self, tmp_path):
        platform = make_platform(universe=120)
        platform.export_universe(tmp_path)
        records = load_records(tmp_path / "records.jsonl")
        assert len(records) == 120
        assert (tmp_path / "truth_labels.jsonl").exists()


class TestRelated:
    def test_transition_rates_recovered(self):
        platform = make_platform(universe=2000, base_rate=0.3, seed=2)
        truth = platform.truth_labels()
        from_h = from_nh = to_h_from_h = to_h_from_nh = 0
        for vid in platform.video_ids():
            for dst in platform.related(vid, 4):
                if truth[vid] is H:
                    from_h += 1
                    to_h_from_h += truth[dst] is H
                else:
                    from_nh += 1
                    to_h_from_nh += truth[dst] is H
        assert from_h + from_nh == 8000
        assert to_h_from_h / from_h == pytest.approx(0.31, abs=0.02)
        assert to_h_from_nh / from_nh == pytest.approx(0.12, abs=0.02)

    def test_zero_transition_row(self):
        platform = make_platform(transition=((1.0, 0.0), (1.0, 0.0)), seed=3)
        truth = platform.truth_labels()
        for vid in platform.video_ids()[:50]:
            for dst in platform.related(vid, 4):
                assert truth[dst] is NH

    def test_repeat_call_identical(self):
        platform = make_platform(seed=4)
        vid = platform.video_ids()[7]
        assert platform.related(vid, 4) == platform.related(vid, 4)

    def test_call_order_independence(self):
        a = make_platform(seed=6)
        b = make_platform(seed=6)
        ids = a.video_ids()
        first_then_second = (a.related(ids[0], 4), a.related(ids[1], 4))
        second_then_first = (b.related(ids[1], 4), b.related(ids[0], 4))
        assert first_then_second[0] == second_then_first[1]
        assert first_then_second[1] == second_then_first[0]

    def test_no_duplicates_and_no_self(self):
        platform = make_platform(seed=7)
        vid = platform.video_ids()[3]
        related = platform.related(vid, 10)
        assert len(related) == len(set(related)) == 10
        assert vid not in related

    def test_unknown_video(self):
        with pytest.raises(NotFoundError):
            make_platform().related("missing", 4)


class TestSearch:
    def test_keyword_rate_concentrates(self):
        platform = make_platform(universe=5000, seed=8)
        truth = platform.truth_labels()
        hateful = total = 0
        # 10k draws via 200 distinct-but-deterministic searches of 50.
        for i in range(200):
            results = platform._search("shia", "relevance", 50, 1.0, profile_key=f"probe{i}")
            hateful += sum(truth[vid] is H for vid in results)
            total += len(results)
        assert total == 10_000
        assert hateful / total == pytest.approx(0.56, abs=0.01)

    def test_result_count_and_uniqueness(self):
        platform = make_platform()
        results = platform.search("shia", max_results=25)
        assert len(results) == 25
        assert len(set(results)) == 25

    def test_unknown_keyword(self):
        with pytest.raises(NotFoundError):
            make_platform().search("unlisted")

    def test_orders_differ_but_are_deterministic(self):
        platform = make_platform(seed=11)
        relevance = platform.search("shia", order="relevance", max_results=20)
        by_date = platform.search("shia", order="date", max_results=20)
        assert relevance == platform.search("shia", order="relevance", max_results=20)
        assert by_date == platform.search("shia", order="date", max_results=20)


class TestPersonalization:
    def test_odds_arithmetic(self):
        assert _personalized_rate(0.2, 1.5) == pytest.approx(0.2727, abs=5e-4)
        assert _personalized_rate(0.2, 1.0) == 0.2

    def test_multiplier_shifts_search_rate(self):
        platform = make_platform(
            universe=5000, seed=12, personalization={"ideology=radical": 1.5}
        )
        truth = platform.truth_labels()
        profile = FakeProfile({"ideology": "radical"}, watch_minutes=270.0)
        view = platform.as_profile(profile)
        hateful = total = 0
        for i in range(100):
            results = platform._search("sunni", "relevance", 50, platform._profile_multiplier(profile), f"p{i}")
            hateful += sum(truth[vid] is H for vid in results)
            total += len(results)
        # odds model: 0.2 odds * 1.5 -> rate 0.2727
        assert hateful / total == pytest.approx(0.2727, abs=0.02)
        assert len(view.search("sunni", max_results=10)) == 10

    def test_history_interpolation(self):
        platform = make_platform(personalization={"ideology=radical": 2.0})
        fresh = FakeProfile({"ideology": "radical"}, watch_minutes=0.0)
        half = FakeProfile({"ideology": "radical"}, watch_minutes=135.0)
        full = FakeProfile({"ideology": "radical"}, watch_minutes=270.0)
        over = FakeProfile({"ideology": "radical"}, watch_minutes=2000.0)
        assert platform._profile_multiplier(fresh) == pytest.approx(1.0)
        assert platform._profile_multiplier(half) == pytest.approx(1.5)
        assert platform._profile_multiplier(full) == pytest.approx(2.0)
        assert platform._profile_multiplier(over) == pytest.approx(2.0)

    def test_null_personalization_indistinguishable(self):
        from recaudit.stats import chi_square, table

        platform = make_platform(universe=5000, seed=13)
        truth = platform.truth_labels()
        profile = FakeProfile({"ideology": "radical"}, watch_minutes=270.0)
        view = platform.as_profile(profile)

        def hateful_count(searcher, tag):
            count = 0
            for i in range(200):
                if searcher is platform:
                    results = platform._search("shia", "relevance", 50, 1.0, f"{tag}{i}")
                else:
                    results = platform._search(
                        "shia", "relevance", 50, platform._profile_multiplier(profile), f"{tag}{i}"
                    )
                count += sum(truth[vid] is H for vid in results)
            return count

        logged_out = hateful_count(platform, "out")
        logged_in = hateful_count(view, "in")
        n = 200 * 50
        result = chi_square(
            table([[n - logged_out, logged_out], [n - logged_in, logged_in]])
        )
        assert result.p > 0.05
