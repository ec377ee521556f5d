from __future__ import annotations

import pytest

from recaudit.corpus import HateClass, RecEdge
from recaudit.errors import InsufficientDataError
from recaudit.graphlab import (
    LabeledGraph,
    conditional_rates,
    degree_report,
    format_transition_table,
    level_distribution,
    transition_counts,
)

H = HateClass.HATEFUL
NH = HateClass.NON_HATEFUL


def edge_fixture_with_counts(nh_nh: int, nh_h: int, h_nh: int, h_h: int) -> LabeledGraph:
    """Build a graph whose transition counts are exactly the given four values."""
    labels = {"src_nh": NH, "src_h": H, "dst_nh": NH, "dst_h": H}
    edges = []
    rank = 0
    for count, (src, dst) in (
        (nh_nh, ("src_nh", "dst_nh")),
        (nh_h, ("src_nh", "dst_h")),
        (h_nh, ("src_h", "dst_nh")),
        (h_h, ("src_h", "dst_h")),
    ):
        for _ in range(count):
            rank += 1
            edges.append(RecEdge(src, dst, level=1, rank=rank))
    return LabeledGraph(labels=labels, edges=tuple(edges))


# Transition counts published for the full five-level crawl.
PAPER_TRANSITIONS = (695_381, 94_567, 96_858, 42_790)


@pytest.fixture(scope="module")
def paper_graph():
    return edge_fixture_with_counts(*PAPER_TRANSITIONS)


class TestTransitions:

    def test_paper_proportions_and_total(self, paper_graph):
        counts = transition_counts(paper_graph)
        assert counts.total == 929_596
        props = counts.proportions
        assert props["NH->NH"] * 100 == pytest.approx(74.8, abs=0.01)
        assert props["NH->H"] * 100 == pytest.approx(10.17, abs=0.01)
        assert props["H->NH"] * 100 == pytest.approx(10.42, abs=0.01)
        assert props["H->H"] * 100 == pytest.approx(4.61, abs=0.01)
        assert sum(props.values()) == pytest.approx(1.0, abs=1e-12)

    def test_paper_conditional_rates(self, paper_graph):
        rates = conditional_rates(transition_counts(paper_graph))
        assert rates.p_h_given_h == pytest.approx(42_790 / 139_648, abs=1e-12)
        assert rates.p_h_given_h == pytest.approx(0.306, abs=5e-4)
        assert rates.p_h_given_nh == pytest.approx(0.120, abs=5e-4)
        assert rates.p_dst_h == pytest.approx(0.148, abs=5e-4)

    def test_single_edge(self):
        graph = edge_fixture_with_counts(0, 0, 0, 1)
        counts = transition_counts(graph)
        assert (counts.nh_nh, counts.nh_h, counts.h_nh, counts.h_h) == (0, 0, 0, 1)

    def test_all_hateful_sources(self):
        rates = conditional_rates(transition_counts(edge_fixture_with_counts(0, 0, 0, 5)))
        assert rates.p_h_given_h == 1.0
        assert rates.p_h_given_nh is None

    def test_no_hateful_sources(self):
        rates = conditional_rates(transition_counts(edge_fixture_with_counts(5, 2, 0, 0)))
        assert rates.p_h_given_h is None

    def test_unlabeled_endpoints_excluded_and_counted(self):
        labels = {"a": NH, "b": H}
        edges = (
            RecEdge("a", "b", 1, 1),
            RecEdge("a", "mystery", 1, 2),
            RecEdge("mystery", "b", 1, 1),
        )
        counts = transition_counts(LabeledGraph(labels=labels, edges=edges))
        assert counts.total == 1
        assert counts.excluded_edges == 2

    def test_no_labeled_edges_is_error(self):
        graph = LabeledGraph(labels={"a": NH}, edges=(RecEdge("a", "zzz", 1, 1),))
        with pytest.raises(InsufficientDataError):
            transition_counts(graph)

    def test_counts_sum_to_labeled_edges(self, paper_graph):
        counts = transition_counts(paper_graph)
        assert counts.total + counts.excluded_edges == len(paper_graph.edges)

    def test_format_table_mentions_total(self, paper_graph):
        text = format_transition_table(transition_counts(paper_graph), label_source="fixture")
        assert "929,596" in text
        assert "fixture" in text


class TestLevelDistribution:
    def test_paper_level1_rate(self):
        labels = {}
        levels = {}
        for i in range(6391):
            labels[f"nh{i}"] = NH
            levels[f"nh{i}"] = 1
        for i in range(1678):
            labels[f"h{i}"] = H
            levels[f"h{i}"] = 1
        rows = level_distribution(LabeledGraph(labels=labels, edges=(), levels=levels))
        level1 = next(r for r in rows if r.level == 1)
        assert (level1.non_hateful, level1.hateful) == (6391, 1678)
        assert level1.hateful_pct == pytest.approx(20.80, abs=0.005)

    def test_all_hateful(self):
        labels = {f"v{i}": H for i in range(10)}
        levels = {f"v{i}": 1 + i % 2 for i in range(10)}
        rows = level_distribution(LabeledGraph(labels=labels, edges=(), levels=levels))
        for row in rows:
            assert row.hateful_pct == 100.0

    def test_all_levels_row_counts_unique_ids(self):
        labels = {"a": H, "b": NH, "c": NH, "seed": NH}
        levels = {"a": 1, "b": 1, "c": 2, "seed": 0}
        rows = level_distribution(LabeledGraph(labels=labels, edges=(), levels=levels))
        all_row = next(r for r in rows if r.level is None)
        # Seeds (level 0) are not recommendations and stay out of the table.
        assert all_row.total == 3

    def test_monotone_trend_recoverable(self):
        # Plant a decreasing hateful share by level and check the rows follow.
        labels, levels = {}, {}
        for level, rate in ((1, 0.5), (2, 0.3), (3, 0.1)):
            for i in range(100):
                vid = f"L{level}v{i}"
                labels[vid] = H if i < rate * 100 else NH
                levels[vid] = level
        rows = [r for r in level_distribution(LabeledGraph(labels=labels, edges=(), levels=levels)) if r.level]
        pcts = [r.hateful_pct for r in rows]
        assert pcts == sorted(pcts, reverse=True)


class TestDegreeReport:
    def test_star_graph_center_degree(self):
        labels = {"center": NH, "l1": H, "l2": NH, "l3": H, "l4": NH}
        edges = tuple(RecEdge("center", f"l{i}", 1, i) for i in range(1, 5))
        report = degree_report(LabeledGraph(labels=labels, edges=edges))
        assert sum(report.out_degree["center"].values()) == 4
        assert report.out_degree["center"]["to_h"] == 2

    def test_top_recommended_ranking(self):
        labels = {v: NH for v in "abcd"}
        edges = (
            RecEdge("a", "d", 1, 1),
            RecEdge("b", "d", 1, 1),
            RecEdge("c", "d", 1, 1),
            RecEdge("a", "b", 1, 2),
        )
        report = degree_report(LabeledGraph(labels=labels, edges=edges))
        assert report.top_recommended[0] == ("d", 3)

    def test_handshake_identity(self):
        graph = edge_fixture_with_counts(7, 3, 2, 5)
        report = degree_report(graph)
        assert report.total_out_degree == len(graph.edges)

    def test_binary_labels_enforced(self):
        with pytest.raises(ValueError):
            LabeledGraph(labels={"a": HateClass.UNRELATED}, edges=())
