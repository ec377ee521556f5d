"""Recommendation-graph analytics: prevalence, transitions, and degrees.

The graph is binary here (hateful vs non-hateful); nodes without a binary
label are excluded from transition counts and reported as exclusions. Labels
may come from planted simulator truth, resolved annotations, or classifier
predictions; the report header records which.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from recaudit.corpus import HateClass, RecEdge
from recaudit.errors import InsufficientDataError

_BINARY = (HateClass.NON_HATEFUL, HateClass.HATEFUL)


@dataclass(frozen=True)
class LabeledGraph:
    """Video nodes with binary hate labels, recommendation edges, level index.

    ``levels`` maps a video id to the crawl level at which it was first
    discovered (seeds are level 0). ``label_source`` is free-form provenance
    recorded in report headers.
    """

    labels: Mapping[str, HateClass]
    edges: tuple[RecEdge, ...]
    levels: Mapping[str, int] = field(default_factory=dict)
    label_source: str = "unspecified"

    def __post_init__(self):
        bad = {v for v in self.labels.values() if v not in _BINARY}
        if bad:
            raise ValueError(f"graph labels must be binary, got {sorted(c.value for c in bad)}")


@dataclass(frozen=True)
class LevelRow:
    level: int | None  # None marks the cross-level "all levels" row
    non_hateful: int
    hateful: int

    @property
    def total(self) -> int:
        return self.non_hateful + self.hateful

    @property
    def hateful_pct(self) -> float:
        return 100.0 * self.hateful / self.total if self.total else 0.0


@dataclass(frozen=True)
class TransitionCounts:
    nh_nh: int
    nh_h: int
    h_nh: int
    h_h: int
    excluded_edges: int = 0

    @property
    def total(self) -> int:
        return self.nh_nh + self.nh_h + self.h_nh + self.h_h

    @property
    def proportions(self) -> dict[str, float]:
        total = self.total
        return {
            "NH->NH": self.nh_nh / total,
            "NH->H": self.nh_h / total,
            "H->NH": self.h_nh / total,
            "H->H": self.h_h / total,
        }


@dataclass(frozen=True)
class ConditionalRates:
    """P(dst hateful | src class) and the overall hateful-destination rate.

    A rate is None when its denominator is zero.
    """

    p_h_given_h: float | None
    p_h_given_nh: float | None
    p_dst_h: float | None


def level_distribution(graph: LabeledGraph) -> list[LevelRow]:
    """Per-level (NH, H) counts over unique labeled videos, plus an all-levels row.

    Level sets count each video once at its discovery level; the all-levels
    row double-checks cross-level dedup by counting distinct labeled ids with
    level >= 1 (seeds, level 0, are not recommendations and are excluded).
    """
    per_level: dict[int, dict[HateClass, int]] = {}
    all_nh = all_h = 0
    for vid, level in graph.levels.items():
        if level < 1:
            continue
        label = graph.labels.get(vid)
        if label not in _BINARY:
            continue
        bucket = per_level.setdefault(level, {HateClass.NON_HATEFUL: 0, HateClass.HATEFUL: 0})
        bucket[label] += 1
        if label is HateClass.HATEFUL:
            all_h += 1
        else:
            all_nh += 1
    rows = [
        LevelRow(
            level=level,
            non_hateful=per_level[level][HateClass.NON_HATEFUL],
            hateful=per_level[level][HateClass.HATEFUL],
        )
        for level in sorted(per_level)
    ]
    rows.append(LevelRow(level=None, non_hateful=all_nh, hateful=all_h))
    return rows


def transition_counts(graph: LabeledGraph) -> TransitionCounts:
    """Class-transition counts over every edge (duplicates included)."""
    counts = {key: 0 for key in ("nh_nh", "nh_h", "h_nh", "h_h")}
    excluded = 0
    for edge in graph.edges:
        src = graph.labels.get(edge.src_id)
        dst = graph.labels.get(edge.dst_id)
        if src not in _BINARY or dst not in _BINARY:
            excluded += 1
            continue
        key = ("h_" if src is HateClass.HATEFUL else "nh_") + (
            "h" if dst is HateClass.HATEFUL else "nh"
        )
        counts[key] += 1
    if sum(counts.values()) == 0:
        raise InsufficientDataError("no edges between labeled nodes")
    return TransitionCounts(excluded_edges=excluded, **counts)


def conditional_rates(counts: TransitionCounts) -> ConditionalRates:
    h_src = counts.h_h + counts.h_nh
    nh_src = counts.nh_h + counts.nh_nh
    total = counts.total
    return ConditionalRates(
        p_h_given_h=counts.h_h / h_src if h_src else None,
        p_h_given_nh=counts.nh_h / nh_src if nh_src else None,
        p_dst_h=(counts.h_h + counts.nh_h) / total if total else None,
    )


@dataclass(frozen=True)
class DegreeReport:
    """Per-node out-degree split by destination class, and in-degree ranking."""

    out_degree: dict[str, dict[str, int]]  # node -> {"to_h": n, "to_nh": n, "unlabeled": n}
    top_recommended: list[tuple[str, int]]  # (node, in-degree), most recommended first

    @property
    def total_out_degree(self) -> int:
        return sum(sum(d.values()) for d in self.out_degree.values())


def degree_report(graph: LabeledGraph, top_n: int = 10) -> DegreeReport:
    if not graph.edges and not graph.labels:
        raise InsufficientDataError("graph is empty")
    out: dict[str, dict[str, int]] = {}
    in_degree: dict[str, int] = {}
    for edge in graph.edges:
        bucket = out.setdefault(edge.src_id, {"to_h": 0, "to_nh": 0, "unlabeled": 0})
        dst = graph.labels.get(edge.dst_id)
        if dst is HateClass.HATEFUL:
            bucket["to_h"] += 1
        elif dst is HateClass.NON_HATEFUL:
            bucket["to_nh"] += 1
        else:
            bucket["unlabeled"] += 1
        in_degree[edge.dst_id] = in_degree.get(edge.dst_id, 0) + 1
    ranking = sorted(in_degree.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
    return DegreeReport(out_degree=out, top_recommended=ranking)


def format_level_table(rows: Iterable[LevelRow], label_source: str = "unspecified") -> str:
    lines = [
        f"Hateful and non-hateful distribution per recommendation level (labels: {label_source})",
        f"{'Level':<10} {'Non-hateful':>16} {'Hateful':>16}",
    ]
    for row in rows:
        name = "all levels" if row.level is None else f"Level {row.level}"
        nh_pct = 100.0 - row.hateful_pct if row.total else 0.0
        lines.append(
            f"{name:<10} {row.non_hateful:>8,} ({nh_pct:5.2f}%) {row.hateful:>8,} ({row.hateful_pct:5.2f}%)"
        )
    return "\n".join(lines)


def format_transition_table(counts: TransitionCounts, label_source: str = "unspecified") -> str:
    props = counts.proportions
    values = {"NH->NH": counts.nh_nh, "NH->H": counts.nh_h, "H->NH": counts.h_nh, "H->H": counts.h_h}
    lines = [
        f"Distribution of transitions between hateful (H) and non-hateful (NH) videos (labels: {label_source})",
        f"{'Transition':<12} {'Count':>12} {'%':>8}",
    ]
    for key in ("NH->NH", "NH->H", "H->NH", "H->H"):
        lines.append(f"{key:<12} {values[key]:>12,} {100 * props[key]:>7.2f}%")
    lines.append(f"{'total':<12} {counts.total:>12,}")
    if counts.excluded_edges:
        lines.append(f"(excluded {counts.excluded_edges:,} edges with unlabeled endpoints)")
    return "\n".join(lines)


def write_level_csv(path: str | Path, rows: Iterable[LevelRow]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "non_hateful", "hateful", "hateful_pct"])
        for row in rows:
            writer.writerow(
                ["all" if row.level is None else row.level, row.non_hateful, row.hateful, f"{row.hateful_pct:.2f}"]
            )


def write_transition_csv(path: str | Path, counts: TransitionCounts) -> None:
    props = counts.proportions
    values = {"NH->NH": counts.nh_nh, "NH->H": counts.nh_h, "H->NH": counts.h_nh, "H->H": counts.h_h}
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["transition", "count", "proportion"])
        for key in ("NH->NH", "NH->H", "H->NH", "H->H"):
            writer.writerow([key, values[key], f"{props[key]:.6f}"])


__all__ = [
    "ConditionalRates",
    "DegreeReport",
    "LabeledGraph",
    "LevelRow",
    "TransitionCounts",
    "conditional_rates",
    "degree_report",
    "format_level_table",
    "format_transition_table",
    "level_distribution",
    "transition_counts",
    "write_level_csv",
    "write_transition_csv",
]
