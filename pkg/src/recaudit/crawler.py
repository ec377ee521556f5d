"""Keyword seed harvesting and breadth-first recommendation traversal.

The crawl follows the collection protocol: up to 50 relevance-ordered
results per keyword (deduplicated globally), then a top-k cascade across
recommendation levels. A video discovered at an earlier level is never
re-expanded, but every (src, dst, level, rank) edge is recorded, including
edges into already-seen videos, so transition statistics stay faithful.
Per-level checkpoints make an interrupted crawl resumable; on a
deterministic client the resumed result is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

from recaudit import corpus
from recaudit.corpus import RecEdge, VideoRecord
from recaudit.errors import (
    CorruptCheckpointError,
    CrawlError,
    NotFoundError,
    RecauditError,
)

MANIFEST_NAME = "crawl_manifest.json"


@dataclass(frozen=True)
class CrawlConfig:
    keywords: tuple[str, ...]
    per_keyword_max: int = 50
    k: int = 4
    depth: int = 5
    order: str = "relevance"
    fetch_comments: bool = True

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.per_keyword_max < 1:
            raise ValueError("per_keyword_max must be >= 1")


@dataclass(frozen=True)
class SeedCollection:
    per_keyword: Mapping[str, tuple[str, ...]]
    seed_ids: tuple[str, ...]  # global first-seen dedup order
    records: Mapping[str, VideoRecord]
    failures: tuple[tuple[str, str], ...]  # (keyword or id, message)


@dataclass(frozen=True)
class CrawlResult:
    seed_ids: tuple[str, ...]
    levels: tuple[tuple[str, ...], ...]  # newly discovered ids per level, discovery order
    edges: tuple[RecEdge, ...]
    failures: tuple[tuple[str, str], ...]
    shortfalls: int  # sum over expanded nodes of (k - returned related count)

    @property
    def level_counts(self) -> list[int]:
        return [len(level) for level in self.levels]

    @property
    def unique_overall(self) -> int:
        return sum(len(level) for level in self.levels)

    def level_sets_disjoint(self) -> bool:
        seen: set[str] = set(self.seed_ids)
        for level in self.levels:
            ids = set(level)
            if ids & seen or len(ids) != len(level):
                return False
            seen |= ids
        return True


def collect_seeds(client, config: CrawlConfig) -> SeedCollection:
    """Harvest per-keyword search results plus metadata and comments."""
    if not config.keywords:
        raise CrawlError("no keywords configured")
    per_keyword: dict[str, tuple[str, ...]] = {}
    failures: list[tuple[str, str]] = []
    ordered_unique: list[str] = []
    seen: set[str] = set()
    for keyword in config.keywords:
        try:
            ids = client.search(keyword, order=config.order, max_results=config.per_keyword_max)
        except RecauditError as exc:
            failures.append((keyword, f"search failed: {exc}"))
            continue
        per_keyword[keyword] = tuple(ids)
        for vid in ids:
            if vid not in seen:
                seen.add(vid)
                ordered_unique.append(vid)
    if not per_keyword:
        raise CrawlError("every keyword search failed")

    records: dict[str, VideoRecord] = {}
    fetched = client.metadata(ordered_unique)
    for vid in ordered_unique:
        record = fetched.get(vid)
        if record is None:
            failures.append((vid, "metadata unavailable"))
            continue
        if config.fetch_comments and not record.comments:
            try:
                record = replace(record, comments=tuple(client.comments(vid, 100)))
            except NotFoundError:
                pass  # comments disabled or gone; keep the bare record
            except RecauditError as exc:
                failures.append((vid, f"comments failed: {exc}"))
        records[vid] = record
    return SeedCollection(
        per_keyword=per_keyword,
        seed_ids=tuple(ordered_unique),
        records=records,
        failures=tuple(failures),
    )


class CrawlCheckpoint:
    """Per-level crawl state on disk.

    Layout: ``levels/level_NN.json`` (newly discovered ids, discovery order),
    ``edges/level_NN.jsonl``, ``seeds.json``, and a manifest with counts.
    Files carry no timestamps, so equal crawls are byte-identical.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "levels").mkdir(parents=True, exist_ok=True)
        (self.root / "edges").mkdir(parents=True, exist_ok=True)

    def manifest_path(self) -> Path:
        return self.root / MANIFEST_NAME

    def write_seeds(self, seeds: Sequence[str], k: int, depth: int) -> None:
        (self.root / "seeds.json").write_text(
            json.dumps({"seed_ids": list(seeds), "k": k, "depth": depth}, indent=1),
            encoding="utf-8",
        )

    def read_seeds(self) -> tuple[list[str], int, int]:
        path = self.root / "seeds.json"
        if not path.exists():
            raise CorruptCheckpointError(
                f"{path} missing; this directory is not a crawl checkpoint"
            )
        data = json.loads(path.read_text(encoding="utf-8"))
        return data["seed_ids"], data["k"], data["depth"]

    def write_level(
        self,
        level: int,
        new_ids: Sequence[str],
        edges: Sequence[RecEdge],
        failures: Sequence[tuple[str, str]],
        shortfalls: int,
    ) -> None:
        (self.root / "levels" / f"level_{level:02d}.json").write_text(
            json.dumps(list(new_ids), indent=1), encoding="utf-8"
        )
        corpus.save_edges(self.root / "edges" / f"level_{level:02d}.jsonl", edges)
        manifest = self._read_manifest() or {
            "completed_levels": 0,
            "edge_counts": {},
            "level_counts": {},
            "failures": [],
            "shortfalls": 0,
            "finished": False,
        }
        manifest["completed_levels"] = level
        manifest["edge_counts"][str(level)] = len(edges)
        manifest["level_counts"][str(level)] = len(new_ids)
        manifest["failures"].extend(list(f) for f in failures)
        manifest["shortfalls"] += shortfalls
        self.manifest_path().write_text(json.dumps(manifest, indent=1), encoding="utf-8")

    def mark_finished(self) -> None:
        manifest = self._read_manifest()
        manifest["finished"] = True
        self.manifest_path().write_text(json.dumps(manifest, indent=1), encoding="utf-8")

    def _read_manifest(self) -> dict | None:
        path = self.manifest_path()
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorruptCheckpointError(
                f"{path} is not valid JSON ({exc.msg}); delete the manifest and level "
                f"files for the incomplete level, or restart the crawl in a fresh directory"
            ) from exc

    def load_progress(self) -> tuple[dict, list[list[str]], list[list[RecEdge]]]:
        """Manifest plus per-level ids and edges for completed levels,
        validating counts; corruption raises with recovery instructions."""
        manifest = self._read_manifest()
        if manifest is None:
            return {
                "completed_levels": 0,
                "edge_counts": {},
                "level_counts": {},
                "failures": [],
                "shortfalls": 0,
                "finished": False,
            }, [], []
        levels: list[list[str]] = []
        edges: list[list[RecEdge]] = []
        for level in range(1, manifest["completed_levels"] + 1):
            level_path = self.root / "levels" / f"level_{level:02d}.json"
            edges_path = self.root / "edges" / f"level_{level:02d}.jsonl"
            try:
                ids = json.loads(level_path.read_text(encoding="utf-8"))
                level_edges = corpus.load_edges(edges_path)
            except (OSError, json.JSONDecodeError, RecauditError) as exc:
                raise CorruptCheckpointError(
                    f"checkpoint level {level} unreadable ({exc}); delete "
                    f"{level_path.name} and {edges_path.name}, set completed_levels "
                    f"to {level - 1} in {MANIFEST_NAME}, then resume"
                ) from exc
            if len(ids) != manifest["level_counts"].get(str(level)) or len(level_edges) != manifest[
                "edge_counts"
            ].get(str(level)):
                raise CorruptCheckpointError(
                    f"checkpoint level {level} counts disagree with the manifest "
                    f"(truncated write?); delete its files and resume, or restart"
                )
            levels.append(ids)
            edges.append(level_edges)
        return manifest, levels, edges


def bfs_crawl(
    client,
    seeds: Sequence[str],
    k: int,
    depth: int,
    checkpoint_dir: str | Path | None = None,
) -> CrawlResult:
    """Breadth-first top-k recommendation crawl from the seed set.

    Level N's frontier is every id first seen among the top-k related videos
    of level N-1 nodes. Nodes whose related() call fails are recorded as
    unexpanded and the crawl continues.
    """
    if not seeds:
        raise CrawlError("empty seed set")
    checkpoint = CrawlCheckpoint(checkpoint_dir) if checkpoint_dir else None
    if checkpoint:
        checkpoint.write_seeds(seeds, k, depth)

    seen: set[str] = set(seeds)
    frontier: list[str] = list(dict.fromkeys(seeds))
    all_levels: list[tuple[str, ...]] = []
    all_edges: list[RecEdge] = []
    failures: list[tuple[str, str]] = []
    shortfalls = 0
    start_level = 1

    if checkpoint:
        manifest, done_levels, done_edges = checkpoint.load_progress()
        for ids, level_edges in zip(done_levels, done_edges):
            all_levels.append(tuple(ids))
            all_edges.extend(level_edges)
            seen |= set(ids)
            frontier = list(ids)
        failures.extend(tuple(f) for f in manifest["failures"])
        shortfalls = manifest["shortfalls"]
        start_level = manifest["completed_levels"] + 1

    for level in range(start_level, depth + 1):
        new_ids: list[str] = []
        level_edges: list[RecEdge] = []
        level_failures: list[tuple[str, str]] = []
        level_shortfall = 0
        for src in frontier:
            try:
                related = client.related(src, k)
            except RecauditError as exc:
                level_failures.append((src, f"related failed at level {level}: {exc}"))
                continue
            level_shortfall += max(0, k - len(related))
            for rank, dst in enumerate(related, start=1):
                level_edges.append(RecEdge(src_id=src, dst_id=dst, level=level, rank=rank))
                if dst not in seen:
                    seen.add(dst)
                    new_ids.append(dst)
        if checkpoint:
            checkpoint.write_level(level, new_ids, level_edges, level_failures, level_shortfall)
        all_levels.append(tuple(new_ids))
        all_edges.extend(level_edges)
        failures.extend(level_failures)
        shortfalls += level_shortfall
        frontier = new_ids

    if checkpoint:
        checkpoint.mark_finished()
    return CrawlResult(
        seed_ids=tuple(dict.fromkeys(seeds)),
        levels=tuple(all_levels),
        edges=tuple(all_edges),
        failures=tuple(failures),
        shortfalls=shortfalls,
    )


def resume(crawl_dir: str | Path, client) -> CrawlResult:
    """Continue an interrupted crawl from its checkpoint directory.

    Completed levels are loaded, not refetched; on a deterministic client the
    final result equals an uninterrupted run. Resuming a finished crawl is a
    no-op that returns the stored result.
    """
    checkpoint = CrawlCheckpoint(crawl_dir)
    seeds, k, depth = checkpoint.read_seeds()
    return bfs_crawl(client, seeds, k, depth, checkpoint_dir=crawl_dir)


def discovered_levels(result: CrawlResult) -> dict[str, int]:
    """id -> discovery level map (seeds are level 0) for graph analytics."""
    levels = {vid: 0 for vid in result.seed_ids}
    for level_index, ids in enumerate(result.levels, start=1):
        for vid in ids:
            levels[vid] = level_index
    return levels


__all__ = [
    "CrawlCheckpoint",
    "CrawlConfig",
    "CrawlResult",
    "SeedCollection",
    "bfs_crawl",
    "collect_seeds",
    "discovered_levels",
    "resume",
]
