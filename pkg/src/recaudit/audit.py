"""Personalized audit protocol: profiles, watch plans, audits, and analysis.

Eight canonical profiles cross religious ideology (radical, moderate),
denomination (sunni, shia), and gender (female, male), all aged 26. A
nine-week randomized watch plan establishes each profile's history; the
search audit collects the top 10 results for five keywords per profile with
an enforced inter-query interval; the recommendation audit collects the top
10 recommendations for every search-audit video. The effects report runs
every personal-attribute comparison as a 2x2 chi-square with relative risk
and adjusts all p-values in the report jointly with Benjamini-Hochberg.

The paper's schedule arithmetic (36 sessions x 30 minutes) disagrees with
its stated 4.5 hours of history per profile; the credited total is therefore
configurable (default 4.5 hours) and spread evenly over sessions.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from recaudit.corpus import HateClass
from recaudit.errors import ConfigError, RecauditError
from recaudit.simulator import KeywordSpec
from recaudit.stats import (
    ContingencyTable,
    EffectSize,
    TestResult,
    bh_adjust,
    chi_square,
    group_table,
    relative_risk,
    table,
)

IDEOLOGIES = ("radical", "moderate")
DENOMINATIONS = ("sunni", "shia")
GENDERS = ("female", "male")
PROFILE_AGE = 26

DEFAULT_KEYWORDS = ("shia", "sunni", "jews", "christians", "atheists")
DEFAULT_MIN_INTERVAL_S = 11 * 60.0
TIME_SLOTS = ("morning", "afternoon", "evening")
_SLOT_HOURS = {"morning": 9, "afternoon": 14, "evening": 19}
_PLAN_EPOCH = datetime(2021, 1, 4, tzinfo=timezone.utc)  # a Monday

# Placeholder cleric rosters sized like the vetted lists (real names withheld).
DEFAULT_CLERICS: dict[tuple[str, str], tuple[str, ...]] = {
    ("sunni", "radical"): tuple(f"sunni_radical_cleric_{i:02d}" for i in range(1, 11)),
    ("sunni", "moderate"): tuple(f"sunni_moderate_cleric_{i:02d}" for i in range(1, 10)),
    ("shia", "radical"): tuple(f"shia_radical_cleric_{i:02d}" for i in range(1, 3)),
    ("shia", "moderate"): tuple(f"shia_moderate_cleric_{i:02d}" for i in range(1, 6)),
}


@dataclass(frozen=True)
class WatchEvent:
    video_id: str
    timestamp: datetime
    minutes: float


@dataclass
class Profile:
    """One sock-puppet account; the watch log grows as sessions execute."""

    id: str
    ideology: str
    denomination: str
    gender: str
    age: int = PROFILE_AGE
    session: object = None  # opaque login handle
    watch_log: list[WatchEvent] = field(default_factory=list)

    def __post_init__(self):
        if self.ideology not in IDEOLOGIES:
            raise ValueError(f"ideology must be one of {IDEOLOGIES}")
        if self.denomination not in DENOMINATIONS:
            raise ValueError(f"denomination must be one of {DENOMINATIONS}")
        if self.gender not in GENDERS:
            raise ValueError(f"gender must be one of {GENDERS}")

    @property
    def attributes(self) -> dict[str, str]:
        return {
            "ideology": self.ideology,
            "denomination": self.denomination,
            "gender": self.gender,
        }

    @property
    def watch_minutes(self) -> float:
        return sum(event.minutes for event in self.watch_log)


def canonical_profiles() -> list[Profile]:
    """The eight profiles covering the full attribute cross-product."""
    return [
        Profile(
            id=f"{ideology}_{denomination}_{gender}",
            ideology=ideology,
            denomination=denomination,
            gender=gender,
        )
        for ideology in IDEOLOGIES
        for denomination in DENOMINATIONS
        for gender in GENDERS
    ]


@dataclass(frozen=True)
class WatchPlanConfig:
    weeks: int = 9
    days_per_week: int = 4
    session_minutes: float = 30.0
    total_history_hours: float = 4.5
    clerics: Mapping[tuple[str, str], tuple[str, ...]] = field(
        default_factory=lambda: dict(DEFAULT_CLERICS)
    )

    def __post_init__(self):
        for denomination in DENOMINATIONS:
            for ideology in IDEOLOGIES:
                if not self.clerics.get((denomination, ideology)):
                    raise ConfigError(
                        f"missing cleric list for ({denomination}, {ideology})"
                    )

    @property
    def sessions_per_profile(self) -> int:
        return self.weeks * self.days_per_week

    @property
    def credited_minutes_per_session(self) -> float:
        return self.total_history_hours * 60.0 / self.sessions_per_profile


@dataclass(frozen=True)
class WatchSession:
    week: int  # 1-based
    day: int  # 0 = Monday .. 6 = Sunday
    slot: str
    pair_order: int  # position of this pair within the day
    denomination: str
    ideology: str
    cleric: str

    @property
    def scheduled_at(self) -> datetime:
        base = _PLAN_EPOCH + timedelta(days=(self.week - 1) * 7 + self.day)
        return base.replace(hour=_SLOT_HOURS[self.slot]) + timedelta(
            minutes=5 * self.pair_order
        )


@dataclass(frozen=True)
class WatchPlan:
    config: WatchPlanConfig
    seed: int
    sessions: tuple[WatchSession, ...]

    def sessions_for(self, profile: Profile) -> list[WatchSession]:
        return [
            s
            for s in self.sessions
            if s.denomination == profile.denomination and s.ideology == profile.ideology
        ]


def build_watch_plan(config: WatchPlanConfig, seed: int) -> WatchPlan:
    """Randomized but reproducible schedule: days of week, time slots,
    pair order within a day, and cleric-to-session assignment (every cleric
    of a pair's roster appears at least once when sessions allow)."""
    rng = random.Random(seed)
    pairs = [(d, i) for d in DENOMINATIONS for i in IDEOLOGIES]

    cleric_bags: dict[tuple[str, str], list[str]] = {}
    for pair in pairs:
        roster = list(config.clerics[pair])
        sessions = config.sessions_per_profile
        bag: list[str] = []
        while len(bag) < sessions:
            chunk = roster[:]
            rng.shuffle(chunk)
            bag.extend(chunk)
        cleric_bags[pair] = bag[:sessions]

    sessions: list[WatchSession] = []
    cursor = {pair: 0 for pair in pairs}
    for week in range(1, config.weeks + 1):
        days = sorted(rng.sample(range(7), config.days_per_week))
        for day in days:
            day_pairs = pairs[:]
            rng.shuffle(day_pairs)
            for order, (denomination, ideology) in enumerate(day_pairs):
                pair = (denomination, ideology)
                cleric = cleric_bags[pair][cursor[pair]]
                cursor[pair] += 1
                sessions.append(
                    WatchSession(
                        week=week,
                        day=day,
                        slot=rng.choice(TIME_SLOTS),
                        pair_order=order,
                        denomination=denomination,
                        ideology=ideology,
                        cleric=cleric,
                    )
                )
    return WatchPlan(config=config, seed=seed, sessions=tuple(sessions))


def execute_watch(plan: WatchPlan, platform, profiles: Sequence[Profile]) -> list[Profile]:
    """Run every session: search the assigned cleric as the profile and watch
    the highest-viewed of the top-relevance results. Platform errors are
    logged per session and the run continues."""
    failures: list[str] = []
    by_pair: dict[tuple[str, str], list[Profile]] = {}
    for profile in profiles:
        by_pair.setdefault((profile.denomination, profile.ideology), []).append(profile)

    for session in plan.sessions:
        for profile in by_pair.get((session.denomination, session.ideology), ()):
            view = platform.as_profile(profile)
            try:
                results = view.search(session.cleric, order="relevance", max_results=10)
                if not results:
                    continue
                records = view.metadata(results)
                watched = max(
                    (vid for vid in results if records.get(vid) is not None),
                    key=lambda vid: records[vid].view_count,
                    default=results[0],
                )
            except RecauditError as exc:
                failures.append(f"{profile.id} week {session.week}: {exc}")
                continue
            profile.watch_log.append(
                WatchEvent(
                    video_id=watched,
                    timestamp=session.scheduled_at,
                    minutes=plan.config.credited_minutes_per_session,
                )
            )
    if failures:
        import logging

        logging.getLogger(__name__).warning(
            "%d watch sessions failed (first: %s)", len(failures), failures[0]
        )
    return list(profiles)


@dataclass(frozen=True)
class AuditRecord:
    keyword: str
    rank: int
    video_id: str
    query_time_s: float  # seconds on the audit clock at query dispatch


@dataclass(frozen=True)
class AuditRun:
    profile_id: str
    phase: str  # "search" | "recommendation"
    records: tuple[AuditRecord, ...]
    shortfalls: int = 0


class VirtualClock:
    """Audit clock: sleeping advances virtual time instantly (simulator runs)
    while live runs can substitute a wall clock with real sleeps."""

    def __init__(self):
        self.now = 0.0

    def monotonic(self) -> float:
        return self.now

    def sleep(self, seconds: float) -> None:
        self.now += seconds


def _visitation_order(profiles: Sequence[Profile], keywords: Sequence[str], seed: int):
    pairs = [(p, kw) for p in profiles for kw in keywords]
    random.Random(seed).shuffle(pairs)
    return pairs


def search_audit(
    profiles: Sequence[Profile],
    platform,
    keywords: Sequence[str] = DEFAULT_KEYWORDS,
    top: int = 10,
    min_interval_s: float = DEFAULT_MIN_INTERVAL_S,
    seed: int = 0,
    clock: VirtualClock | None = None,
) -> list[AuditRun]:
    """Randomized (profile, keyword) queries with enforced spacing; top-N
    result ids per query. Short result pages are recorded as shortfalls."""
    clock = clock or VirtualClock()
    collected: dict[str, list[AuditRecord]] = {p.id: [] for p in profiles}
    shortfalls: dict[str, int] = {p.id: 0 for p in profiles}
    views = {p.id: platform.as_profile(p) for p in profiles}

    last_dispatch: float | None = None
    for profile, keyword in _visitation_order(profiles, keywords, seed):
        if last_dispatch is not None:
            elapsed = clock.monotonic() - last_dispatch
            if elapsed < min_interval_s:
                clock.sleep(min_interval_s - elapsed)
        dispatch_time = clock.monotonic()
        last_dispatch = dispatch_time
        try:
            ids = views[profile.id].search(keyword, order="relevance", max_results=top)
        except RecauditError:
            shortfalls[profile.id] += top
            continue
        shortfalls[profile.id] += max(0, top - len(ids))
        for rank, vid in enumerate(ids, start=1):
            collected[profile.id].append(
                AuditRecord(keyword=keyword, rank=rank, video_id=vid, query_time_s=dispatch_time)
            )
    return [
        AuditRun(
            profile_id=p.id,
            phase="search",
            records=tuple(collected[p.id]),
            shortfalls=shortfalls[p.id],
        )
        for p in profiles
    ]


def recommendation_audit(
    profiles: Sequence[Profile],
    platform,
    search_runs: Sequence[AuditRun],
    top: int = 10,
    min_interval_s: float = DEFAULT_MIN_INTERVAL_S,
    seed: int = 0,
    clock: VirtualClock | None = None,
) -> list[AuditRun]:
    """Top-N recommendations for every video each profile collected in its
    search audit, visited in randomized (profile, keyword) order."""
    clock = clock or VirtualClock()
    runs_by_profile = {run.profile_id: run for run in search_runs if run.phase == "search"}
    missing = [p.id for p in profiles if p.id not in runs_by_profile]
    if missing:
        raise ConfigError(f"profiles without a completed search audit: {missing}")

    keywords = list(dict.fromkeys(r.keyword for run in search_runs for r in run.records))
    collected: dict[str, list[AuditRecord]] = {p.id: [] for p in profiles}
    shortfalls: dict[str, int] = {p.id: 0 for p in profiles}
    views = {p.id: platform.as_profile(p) for p in profiles}
    profile_by_id = {p.id: p for p in profiles}

    order = [(pid, kw) for pid in profile_by_id for kw in keywords]
    random.Random(seed).shuffle(order)

    last_dispatch: float | None = None
    for profile_id, keyword in order:
        search_records = [r for r in runs_by_profile[profile_id].records if r.keyword == keyword]
        for record in search_records:
            if last_dispatch is not None:
                elapsed = clock.monotonic() - last_dispatch
                if elapsed < min_interval_s:
                    clock.sleep(min_interval_s - elapsed)
            dispatch_time = clock.monotonic()
            last_dispatch = dispatch_time
            try:
                ids = views[profile_id].related(record.video_id, top)
            except RecauditError:
                shortfalls[profile_id] += top
                continue
            shortfalls[profile_id] += max(0, top - len(ids))
            for rank, vid in enumerate(ids, start=1):
                collected[profile_id].append(
                    AuditRecord(
                        keyword=keyword, rank=rank, video_id=vid, query_time_s=dispatch_time
                    )
                )
    return [
        AuditRun(
            profile_id=p.id,
            phase="recommendation",
            records=tuple(collected[p.id]),
            shortfalls=shortfalls[p.id],
        )
        for p in profiles
    ]


def sim_keyword_table(
    plan_config: WatchPlanConfig,
    audit_keywords: Mapping[str, float],
    cleric_hate_rates: Mapping[tuple[str, str], float] | None = None,
) -> dict[str, KeywordSpec]:
    """Keyword table covering the audit keywords and every cleric name, so a
    synthetic platform can serve both the watch plan and the audits."""
    out = {kw: KeywordSpec(search_hate_rate=rate, topic=kw) for kw, rate in audit_keywords.items()}
    for (denomination, ideology), names in plan_config.clerics.items():
        rate = (cleric_hate_rates or {}).get((denomination, ideology), 0.2)
        for name in names:
            out[name] = KeywordSpec(search_hate_rate=rate, topic=denomination)
    return out


# -- effects analysis --


@dataclass(frozen=True)
class Comparison:
    name: str
    exposed_label: str
    control_label: str
    tab: ContingencyTable
    test: TestResult
    effect: EffectSize | None
    p_adjusted: float = float("nan")
    significant: bool = False


@dataclass(frozen=True)
class EffectsReport:
    comparisons: tuple[Comparison, ...]
    alpha: float

    @property
    def fdr_surviving(self) -> list[Comparison]:
        return [c for c in self.comparisons if c.significant]


def _counts(records: Iterable[AuditRecord], labels: Mapping[str, HateClass]) -> tuple[int, int]:
    nh = h = 0
    for record in records:
        if labels[record.video_id] is HateClass.HATEFUL:
            h += 1
        else:
            nh += 1
    return nh, h


def _check_labels(runs: Sequence[AuditRun], labels: Mapping[str, HateClass]) -> None:
    unlabeled = sorted(
        {r.video_id for run in runs for r in run.records if r.video_id not in labels}
    )
    if unlabeled:
        preview = ", ".join(unlabeled[:10])
        raise ConfigError(
            f"{len(unlabeled)} audited videos lack labels (first: {preview})"
        )


def _two_by_two(
    name: str,
    exposed_label: str,
    exposed: tuple[int, int],
    control_label: str,
    control: tuple[int, int],
) -> Comparison:
    tab = table(
        [list(control), list(exposed)],
        row_labels=(control_label, exposed_label),
        col_labels=("non_hateful", "hateful"),
    )
    test = chi_square(tab)
    effect = None
    exposed_nh, exposed_h = exposed
    control_nh, control_h = control
    try:
        effect = relative_risk(
            exposed_h, exposed_h + exposed_nh, control_h, control_h + control_nh
        )
    except (RecauditError, ValueError):
        effect = None  # zero event cell; left absent rather than corrected
    return Comparison(
        name=name,
        exposed_label=exposed_label,
        control_label=control_label,
        tab=tab,
        test=test,
        effect=effect,
    )


def effects_report(
    runs: Sequence[AuditRun],
    profiles: Sequence[Profile],
    labels: Mapping[str, HateClass],
    baseline_level1: tuple[int, int] = (6391, 1678),
    alpha: float = 0.05,
) -> EffectsReport:
    """Every personal-attribute comparison over the recommendation audit,
    the personalization comparison against the non-personalized level-1
    baseline, and per-phase keyword analyses (omnibus plus pairwise
    post-hoc); all p-values in the report are BH-adjusted as one family."""
    _check_labels(runs, labels)
    by_phase: dict[str, list[AuditRun]] = {"search": [], "recommendation": []}
    for run in runs:
        by_phase.setdefault(run.phase, []).append(run)
    rec_runs = by_phase["recommendation"]
    profile_by_id = {p.id: p for p in profiles}

    def records_where(**attrs) -> list[AuditRecord]:
        out = []
        for run in rec_runs:
            profile = profile_by_id[run.profile_id]
            if all(getattr(profile, key) == value for key, value in attrs.items()):
                out.extend(run.records)
        return out

    comparisons: list[Comparison] = []

    def add(name, exposed_label, exposed_records, control_label, control_records):
        if not exposed_records or not control_records:
            return
        comparisons.append(
            _two_by_two(
                name,
                exposed_label,
                _counts(exposed_records, labels),
                control_label,
                _counts(control_records, labels),
            )
        )

    if rec_runs:
        add(
            "ideology (all profiles)",
            "radical", records_where(ideology="radical"),
            "moderate", records_where(ideology="moderate"),
        )
        for denomination in DENOMINATIONS:
            add(
                f"ideology ({denomination} profiles)",
                f"radical {denomination}", records_where(ideology="radical", denomination=denomination),
                f"moderate {denomination}", records_where(ideology="moderate", denomination=denomination),
            )
        for ideology in IDEOLOGIES:
            add(
                f"denomination ({ideology} profiles)",
                f"{ideology} sunni", records_where(ideology=ideology, denomination="sunni"),
                f"{ideology} shia", records_where(ideology=ideology, denomination="shia"),
            )
        add(
            "gender (all profiles)",
            "male", records_where(gender="male"),
            "female", records_where(gender="female"),
        )
        for denomination in DENOMINATIONS:
            add(
                f"gender ({denomination} profiles)",
                f"{denomination} male", records_where(gender="male", denomination=denomination),
                f"{denomination} female", records_where(gender="female", denomination=denomination),
            )
        all_rec = [r for run in rec_runs for r in run.records]
        comparisons.append(
            _two_by_two(
                "personalization (recommendation audit vs level-1 baseline)",
                "personalized", _counts(all_rec, labels),
                "non-personalized", baseline_level1,
            )
        )

    # Keyword analyses per phase: omnibus over the keyword groups, then
    # pairwise post-hoc comparisons (adjusted within the same family).
    posthoc_parts: list[Comparison] = []
    for phase in ("recommendation", "search"):
        phase_runs = by_phase[phase]
        if not phase_runs:
            continue
        groups: dict[str, tuple[int, int]] = {}
        for keyword in sorted({r.keyword for run in phase_runs for r in run.records}):
            records = [r for run in phase_runs for r in run.records if r.keyword == keyword]
            groups[keyword] = _counts(records, labels)
        if len(groups) >= 2:
            tab = group_table(groups)
            comparisons.append(
                Comparison(
                    name=f"keyword omnibus ({phase} audit)",
                    exposed_label="all keywords",
                    control_label="",
                    tab=tab,
                    test=chi_square(tab),
                    effect=None,
                )
            )
            for (kw_a, kw_b) in _pairs(sorted(groups)):
                posthoc_parts.append(
                    _two_by_two(
                        f"keyword post-hoc ({phase}): {kw_a} vs {kw_b}",
                        kw_a, groups[kw_a],
                        kw_b, groups[kw_b],
                    )
                )
    comparisons.extend(posthoc_parts)

    adjusted = bh_adjust([c.test.p for c in comparisons])
    final = tuple(
        replace(c, p_adjusted=float(adj), significant=bool(adj < alpha))
        for c, adj in zip(comparisons, adjusted)
    )
    return EffectsReport(comparisons=final, alpha=alpha)


def _pairs(items: Sequence[str]):
    for i, a in enumerate(items):
        for b in items[i + 1 :]:
            yield a, b


def format_effects_report(report: EffectsReport) -> str:
    lines = [
        f"{'Comparison':<58} {'chi2':>8} {'df':>3} {'p(adj)':>9} {'RR':>6} {'95% CI':>14} {'FDR':>4}"
    ]
    for c in report.comparisons:
        rr = f"{c.effect.rr:.2f}" if c.effect else "-"
        ci = f"[{c.effect.ci_low:.2f}, {c.effect.ci_high:.2f}]" if c.effect else "-"
        flag = "*" if c.significant else ""
        lines.append(
            f"{c.name:<58} {c.test.chi2:>8.2f} {c.test.df:>3} {c.p_adjusted:>9.3g} {rr:>6} {ci:>14} {flag:>4}"
        )
    lines.append(f"(p-values are FDR-adjusted; * marks adjusted p < {report.alpha})")
    return "\n".join(lines)


def write_effects_csv(path: str | Path, report: EffectsReport) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["comparison", "exposed", "control", "chi2", "df", "p_raw", "p_adjusted", "rr", "ci_low", "ci_high", "significant"]
        )
        for c in report.comparisons:
            writer.writerow(
                [
                    c.name, c.exposed_label, c.control_label,
                    f"{c.test.chi2:.6g}", c.test.df, f"{c.test.p:.6g}", f"{c.p_adjusted:.6g}",
                    f"{c.effect.rr:.6g}" if c.effect else "",
                    f"{c.effect.ci_low:.6g}" if c.effect else "",
                    f"{c.effect.ci_high:.6g}" if c.effect else "",
                    int(c.significant),
                ]
            )


# -- availability re-check --


@dataclass(frozen=True)
class AvailabilityReport:
    removed: dict[str, int]
    available: dict[str, int]
    unknown: dict[str, int]
    test: TestResult | None  # absent when the table is degenerate

    def removal_pct(self, cls: str) -> float:
        known = self.removed[cls] + self.available[cls]
        return 100.0 * self.removed[cls] / known if known else 0.0


def availability_audit(
    video_ids: Sequence[str],
    labels: Mapping[str, HateClass],
    client,
    batch: int = 200,
) -> AvailabilityReport:
    """Re-check which videos remain available; removal rates per class plus a
    2x2 chi-square. Per-id client failures count as unknown and are excluded
    from the table."""
    removed = {"hateful": 0, "non_hateful": 0}
    available = {"hateful": 0, "non_hateful": 0}
    unknown = {"hateful": 0, "non_hateful": 0}

    def cls_of(vid: str) -> str:
        return "hateful" if labels[vid] is HateClass.HATEFUL else "non_hateful"

    for start in range(0, len(video_ids), batch):
        chunk = list(video_ids[start : start + batch])
        try:
            result = client.metadata(chunk)
        except RecauditError:
            for vid in chunk:  # isolate the failing ids
                try:
                    result = client.metadata([vid])
                except RecauditError:
                    unknown[cls_of(vid)] += 1
                    continue
                if result.get(vid) is None:
                    removed[cls_of(vid)] += 1
                else:
                    available[cls_of(vid)] += 1
            continue
        for vid in chunk:
            if result.get(vid) is None:
                removed[cls_of(vid)] += 1
            else:
                available[cls_of(vid)] += 1

    counts = [
        [removed["hateful"], available["hateful"]],
        [removed["non_hateful"], available["non_hateful"]],
    ]
    test: TestResult | None = None
    try:
        test = chi_square(
            table(counts, row_labels=("hateful", "non_hateful"), col_labels=("removed", "available"))
        )
    except (RecauditError, ValueError):
        test = None  # degenerate table (e.g. nothing removed) is flagged as absent
    return AvailabilityReport(removed=removed, available=available, unknown=unknown, test=test)


# -- run persistence (schema in docs/formats.md) --


def save_runs(path: str | Path, runs: Sequence[AuditRun]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for run in runs:
            fh.write(
                json.dumps(
                    {
                        "profile_id": run.profile_id,
                        "phase": run.phase,
                        "shortfalls": run.shortfalls,
                        "records": [
                            {
                                "keyword": r.keyword,
                                "rank": r.rank,
                                "video_id": r.video_id,
                                "query_time_s": r.query_time_s,
                            }
                            for r in run.records
                        ],
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_runs(path: str | Path) -> list[AuditRun]:
    runs = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            runs.append(
                AuditRun(
                    profile_id=d["profile_id"],
                    phase=d["phase"],
                    shortfalls=d.get("shortfalls", 0),
                    records=tuple(
                        AuditRecord(
                            keyword=r["keyword"],
                            rank=r["rank"],
                            video_id=r["video_id"],
                            query_time_s=r["query_time_s"],
                        )
                        for r in d["records"]
                    ),
                )
            )
    return runs


__all__ = [
    "AuditRecord",
    "AuditRun",
    "AvailabilityReport",
    "Comparison",
    "DEFAULT_CLERICS",
    "DEFAULT_KEYWORDS",
    "EffectsReport",
    "Profile",
    "VirtualClock",
    "WatchEvent",
    "WatchPlan",
    "WatchPlanConfig",
    "WatchSession",
    "availability_audit",
    "build_watch_plan",
    "canonical_profiles",
    "effects_report",
    "execute_watch",
    "format_effects_report",
    "load_runs",
    "recommendation_audit",
    "save_runs",
    "search_audit",
    "sim_keyword_table",
    "write_effects_csv",
]
