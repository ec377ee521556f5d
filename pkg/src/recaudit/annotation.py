"""Crowd-annotation quality control and label resolution.

Workers qualify through a five-question quiz (>= 4 correct) and must keep an
80% accuracy on hidden test questions and spend at least five minutes per
page of work. Answer confidences are accuracy-weighted agreement proportions;
the resolved class is the argmax with ties broken toward Hateful to maximize
recall of harmful content. Targeted religions are resolved from the second
question among workers who judged the video hateful, at a 0.3 confidence
threshold.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from recaudit.corpus import HateClass, ReligionTarget
from recaudit.errors import (
    DuplicateKeyError,
    InsufficientDataError,
    ParseError,
    ProtocolError,
    UnresolvableError,
)

QUIZ_QUESTIONS = 5
QUIZ_PASS_CORRECT = 4
ACCURACY_FLOOR = 0.8
MIN_PAGE_MINUTES = 5.0
TARGET_CONFIDENCE_THRESHOLD = 0.3

# Fixed tie-break priority: maximize recall of harmful content.
_CLASS_PRIORITY = (HateClass.HATEFUL, HateClass.NON_HATEFUL, HateClass.UNRELATED)


@dataclass(frozen=True)
class Judgment:
    """One worker's answers for one video."""

    worker_id: str
    video_id: str
    q1: HateClass
    q2_targets: frozenset[ReligionTarget] = frozenset()
    page_minutes: float = MIN_PAGE_MINUTES

    def __post_init__(self):
        if self.q1 is not HateClass.HATEFUL and self.q2_targets:
            raise ValueError("q2_targets must be empty unless q1 is hateful")
        if self.page_minutes <= 0:
            raise ValueError("page_minutes must be positive")


@dataclass(frozen=True)
class WorkerState:
    worker_id: str
    test_correct: int
    test_total: int
    qualified: bool

    @property
    def accuracy(self) -> float:
        return self.test_correct / self.test_total if self.test_total else 0.0


@dataclass(frozen=True)
class ResolvedLabel:
    """Final label for a video: class, its confidence, and targeted religions.

    ``targets`` maps each included religion to its confidence; every included
    target passed the 0.3 threshold.
    """

    video_id: str
    hate_class: HateClass
    class_confidence: float
    targets: Mapping[ReligionTarget, float]

    def __post_init__(self):
        if not (0.0 < self.class_confidence <= 1.0):
            raise ValueError("class_confidence must be in (0, 1]")
        for target, conf in self.targets.items():
            if conf < TARGET_CONFIDENCE_THRESHOLD:
                raise ValueError(f"target {target.value} below confidence threshold")


def qualify_worker(worker_id: str, initial_answers: Sequence[tuple[HateClass, HateClass]]) -> WorkerState:
    """Evaluate the five-question qualification quiz."""
    if len(initial_answers) != QUIZ_QUESTIONS:
        raise ProtocolError(f"qualification quiz has exactly {QUIZ_QUESTIONS} questions, got {len(initial_answers)}")
    correct = sum(1 for given, expected in initial_answers if given == expected)
    return WorkerState(
        worker_id=worker_id,
        test_correct=correct,
        test_total=QUIZ_QUESTIONS,
        qualified=correct >= QUIZ_PASS_CORRECT,
    )


def update_worker(state: WorkerState, hidden_test_correct: bool, page_minutes: float) -> WorkerState:
    """Fold one hidden-test outcome and page time into the worker's state.

    Disqualification is a state, not an error: the worker drops out once
    accuracy falls below 80% or a page of work took under five minutes.
    """
    if not state.qualified:
        raise ProtocolError(f"worker {state.worker_id} is not qualified")
    correct = state.test_correct + (1 if hidden_test_correct else 0)
    total = state.test_total + 1
    still_qualified = (correct / total) >= ACCURACY_FLOOR and page_minutes >= MIN_PAGE_MINUTES
    return WorkerState(
        worker_id=state.worker_id,
        test_correct=correct,
        test_total=total,
        qualified=still_qualified,
    )


def _qualified_judgments(
    judgments: Iterable[Judgment], workers: Mapping[str, WorkerState]
) -> list[tuple[Judgment, WorkerState]]:
    kept: list[tuple[Judgment, WorkerState]] = []
    seen: set[str] = set()
    for judgment in judgments:
        state = workers.get(judgment.worker_id)
        if state is None or not state.qualified:
            continue
        if judgment.worker_id in seen:
            raise ProtocolError(f"worker {judgment.worker_id} judged the video more than once")
        seen.add(judgment.worker_id)
        kept.append((judgment, state))
    # Canonical summation order keeps results bit-identical under any
    # permutation of the input judgments.
    kept.sort(key=lambda pair: pair[0].worker_id)
    return kept


def answer_confidences(
    judgments: Sequence[Judgment], workers: Mapping[str, WorkerState]
) -> dict[HateClass, float]:
    """Accuracy-weighted agreement proportion for each chosen answer.

    confidence(a) = sum of accuracies of qualified workers who chose a,
    divided by the total accuracy of all qualified judges; the values sum
    to 1. Judgments from disqualified workers are ignored.
    """
    kept = _qualified_judgments(judgments, workers)
    if not kept:
        raise UnresolvableError("no judgments from qualified workers")
    total = sum(state.accuracy for _, state in kept)
    if total <= 0:
        raise UnresolvableError("qualified judges have zero total accuracy")
    sums: dict[HateClass, float] = {}
    for judgment, state in kept:
        sums[judgment.q1] = sums.get(judgment.q1, 0.0) + state.accuracy
    return {answer: weight / total for answer, weight in sums.items()}


def resolve_label(
    judgments: Sequence[Judgment], workers: Mapping[str, WorkerState]
) -> ResolvedLabel:
    """Resolve the class (argmax confidence, Hateful-first ties) and targets."""
    confidences = answer_confidences(judgments, workers)
    hate_class = max(
        confidences,
        key=lambda c: (confidences[c], -_CLASS_PRIORITY.index(c)),
    )

    targets: dict[ReligionTarget, float] = {}
    kept = _qualified_judgments(judgments, workers)
    hateful_judges = [(j, s) for j, s in kept if j.q1 is HateClass.HATEFUL]
    denom = sum(state.accuracy for _, state in hateful_judges)
    if denom > 0:
        target_sums: dict[ReligionTarget, float] = {}
        for judgment, state in hateful_judges:
            for target in judgment.q2_targets:
                target_sums[target] = target_sums.get(target, 0.0) + state.accuracy
        targets = {
            target: weight / denom
            for target, weight in target_sums.items()
            if weight / denom >= TARGET_CONFIDENCE_THRESHOLD
        }

    video_ids = {j.video_id for j in judgments}
    if len(video_ids) != 1:
        raise ProtocolError(f"judgments span multiple videos: {sorted(video_ids)}")
    return ResolvedLabel(
        video_id=video_ids.pop(),
        hate_class=hate_class,
        class_confidence=confidences[hate_class],
        targets=targets,
    )


@dataclass(frozen=True)
class AgreementReport:
    mean_q1_confidence: float
    mean_target_confidence: float | None
    class_counts: Mapping[HateClass, int]

    @property
    def class_percentages(self) -> dict[HateClass, float]:
        total = sum(self.class_counts.values())
        return {c: 100.0 * n / total for c, n in self.class_counts.items()}


def agreement_report(resolved: Sequence[ResolvedLabel]) -> AgreementReport:
    """Corpus-level agreement summary over resolved labels."""
    if not resolved:
        raise InsufficientDataError("no resolved labels")
    counts = {c: 0 for c in HateClass}
    target_confidences: list[float] = []
    for label in resolved:
        counts[label.hate_class] += 1
        target_confidences.extend(label.targets.values())
    return AgreementReport(
        mean_q1_confidence=sum(l.class_confidence for l in resolved) / len(resolved),
        mean_target_confidence=(
            sum(target_confidences) / len(target_confidences) if target_confidences else None
        ),
        class_counts=counts,
    )


# -- Judgment-file ingestion --

JUDGMENT_COLUMNS = (
    "worker_id",
    "video_id",
    "q1",
    "q2_targets",
    "page_minutes",
    "is_test",
    "expected_answer",
)


@dataclass(frozen=True)
class JudgmentRow:
    """One parsed line of a judgment file; test rows carry the expected answer."""

    judgment: Judgment
    is_test: bool
    expected_answer: HateClass | None


def load_judgment_rows(path: str | Path) -> list[JudgmentRow]:
    rows: list[JudgmentRow] = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(JUDGMENT_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ParseError(str(path), 1, f"missing columns: {sorted(missing)}")
        for line_no, row in enumerate(reader, start=2):
            try:
                q1 = HateClass(row["q1"])
                targets = frozenset(
                    ReligionTarget(t) for t in row["q2_targets"].split(";") if t
                )
                judgment = Judgment(
                    worker_id=row["worker_id"],
                    video_id=row["video_id"],
                    q1=q1,
                    q2_targets=targets,
                    page_minutes=float(row["page_minutes"]),
                )
                is_test = row["is_test"].strip().lower() in ("1", "true", "yes")
                expected = HateClass(row["expected_answer"]) if row["expected_answer"] else None
            except (KeyError, ValueError) as exc:
                raise ParseError(str(path), line_no, f"invalid judgment row: {exc}") from exc
            rows.append(JudgmentRow(judgment=judgment, is_test=is_test, expected_answer=expected))
    return rows


def resolve_judgment_file(
    path: str | Path, workers: Mapping[str, WorkerState]
) -> tuple[list[ResolvedLabel], dict[str, WorkerState]]:
    """Resolve every video in a judgment file.

    Test rows update worker states first (in file order), then non-test
    judgments are resolved per video with the final states. Returns the
    resolved labels and the updated worker states.
    """
    rows = load_judgment_rows(path)
    states = dict(workers)
    for row in rows:
        if not row.is_test:
            continue
        state = states.get(row.judgment.worker_id)
        if state is None or not state.qualified:
            continue
        states[row.judgment.worker_id] = update_worker(
            state,
            hidden_test_correct=row.judgment.q1 == row.expected_answer,
            page_minutes=row.judgment.page_minutes,
        )

    by_video: dict[str, list[Judgment]] = {}
    for row in rows:
        if row.is_test:
            continue
        by_video.setdefault(row.judgment.video_id, []).append(row.judgment)

    resolved = []
    for video_id in sorted(by_video):
        try:
            resolved.append(resolve_label(by_video[video_id], states))
        except UnresolvableError:
            continue
    return resolved, states


# -- Label persistence (schema shared with docs/formats.md) --


def save_labels(path: str | Path, labels: Iterable[ResolvedLabel]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for label in labels:
            fh.write(
                json.dumps(
                    {
                        "video_id": label.video_id,
                        "hate_class": label.hate_class.value,
                        "targets": {t.value: c for t, c in sorted(label.targets.items())},
                        "confidence": label.class_confidence,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
            )
            fh.write("\n")


def load_labels(path: str | Path) -> list[ResolvedLabel]:
    labels: list[ResolvedLabel] = []
    seen: set[str] = set()
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                label = ResolvedLabel(
                    video_id=d["video_id"],
                    hate_class=HateClass(d["hate_class"]),
                    class_confidence=float(d["confidence"]),
                    targets={ReligionTarget(t): float(c) for t, c in d.get("targets", {}).items()},
                )
            except (KeyError, ValueError, json.JSONDecodeError) as exc:
                raise ParseError(str(path), line_no, f"invalid label: {exc}") from exc
            if label.video_id in seen:
                raise DuplicateKeyError(f"{path}:{line_no}: duplicate video_id {label.video_id!r}")
            seen.add(label.video_id)
            labels.append(label)
    return labels


__all__ = [
    "AgreementReport",
    "Judgment",
    "JudgmentRow",
    "ResolvedLabel",
    "WorkerState",
    "agreement_report",
    "answer_confidences",
    "load_judgment_rows",
    "load_labels",
    "qualify_worker",
    "resolve_judgment_file",
    "resolve_label",
    "save_labels",
    "update_worker",
]
