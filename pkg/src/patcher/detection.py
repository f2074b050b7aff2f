"""Neglect detection: which prompt objects are missing from the image.

An object whose image/text similarity falls strictly below the threshold
counts as neglected; scores equal to the threshold count as correct, so
raising the threshold can only grow the neglected set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .attention import object_attention
from .backends.base import ScorerCapability
from .domain import GenerationRecord, ObjectEntity, ObjectStatus, Prompt
from .errors import SingleClassInput
from .extraction import head_token_indices
from .lexicon import Lexicon

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class NeglectReport:
    prompt_id: str
    entries: tuple[tuple[ObjectEntity, float], ...]
    threshold: float
    neglected: tuple[ObjectEntity, ...]
    correct: tuple[ObjectEntity, ...]
    # mean attention per entry, aligned with entries; None when unmeasured
    attention_scores: tuple[float, ...] | None = None

    def is_clean(self) -> bool:
        return not self.neglected

    def similarity_of(self, entity: ObjectEntity) -> float:
        for candidate, score in self.entries:
            if candidate.span == entity.span:
                return score
        raise KeyError(f"no entry for span {entity.span}")

    def attention_of(self, entity: ObjectEntity) -> float | None:
        if self.attention_scores is None:
            return None
        for (candidate, _), score in zip(self.entries, self.attention_scores):
            if candidate.span == entity.span:
                return score
        raise KeyError(f"no entry for span {entity.span}")


def identify_neglected(
    p: Prompt,
    objects: Sequence[ObjectEntity],
    record: GenerationRecord,
    scorer: ScorerCapability,
    threshold: float = DEFAULT_THRESHOLD,
    lexicon: Lexicon | None = None,
) -> NeglectReport:
    """Score every object against the generated image and split the set."""
    entries: list[tuple[ObjectEntity, float]] = []
    attention: list[float] = []
    neglected: list[ObjectEntity] = []
    correct: list[ObjectEntity] = []
    for obj in objects:
        score = float(scorer.similarity(record.image_ref, obj.phrase))
        score = min(1.0, max(0.0, score))
        if score < threshold:
            marked = obj.with_status(ObjectStatus.NEGLECTED)
            neglected.append(marked)
        else:
            marked = obj.with_status(ObjectStatus.CORRECT)
            correct.append(marked)
        entries.append((marked, score))
        attention.append(object_attention(record.taps, head_token_indices(obj, p, lexicon)))
    return NeglectReport(
        prompt_id=p.id,
        entries=tuple(entries),
        threshold=threshold,
        neglected=tuple(neglected),
        correct=tuple(correct),
        attention_scores=tuple(attention),
    )


@dataclass(frozen=True)
class CalibrationResult:
    threshold: float
    balanced_accuracy: float
    low_confidence: bool


# below this balanced accuracy a calibrated threshold is not trustworthy
_CONFIDENCE_FLOOR = 0.75


def calibrate_threshold(labeled: Sequence[tuple[float, bool]]) -> CalibrationResult:
    """Pick the similarity threshold that best separates present from absent.

    Candidates are midpoints between adjacent distinct scores; the winner
    maximizes balanced accuracy, with ties broken toward the larger
    threshold. Needs at least one example of each class.
    """
    if not labeled:
        raise SingleClassInput("calibration needs labeled examples")
    present = sorted(score for score, is_present in labeled if is_present)
    absent = sorted(score for score, is_present in labeled if not is_present)
    if not present or not absent:
        raise SingleClassInput("calibration needs both present and absent examples")

    distinct = sorted({score for score, _ in labeled})
    candidates = [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]
    if not candidates:
        candidates = [distinct[0]]

    def balanced_accuracy(threshold: float) -> float:
        tpr = sum(1 for s in present if s >= threshold) / len(present)
        tnr = sum(1 for s in absent if s < threshold) / len(absent)
        return (tpr + tnr) / 2.0

    best_threshold = candidates[0]
    best_score = balanced_accuracy(best_threshold)
    for t in candidates[1:]:
        score = balanced_accuracy(t)
        if score > best_score or (score == best_score and t > best_threshold):
            best_threshold = t
            best_score = score
    return CalibrationResult(
        threshold=best_threshold,
        balanced_accuracy=best_score,
        low_confidence=best_score < _CONFIDENCE_FLOOR,
    )
