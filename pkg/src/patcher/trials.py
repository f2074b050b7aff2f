"""Shared machinery for repair runs: seeds, the detection stage, and
candidate trials.

A trial substitutes one candidate phrase into the prompt, regenerates
with the same per-prompt seed, re-extracts, re-detects, and measures the
attention gap between the substituted object and the objects the trial
found correct. Both enhancement paths and the orchestrator funnel every
generation call through here, which is what keeps attempt counting and
seed handling consistent.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field, replace
from typing import MutableMapping

from .attention import attention_difference, object_attention
from .backends.base import GeneratorCapability, ScorerCapability
from .detection import DEFAULT_THRESHOLD, NeglectReport, identify_neglected
from .domain import GenerationRecord, ObjectEntity, Prompt
from .enhancement.substitution import replacement_span, substitute
from .errors import RemoteParserUnavailable
from .extraction import BUILTIN_CHUNKER, ExtractionConfig, extract_objects, head_token_indices


@dataclass(frozen=True)
class SeedPolicy:
    """How generation seeds are chosen.

    Per-prompt mode derives a stable seed from (base, prompt id), so all
    trials of one prompt share their stage-1 seed and the candidate text
    is the only varying factor. Fixed mode uses the base seed everywhere.
    """

    base: int = 0
    per_prompt: bool = True

    def seed_for(self, prompt_id: str) -> int:
        if not self.per_prompt:
            return self.base
        digest = hashlib.blake2b(
            f"{self.base}:{prompt_id}".encode("utf-8"), digest_size=8
        ).digest()
        return int.from_bytes(digest, "big") % 2**31


@dataclass(frozen=True)
class TrialContext:
    """Everything a single candidate trial needs besides the candidate."""

    generator: GeneratorCapability
    scorer: ScorerCapability
    extraction: ExtractionConfig = ExtractionConfig()
    threshold: float = DEFAULT_THRESHOLD
    seeds: SeedPolicy = SeedPolicy()
    guided: bool = True
    # optional trial memo, keyed by trial prompt text; lets the caller
    # reuse a trial's detection report without another generation
    cache: MutableMapping[str, "TrialResult"] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class StageResult:
    """Extraction + generation + detection of one prompt as-is."""

    prompt: Prompt
    objects: tuple[ObjectEntity, ...]
    record: GenerationRecord
    report: NeglectReport


@dataclass(frozen=True)
class TrialResult:
    """One candidate's substitution, regeneration, and re-detection."""

    prompt: Prompt
    record: GenerationRecord
    report: NeglectReport
    target_entity: ObjectEntity | None
    att_diff: float | None
    passed: bool
    target_present: bool


def extract_with_fallback(
    p: Prompt, cfg: ExtractionConfig
) -> tuple[tuple[ObjectEntity, ...], ExtractionConfig]:
    """Extract objects, degrading to the builtin chunker when the remote
    parser cannot serve; the config actually used is returned alongside."""
    try:
        return extract_objects(p, cfg), cfg
    except RemoteParserUnavailable as exc:
        warnings.warn(
            f"remote parser unavailable ({exc}); falling back to builtin rules",
            RuntimeWarning,
            stacklevel=2,
        )
        fallback = replace(cfg, mode=BUILTIN_CHUNKER)
        return extract_objects(p, fallback), fallback


def run_stage(p: Prompt, ctx: TrialContext) -> tuple[StageResult, TrialContext]:
    """Detection pass over the prompt as written (one generation call)."""
    objects, used = extract_with_fallback(p, ctx.extraction)
    if used is not ctx.extraction:
        ctx = replace(ctx, extraction=used)
    seed = ctx.seeds.seed_for(p.id)
    record = ctx.generator.generate(p, seed)
    report = identify_neglected(
        p, objects, record, ctx.scorer, ctx.threshold, ctx.extraction.lexicon
    )
    return StageResult(prompt=p, objects=objects, record=record, report=report), ctx


def base_attention_difference(report: NeglectReport) -> float | None:
    """Mean absolute attention gap between the neglected and correct sets.

    None whenever either set is empty or the report carries no attention
    readings, which downstream code treats as "guidance unavailable".
    """
    if report.attention_scores is None or not report.neglected or not report.correct:
        return None
    neglected = [report.attention_of(e) for e in report.neglected]
    correct = [report.attention_of(e) for e in report.correct]
    return attention_difference(neglected, correct)


def _entity_at(
    objects: tuple[ObjectEntity, ...], span: tuple[int, int]
) -> ObjectEntity | None:
    """The extracted object overlapping the span most; earliest wins ties."""
    best: ObjectEntity | None = None
    best_overlap = 0
    for obj in objects:
        lo = max(obj.span[0], span[0])
        hi = min(obj.span[1], span[1])
        overlap = hi - lo + 1
        if overlap > best_overlap:
            best = obj
            best_overlap = overlap
    return best


def run_trial(
    p: Prompt, target: ObjectEntity, candidate_phrase: str, ctx: TrialContext
) -> TrialResult:
    """Try one candidate phrase for the target object (one generation call)."""
    trial_p = substitute(p, target, candidate_phrase, ctx.extraction.lexicon)
    span = replacement_span(target, candidate_phrase)
    objects, _ = extract_with_fallback(trial_p, ctx.extraction)
    record = ctx.generator.generate(trial_p, ctx.seeds.seed_for(trial_p.id))
    report = identify_neglected(
        trial_p, objects, record, ctx.scorer, ctx.threshold, ctx.extraction.lexicon
    )
    entity = _entity_at(objects, span)

    passed = report.is_clean()
    target_present = entity is not None and any(
        e.span == entity.span for e in report.correct
    )
    att_diff: float | None = None
    if ctx.guided and entity is not None:
        target_score = object_attention(
            record.taps, head_token_indices(entity, trial_p, ctx.extraction.lexicon)
        )
        others = [
            object_attention(
                record.taps, head_token_indices(e, trial_p, ctx.extraction.lexicon)
            )
            for e in report.correct
            if e.span != entity.span
        ]
        if others:
            att_diff = attention_difference([target_score], others)

    result = TrialResult(
        prompt=trial_p,
        record=record,
        report=report,
        target_entity=entity,
        att_diff=att_diff,
        passed=passed,
        target_present=target_present,
    )
    if ctx.cache is not None:
        ctx.cache[trial_p.text] = result
    return result
