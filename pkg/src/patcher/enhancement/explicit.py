"""Explicit feature enhancement: try color and shape descriptions.

Candidates come from the suggester (color first, then shape), each kind
capped at the configured iteration budget. The first trial after which
detection finds nothing neglected wins. If every single-feature trial
fails, the best color feature and best shape feature are combined into
one last candidate; failing that too, the trial with the smallest
measured attention gap is returned as a best effort.
"""

from __future__ import annotations

from ..backends.base import (
    TEMPLATE_COLOR,
    TEMPLATE_SHAPE,
    GeneratorCapability,
    ScorerCapability,
    SuggesterCapability,
)
from ..detection import NeglectReport
from ..domain import (
    CandidateKind,
    CandidateSource,
    FeatureCandidate,
    ObjectEntity,
    Prompt,
    RepairOutcome,
    RepairStatus,
    TrailEntry,
    best_trail_entry,
    lemma_of,
)
from ..trials import SeedPolicy, TrialContext, run_trial
from .config import EnhancementConfig

_KIND_FOR_TEMPLATE = {
    TEMPLATE_COLOR: CandidateKind.COLOR,
    TEMPLATE_SHAPE: CandidateKind.SHAPE,
}


def _best_phrase(trail: list[TrailEntry], kind: CandidateKind, guided: bool) -> str | None:
    """Phrase of the kind's best-measured entry; first of the kind when
    unguided or nothing of the kind was measured."""
    entries = [e for e in trail if e.candidate.kind is kind]
    if not entries:
        return None
    if guided:
        best = best_trail_entry(entries)
        if best is not None:
            return best.candidate.phrase
    return entries[0].candidate.phrase


def _combined_phrase(color_phrase: str, shape_phrase: str, target: ObjectEntity) -> str:
    """Color modifier words prepended to the shape-enhanced phrase."""
    modifier = [
        w for w in color_phrase.split() if lemma_of(w) != target.head_lemma
    ]
    head = " ".join(modifier) if modifier else color_phrase
    return f"{head} {shape_phrase}"


def explicit_repair(
    p: Prompt,
    report: NeglectReport,
    generator: GeneratorCapability,
    scorer: ScorerCapability,
    suggester: SuggesterCapability,
    cfg: EnhancementConfig | None = None,
    *,
    target: ObjectEntity | None = None,
    ctx: TrialContext | None = None,
) -> RepairOutcome:
    """Repair one neglected object with explicit color/shape features.

    ``attempts`` equals the number of candidate trials (= generation
    calls) this call made; the caller owns the stage-1 count.
    """
    if not report.neglected:
        raise ValueError("explicit_repair needs at least one neglected object")
    cfg = cfg or EnhancementConfig()
    target = target or report.neglected[0]
    if ctx is None:
        ctx = TrialContext(
            generator=generator,
            scorer=scorer,
            threshold=report.threshold,
            seeds=SeedPolicy(),
            guided=bool(report.correct),
        )

    budget = cfg.max_explicit_iterations
    by_kind: dict[str, list[str]] = {}
    for template in (TEMPLATE_COLOR, TEMPLATE_SHAPE):
        raw = suggester.suggest(template, target.head_lemma)
        by_kind[template] = [s.strip() for s in raw if s and s.strip()][:budget]

    if not by_kind[TEMPLATE_COLOR] and not by_kind[TEMPLATE_SHAPE]:
        # no candidates of either kind: nothing to try, nothing measured
        return RepairOutcome(
            prompt_id=p.id,
            status=RepairStatus.BEST_EFFORT,
            final_prompt=p,
            attempts=0,
            trail=(),
            final_att_diff=None,
        )

    trail: list[TrailEntry] = []
    prompts: list[Prompt] = []

    def try_phrase(phrase: str, kind: CandidateKind) -> RepairOutcome | None:
        result = run_trial(p, target, phrase, ctx)
        candidate = FeatureCandidate(
            kind=kind,
            phrase=phrase,
            target=target.head_lemma,
            source=CandidateSource.LLM,
            att_diff=result.att_diff,
        )
        trail.append(TrailEntry(candidate, result.passed, result.att_diff))
        prompts.append(result.prompt)
        if result.passed:
            return RepairOutcome(
                prompt_id=p.id,
                status=RepairStatus.REPAIRED,
                final_prompt=result.prompt,
                attempts=len(trail),
                trail=tuple(trail),
                final_att_diff=result.att_diff,
            )
        return None

    for template in (TEMPLATE_COLOR, TEMPLATE_SHAPE):
        for phrase in by_kind[template]:
            outcome = try_phrase(phrase, _KIND_FOR_TEMPLATE[template])
            if outcome is not None:
                return outcome

    # single features all failed: one combined color+shape trial, when
    # both kinds actually offered something
    color_phrase = _best_phrase(trail, CandidateKind.COLOR, ctx.guided)
    shape_phrase = _best_phrase(trail, CandidateKind.SHAPE, ctx.guided)
    if color_phrase and shape_phrase:
        outcome = try_phrase(
            _combined_phrase(color_phrase, shape_phrase, target), CandidateKind.COMBINED
        )
        if outcome is not None:
            return outcome

    best = best_trail_entry(trail)
    final = p
    if best is not None:
        final = prompts[trail.index(best)]
    return RepairOutcome(
        prompt_id=p.id,
        status=RepairStatus.BEST_EFFORT,
        final_prompt=final,
        attempts=len(trail),
        trail=tuple(trail),
        final_att_diff=best.att_diff if best is not None else None,
    )
