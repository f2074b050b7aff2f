"""The repair pipeline: detect neglected objects, run both enhancement
streams, and keep the best result.

Stage 1 classifies every extracted object by image similarity. For each
neglected object (weakest attention first) the explicit and implicit
streams each produce a candidate outcome; a stream that repaired wins
outright (fewer attempts first, explicit on ties), otherwise the best
effort with the smaller attention gap carries forward. Attempts count
every generation call made anywhere in the run.

Also houses the whole-prompt rewrite baseline, which reuses stage 1 but
replaces feature enhancement with language-model rewrites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .backends.base import Backend, GeneratorCapability, ScorerCapability, TEMPLATE_LLM_REPAIR
from .detection import DEFAULT_THRESHOLD, NeglectReport
from .domain import (
    CandidateKind,
    CandidateSource,
    FeatureCandidate,
    GenerationRecord,
    ObjectEntity,
    Prompt,
    RepairOutcome,
    RepairStatus,
    TrailEntry,
    validate_prompt,
)
from .enhancement import EnhancementConfig, explicit_repair, implicit_repair
from .errors import BackendError, RepairAborted
from .extraction import ExtractionConfig
from .trials import SeedPolicy, TrialContext, TrialResult, run_stage

MODE_FULL = "full"
MODE_EFE_ONLY = "efe_only"
MODE_IFE_ONLY = "ife_only"
MODES = (MODE_FULL, MODE_EFE_ONLY, MODE_IFE_ONLY)


@dataclass(frozen=True)
class PipelineConfig:
    enhancement: EnhancementConfig = EnhancementConfig()
    threshold: float = DEFAULT_THRESHOLD
    mode: str = MODE_FULL
    lr_max_iterations: int = 8
    seeds: SeedPolicy = SeedPolicy()
    extraction: ExtractionConfig = ExtractionConfig()
    # master switch; False forces plain candidate order everywhere
    guided: bool = True

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, not {self.mode!r}")
        if self.lr_max_iterations < 1:
            raise ValueError("lr_max_iterations must be positive")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must sit strictly inside (0, 1)")


def multi_neglect_schedule(report: NeglectReport) -> list[ObjectEntity]:
    """Neglected objects ordered weakest attention first.

    Objects without an attention reading keep their extraction order, as
    do exact ties.
    """
    keyed = []
    for order, entity in enumerate(report.neglected):
        att = report.attention_of(entity) if report.attention_scores is not None else None
        keyed.append((att if att is not None else math.inf, order, entity))
    keyed.sort(key=lambda item: (item[0], item[1]))
    return [entity for _, _, entity in keyed]


def compute_clipscore(p: Prompt, record: GenerationRecord, scorer: ScorerCapability) -> float:
    """Whole-prompt similarity between the prompt text and its image."""
    return float(scorer.similarity(record.image_ref, p.text))


def _checked(p: Prompt) -> Prompt:
    violations = validate_prompt(p)
    if violations:
        raise ValueError(f"invalid prompt {p.id!r}: " + "; ".join(violations))
    return p


def _already_correct(p: Prompt) -> RepairOutcome:
    return RepairOutcome(
        prompt_id=p.id,
        status=RepairStatus.ALREADY_CORRECT,
        final_prompt=p,
        attempts=1,
        trail=(),
        final_att_diff=None,
    )


def _gap(outcome: RepairOutcome) -> float:
    return math.inf if outcome.final_att_diff is None else outcome.final_att_diff


def _merge(
    efe: RepairOutcome | None, ife: RepairOutcome | None
) -> tuple[RepairOutcome, RepairOutcome | None]:
    """Pick the winning stream; ties always favor the explicit stream."""
    if ife is None:
        assert efe is not None
        return efe, None
    if efe is None:
        return ife, None
    efe_won = efe.status is RepairStatus.REPAIRED
    ife_won = ife.status is RepairStatus.REPAIRED
    if efe_won and ife_won:
        winner = efe if efe.attempts <= ife.attempts else ife
    elif efe_won or ife_won:
        winner = efe if efe_won else ife
    else:
        winner = efe if _gap(efe) <= _gap(ife) else ife
    return winner, (ife if winner is efe else efe)


def _find_target(scheduled: ObjectEntity, report: NeglectReport) -> ObjectEntity | None:
    """Locate a scheduled object in a later report; phrases of untouched
    objects stay byte-identical, so the phrase is the stable key."""
    for entity in report.neglected:
        if entity.phrase == scheduled.phrase:
            return entity
    return None


def patcher_repair(p: Prompt, backend: Backend, cfg: PipelineConfig | None = None) -> RepairOutcome:
    """Run the full detect-and-enhance pipeline on one prompt."""
    cfg = cfg or PipelineConfig()
    _checked(p)
    cache: dict[str, TrialResult] = {}
    ctx = TrialContext(
        generator=backend,
        scorer=backend,
        extraction=cfg.extraction,
        threshold=cfg.threshold,
        seeds=cfg.seeds,
        guided=cfg.guided,
        cache=cache,
    )

    attempts = 0
    trail: list[TrailEntry] = []
    try:
        stage, ctx = run_stage(p, ctx)
        attempts = 1
        if stage.report.is_clean():
            return _already_correct(p)

        # an empty correct set leaves the attention gap undefined, so
        # candidate order carries no guidance for this whole run
        if not stage.report.correct:
            ctx = replace(ctx, guided=False)

        schedule = multi_neglect_schedule(stage.report)
        current_p = p
        current_report = stage.report
        streams: list[RepairOutcome] = []

        for scheduled in schedule:
            target = _find_target(scheduled, current_report)
            if target is None:
                continue  # an earlier substitution already recovered it
            efe = None
            ife = None
            if cfg.mode in (MODE_FULL, MODE_EFE_ONLY):
                efe = explicit_repair(
                    current_p,
                    current_report,
                    backend,
                    backend,
                    backend,
                    cfg.enhancement,
                    target=target,
                    ctx=ctx,
                )
                attempts += efe.attempts
                streams.append(efe)
            if cfg.mode in (MODE_FULL, MODE_IFE_ONLY):
                ife = implicit_repair(
                    current_p,
                    current_report,
                    backend,
                    backend,
                    backend,
                    cfg.enhancement,
                    target=target,
                    ctx=ctx,
                )
                attempts += ife.attempts
                streams.append(ife)

            winner, loser = _merge(efe, ife)
            if loser is not None:
                trail.extend(loser.trail)
            trail.extend(winner.trail)

            if winner.status is RepairStatus.REPAIRED:
                return RepairOutcome(
                    prompt_id=p.id,
                    status=RepairStatus.REPAIRED,
                    final_prompt=winner.final_prompt,
                    attempts=attempts,
                    trail=tuple(trail),
                    final_att_diff=winner.final_att_diff,
                )

            # no full repair for this object; move on only when the best
            # effort at least made the object itself appear
            cached = cache.get(winner.final_prompt.text)
            if (
                winner.final_prompt.text != current_p.text
                and cached is not None
                and cached.target_present
            ):
                current_p = winner.final_prompt
                current_report = cached.report
                continue
            break
    except BackendError as exc:
        raise RepairAborted(exc, tuple(trail), attempts) from exc

    best: RepairOutcome | None = None
    for stream in streams:
        if stream.final_att_diff is None:
            continue
        if best is None or stream.final_att_diff < best.final_att_diff:
            best = stream  # strict: earlier streams keep ties
    return RepairOutcome(
        prompt_id=p.id,
        status=RepairStatus.BEST_EFFORT,
        final_prompt=best.final_prompt if best is not None else p,
        attempts=attempts,
        trail=tuple(trail),
        final_att_diff=best.final_att_diff if best is not None else None,
    )


def llm_repair_baseline(
    p: Prompt, backend: Backend, cfg: PipelineConfig | None = None
) -> RepairOutcome:
    """Baseline: whole-prompt rewrites instead of feature enhancement.

    One suggestion batch is fetched for the first neglected object, then
    candidates are tried in order without any attention guidance, up to
    the iteration budget. Suggesters receive the template kind and the
    raw prompt; chat-backed implementations render the rewrite request
    themselves (see enhancement.templates.render_llm_repair_query).
    """
    cfg = cfg or PipelineConfig()
    _checked(p)
    ctx = TrialContext(
        generator=backend,
        scorer=backend,
        extraction=cfg.extraction,
        threshold=cfg.threshold,
        seeds=cfg.seeds,
        guided=False,
    )
    attempts = 0
    trail: list[TrailEntry] = []
    last_prompt = p
    try:
        stage, ctx = run_stage(p, ctx)
        attempts = 1
        if stage.report.is_clean():
            return _already_correct(p)

        target = stage.report.neglected[0]
        candidates = [
            s.strip()
            for s in backend.suggest(TEMPLATE_LLM_REPAIR, target.head_lemma, p.text)
            if s and s.strip()
        ][: cfg.lr_max_iterations]

        for text in candidates:
            trial_p = Prompt.from_text(p.id, text, cfg.extraction.lexicon)
            trial_stage, ctx = run_stage(trial_p, ctx)
            attempts += 1
            passed = trial_stage.report.is_clean()
            candidate = FeatureCandidate(
                kind=CandidateKind.REWRITE,
                phrase=text,
                target=target.head_lemma,
                source=CandidateSource.LLM,
            )
            trail.append(TrailEntry(candidate, passed, None))
            last_prompt = trial_p
            if passed:
                return RepairOutcome(
                    prompt_id=p.id,
                    status=RepairStatus.REPAIRED,
                    final_prompt=trial_p,
                    attempts=attempts,
                    trail=tuple(trail),
                    final_att_diff=None,
                )
    except BackendError as exc:
        raise RepairAborted(exc, tuple(trail), attempts) from exc

    return RepairOutcome(
        prompt_id=p.id,
        status=RepairStatus.BEST_EFFORT,
        final_prompt=last_prompt,
        attempts=attempts,
        trail=tuple(trail),
        final_att_diff=None,
    )
