"""Run repair methods over prompt corpora and aggregate quality metrics.

For every record the chosen method produces a final prompt; its image is
judged either against the simulator's ground truth or against imported
human annotations. The correction rate counts records that both ended in
a non-best-effort status and were confirmed by the judge.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .backends.base import Backend
from .backends.simulator import SimulatorBackend
from .dataset import PromptRecord
from .domain import GenerationRecord, Prompt, RepairOutcome, RepairStatus
from .errors import MalformedRecord, MissingAnnotations, NoAnnotators
from .extraction import content_lemma_phrase, extract_objects
from .orchestrator import (
    MODE_EFE_ONLY,
    MODE_FULL,
    MODE_IFE_ONLY,
    PipelineConfig,
    compute_clipscore,
    llm_repair_baseline,
    patcher_repair,
)
from .trials import TrialContext, run_stage

METHOD_FULL = "patcher_full"
METHOD_EFE = "efe_only"
METHOD_IFE = "ife_only"
METHOD_LR = "lr_baseline"
METHOD_NONE = "none"
METHODS = (METHOD_FULL, METHOD_EFE, METHOD_IFE, METHOD_LR, METHOD_NONE)

_MODE_FOR_METHOD = {
    METHOD_FULL: MODE_FULL,
    METHOD_EFE: MODE_EFE_ONLY,
    METHOD_IFE: MODE_IFE_ONLY,
}


@dataclass(frozen=True)
class EvalRow:
    dataset: str
    method: str
    total: int
    repaired: int
    best_effort: int
    already_correct: int
    confirmed: int
    mean_clipscore: float
    mean_attempts: float

    @property
    def cr(self) -> float:
        return self.confirmed / self.total if self.total else 0.0


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalRow, ...]

    def merged(self, other: "EvalReport") -> "EvalReport":
        return EvalReport(rows=self.rows + other.rows)

    def row(self, dataset: str, method: str) -> EvalRow:
        for r in self.rows:
            if r.dataset == dataset and r.method == method:
                return r
        raise KeyError(f"no row for ({dataset}, {method})")


# ===== judges =====

class SimulatorJudge:
    """Ground-truth judge: every object the final prompt asks for must be
    in the simulator image's decoded present set."""

    def __init__(self, lexicon=None):
        self._lexicon = lexicon

    def confirm(
        self, record: PromptRecord, final_prompt: Prompt, generation: GenerationRecord
    ) -> bool:
        present = SimulatorBackend.present_set(generation.image_ref)
        p = final_prompt
        required = {
            content_lemma_phrase(e, p, self._lexicon) for e in extract_objects(p)
        }
        return required <= present


@dataclass(frozen=True)
class AnnotationRecord:
    prompt_id: str
    annotator: str
    verdict: int


class AnnotationJudge:
    """Majority-vote judge over human verdicts; even splits count as
    incorrect (a strict majority must say correct)."""

    def __init__(self, verdicts: dict[str, list[int]]):
        self._verdicts = verdicts

    def missing(self, prompt_ids: Iterable[str]) -> list[str]:
        return sorted(pid for pid in set(prompt_ids) if pid not in self._verdicts)

    def confirm(
        self, record: PromptRecord, final_prompt: Prompt, generation: GenerationRecord
    ) -> bool:
        votes = self._verdicts.get(record.id)
        if votes is None:
            raise MissingAnnotations([record.id])
        return sum(votes) * 2 > len(votes)


def import_annotations(path: str | Path) -> AnnotationJudge:
    """Load an annotation CSV (prompt_id, annotator, verdict in {0,1})."""
    verdicts: dict[str, list[int]] = {}
    seen: set[tuple[str, str]] = set()
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        expected = {"prompt_id", "annotator", "verdict"}
        if reader.fieldnames is None or set(reader.fieldnames) != expected:
            raise MalformedRecord(1, f"header must be exactly {sorted(expected)}")
        for line_no, row in enumerate(reader, start=2):
            pid = (row["prompt_id"] or "").strip()
            annotator = (row["annotator"] or "").strip()
            raw = (row["verdict"] or "").strip()
            if not pid or not annotator:
                raise MalformedRecord(line_no, "empty prompt_id or annotator")
            if raw not in ("0", "1"):
                raise MalformedRecord(line_no, f"verdict must be 0 or 1, got {raw!r}")
            key = (pid, annotator)
            if key in seen:
                raise MalformedRecord(line_no, f"duplicate verdict for {key}")
            seen.add(key)
            verdicts.setdefault(pid, []).append(int(raw))
    if not verdicts:
        raise NoAnnotators("annotation file holds no verdicts")
    return AnnotationJudge(verdicts)


# ===== evaluation =====

def run_method(p: Prompt, method: str, backend: Backend, cfg: PipelineConfig) -> RepairOutcome:
    """One record's repair under the named method."""
    if method in _MODE_FOR_METHOD:
        from dataclasses import replace

        return patcher_repair(p, backend, replace(cfg, mode=_MODE_FOR_METHOD[method]))
    if method == METHOD_LR:
        return llm_repair_baseline(p, backend, cfg)
    if method == METHOD_NONE:
        ctx = TrialContext(
            generator=backend,
            scorer=backend,
            extraction=cfg.extraction,
            threshold=cfg.threshold,
            seeds=cfg.seeds,
        )
        stage, _ = run_stage(p, ctx)
        status = (
            RepairStatus.ALREADY_CORRECT if stage.report.is_clean() else RepairStatus.BEST_EFFORT
        )
        return RepairOutcome(
            prompt_id=p.id, status=status, final_prompt=p, attempts=1, trail=()
        )
    raise ValueError(f"method must be one of {METHODS}, not {method!r}")


def evaluate(
    records: Sequence[PromptRecord],
    method: str,
    backend: Backend,
    *,
    judge=None,
    cfg: PipelineConfig | None = None,
    jobs: int = 1,
    dataset_name: str | None = None,
) -> EvalReport:
    """Run one method over a corpus and fold the results into one row."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, not {method!r}")
    cfg = cfg or PipelineConfig()
    judge = judge or SimulatorJudge(cfg.extraction.lexicon)
    if hasattr(judge, "missing"):
        absent = judge.missing([r.id for r in records])
        if absent:
            raise MissingAnnotations(absent)

    if dataset_name is None:
        sources = {r.source for r in records}
        dataset_name = sources.pop() if len(sources) == 1 else "mixed"

    def worker(record: PromptRecord) -> tuple[RepairOutcome, float, bool]:
        p = Prompt.from_text(record.id, record.prompt, cfg.extraction.lexicon)
        outcome = run_method(p, method, backend, cfg)
        generation = backend.generate(
            outcome.final_prompt, cfg.seeds.seed_for(outcome.final_prompt.id)
        )
        clip = compute_clipscore(outcome.final_prompt, generation, backend)
        ok = judge.confirm(record, outcome.final_prompt, generation)
        return outcome, clip, ok

    if getattr(backend, "serial_only", False):
        jobs = 1
    if jobs > 1 and len(records) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(worker, records))
    else:
        results = [worker(r) for r in records]

    counts = {status: 0 for status in RepairStatus}
    confirmed = 0
    clip_sum = 0.0
    attempt_sum = 0
    for outcome, clip, ok in results:
        counts[outcome.status] += 1
        clip_sum += clip
        attempt_sum += outcome.attempts
        if ok and outcome.status in (RepairStatus.REPAIRED, RepairStatus.ALREADY_CORRECT):
            confirmed += 1
    total = len(records)
    row = EvalRow(
        dataset=dataset_name,
        method=method,
        total=total,
        repaired=counts[RepairStatus.REPAIRED],
        best_effort=counts[RepairStatus.BEST_EFFORT],
        already_correct=counts[RepairStatus.ALREADY_CORRECT],
        confirmed=confirmed,
        mean_clipscore=clip_sum / total if total else 0.0,
        mean_attempts=attempt_sum / total if total else 0.0,
    )
    return EvalReport(rows=(row,))


# ===== report rendering =====

FORMATS = ("csv", "markdown")
_HEADER = ("Dataset", "Method", "CR", "CLIPScore", "MeanAttempts")


def _cells(row: EvalRow) -> tuple[str, str, str, str, str]:
    return (
        row.dataset,
        row.method,
        f"{100.0 * row.cr:.1f}",
        f"{row.mean_clipscore:.3f}",
        f"{row.mean_attempts:.2f}",
    )


def render_report(report: EvalReport, fmt: str = "csv") -> str:
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, not {fmt!r}")
    rows = sorted(report.rows, key=lambda r: (r.dataset, r.method))
    if fmt == "csv":
        lines = [",".join(_HEADER)]
        lines += [",".join(_cells(r)) for r in rows]
        return "\n".join(lines) + "\n"
    width = [len(h) for h in _HEADER]
    table = [_cells(r) for r in rows]
    for cells in table:
        width = [max(w, len(c)) for w, c in zip(width, cells)]
    def line(cells: tuple[str, ...]) -> str:
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, width)) + " |"
    out = [line(_HEADER), "| " + " | ".join("-" * w for w in width) + " |"]
    out += [line(c) for c in table]
    return "\n".join(out) + "\n"


def emit_report(report: EvalReport, path: str | Path, fmt: str | None = None) -> Path:
    """Write the report; format inferred from the suffix when not given."""
    target = Path(path)
    if fmt is None:
        fmt = "markdown" if target.suffix.lower() in (".md", ".markdown") else "csv"
    target.write_text(render_report(report, fmt), "utf-8")
    return target
