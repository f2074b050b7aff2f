"""Command line entry points for the prompt repair pipeline.

Commands:
  repair       repair one or more prompts and emit JSONL outcomes
  eval         run repair methods over a corpus and tabulate metrics
  gen-dataset  write a benchmark corpus as JSONL
  calibrate    fit the neglect threshold from labeled similarity scores

Exit codes: 0 success, 1 error, 2 (repair only) at least one prompt
ended as best effort.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .backends.remote import ENDPOINT_ENV, RemoteBackend
from .backends.simulator import SimulatorBackend
from .dataset import (
    bundled_categories,
    bundled_tbp_vocabulary,
    compose_multiobject,
    generate_tbp,
    load_dataset,
    save_dataset,
)
from .detection import DEFAULT_THRESHOLD, calibrate_threshold
from .domain import Prompt, RepairStatus
from .enhancement import EnhancementConfig
from .errors import PatcherError, RemoteError
from .evaluation import (
    METHOD_FULL,
    METHODS,
    EvalReport,
    evaluate,
    import_annotations,
    render_report,
)
from .orchestrator import MODE_FULL, MODES, PipelineConfig, patcher_repair
from .trials import SeedPolicy

BACKEND_SIM = "sim"
BACKEND_REMOTE = "remote"

FAMILY_TBP = "tbp"
FAMILY_TWOP = "twop"
FAMILY_THREEOP = "threeop"
FAMILIES = (FAMILY_TBP, FAMILY_TWOP, FAMILY_THREEOP)


def _build_backend(backend: str, endpoint: str | None):
    if backend == BACKEND_REMOTE:
        try:
            return RemoteBackend(endpoint)
        except RemoteError:
            raise click.ClickException(
                f"remote backend needs --endpoint or {ENDPOINT_ENV}"
            )
    return SimulatorBackend()


def _build_config(
    threshold: float,
    prune_threshold: float,
    wordnet_dir: Path | None,
    mode: str,
    seed: int,
    fixed_seed: bool,
) -> PipelineConfig:
    enhancement = EnhancementConfig(
        prune_similarity_threshold=prune_threshold,
        wordnet_dir=str(wordnet_dir) if wordnet_dir else None,
    )
    return PipelineConfig(
        enhancement=enhancement,
        threshold=threshold,
        mode=mode,
        seeds=SeedPolicy(base=seed, per_prompt=not fixed_seed),
    )


def backend_options(f):
    f = click.option(
        "--endpoint",
        envvar=ENDPOINT_ENV,
        default=None,
        help=f"Sidecar base URL (env {ENDPOINT_ENV}).",
    )(f)
    f = click.option(
        "--backend",
        type=click.Choice([BACKEND_SIM, BACKEND_REMOTE]),
        default=BACKEND_SIM,
        show_default=True,
        help="Where images, scores, and suggestions come from.",
    )(f)
    return f


def pipeline_options(f):
    for opt in reversed(
        (
            click.option(
                "--threshold",
                type=float,
                default=DEFAULT_THRESHOLD,
                show_default=True,
                help="Similarity below this marks an object neglected.",
            ),
            click.option(
                "--prune-threshold",
                type=float,
                default=0.5,
                show_default=True,
                help="Minimum embedding similarity a hyponym keeps.",
            ),
            click.option(
                "--wordnet-dir",
                type=click.Path(exists=True, file_okay=False, path_type=Path),
                envvar="PATCHER_WORDNET_DIR",
                default=None,
                help="Noun taxonomy directory (defaults to the bundled one).",
            ),
            click.option(
                "--seed",
                type=int,
                default=0,
                show_default=True,
                help="Base generation seed.",
            ),
            click.option(
                "--fixed-seed",
                is_flag=True,
                help="Use the base seed verbatim instead of deriving one per prompt.",
            ),
        )
    ):
        f = opt(f)
    return f


@click.group()
@click.version_option(package_name="patcher")
def main() -> None:
    """Detect neglected objects in text-to-image prompts and repair them."""


@main.command()
@click.argument("prompts", nargs=-1)
@click.option(
    "--input",
    "input_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="JSONL corpus to repair instead of (or besides) inline prompts.",
)
@backend_options
@pipeline_options
@click.option(
    "--mode",
    type=click.Choice(list(MODES)),
    default=MODE_FULL,
    show_default=True,
    help="Which enhancement streams run.",
)
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write JSONL outcomes here instead of stdout.",
)
def repair(
    prompts: tuple[str, ...],
    input_path: Path | None,
    backend: str,
    endpoint: str | None,
    threshold: float,
    prune_threshold: float,
    wordnet_dir: Path | None,
    seed: int,
    fixed_seed: bool,
    mode: str,
    out: Path | None,
) -> None:
    """Repair PROMPTS (and/or a --input corpus); one JSON line each."""
    jobs_source: list[tuple[str, str]] = []
    if input_path is not None:
        jobs_source += [(r.id, r.prompt) for r in load_dataset(input_path)]
    jobs_source += [(f"cli-{i:04d}", text) for i, text in enumerate(prompts)]
    if not jobs_source:
        raise click.UsageError("nothing to repair; pass prompts or --input")

    cfg = _build_config(threshold, prune_threshold, wordnet_dir, mode, seed, fixed_seed)
    engine = _build_backend(backend, endpoint)
    counts = {status: 0 for status in RepairStatus}
    lines: list[str] = []
    try:
        for prompt_id, text in jobs_source:
            p = Prompt.from_text(prompt_id, text)
            outcome = patcher_repair(p, engine, cfg)
            counts[outcome.status] += 1
            lines.append(json.dumps(outcome.to_dict(), ensure_ascii=False))
    except PatcherError as exc:
        raise click.ClickException(str(exc))

    payload = "\n".join(lines) + "\n"
    if out is not None:
        out.write_text(payload, "utf-8")
    else:
        click.echo(payload, nl=False)
    click.echo(
        f"{len(jobs_source)} prompts: "
        f"{counts[RepairStatus.REPAIRED]} repaired, "
        f"{counts[RepairStatus.ALREADY_CORRECT]} already correct, "
        f"{counts[RepairStatus.BEST_EFFORT]} best effort",
        err=True,
    )
    if counts[RepairStatus.BEST_EFFORT]:
        sys.exit(2)


@main.command("eval")
@click.option(
    "--input",
    "input_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="JSONL corpus to evaluate.",
)
@click.option(
    "--method",
    "methods",
    type=click.Choice(list(METHODS)),
    multiple=True,
    default=(METHOD_FULL,),
    show_default=True,
    help="Repair method; repeat for several rows.",
)
@backend_options
@pipeline_options
@click.option(
    "--annotations",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Human verdict CSV; replaces the simulator judge.",
)
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write the report here instead of stdout.",
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["csv", "markdown"]),
    default=None,
    help="Report format (default: by --out suffix, markdown on stdout).",
)
def eval_command(
    input_path: Path,
    methods: tuple[str, ...],
    backend: str,
    endpoint: str | None,
    threshold: float,
    prune_threshold: float,
    wordnet_dir: Path | None,
    seed: int,
    fixed_seed: bool,
    annotations: Path | None,
    jobs: int,
    out: Path | None,
    fmt: str | None,
) -> None:
    """Tabulate correction rate, CLIPScore, and attempts per method."""
    cfg = _build_config(
        threshold, prune_threshold, wordnet_dir, MODE_FULL, seed, fixed_seed
    )
    engine = _build_backend(backend, endpoint)
    try:
        records = load_dataset(input_path)
        judge = import_annotations(annotations) if annotations else None
        report = EvalReport(rows=())
        for method in dict.fromkeys(methods):
            report = report.merged(
                evaluate(
                    records,
                    method,
                    engine,
                    judge=judge,
                    cfg=cfg,
                    jobs=jobs,
                    dataset_name=input_path.stem,
                )
            )
    except PatcherError as exc:
        raise click.ClickException(str(exc))

    if out is not None:
        out.write_text(render_report(report, fmt or _format_for(out)), "utf-8")
        click.echo(f"wrote report to {out}", err=True)
    else:
        click.echo(render_report(report, fmt or "markdown"), nl=False)


def _format_for(path: Path) -> str:
    return "markdown" if path.suffix.lower() in (".md", ".markdown") else "csv"


@main.command("gen-dataset")
@click.option(
    "--family",
    type=click.Choice(list(FAMILIES)),
    required=True,
    help="Corpus family to generate.",
)
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="JSONL output path.",
)
@click.option(
    "--count",
    type=click.IntRange(min=1),
    default=None,
    help="Composed corpora: number of prompts (default: all pairs / pair-sized triple sample).",
)
@click.option("--seed", type=int, default=0, show_default=True, help="Sampling seed.")
@click.option(
    "--no-suggester",
    is_flag=True,
    help="Compose every prompt from the plain template, no language model.",
)
@backend_options
def gen_dataset(
    family: str,
    out: Path,
    count: int | None,
    seed: int,
    no_suggester: bool,
    backend: str,
    endpoint: str | None,
) -> None:
    """Write a benchmark corpus to --out."""
    try:
        if family == FAMILY_TBP:
            vocab = bundled_tbp_vocabulary()
            records = generate_tbp(vocab["animals"], vocab["objects"], vocab["colors"])
        else:
            suggester = None if no_suggester else _build_backend(backend, endpoint)
            n = 2 if family == FAMILY_TWOP else 3
            records = compose_multiobject(
                bundled_categories(), n, suggester, count=count, seed=seed
            )
        save_dataset(records, out)
    except PatcherError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {len(records)} records to {out}", err=True)


@main.command()
@click.option(
    "--input",
    "input_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="CSV of similarity scores labeled with object presence.",
)
def calibrate(input_path: Path) -> None:
    """Fit the neglect threshold from a labeled score file.

    Expects rows of ``score,label`` with label 1 when the object was
    actually present; a header row is skipped when found.
    """
    labeled: list[tuple[float, bool]] = []
    with open(input_path, newline="", encoding="utf-8") as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or not row[0].strip():
                continue
            try:
                score = float(row[0])
            except ValueError:
                if line_no == 1:
                    continue  # header
                raise click.ClickException(f"line {line_no}: bad score {row[0]!r}")
            if len(row) < 2 or row[1].strip() not in ("0", "1"):
                raise click.ClickException(f"line {line_no}: label must be 0 or 1")
            labeled.append((score, row[1].strip() == "1"))
    try:
        result = calibrate_threshold(labeled)
    except PatcherError as exc:
        raise click.ClickException(str(exc))
    click.echo(
        f"threshold={result.threshold:.6f} "
        f"balanced_accuracy={result.balanced_accuracy:.3f}"
    )
    if result.low_confidence:
        click.echo(
            "warning: balanced accuracy is low; the fitted threshold is unreliable",
            err=True,
        )


if __name__ == "__main__":
    main()
