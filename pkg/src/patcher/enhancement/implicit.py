"""Implicit feature enhancement: replace an object with a hyponym.

The object's hyponym tree is pruned of semantic drift (embedding cosine
to the root below threshold), then searched breadth-first starting from
the root's children. A node whose trial reduces the attention gap below
the original prompt's gap opens its children for search; a node that
does not opens its siblings instead. Without a usable reference gap the
search degrades to plain breadth-first order.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from ..backends.base import (
    EmbedderCapability,
    GeneratorCapability,
    ScorerCapability,
)
from ..detection import DEFAULT_THRESHOLD, NeglectReport
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
)
from ..errors import LemmaNotFound
from ..trials import SeedPolicy, TrialContext, base_attention_difference, run_trial
from .config import EnhancementConfig
from .wordnet import HyponymNode, build_hyponym_tree


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    denom = float(np.linalg.norm(a) * np.linalg.norm(b))
    if denom == 0.0:
        return 0.0
    return float(np.dot(a, b) / denom)


def _mark_subtree_pruned(node: HyponymNode) -> None:
    for child in node.children:
        child.pruned = True
        _mark_subtree_pruned(child)


def prune_tree(
    root: HyponymNode, embedder: EmbedderCapability, threshold: float
) -> HyponymNode:
    """Drop drifted branches: nodes whose embedding strays from the root.

    Breadth-first; a node below the cosine threshold is marked pruned
    together with its whole subtree, and its descendants are not visited
    (their sim_to_root stays None). The root itself is never pruned.
    Mutates the tree in place and returns it.
    """
    root_vec = np.asarray(embedder.embed(root.lemma), dtype=float)
    root.sim_to_root = 1.0
    root.pruned = False
    queue: deque[HyponymNode] = deque([root])
    while queue:
        node = queue.popleft()
        for child in node.children:
            sim = _cosine(np.asarray(embedder.embed(child.lemma), dtype=float), root_vec)
            child.sim_to_root = sim
            if sim < threshold:
                child.pruned = True
                _mark_subtree_pruned(child)
            else:
                child.pruned = False
                queue.append(child)
    return root


def _siblings(node: HyponymNode) -> list[HyponymNode]:
    if node.parent is None:
        return []
    return [c for c in node.parent.children if c is not node]


def attention_guided_search(
    root: HyponymNode,
    p: Prompt,
    target: ObjectEntity,
    base_att_diff: float | None,
    generator: GeneratorCapability,
    scorer: ScorerCapability,
    cfg: EnhancementConfig | None = None,
    *,
    ctx: TrialContext | None = None,
) -> RepairOutcome:
    """Search the pruned hyponym tree for a substitution that passes.

    The frontier starts at the root's unpruned children (substituting the
    root itself would reproduce the original prompt). Each node is tried
    at most once; ``attempts`` equals the number of trials made here.
    """
    if ctx is None:
        ctx = TrialContext(
            generator=generator,
            scorer=scorer,
            threshold=DEFAULT_THRESHOLD,
            seeds=SeedPolicy(),
            guided=base_att_diff is not None,
        )
    guided = ctx.guided and base_att_diff is not None

    def best_effort(
        trail: list[TrailEntry], prompts: list[Prompt], attempts: int
    ) -> RepairOutcome:
        best = best_trail_entry(trail)
        final = prompts[trail.index(best)] if best is not None else p
        return RepairOutcome(
            prompt_id=p.id,
            status=RepairStatus.BEST_EFFORT,
            final_prompt=final,
            attempts=attempts,
            trail=tuple(trail),
            final_att_diff=best.att_diff if best is not None else None,
        )

    start = root.unpruned_children()
    if not start:
        return best_effort([], [], 0)

    queue: deque[HyponymNode] = deque(start)
    enqueued: set[int] = {id(n) for n in start}
    visited: set[int] = set()
    trail: list[TrailEntry] = []
    prompts: list[Prompt] = []

    while queue:
        node = queue.popleft()
        if id(node) in visited:
            continue
        visited.add(id(node))

        result = run_trial(p, target, node.lemma, ctx)
        candidate = FeatureCandidate(
            kind=CandidateKind.HYPONYM,
            phrase=node.lemma,
            target=target.head_lemma,
            source=CandidateSource.TAXONOMY,
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

        if guided:
            reduced = result.att_diff is not None and result.att_diff < base_att_diff
            next_nodes = node.children if reduced else _siblings(node)
        else:
            next_nodes = node.children
        for nxt in next_nodes:
            if nxt.pruned or id(nxt) in enqueued or id(nxt) in visited:
                continue
            enqueued.add(id(nxt))
            queue.append(nxt)

    return best_effort(trail, prompts, len(trail))


def implicit_repair(
    p: Prompt,
    report: NeglectReport,
    generator: GeneratorCapability,
    scorer: ScorerCapability,
    embedder: EmbedderCapability,
    cfg: EnhancementConfig | None = None,
    *,
    target: ObjectEntity | None = None,
    ctx: TrialContext | None = None,
) -> RepairOutcome:
    """Full implicit path: build the hyponym tree, prune it, search it.

    An object without any noun-taxonomy entry simply has no implicit
    candidates; that degrades to a zero-attempt best effort, mirroring
    the explicit path's empty-suggestion contract.
    """
    if not report.neglected:
        raise ValueError("implicit_repair needs at least one neglected object")
    cfg = cfg or EnhancementConfig()
    target = target or report.neglected[0]
    base = base_attention_difference(report)
    if ctx is None:
        ctx = TrialContext(
            generator=generator,
            scorer=scorer,
            threshold=report.threshold,
            seeds=SeedPolicy(),
            guided=base is not None,
        )
    try:
        tree = build_hyponym_tree(target.head_lemma, cfg.wordnet_dir, cfg.max_tree_depth)
    except LemmaNotFound:
        return RepairOutcome(
            prompt_id=p.id,
            status=RepairStatus.BEST_EFFORT,
            final_prompt=p,
            attempts=0,
            trail=(),
            final_att_diff=None,
        )
    prune_tree(tree, embedder, cfg.prune_similarity_threshold)
    return attention_guided_search(tree, p, target, base, generator, scorer, cfg, ctx=ctx)
