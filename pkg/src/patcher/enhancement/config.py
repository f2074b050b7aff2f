"""Knobs shared by the explicit and implicit feature-enhancement paths."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class EnhancementConfig:
    """Budgets and thresholds for candidate search.

    ``max_explicit_iterations`` caps trials per feature kind (color and
    shape each get their own budget). ``wordnet_dir`` of None selects the
    bundled compact noun taxonomy.
    """

    max_explicit_iterations: int = 4
    prune_similarity_threshold: float = 0.5
    wordnet_dir: str | Path | None = None
    max_tree_depth: int = 6

    def __post_init__(self) -> None:
        if self.max_explicit_iterations < 1:
            raise ValueError("max_explicit_iterations must be positive")
        if self.max_tree_depth < 1:
            raise ValueError("max_tree_depth must be positive")
        if not math.isfinite(self.prune_similarity_threshold):
            raise ValueError("prune_similarity_threshold must be finite")
