"""Attention score arithmetic.

Object-level scores are means over the object's token scores; the gap
between neglected and correct objects is the mean absolute difference
over every cross pair, which guides the repair search.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .domain import TokenAttentionPair
from .errors import EmptyIndexList, EmptySet, IndexOutOfRange, TooFewScores


def object_attention(taps: Sequence[TokenAttentionPair], token_indices: Sequence[int]) -> float:
    """Mean attention score over the given token indices."""
    if not token_indices:
        raise EmptyIndexList("object_attention needs at least one token index")
    by_index = {t.token_index: t.score for t in taps}
    total = 0.0
    for idx in token_indices:
        if idx not in by_index:
            raise IndexOutOfRange(f"token index {idx} has no attention score")
        total += by_index[idx]
    return total / len(token_indices)


def attention_difference(
    neglected: Sequence[float], correct: Sequence[float]
) -> float:
    """Mean absolute gap between the two score sets over all cross pairs."""
    if not neglected or not correct:
        raise EmptySet("attention_difference needs a non-empty score set on each side")
    a = np.asarray(neglected, dtype=np.float64)
    b = np.asarray(correct, dtype=np.float64)
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValueError("attention scores must be finite")
    return float(np.abs(a[:, None] - b[None, :]).mean())


def pairwise_mean_abs_diff(scores: Sequence[float]) -> float:
    """Mean absolute difference over all unordered pairs of scores."""
    if len(scores) < 2:
        raise TooFewScores("pairwise statistics need at least two scores")
    s = np.asarray(scores, dtype=np.float64)
    if not np.isfinite(s).all():
        raise ValueError("attention scores must be finite")
    n = len(s)
    gaps = np.abs(s[:, None] - s[None, :])
    # every unordered pair appears twice in the full matrix, diagonal is zero
    return float(gaps.sum() / (n * (n - 1)))
