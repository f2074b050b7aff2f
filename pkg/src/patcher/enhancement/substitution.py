"""Span-level phrase replacement inside prompts.

Substitution is the only way repairs touch a prompt: the target span is
swapped for the replacement words, every other token is carried over
byte-identically, and a/an agreement is re-normalized (the one token a
substitution may legitimately change outside its span).
"""

from __future__ import annotations

from dataclasses import replace

from ..domain import ObjectEntity, Prompt, normalize_article_words
from ..errors import SpanMismatch
from ..lexicon import Lexicon


def _checked_span(p: Prompt, target: ObjectEntity) -> tuple[int, int]:
    start, end = target.span
    if start < 0 or end >= len(p.tokens) or start > end:
        raise SpanMismatch(f"span {target.span} does not fit a {len(p.tokens)}-token prompt")
    held = " ".join(t.surface for t in p.tokens[start : end + 1])
    if held != target.phrase:
        raise SpanMismatch(f"span {target.span} holds {held!r}, not {target.phrase!r}")
    return start, end


def substitute(
    p: Prompt,
    target: ObjectEntity,
    replacement_phrase: str,
    lexicon: Lexicon | None = None,
) -> Prompt:
    """Replace the target object's span with the replacement words.

    The prompt id is preserved so seed derivation treats every trial of
    one prompt identically.
    """
    repl = replacement_phrase.split()
    if not repl:
        raise ValueError("replacement phrase must be non-empty")
    start, end = _checked_span(p, target)
    words = [t.surface for t in p.tokens]
    out = words[:start] + repl + words[end + 1 :]
    out = normalize_article_words(out)
    return Prompt.from_text(p.id, " ".join(out), lexicon)


def replacement_span(target: ObjectEntity, replacement_phrase: str) -> tuple[int, int]:
    """Inclusive span the replacement occupies in the substituted prompt."""
    n = len(replacement_phrase.split())
    if n == 0:
        raise ValueError("replacement phrase must be non-empty")
    return (target.span[0], target.span[0] + n - 1)


def carry_spans(
    objects: tuple[ObjectEntity, ...] | list[ObjectEntity],
    target: ObjectEntity,
    replacement_phrase: str,
) -> tuple[ObjectEntity, ...]:
    """Project object spans through a substitution.

    The target itself becomes the replacement phrase; objects after it
    shift by the token-count delta; objects before it are untouched.
    """
    repl = replacement_phrase.split()
    if not repl:
        raise ValueError("replacement phrase must be non-empty")
    start, end = target.span
    delta = len(repl) - (end - start + 1)
    out: list[ObjectEntity] = []
    for obj in objects:
        if obj.span == target.span:
            out.append(
                replace(obj, phrase=" ".join(repl), span=replacement_span(target, replacement_phrase))
            )
        elif obj.span[0] > end:
            out.append(replace(obj, span=(obj.span[0] + delta, obj.span[1] + delta)))
        else:
            out.append(obj)
    return tuple(out)
