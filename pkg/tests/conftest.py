"""Shared test scaffolding: a fully scripted backend and lexicon helpers.

The scripted backend gives tests point control over every per-object
attention reading and presence bit, so search-order and counting
assertions do not depend on simulator arithmetic.
"""

from __future__ import annotations

import pytest

from patcher.domain import GenerationRecord, Prompt, TokenAttentionPair
from patcher.extraction import (
    ExtractionConfig,
    content_lemma_phrase,
    extract_objects,
    head_token_indices,
)
from patcher.lexicon import ADJ, CONJ, DET, NOUN, PREP, Lexicon


def make_lexicon(nouns=(), adjs=()) -> Lexicon:
    """A minimal closed lexicon for scripted prompts."""
    entries: dict[str, frozenset[str]] = {
        "a": frozenset({DET}),
        "an": frozenset({DET}),
        "the": frozenset({DET}),
        "and": frozenset({CONJ}),
        "with": frozenset({PREP}),
    }
    for word in nouns:
        for part in word.split():
            entries.setdefault(part, frozenset({NOUN}))
    for word in adjs:
        entries[word] = frozenset({ADJ})
    return Lexicon(entries)


class ScriptedBackend:
    """Backend whose attention, presence, suggestions, and embeddings all
    come from literal tables keyed by content-lemma phrase."""

    serial_only = False

    def __init__(
        self,
        attention: dict[str, float] | None = None,
        present: set[str] | frozenset[str] = frozenset(),
        suggestions: dict[tuple[str, str], list[str]] | None = None,
        vectors: dict[str, list[float]] | None = None,
        lexicon: Lexicon | None = None,
    ):
        self.attention = dict(attention or {})
        self.present = set(present)
        self.suggestions = dict(suggestions or {})
        self.vectors = dict(vectors or {})
        self.lexicon = lexicon
        self.extraction = ExtractionConfig(lexicon=lexicon)
        self.generate_calls = 0
        self.generated_texts: list[str] = []

    def generate(self, p: Prompt, seed: int) -> GenerationRecord:
        self.generate_calls += 1
        self.generated_texts.append(p.text)
        objects = extract_objects(p, self.extraction)
        scores = [0.0] * len(p.tokens)
        present: list[str] = []
        for entity in objects:
            phrase = content_lemma_phrase(entity, p, self.lexicon)
            level = self.attention.get(phrase, 0.0)
            for idx in head_token_indices(entity, p, self.lexicon):
                scores[idx] = level
            if phrase in self.present:
                present.append(phrase)
        ref = f"scripted:{seed}:" + "|".join(sorted(present))
        taps = tuple(TokenAttentionPair(i, s) for i, s in enumerate(scores))
        return GenerationRecord(prompt_id=p.id, image_ref=ref, taps=taps, seed=seed)

    def similarity(self, image_ref: str, text: str) -> float:
        shown = set(image_ref.split(":", 2)[2].split("|")) - {""}
        p = Prompt.from_text("_", text, self.lexicon)
        required = {
            content_lemma_phrase(e, p, self.lexicon)
            for e in extract_objects(p, self.extraction)
        }
        if not required:
            return 0.5
        return 0.9 if required <= shown else 0.1

    def suggest(self, template_kind: str, obj: str, prompt: str | None = None) -> list[str]:
        return list(self.suggestions.get((template_kind, obj), []))

    def embed(self, text: str) -> list[float]:
        key = " ".join(text.split()).lower()
        if key in self.vectors:
            return list(self.vectors[key])
        return [1.0, 0.0]


@pytest.fixture
def scripted_lexicon():
    return make_lexicon(
        nouns=("blork", "grint", "c1", "c2", "g1", "g2", "h1"),
    )
