"""Benchmark prompt corpora: template-based generation, language-model
composition, and JSONL persistence.

Three corpus families are supported: the template-based two-object set
(animal pairs, animal + colored object, colored-object pairs), and the
composed two- and three-object sets built over a flat category
vocabulary with a suggester writing the sentences.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .backends.base import TEMPLATE_COMPOSE, SuggesterCapability
from .domain import Prompt, normalize_article_words
from .errors import MalformedRecord, WrongVocabularySize
from .extraction import ExtractionConfig, content_lemma_phrase, extract_objects
from .lexicon import Lexicon

SOURCE_TBP = "TBP"
SOURCE_TWOP = "TwOP"
SOURCE_THREEOP = "ThreeOP"
SOURCE_CUSTOM = "custom"
SOURCES = (SOURCE_TBP, SOURCE_TWOP, SOURCE_THREEOP, SOURCE_CUSTOM)

TBP_ANIMAL_COUNT = 12
TBP_OBJECT_COUNT = 12
TBP_COLOR_COUNT = 11


def bundled_tbp_vocabulary() -> dict[str, list[str]]:
    """The packaged template vocabulary: animals, objects, colors."""
    from importlib import resources

    raw = (resources.files("patcher.data") / "tbp_vocab.json").read_text("utf-8")
    return json.loads(raw)


def bundled_categories() -> list[str]:
    """The packaged flat category vocabulary for composed corpora."""
    from importlib import resources

    raw = (resources.files("patcher.data") / "mscoco_objects.json").read_text("utf-8")
    return json.loads(raw)


@dataclass(frozen=True)
class PromptRecord:
    """One benchmark prompt plus the objects it asks for."""

    id: str
    prompt: str
    objects: tuple[str, ...]
    num_objects: int
    source: str

    def __post_init__(self) -> None:
        if not self.objects:
            raise ValueError("objects must be non-empty")
        if self.num_objects != len(self.objects):
            raise ValueError(
                f"num_objects {self.num_objects} disagrees with {len(self.objects)} objects"
            )
        if self.num_objects not in (1, 2, 3):
            raise ValueError("num_objects must be 1, 2, or 3")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}, not {self.source!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "prompt": self.prompt,
            "objects": list(self.objects),
            "num_objects": self.num_objects,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "PromptRecord":
        return cls(
            id=str(d["id"]),
            prompt=str(d["prompt"]),
            objects=tuple(str(x) for x in d["objects"]),
            num_objects=int(d["num_objects"]),
            source=str(d["source"]),
        )


def _sentence(*phrases: str) -> str:
    """Indefinite articles + "and": the fallback composition template."""
    words: list[str] = []
    for i, phrase in enumerate(phrases):
        if i:
            words.append("and")
        words.append("a")
        words.extend(phrase.split())
    return " ".join(normalize_article_words(words))


def _check_vocab(name: str, values: Sequence[str], expected: int) -> list[str]:
    unique = list(dict.fromkeys(v.strip() for v in values if v and v.strip()))
    if len(unique) != expected or len(values) != expected:
        raise WrongVocabularySize(
            f"{name} needs exactly {expected} unique entries, got {len(values)} "
            f"({len(unique)} unique)"
        )
    return unique


def generate_tbp(
    animals: Sequence[str], objects: Sequence[str], colors: Sequence[str]
) -> list[PromptRecord]:
    """All prompts of the three two-object template families.

    Family 1 pairs distinct animals (unordered); family 2 crosses every
    animal with every (color, object) combo; family 3 pairs colored
    objects with distinct object nouns (unordered). Enumeration order and
    ids are deterministic.
    """
    animals = _check_vocab("animals", animals, TBP_ANIMAL_COUNT)
    objects = _check_vocab("objects", objects, TBP_OBJECT_COUNT)
    colors = _check_vocab("colors", colors, TBP_COLOR_COUNT)

    records: list[PromptRecord] = []
    for k, (a, b) in enumerate(itertools.combinations(animals, 2)):
        records.append(
            PromptRecord(
                id=f"tbp1-{k:04d}",
                prompt=_sentence(a, b),
                objects=(a, b),
                num_objects=2,
                source=SOURCE_TBP,
            )
        )
    k = 0
    for animal in animals:
        for color in colors:
            for obj in objects:
                records.append(
                    PromptRecord(
                        id=f"tbp2-{k:04d}",
                        prompt=_sentence(animal, f"{color} {obj}"),
                        objects=(animal, obj),
                        num_objects=2,
                        source=SOURCE_TBP,
                    )
                )
                k += 1
    combos = [(c, o) for c in colors for o in objects]
    k = 0
    for i, (c1, o1) in enumerate(combos):
        for c2, o2 in combos[i + 1 :]:
            if o1 == o2:
                continue  # same noun twice would collapse to one object
            records.append(
                PromptRecord(
                    id=f"tbp3-{k:04d}",
                    prompt=_sentence(f"{c1} {o1}", f"{c2} {o2}"),
                    objects=(o1, o2),
                    num_objects=2,
                    source=SOURCE_TBP,
                )
            )
            k += 1
    return records


def compose_multiobject(
    singles: Sequence[str],
    n: int,
    suggester: SuggesterCapability | None,
    *,
    count: int | None = None,
    seed: int = 0,
    lexicon: Lexicon | None = None,
) -> list[PromptRecord]:
    """Compose multi-object prompts over a flat category vocabulary.

    Each combination is sent to the suggester (keyed by the sorted,
    "|"-joined lemmas); a composed sentence only counts when every source
    lemma survives object extraction on it, otherwise the plain
    "a A and a B (and a C)" template steps in. Without a suggester every
    record uses the template. ``count`` defaults to all combinations for
    pairs and to the pair-corpus size for triples (sampled with ``seed``).
    """
    if n not in (2, 3):
        raise ValueError("n must be 2 or 3")
    vocabulary = list(dict.fromkeys(s.strip() for s in singles if s and s.strip()))
    if len(vocabulary) < n:
        raise WrongVocabularySize(f"need at least {n} unique categories")
    combos = list(itertools.combinations(vocabulary, n))
    if count is None:
        count = math.comb(len(vocabulary), 2) if n == 3 else len(combos)
    if count < len(combos):
        combos = sorted(random.Random(seed).sample(combos, count))
    if suggester is None:
        warnings.warn(
            "no suggester configured; composing every prompt from the fallback template",
            RuntimeWarning,
            stacklevel=2,
        )

    source = SOURCE_TWOP if n == 2 else SOURCE_THREEOP
    tag = "twop" if n == 2 else "threeop"
    extraction = ExtractionConfig(lexicon=lexicon)
    records: list[PromptRecord] = []
    for k, combo in enumerate(combos):
        text: str | None = None
        if suggester is not None:
            key = "|".join(sorted(combo))
            items = suggester.suggest(TEMPLATE_COMPOSE, key)
            if items and items[0].strip():
                candidate = items[0].strip()
                if _covers(candidate, combo, extraction):
                    text = candidate
        if text is None:
            text = _sentence(*combo)
        records.append(
            PromptRecord(
                id=f"{tag}-{k:04d}",
                prompt=text,
                objects=tuple(combo),
                num_objects=n,
                source=source,
            )
        )
    return records


def _covers(text: str, lemmas: Iterable[str], extraction: ExtractionConfig) -> bool:
    """Does extraction on the text recover every requested lemma?"""
    p = Prompt.from_text("_", text, extraction.lexicon)
    entities = extract_objects(p, extraction)
    phrases = {content_lemma_phrase(e, p, extraction.lexicon) for e in entities}
    return all(lemma in phrases for lemma in lemmas)


def save_dataset(records: Iterable[PromptRecord], path: str | Path) -> None:
    lines = [json.dumps(r.to_dict(), ensure_ascii=False) for r in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), "utf-8")


def load_dataset(path: str | Path) -> list[PromptRecord]:
    records: list[PromptRecord] = []
    text = Path(path).read_text("utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"not valid JSON: {exc.msg}") from exc
        try:
            records.append(PromptRecord.from_dict(payload))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(line_no, str(exc)) from exc
    return records
