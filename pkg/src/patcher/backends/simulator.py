"""Deterministic in-process stand-in for a text-to-image model.

A SimWorld assigns every object lemma a salience; an object appears in
the "image" when its share of the total effective salience clears the
appearance threshold. Modifier words and taxonomy depth add salience,
which is what makes repairs possible. All outputs are pure functions of
(world, inputs), so every test run sees identical behavior.

Image references are self-describing ("sim:<seed>:<present phrases>"),
so similarity scoring needs no registry and survives process restarts.
Presence is keyed by content-lemma phrases; two prompt objects that
share their full content phrase are indistinguishable to this backend.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..domain import (
    GenerationRecord,
    ObjectEntity,
    Prompt,
    TokenAttentionPair,
    lemma_of,
    normalize_article_words,
)
from ..errors import UnknownImageRef
from ..extraction import (
    ExtractionConfig,
    content_lemma_phrase,
    extract_objects,
    head_token_indices,
    phrase_lemmas,
)
from ..lexicon import Lexicon, default_lexicon
from . import fixture
from .base import TEMPLATE_KINDS, TEMPLATE_LLM_REPAIR

DEFAULT_SALIENCE = 0.1
BACKGROUND_ATTENTION = 0.01
PRESENT_SIMILARITY = 0.9
ABSENT_SIMILARITY = 0.1
BARE_TEXT_SIMILARITY = 0.5
JITTER = 0.02

EMBED_DIM = 512
_GROUP_WEIGHT = 0.92  # cosine between same-group lemmas lands near its square


def _hash_unit(key: str) -> float:
    """Deterministic uniform draw in [0, 1) keyed by a string."""
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") / 2**64


def _hash_vector(key: str) -> np.ndarray:
    seed = int.from_bytes(hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest(), "big")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(EMBED_DIM)
    return v / np.linalg.norm(v)


@dataclass(frozen=True, eq=False)
class SimWorld:
    """Parameters of one simulated world.

    salience maps content-lemma phrases (or bare head lemmas) to non-negative
    weights; modifier_bonus maps modifier lemmas to the salience they add;
    depth_bonus is added once per taxonomy level of a substituted hyponym.
    """

    salience: Mapping[str, float]
    modifier_bonus: Mapping[str, float] = field(default_factory=dict)
    depth_bonus: float = 0.0
    appearance_threshold: float = 0.3
    seed: int = 0
    taxonomy: Mapping[str, Mapping[str, Any]] | None = None
    drifted: frozenset[str] = frozenset()
    lexicon: Lexicon | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.appearance_threshold < 1.0:
            raise ValueError("appearance_threshold must sit strictly inside (0, 1)")
        if self.depth_bonus < 0:
            raise ValueError("depth_bonus must be non-negative")
        for lemma, value in self.salience.items():
            if value < 0:
                raise ValueError(f"negative salience for {lemma!r}")
        for lemma, value in self.modifier_bonus.items():
            if value < 0:
                raise ValueError(f"negative modifier bonus for {lemma!r}")

    def taxon(self) -> Mapping[str, Mapping[str, Any]]:
        return self.taxonomy if self.taxonomy is not None else fixture.taxonomy_table()


def default_world(seed: int = 0) -> SimWorld:
    """A reproducible world covering the bundled vocabularies."""
    from importlib import resources
    import json

    categories: list[str] = json.loads(
        (resources.files("patcher.data") / "mscoco_objects.json").read_text("utf-8")
    )
    tbp = json.loads((resources.files("patcher.data") / "tbp_vocab.json").read_text("utf-8"))
    salience = {}
    for name in categories + tbp["animals"] + tbp["objects"]:
        salience[name] = round(0.5 + 3.0 * _hash_unit(f"salience:{name}"), 4)
    return SimWorld(
        salience=salience,
        modifier_bonus=fixture.default_modifier_bonus(),
        depth_bonus=1.0,
        appearance_threshold=0.3,
        seed=seed,
    )


class SimulatorBackend:
    """All four backend capabilities over one SimWorld."""

    serial_only = False

    def __init__(self, world: SimWorld | None = None):
        self.world = world if world is not None else default_world()
        self._extraction = ExtractionConfig(lexicon=self.world.lexicon)
        self._lex = self.world.lexicon or default_lexicon()

    # ----- generation -----

    def effective_salience(self, entity: ObjectEntity, p: Prompt) -> float:
        lemmas = content_lemma_phrase(entity, p, self._lex).split(" ")
        return self._effective_salience_of_lemmas(lemmas, entity.head_lemma)

    def _effective_salience_of_lemmas(self, lemmas: list[str], head: str) -> float:
        world = self.world
        mods = [l for l in lemmas if l in world.modifier_bonus]
        core_words = [l for l in lemmas if l not in world.modifier_bonus]
        core = " ".join(core_words) if core_words else head
        base = world.salience.get(core)
        if base is None:
            base = world.salience.get(head, DEFAULT_SALIENCE)
        taxon = world.taxon()
        entry = taxon.get(core) or taxon.get(head)
        depth = int(entry["depth"]) if entry else 0
        return base + sum(world.modifier_bonus[m] for m in mods) + world.depth_bonus * depth

    def generate(self, p: Prompt, seed: int) -> GenerationRecord:
        objects = extract_objects(p, self._extraction)
        eff = [self.effective_salience(e, p) for e in objects]
        total = sum(eff)
        shares = [v / total if total > 0 else 0.0 for v in eff]

        scores = [BACKGROUND_ATTENTION] * len(p.tokens)
        present: list[str] = []
        for entity, share in zip(objects, shares):
            indices = head_token_indices(entity, p, self._lex)
            for idx in indices:
                scores[idx] = share / len(indices)
            if share >= self.world.appearance_threshold:
                present.append(content_lemma_phrase(entity, p, self._lex))

        image_ref = f"sim:{seed}:" + "|".join(sorted(present))
        taps = tuple(TokenAttentionPair(i, s) for i, s in enumerate(scores))
        return GenerationRecord(prompt_id=p.id, image_ref=image_ref, taps=taps, seed=seed)

    # ----- scoring -----

    @staticmethod
    def present_set(image_ref: str) -> frozenset[str]:
        """Decode the ground-truth present set from a simulator image ref."""
        parts = image_ref.split(":", 2)
        if len(parts) != 3 or parts[0] != "sim":
            raise UnknownImageRef(f"not a simulator image ref: {image_ref!r}")
        try:
            int(parts[1])
        except ValueError:
            raise UnknownImageRef(f"bad seed in image ref: {image_ref!r}") from None
        return frozenset(x for x in parts[2].split("|") if x)

    def similarity(self, image_ref: str, text: str) -> float:
        present = self.present_set(image_ref)
        phrases = self._text_phrases(text)
        if not phrases:
            return BARE_TEXT_SIMILARITY
        base = sum(
            PRESENT_SIMILARITY if ph in present else ABSENT_SIMILARITY for ph in phrases
        ) / len(phrases)
        jitter = (2.0 * _hash_unit(f"{image_ref}\x00{text}") - 1.0) * JITTER
        return min(1.0, max(0.0, base + jitter))

    def _text_phrases(self, text: str) -> list[str]:
        p = Prompt.from_text("_", text, self._lex)
        entities = extract_objects(p, self._extraction)
        return [content_lemma_phrase(e, p, self._lex) for e in entities]

    # ----- suggestions -----

    def suggest(self, template_kind: str, obj: str, prompt: str | None = None) -> list[str]:
        if template_kind not in TEMPLATE_KINDS:
            raise ValueError(f"unknown template kind {template_kind!r}")
        table = fixture.suggestion_table().get(template_kind, {})
        entries = list(table.get(obj, []))
        if template_kind == TEMPLATE_LLM_REPAIR and prompt:
            return [self._rewrite_prompt(prompt, obj, phrase) for phrase in entries]
        return entries

    def _rewrite_prompt(self, prompt: str, obj: str, phrase: str) -> str:
        """Whole-prompt rewrite: the object's mention swapped for a richer one."""
        words = prompt.split()
        out: list[str] = []
        replaced = False
        for w in words:
            if not replaced and lemma_of(w, self._lex) == obj:
                out.extend(phrase.split())
                replaced = True
            else:
                out.append(w)
        if not replaced:
            out = words + phrase.split()
        return " ".join(normalize_article_words(out))

    # ----- embeddings -----

    def embed(self, text: str) -> list[float]:
        phrase = " ".join(phrase_lemmas(text, self._lex)) or text.strip().lower()
        v = self._embed_phrase(phrase)
        return v.tolist()

    def _embed_phrase(self, phrase: str) -> np.ndarray:
        group = self._group_of(phrase)
        noise = _hash_vector(f"embed:{phrase}")
        if group is None:
            return noise
        g = _hash_vector(f"group:{group}")
        beta = (1.0 - _GROUP_WEIGHT**2) ** 0.5
        v = _GROUP_WEIGHT * g + beta * noise
        return v / np.linalg.norm(v)

    def _group_of(self, phrase: str) -> str | None:
        if phrase in self.world.drifted or phrase in fixture.drifted_lemmas():
            return None
        taxon = self.world.taxon()
        if phrase in taxon:
            return str(taxon[phrase]["root"])
        if phrase in fixture.taxonomy_roots():
            return phrase
        return None
