"""Core value types passed between pipeline stages.

Everything here is immutable; stages communicate by constructing new
values, never by mutating shared state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

from .lexicon import Lexicon, default_lexicon

_EDGE_PUNCT = ".,;:!?\"'()[]{}"


class ObjectStatus(str, Enum):
    UNKNOWN = "unknown"
    NEGLECTED = "neglected"
    CORRECT = "correct"


class RepairStatus(str, Enum):
    ALREADY_CORRECT = "already_correct"
    REPAIRED = "repaired"
    BEST_EFFORT = "best_effort"


class CandidateKind(str, Enum):
    COLOR = "color"
    SHAPE = "shape"
    # The fallback that merges the best color and best shape feature.
    COMBINED = "combined"
    HYPONYM = "hyponym"
    # Whole-prompt rewrites produced by the language-model baseline.
    REWRITE = "rewrite"


class CandidateSource(str, Enum):
    LLM = "llm"
    TAXONOMY = "taxonomy"


# ===== tokens and prompts =====

@dataclass(frozen=True)
class Token:
    """One whitespace-delimited word of a prompt.

    The surface keeps punctuation and case; the lemma is lowercased,
    stripped of edge punctuation, and folded onto a lexicon singular.
    """

    index: int
    surface: str
    lemma: str

    def to_dict(self) -> dict[str, Any]:
        return {"index": self.index, "surface": self.surface, "lemma": self.lemma}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Token":
        return cls(index=int(d["index"]), surface=str(d["surface"]), lemma=str(d["lemma"]))


def lemma_of(word: str, lexicon: Lexicon | None = None) -> str:
    """Lemma for a single surface word."""
    lex = lexicon or default_lexicon()
    bare = word.strip(_EDGE_PUNCT).lower()
    if not bare:
        return word.lower()
    return lex.singularize(bare)


# words whose spelling and initial sound disagree
_VOWEL_SOUND_STARTS = ("hour", "honest", "honor", "heir")
_CONSONANT_SOUND_STARTS = ("uni", "use", "user", "one", "once", "eu", "ewe")


def _wants_an(word: str) -> bool:
    bare = word.strip(_EDGE_PUNCT).lower()
    if not bare:
        return False
    if bare.startswith(_VOWEL_SOUND_STARTS):
        return True
    if bare.startswith(_CONSONANT_SOUND_STARTS):
        return False
    return bare[0] in "aeiou"


def normalize_article_words(words: Sequence[str]) -> list[str]:
    """Fix a/an agreement against the following word's initial sound.

    Idempotent, and only ever touches the articles themselves, so applying
    it after a substitution leaves every other word byte-identical.
    """
    out = list(words)
    for i, w in enumerate(out[:-1]):
        low = w.lower()
        if low not in ("a", "an"):
            continue
        fixed = "an" if _wants_an(out[i + 1]) else "a"
        if low != fixed:
            out[i] = fixed.capitalize() if w[0].isupper() else fixed
    return out


@dataclass(frozen=True)
class Prompt:
    id: str
    text: str
    tokens: tuple[Token, ...]

    @classmethod
    def from_text(cls, prompt_id: str, text: str, lexicon: Lexicon | None = None) -> "Prompt":
        """Tokenize free text into a prompt.

        Words are split at whitespace only, so hyphenated modifiers stay
        whole; the stored text is whitespace-normalized so that joining
        the surfaces reproduces it byte for byte.
        """
        words = text.split()
        tokens = tuple(
            Token(index=i, surface=w, lemma=lemma_of(w, lexicon)) for i, w in enumerate(words)
        )
        return cls(id=prompt_id, text=" ".join(words), tokens=tokens)

    @classmethod
    def from_tokens(cls, prompt_id: str, tokens: Sequence[Token]) -> "Prompt":
        toks = tuple(replace(t, index=i) for i, t in enumerate(tokens))
        return cls(id=prompt_id, text=" ".join(t.surface for t in toks), tokens=toks)

    def lemmas(self) -> tuple[str, ...]:
        return tuple(t.lemma for t in self.tokens)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "text": self.text,
            "tokens": [t.to_dict() for t in self.tokens],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Prompt":
        return cls(
            id=str(d["id"]),
            text=str(d["text"]),
            tokens=tuple(Token.from_dict(t) for t in d["tokens"]),
        )


# ===== extracted objects =====

@dataclass(frozen=True)
class ObjectEntity:
    """A noun phrase the prompt asks the image to contain.

    ``span`` is an inclusive (start, end) token-index pair; ``head_lemma``
    is the lemma of the phrase's head noun.
    """

    phrase: str
    head_lemma: str
    span: tuple[int, int]
    status: ObjectStatus = ObjectStatus.UNKNOWN

    def with_status(self, status: ObjectStatus) -> "ObjectEntity":
        return replace(self, status=status)

    def to_dict(self) -> dict[str, Any]:
        return {
            "phrase": self.phrase,
            "head_lemma": self.head_lemma,
            "span": list(self.span),
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ObjectEntity":
        span = d["span"]
        return cls(
            phrase=str(d["phrase"]),
            head_lemma=str(d["head_lemma"]),
            span=(int(span[0]), int(span[1])),
            status=ObjectStatus(d.get("status", "unknown")),
        )


# ===== generation results =====

@dataclass(frozen=True)
class TokenAttentionPair:
    token_index: int
    score: float

    def to_dict(self) -> dict[str, Any]:
        return {"token_index": self.token_index, "score": self.score}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TokenAttentionPair":
        return cls(token_index=int(d["token_index"]), score=float(d["score"]))


@dataclass(frozen=True)
class GenerationRecord:
    """One image generation plus its per-token attention readout."""

    prompt_id: str
    image_ref: str
    taps: tuple[TokenAttentionPair, ...]
    seed: int

    def scores(self) -> tuple[float, ...]:
        return tuple(t.score for t in self.taps)

    def to_dict(self) -> dict[str, Any]:
        return {
            "prompt_id": self.prompt_id,
            "image_ref": self.image_ref,
            "taps": [t.to_dict() for t in self.taps],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GenerationRecord":
        return cls(
            prompt_id=str(d["prompt_id"]),
            image_ref=str(d["image_ref"]),
            taps=tuple(TokenAttentionPair.from_dict(t) for t in d["taps"]),
            seed=int(d["seed"]),
        )


# ===== repair bookkeeping =====

@dataclass(frozen=True)
class FeatureCandidate:
    """One replacement description tried for a neglected object."""

    kind: CandidateKind
    phrase: str
    target: str
    source: CandidateSource
    att_diff: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "phrase": self.phrase,
            "target": self.target,
            "source": self.source.value,
            "att_diff": self.att_diff,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "FeatureCandidate":
        att = d.get("att_diff")
        return cls(
            kind=CandidateKind(d["kind"]),
            phrase=str(d["phrase"]),
            target=str(d["target"]),
            source=CandidateSource(d["source"]),
            att_diff=None if att is None else float(att),
        )


@dataclass(frozen=True)
class TrailEntry:
    candidate: FeatureCandidate
    passed: bool
    att_diff: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "candidate": self.candidate.to_dict(),
            "passed": self.passed,
            "att_diff": self.att_diff,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TrailEntry":
        att = d.get("att_diff")
        return cls(
            candidate=FeatureCandidate.from_dict(d["candidate"]),
            passed=bool(d["passed"]),
            att_diff=None if att is None else float(att),
        )


@dataclass(frozen=True)
class RepairOutcome:
    """Result of one repair run.

    ``attempts`` counts every generation call the run made, including the
    initial detection pass when the producing stage performed one, so it
    can exceed the number of candidate trials in the trail.
    ``final_att_diff`` is None whenever no attention gap was measurable.
    """

    prompt_id: str
    status: RepairStatus
    final_prompt: Prompt
    attempts: int
    trail: tuple[TrailEntry, ...] = ()
    final_att_diff: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "prompt_id": self.prompt_id,
            "status": self.status.value,
            "final_prompt": self.final_prompt.to_dict(),
            "attempts": self.attempts,
            "trail": [t.to_dict() for t in self.trail],
            "final_att_diff": self.final_att_diff,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RepairOutcome":
        att = d.get("final_att_diff")
        return cls(
            prompt_id=str(d["prompt_id"]),
            status=RepairStatus(d["status"]),
            final_prompt=Prompt.from_dict(d["final_prompt"]),
            attempts=int(d["attempts"]),
            trail=tuple(TrailEntry.from_dict(t) for t in d.get("trail", [])),
            final_att_diff=None if att is None else float(att),
        )


# ===== validation =====

def validate_prompt(
    p: Prompt,
    objects: Sequence[ObjectEntity] = (),
    taps: Sequence[TokenAttentionPair] | None = None,
) -> list[str]:
    """Check structural invariants; returns a list of violations, empty when ok."""
    violations: list[str] = []
    n = len(p.tokens)
    seen: set[int] = set()
    for pos, tok in enumerate(p.tokens):
        if tok.index != pos:
            violations.append(f"token at position {pos} carries index {tok.index}")
        if tok.index in seen:
            violations.append(f"duplicate token index {tok.index}")
        seen.add(tok.index)
        if not tok.surface:
            violations.append(f"token {pos} has an empty surface")
        if not tok.lemma:
            violations.append(f"token {pos} has an empty lemma")
    joined = " ".join(t.surface for t in p.tokens)
    if joined != " ".join(p.text.split()):
        violations.append("token surfaces do not reproduce the normalized text")

    for obj in objects:
        start, end = obj.span
        if start > end:
            violations.append(f"object {obj.phrase!r}: start>end in span {obj.span}")
        if start < 0 or end >= n:
            violations.append(f"object {obj.phrase!r}: span {obj.span} outside 0..{n - 1}")
        if not obj.phrase:
            violations.append("object with empty phrase")
        if not obj.head_lemma:
            violations.append(f"object {obj.phrase!r} has an empty head lemma")

    if taps is not None:
        if len(taps) != n:
            violations.append(f"{len(taps)} attention pairs for {n} tokens")
        for pair in taps:
            if pair.token_index < 0 or pair.token_index >= n:
                violations.append(f"attention pair index {pair.token_index} outside 0..{n - 1}")
            if pair.score < 0 or not math.isfinite(pair.score):
                violations.append(f"attention score {pair.score} is not a finite non-negative number")
    return violations


def validate_outcome(outcome: RepairOutcome) -> list[str]:
    """Check the cross-field consistency rules every repair result must obey."""
    violations: list[str] = []
    if outcome.attempts < len(outcome.trail):
        violations.append(
            f"attempts {outcome.attempts} below trail length {len(outcome.trail)}"
        )
    if outcome.attempts < 0:
        violations.append("negative attempts")
    if outcome.final_att_diff is not None and outcome.final_att_diff < 0:
        violations.append("negative final_att_diff")

    passed = [e for e in outcome.trail if e.passed]
    if outcome.status is RepairStatus.REPAIRED:
        if not outcome.trail or not outcome.trail[-1].passed:
            violations.append("repaired outcome whose last trail entry did not pass")
    elif outcome.status is RepairStatus.BEST_EFFORT:
        if passed:
            violations.append("best_effort outcome with a passing trail entry")
    elif outcome.status is RepairStatus.ALREADY_CORRECT:
        if outcome.trail:
            violations.append("already_correct outcome with a non-empty trail")
    return violations


def best_trail_entry(trail: Sequence[TrailEntry]) -> TrailEntry | None:
    """Entry with the smallest measured attention gap; earliest wins ties.

    Entries without a measurement compare as infinitely bad; None when the
    trail holds no measurement at all.
    """
    best: TrailEntry | None = None
    for entry in trail:
        if entry.att_diff is None:
            continue
        if best is None or entry.att_diff < best.att_diff:  # strict: ties keep the earliest
            best = entry
    return best
