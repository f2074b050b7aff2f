"""Word-class lexicon used by the tokenizer and the rule-based chunker.

The bundled table covers the closed vocabulary of the shipped datasets,
the taxonomy lemmas, and the modifier phrases produced by enhancement.
Format: one ``word<TAB>POS`` pair per line, ``#`` starts a comment;
a word may appear on several lines when it carries several classes
("orange" is both a color adjective and a fruit noun).
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

NOUN = "NOUN"
ADJ = "ADJ"
DET = "DET"
CONJ = "CONJ"
PREP = "PREP"
OTHER = "OTHER"

_VALID_POS = {NOUN, ADJ, DET, CONJ, PREP, OTHER}


class Lexicon:
    """Immutable word -> part-of-speech table with plural folding support."""

    def __init__(self, entries: dict[str, frozenset[str]]):
        for word, tags in entries.items():
            bad = set(tags) - _VALID_POS
            if bad:
                raise ValueError(f"unknown part of speech {bad} for {word!r}")
        self._entries = {w: frozenset(t) for w, t in entries.items()}

    def __contains__(self, word: str) -> bool:
        return word in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def tags(self, word: str) -> frozenset[str]:
        """All word classes for a lowercased word; {OTHER} when unknown."""
        return self._entries.get(word, frozenset({OTHER}))

    def is_noun(self, word: str) -> bool:
        return NOUN in self.tags(word)

    def singularize(self, word: str) -> str:
        """Fold a regular plural onto its singular.

        The fold only happens when the word itself has no entry and the
        bare singular does; lexical plurals such as "glasses" keep their
        own entry and survive unchanged.
        """
        if word in self._entries:
            return word
        if word.endswith("s") and len(word) > 1 and word[:-1] in self._entries:
            return word[:-1]
        if word.endswith("es") and len(word) > 2 and word[:-2] in self._entries:
            return word[:-2]
        return word

    @classmethod
    def from_path(cls, path: Path | str) -> "Lexicon":
        entries: dict[str, set[str]] = {}
        text = Path(path).read_text(encoding="utf-8")
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{line_no}: expected 'word<TAB>POS'")
            entries.setdefault(parts[0].strip().lower(), set()).add(parts[1].strip().upper())
        return cls({w: frozenset(t) for w, t in entries.items()})


@lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    """The lexicon bundled with the package."""
    with resources.as_file(resources.files("patcher.data") / "lexicon.tsv") as p:
        return Lexicon.from_path(p)
