"""WordNet noun-database access and hyponym-tree construction.

Reads standard WNDB-format files (index.noun, data.noun), either from a
caller-supplied directory or from the compact database bundled with the
package. Only the noun relations needed here are decoded: hyponym ("~")
and hypernym ("@") pointers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterator

from ..errors import LemmaNotFound, WordNetUnreadable

HYPONYM_POINTER = "~"
HYPERNYM_POINTER = "@"
DEFAULT_MAX_DEPTH = 6


@dataclass(frozen=True)
class Synset:
    offset: int
    words: tuple[str, ...]
    hypernyms: tuple[int, ...]
    hyponyms: tuple[int, ...]
    gloss: str

    def lemma(self) -> str:
        return self.words[0]


@dataclass
class HyponymNode:
    """One node of a hyponym tree; mutated in place by pruning and search."""

    lemma: str
    depth: int = 0
    parent: "HyponymNode | None" = field(default=None, repr=False)
    children: list["HyponymNode"] = field(default_factory=list)
    sim_to_root: float | None = None
    pruned: bool = False

    def add_child(self, child: "HyponymNode") -> "HyponymNode":
        child.parent = self
        child.depth = self.depth + 1
        self.children.append(child)
        return child

    def walk(self) -> Iterator["HyponymNode"]:
        """Every node of the subtree, pre-order."""
        yield self
        for child in self.children:
            yield from child.walk()

    def find(self, lemma: str) -> "HyponymNode | None":
        for node in self.walk():
            if node.lemma == lemma:
                return node
        return None

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def unpruned_children(self) -> list["HyponymNode"]:
        return [c for c in self.children if not c.pruned]


def _normalize_lemma(lemma: str) -> str:
    return "_".join(lemma.strip().lower().split())


def _denormalize(word: str) -> str:
    return word.replace("_", " ")


class NounDatabase:
    """Parsed index.noun + data.noun, with first-sense lemma lookup."""

    def __init__(self, index: dict[str, tuple[int, ...]], synsets: dict[int, Synset]):
        self._index = index
        self._synsets = synsets

    def __len__(self) -> int:
        return len(self._synsets)

    def synset(self, offset: int) -> Synset:
        try:
            return self._synsets[offset]
        except KeyError:
            raise WordNetUnreadable(f"dangling synset offset {offset:08d}") from None

    def senses(self, lemma: str) -> tuple[Synset, ...]:
        offsets = self._index.get(_normalize_lemma(lemma))
        if not offsets:
            raise LemmaNotFound(f"no noun entry for {lemma!r}")
        return tuple(self.synset(off) for off in offsets)

    def first_sense(self, lemma: str) -> Synset:
        # polysemous lemmas resolve to their first listed (most salient) sense
        return self.senses(lemma)[0]

    def lemmas(self) -> list[str]:
        return sorted(_denormalize(key) for key in self._index)


def _data_lines(path: Path) -> Iterator[tuple[int, str]]:
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise WordNetUnreadable(f"cannot read {path.name}: {exc}") from exc
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("  "):
            continue  # copyright/header block lines start with two spaces
        yield line_no, line.rstrip()


def _parse_index(path: Path) -> dict[str, tuple[int, ...]]:
    index: dict[str, tuple[int, ...]] = {}
    for line_no, line in _data_lines(path):
        parts = line.split()
        try:
            lemma, pos = parts[0], parts[1]
            if pos != "n":
                continue
            synset_cnt = int(parts[2])
            p_cnt = int(parts[3])
            tail = parts[4 + p_cnt :]
            # tail = sense_cnt tagsense_cnt offset...
            offsets = tuple(int(x) for x in tail[2 : 2 + synset_cnt])
            if len(offsets) != synset_cnt:
                raise ValueError("offset count mismatch")
        except (IndexError, ValueError) as exc:
            raise WordNetUnreadable(f"{path.name} line {line_no}: {exc}") from exc
        index[lemma] = offsets
    return index


def _parse_data(path: Path) -> dict[int, Synset]:
    synsets: dict[int, Synset] = {}
    for line_no, line in _data_lines(path):
        head, sep, gloss = line.partition("|")
        parts = head.split()
        try:
            offset = int(parts[0])
            ss_type = parts[2]
            if ss_type != "n":
                continue
            w_cnt = int(parts[3], 16)
            words = tuple(_denormalize(parts[4 + 2 * i]) for i in range(w_cnt))
            p_start = 4 + 2 * w_cnt
            p_cnt = int(parts[p_start])
            hypernyms: list[int] = []
            hyponyms: list[int] = []
            for i in range(p_cnt):
                symbol, target, pos, _src = parts[p_start + 1 + 4 * i : p_start + 5 + 4 * i]
                if pos != "n":
                    continue
                if symbol == HYPERNYM_POINTER:
                    hypernyms.append(int(target))
                elif symbol == HYPONYM_POINTER:
                    hyponyms.append(int(target))
        except (IndexError, ValueError) as exc:
            raise WordNetUnreadable(f"{path.name} line {line_no}: {exc}") from exc
        synsets[offset] = Synset(
            offset=offset,
            words=words,
            hypernyms=tuple(hypernyms),
            hyponyms=tuple(hyponyms),
            gloss=gloss.strip() if sep else "",
        )
    return synsets


def bundled_wordnet_dir() -> Path:
    """Directory of the compact noun database shipped with the package."""
    return Path(str(resources.files("patcher.data") / "wordnet"))


@lru_cache(maxsize=8)
def _load(directory: str) -> NounDatabase:
    root = Path(directory)
    index = _parse_index(root / "index.noun")
    synsets = _parse_data(root / "data.noun")
    for lemma, offsets in index.items():
        for off in offsets:
            if off not in synsets:
                raise WordNetUnreadable(f"index entry {lemma!r} points at missing {off:08d}")
    return NounDatabase(index, synsets)


def load_noun_database(wordnet_dir: str | Path | None = None) -> NounDatabase:
    directory = Path(wordnet_dir) if wordnet_dir is not None else bundled_wordnet_dir()
    return _load(str(directory))


def build_hyponym_tree(
    lemma: str,
    wordnet_dir: str | Path | None = None,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> HyponymNode:
    """Tree of all direct and indirect hyponyms of the lemma's first noun sense.

    Breadth-first over the hyponym pointers; a synset reachable through
    several parents is attached only at its first encounter, so the result
    is a proper tree even when the source graph is not.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be non-negative")
    db = load_noun_database(wordnet_dir)
    root_synset = db.first_sense(lemma)
    root = HyponymNode(lemma=root_synset.lemma(), depth=0)
    seen = {root_synset.offset}
    frontier: list[tuple[HyponymNode, Synset]] = [(root, root_synset)]
    while frontier:
        node, synset = frontier.pop(0)
        if node.depth >= max_depth:
            continue
        for child_offset in synset.hyponyms:
            if child_offset in seen:
                continue
            seen.add(child_offset)
            child_synset = db.synset(child_offset)
            child = node.add_child(HyponymNode(lemma=child_synset.lemma()))
            frontier.append((child, child_synset))
    return root
