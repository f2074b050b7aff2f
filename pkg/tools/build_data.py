#!/usr/bin/env python3
"""Regenerate the data files bundled under src/patcher/data/.

One master table drives everything so the lexicon, the simulator fixture,
and the noun taxonomy database can never drift apart. The taxonomy files
use the standard WNDB layout (index.noun / data.noun) with real byte
offsets, so the package parser also reads full-size installations.
"""

from __future__ import annotations

import json
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "patcher" / "data"

# ===== vocabularies =====

TBP_ANIMALS = [
    "cat", "dog", "bird", "bear", "lion", "horse",
    "elephant", "monkey", "frog", "turtle", "rabbit", "mouse",
]
TBP_OBJECTS = [
    "backpack", "glasses", "crown", "suitcase", "chair", "balloon",
    "bow", "car", "bowl", "bench", "clock", "apple",
]
TBP_COLORS = [
    "red", "orange", "yellow", "green", "blue", "purple",
    "pink", "brown", "gray", "black", "white",
]

MSCOCO_OBJECTS = [
    "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train",
    "truck", "boat", "traffic light", "fire hydrant", "stop sign",
    "parking meter", "bench", "bird", "cat", "dog", "horse", "sheep",
    "cow", "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella",
    "handbag", "tie", "suitcase", "frisbee", "skis", "snowboard",
    "sports ball", "kite", "baseball bat", "baseball glove", "skateboard",
    "surfboard", "tennis racket", "bottle", "wine glass", "cup", "fork",
    "knife", "spoon", "bowl", "banana", "apple", "sandwich", "orange",
    "broccoli", "carrot", "hot dog", "pizza", "donut", "cake", "chair",
    "couch", "potted plant", "bed", "dining table", "toilet", "tv",
    "laptop", "mouse", "remote", "keyboard", "cell phone", "microwave",
    "oven", "toaster", "sink", "refrigerator", "book", "clock", "vase",
    "scissors", "teddy bear", "hair drier", "toothbrush",
]

# ===== noun taxonomy (nested: root -> children -> ...) =====

TAXONOMY: dict[str, dict] = {
    "bicycle": {
        "mountain bike": {"suspension fork": {}, "all-terrain bike": {}},
        "road bike": {"racing bicycle": {}},
        "tandem bicycle": {},
        "safety bicycle": {},
        "velocipede": {},
    },
    "bird": {
        "eagle": {"bald eagle": {}, "golden eagle": {}},
        "hawk": {},
        "owl": {},
        "sparrow": {},
        "penguin": {},
        "parrot": {"macaw": {}},
    },
    "dog": {
        "hunting dog": {"hound": {}, "terrier": {}, "dachshund": {}, "courser": {}, "beagle": {}},
        "lapdog": {"toy dog": {}},
    },
    "cat": {
        "wildcat": {"cougar": {}, "lynx": {}, "bobcat": {}, "ocelot": {}, "caracal": {}},
        "housecat": {"tabby cat": {}},
    },
    "boat": {
        "rowboat": {"dinghy": {}, "dory": {}, "skiff": {}, "wherry": {}, "gig": {}},
        "sailboat": {"catamaran": {}},
    },
    "truck": {
        "delivery truck": {
            "panel truck": {}, "milk float": {}, "bookmobile": {},
            "mail truck": {}, "laundry truck": {},
        },
        "pickup": {"stake truck": {}},
    },
    "horse": {
        "draft horse": {
            "clydesdale": {}, "percheron": {}, "shire horse": {},
            "punch": {}, "dray horse": {},
        },
        "pony": {"shetland pony": {}},
    },
    "car": {"sports car": {}, "taxi": {}, "coupe": {}},
    "bear": {"grizzly bear": {}, "polar bear": {}, "sloth bear": {}},
    "rabbit": {"cottontail": {}, "jackrabbit": {}, "angora rabbit": {}},
    "elephant": {"indian elephant": {}, "african elephant": {}},
    "monkey": {"macaque": {}, "baboon": {}, "capuchin": {}},
    "turtle": {"sea turtle": {}, "box turtle": {}, "snapping turtle": {}},
    "frog": {"tree frog": {}, "bullfrog": {}, "leopard frog": {}},
    "mouse": {"field mouse": {}, "house mouse": {}},
    "apple": {"crab apple": {}, "eating apple": {}, "cooking apple": {}},
    "chair": {"armchair": {}, "rocking chair": {}, "folding chair": {}},
    "clock": {"alarm clock": {}, "cuckoo clock": {}},
    "bench": {"park bench": {}},
    "balloon": {"hot-air balloon": {}},
    "lion": {"lion cub": {}},
    "sheep": {"lamb": {}, "ram": {}},
    "cow": {"calf": {}, "heifer": {}},
    "couch": {"settee": {}, "divan": {}},
    "bottle": {"water bottle": {}, "flask": {}},
    "cup": {"teacup": {}, "mug": {}},
    "bed": {"bunk bed": {}, "four-poster": {}},
    "book": {"paperback": {}, "notebook": {}},
    "kite": {"box kite": {}},
    "umbrella": {"parasol": {}},
}

# Lemmas whose meaning drifts away from the concept they hang under; the
# embedding fixture keeps them unrelated to their root so pruning removes them.
DRIFTED = ["suspension fork", "velocipede"]

# A second, unrelated sense appended after the first one so multi-sense
# lookups are exercised: the pointing device, listed after the animal.
EXTRA_SENSES = {"mouse": "mouse (device)"}

# ===== simulator suggestion fixture =====

SUGGESTIONS = {
    "shape": {
        "bicycle": [
            "two-wheeled bicycle",
            "bicycle with pedals",
            "bicycle with chain and gears",
        ],
        "donut": ["hollow-centered donut", "ring-shaped donut"],
        "suitcase": ["rectangular suitcase"],
        "glasses": ["round glasses"],
        "vase": ["tall vase"],
    },
    "color": {
        "apple": ["red apple", "green apple"],
        "bicycle": ["red bicycle", "blue bicycle"],
        "rabbit": ["white rabbit", "brown rabbit"],
        "turtle": ["green turtle", "brown turtle"],
        "monkey": ["brown monkey", "black monkey"],
        "backpack": ["pale backpack", "red backpack"],
        "crown": ["golden crown"],
        "bowl": ["ivory bowl"],
        "vase": ["blue vase"],
    },
    "llm_repair": {
        "apple": ["shiny apple", "red apple"],
        "rabbit": ["small rabbit", "white rabbit"],
        "turtle": ["nice turtle", "green turtle"],
        "monkey": ["cute monkey", "brown monkey"],
        "donut": ["giant donut", "hollow-centered donut"],
        "backpack": ["big backpack", "red backpack"],
        "crown": ["shiny crown", "golden crown"],
        "suitcase": ["big suitcase", "rectangular suitcase"],
        "bowl": ["nice bowl", "ivory bowl"],
        "glasses": ["small glasses", "round glasses"],
        "dog": ["happy dog", "small dog"],
        "cat": ["sleepy cat", "cute cat"],
        "boat": ["nice boat", "small boat"],
        "truck": ["big truck", "shiny truck"],
        "horse": ["happy horse", "nice horse"],
        "car": ["shiny car", "small car"],
        "bear": ["big bear", "cute bear"],
        "elephant": ["nice elephant", "big elephant"],
        "frog": ["small frog", "happy frog"],
        "bicycle": ["lovely bicycle", "two-wheeled bicycle"],
        "zebra": [f"{adj} zebra" for adj in (
            "happy", "small", "big", "nice", "cute", "shiny", "lovely",
            "sleepy", "giant", "pale",
        )],
    },
    "compose_multiobject": {
        "bicycle|donut": ["a donut resting on the seat of a bicycle"],
        "cat|dog": ["a cat curled up beside a sleepy dog"],
        "bench|bird": ["a bird perched on a wooden bench"],
    },
}

# Modifier weights a default simulator world starts from.
DEFAULT_MODIFIERS = {
    "red": 1.0, "orange": 1.0, "yellow": 1.0, "green": 1.0, "blue": 1.0,
    "purple": 1.0, "pink": 1.0, "brown": 1.0, "gray": 1.0, "black": 1.0,
    "white": 1.0, "two-wheeled": 1.0, "hollow-centered": 1.0,
    "ring-shaped": 0.8, "rectangular": 1.0, "round": 1.0, "golden": 1.0,
    "ivory": 1.0, "tall": 0.8, "pedals": 0.75, "gears": 0.75, "chain": 0.75,
}

# ===== lexicon =====

DETERMINERS = ["a", "an", "the"]
CONJUNCTIONS = ["and", "or"]
PREPOSITIONS = [
    "with", "of", "on", "in", "beside", "against", "under",
    "over", "near", "at", "by", "to", "from",
]

# Adjective-like words, including every modifier the fixtures can inject.
ADJECTIVES = set(TBP_COLORS) | {
    "two-wheeled", "hollow-centered", "ring-shaped", "rectangular", "round",
    "golden", "ivory", "pale", "tall", "shiny", "giant", "happy", "small",
    "big", "nice", "cute", "sleepy", "lovely", "wooden", "glazed",
    # words inside taxonomy lemmas that modify rather than head the phrase
    "hunting", "domestic", "tabby", "snapping", "rocking", "folding",
    "eating", "cooking", "racing", "tandem", "indian", "african",
    "grizzly", "polar", "bald", "all-terrain", "hot-air", "potted",
    "dining", "hot", "draft", "dray",
}

# Nouns that only occur inside "with ..." feature phrases.
FEATURE_NOUNS = ["pedal", "gear", "chain", "basket", "wheel", "seat"]


def _tree_lemmas(tree: dict[str, dict]) -> list[str]:
    out = []
    for lemma, sub in tree.items():
        out.append(lemma)
        out.extend(_tree_lemmas(sub))
    return out


def build_lexicon() -> list[tuple[str, str]]:
    nouns: set[str] = set()
    for category in MSCOCO_OBJECTS + TBP_ANIMALS + TBP_OBJECTS:
        nouns.update(category.split())
    for root, tree in TAXONOMY.items():
        nouns.add(root)
        for lemma in _tree_lemmas(tree):
            nouns.update(lemma.split())
    nouns.update(FEATURE_NOUNS)
    nouns -= ADJECTIVES  # adjective-tagged words keep that class only ...
    rows: list[tuple[str, str]] = []
    for word in sorted(nouns):
        rows.append((word, "NOUN"))
    for word in sorted(ADJECTIVES):
        rows.append((word, "ADJ"))
    rows.append(("orange", "NOUN"))  # ... except the fruit/color pair
    for word in DETERMINERS:
        rows.append((word, "DET"))
    for word in CONJUNCTIONS:
        rows.append((word, "CONJ"))
    for word in PREPOSITIONS:
        rows.append((word, "PREP"))
    return rows


# ===== WNDB files =====

class _Synset:
    def __init__(self, key: str, lemma: str, parent: "_Synset | None"):
        self.key = key            # unique key, may differ from lemma for extra senses
        self.lemma = lemma
        self.parent = parent
        self.children: list[_Synset] = []
        self.offset = 0

    @property
    def word(self) -> str:
        return self.lemma.replace(" ", "_").replace("(", "").replace(")", "").strip("_")


def collect_synsets() -> tuple[list[_Synset], dict[str, list[_Synset]]]:
    """Flatten the taxonomy plus leaf vocabulary into an ordered synset list."""
    ordered: list[_Synset] = []
    by_lemma: dict[str, list[_Synset]] = {}

    def register(s: _Synset) -> None:
        ordered.append(s)
        by_lemma.setdefault(s.lemma.split(" (")[0], []).append(s)

    def walk(lemma: str, sub: dict[str, dict], parent: _Synset | None) -> None:
        node = _Synset(lemma, lemma, parent)
        if parent is not None:
            parent.children.append(node)
        register(node)
        for child, tree in sub.items():
            walk(child, tree, node)

    for root, tree in TAXONOMY.items():
        walk(root, tree, None)

    tree_lemmas = set(TAXONOMY) | {l for t in TAXONOMY.values() for l in _tree_lemmas(t)}
    leaves = []
    for category in MSCOCO_OBJECTS + TBP_ANIMALS + TBP_OBJECTS:
        if category not in tree_lemmas and category not in leaves:
            leaves.append(category)
    for lemma in leaves:
        register(_Synset(lemma, lemma, None))

    for lemma, label in EXTRA_SENSES.items():
        # an unrelated later sense for an existing lemma
        extra = _Synset(label, lemma, None)
        ordered.append(extra)
        by_lemma.setdefault(lemma, []).append(extra)
    return ordered, by_lemma


def render_wndb(ordered: list[_Synset], by_lemma: dict[str, list[_Synset]]) -> tuple[str, str]:
    header = (
        "  1 This file is part of a compact noun taxonomy in WNDB layout.\n"
        "  2 Generated by tools/build_data.py; do not edit by hand.\n"
    )

    def data_line(s: _Synset) -> str:
        pointers: list[tuple[str, _Synset]] = []
        if s.parent is not None:
            pointers.append(("@", s.parent))
        pointers.extend(("~", c) for c in s.children)
        parts = [f"{s.offset:08d}", "05", "n", "01", s.word, "0", f"{len(pointers):03d}"]
        for symbol, target in pointers:
            parts.extend([symbol, f"{target.offset:08d}", "n", "0000"])
        gloss = f"a kind of {s.parent.lemma}" if s.parent is not None else f"a {s.lemma}"
        return " ".join(parts) + " | " + gloss + "  \n"

    # fixed-width offsets keep line lengths stable, so one settling pass
    # after a dry run with zero offsets yields the true byte positions
    for _ in range(2):
        pos = len(header.encode("ascii"))
        for s in ordered:
            s.offset = pos
            pos += len(data_line(s).encode("ascii"))
    data = header + "".join(data_line(s) for s in ordered)

    index_lines = []
    for lemma in sorted(by_lemma):
        senses = by_lemma[lemma]
        ptr_types: list[str] = []
        for s in senses:
            if s.parent is not None and "@" not in ptr_types:
                ptr_types.append("@")
            if s.children and "~" not in ptr_types:
                ptr_types.append("~")
        fields = [lemma.replace(" ", "_"), "n", str(len(senses)), str(len(ptr_types))]
        fields.extend(ptr_types)
        fields.extend([str(len(senses)), "0"])
        fields.extend(f"{s.offset:08d}" for s in senses)
        index_lines.append(" ".join(fields) + "  \n")
    index = header + "".join(index_lines)
    return index, data


# ===== fixture =====

def build_fixture() -> dict:
    flat: dict[str, dict] = {}

    def walk(lemma: str, sub: dict[str, dict], root: str, depth: int) -> None:
        if depth > 0:
            flat[lemma] = {"root": root, "depth": depth}
        for child, tree in sub.items():
            walk(child, tree, root, depth + 1)

    for root, tree in TAXONOMY.items():
        walk(root, tree, root, 0)

    return {
        "suggestions": SUGGESTIONS,
        "taxonomy": flat,
        "drifted": DRIFTED,
        "default_modifiers": DEFAULT_MODIFIERS,
    }


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    (DATA_DIR / "wordnet").mkdir(exist_ok=True)

    rows = build_lexicon()
    lex_body = "# word<TAB>POS - regenerate with tools/build_data.py\n" + "".join(
        f"{w}\t{p}\n" for w, p in rows
    )
    (DATA_DIR / "lexicon.tsv").write_text(lex_body, encoding="utf-8")

    (DATA_DIR / "tbp_vocab.json").write_text(
        json.dumps(
            {"animals": TBP_ANIMALS, "objects": TBP_OBJECTS, "colors": TBP_COLORS},
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    (DATA_DIR / "mscoco_objects.json").write_text(
        json.dumps(MSCOCO_OBJECTS, indent=2) + "\n", encoding="utf-8"
    )
    (DATA_DIR / "sim_fixture.json").write_text(
        json.dumps(build_fixture(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    ordered, by_lemma = collect_synsets()
    index, data = render_wndb(ordered, by_lemma)
    (DATA_DIR / "wordnet" / "index.noun").write_text(index, encoding="ascii")
    (DATA_DIR / "wordnet" / "data.noun").write_text(data, encoding="ascii")

    print(f"lexicon entries: {len(rows)}")
    print(f"synsets: {len(ordered)}")


if __name__ == "__main__":
    main()
