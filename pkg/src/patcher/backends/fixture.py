"""Loader for the bundled simulator fixture.

The fixture carries the suggestion table, the flattened taxonomy with
depths, the lemmas whose meaning drifts away from their root concept,
and default modifier weights.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Any


@lru_cache(maxsize=1)
def load_fixture() -> dict[str, Any]:
    raw = (resources.files("patcher.data") / "sim_fixture.json").read_text(encoding="utf-8")
    return json.loads(raw)


def suggestion_table() -> dict[str, dict[str, list[str]]]:
    return load_fixture()["suggestions"]


def taxonomy_table() -> dict[str, dict[str, Any]]:
    """lemma -> {"root": str, "depth": int} for every registered hyponym."""
    return load_fixture()["taxonomy"]


def taxonomy_roots() -> frozenset[str]:
    return frozenset(entry["root"] for entry in taxonomy_table().values())


def drifted_lemmas() -> frozenset[str]:
    return frozenset(load_fixture()["drifted"])


def default_modifier_bonus() -> dict[str, float]:
    return dict(load_fixture()["default_modifiers"])
