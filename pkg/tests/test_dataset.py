"""Benchmark corpus generation and JSONL persistence."""

from __future__ import annotations

import random
import warnings

import pytest

from patcher.dataset import (
    PromptRecord,
    bundled_categories,
    bundled_tbp_vocabulary,
    compose_multiobject,
    generate_tbp,
    load_dataset,
    save_dataset,
)
from patcher.domain import Prompt
from patcher.errors import MalformedRecord, WrongVocabularySize
from patcher.extraction import ExtractionConfig, extract_objects

from conftest import ScriptedBackend


def oracle_counts(animals, objects, colors):
    """Brute-force family sizes, written independently of the generator."""
    t1 = 0
    for i in range(len(animals)):
        for j in range(i + 1, len(animals)):
            t1 += 1
    t2 = len(animals) * len(colors) * len(objects)
    combos = [(c, o) for c in colors for o in objects]
    t3 = 0
    for i in range(len(combos)):
        for j in range(i + 1, len(combos)):
            if combos[i][1] != combos[j][1]:
                t3 += 1
    return t1, t2, t3


class TestRecordValidation:
    def test_round_trip(self):
        rec = PromptRecord(
            id="x-1", prompt="a cat and a dog", objects=("cat", "dog"),
            num_objects=2, source="TBP",
        )
        assert PromptRecord.from_dict(rec.to_dict()) == rec

    def test_object_count_must_agree(self):
        with pytest.raises(ValueError, match="disagrees"):
            PromptRecord(id="x", prompt="a cat", objects=("cat",),
                         num_objects=2, source="TBP")

    def test_objects_must_be_non_empty(self):
        with pytest.raises(ValueError, match="non-empty"):
            PromptRecord(id="x", prompt="", objects=(), num_objects=0,
                         source="TBP")

    def test_at_most_three_objects(self):
        with pytest.raises(ValueError, match="1, 2, or 3"):
            PromptRecord(id="x", prompt="p", objects=("a", "b", "c", "d"),
                         num_objects=4, source="TBP")

    def test_unknown_source_rejected(self):
        with pytest.raises(ValueError, match="source"):
            PromptRecord(id="x", prompt="a cat", objects=("cat",),
                         num_objects=1, source="web")


@pytest.fixture(scope="module")
def corpus():
    vocab = bundled_tbp_vocabulary()
    return vocab, generate_tbp(vocab["animals"], vocab["objects"], vocab["colors"])


class TestTemplateCorpus:
    def test_family_sizes_match_the_enumeration_oracle(self, corpus):
        vocab, records = corpus
        t1, t2, t3 = oracle_counts(vocab["animals"], vocab["objects"], vocab["colors"])
        assert (t1, t2, t3) == (66, 1584, 7986)
        by_family = {
            "tbp1": sum(1 for r in records if r.id.startswith("tbp1-")),
            "tbp2": sum(1 for r in records if r.id.startswith("tbp2-")),
            "tbp3": sum(1 for r in records if r.id.startswith("tbp3-")),
        }
        assert by_family == {"tbp1": t1, "tbp2": t2, "tbp3": t3}
        assert len(records) == t1 + t2 + t3 == 9636

    def test_no_duplicate_ids_or_prompts(self, corpus):
        _, records = corpus
        assert len({r.id for r in records}) == len(records)
        assert len({r.prompt for r in records}) == len(records)

    def test_first_record_of_each_family(self, corpus):
        _, records = corpus
        by_id = {r.id: r for r in records}
        assert by_id["tbp1-0000"].prompt == "a cat and a dog"
        assert by_id["tbp1-0000"].objects == ("cat", "dog")
        assert by_id["tbp2-0000"].prompt == "a cat and a red backpack"
        assert by_id["tbp2-0000"].objects == ("cat", "backpack")
        assert by_id["tbp3-0000"].prompt == "a red backpack and a red glasses"
        assert by_id["tbp3-0000"].objects == ("backpack", "glasses")

    def test_articles_adapt_to_vowels(self, corpus):
        _, records = corpus
        by_id = {r.id: r for r in records}
        # color index 1 is "orange": animal cat, object backpack
        assert by_id["tbp2-0012"].prompt == "a cat and an orange backpack"

    def test_uniform_shape(self, corpus):
        _, records = corpus
        assert all(r.num_objects == 2 for r in records)
        assert all(r.source == "TBP" for r in records)

    def test_extraction_recovers_every_placeholder(self, corpus):
        _, records = corpus
        extraction = ExtractionConfig()
        rng = random.Random(77)
        for record in rng.sample(records, 250):
            p = Prompt.from_text(record.id, record.prompt)
            heads = {e.head_lemma for e in extract_objects(p, extraction)}
            assert set(record.objects) <= heads, record.prompt

    @pytest.mark.parametrize(
        "field,values",
        [
            ("animals", ["cat"] * 12),
            ("animals", ["cat", "dog"]),
            ("objects", [""] * 12),
            ("colors", ["red"] * 11),
        ],
    )
    def test_vocabulary_sizes_are_enforced(self, field, values):
        vocab = bundled_tbp_vocabulary()
        vocab[field] = values
        with pytest.raises(WrongVocabularySize):
            generate_tbp(vocab["animals"], vocab["objects"], vocab["colors"])


class TestComposedCorpus:
    VOCAB = ["cat", "dog", "bird", "bear", "lion", "horse"]

    def test_fallback_template_without_suggester(self):
        with pytest.warns(RuntimeWarning, match="fallback template"):
            records = compose_multiobject(["cat", "dog", "bird"], 2, None)
        assert [r.prompt for r in records] == [
            "a cat and a dog",
            "a cat and a bird",
            "a dog and a bird",
        ]
        assert [r.id for r in records] == ["twop-0000", "twop-0001", "twop-0002"]
        assert all(r.source == "TwOP" for r in records)

    def test_suggested_sentences_used_only_when_they_cover(self):
        suggester = ScriptedBackend(
            suggestions={
                ("compose_multiobject", "cat|dog"): ["a dog chasing a cat"],
                ("compose_multiobject", "bird|cat"): ["a cat watching the sky"],
            }
        )
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            records = compose_multiobject(["cat", "dog", "bird"], 2, suggester)
        assert records[0].prompt == "a dog chasing a cat"
        # the bird went missing from the suggestion, so the template steps in
        assert records[1].prompt == "a cat and a bird"
        assert records[2].prompt == "a dog and a bird"
        assert records[0].objects == ("cat", "dog")

    def test_triples_default_to_the_pair_corpus_size(self):
        with pytest.warns(RuntimeWarning):
            records = compose_multiobject(self.VOCAB, 3, None)
        assert len(records) == 15  # pairs over six categories
        assert all(r.num_objects == 3 for r in records)
        assert all(r.source == "ThreeOP" for r in records)
        with pytest.warns(RuntimeWarning):
            again = compose_multiobject(self.VOCAB, 3, None)
        assert again == records

    def test_explicit_count_samples_deterministically(self):
        with pytest.warns(RuntimeWarning):
            a = compose_multiobject(self.VOCAB, 2, None, count=4, seed=5)
        with pytest.warns(RuntimeWarning):
            b = compose_multiobject(self.VOCAB, 2, None, count=4, seed=5)
        with pytest.warns(RuntimeWarning):
            c = compose_multiobject(self.VOCAB, 2, None, count=4, seed=6)
        assert a == b
        assert len(a) == 4
        assert [r.prompt for r in a] != [r.prompt for r in c]

    def test_oversized_count_keeps_everything(self):
        with pytest.warns(RuntimeWarning):
            records = compose_multiobject(self.VOCAB, 2, None, count=99)
        assert len(records) == 15

    def test_duplicate_categories_collapse(self):
        with pytest.warns(RuntimeWarning):
            records = compose_multiobject(["cat", "cat", "dog"], 2, None)
        assert len(records) == 1

    def test_group_size_limited_to_pairs_and_triples(self):
        with pytest.raises(ValueError, match="2 or 3"):
            compose_multiobject(self.VOCAB, 4, None)

    def test_vocabulary_must_cover_the_group_size(self):
        with pytest.raises(WrongVocabularySize):
            compose_multiobject(["cat", "cat"], 2, None)

    def test_bundled_categories_shape(self):
        categories = bundled_categories()
        assert len(categories) == 80
        assert len(set(categories)) == 80
        assert "bicycle" in categories


class TestPersistence:
    def records(self):
        return [
            PromptRecord(id="a-1", prompt="a cat and a dog",
                         objects=("cat", "dog"), num_objects=2, source="TBP"),
            PromptRecord(id="a-2", prompt="a bear and a bowl and a car",
                         objects=("bear", "bowl", "car"), num_objects=3,
                         source="ThreeOP"),
        ]

    def test_round_trip(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        save_dataset(self.records(), path)
        assert load_dataset(path) == self.records()

    def test_blank_lines_are_ignored(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        save_dataset(self.records(), path)
        path.write_text(path.read_text("utf-8") + "\n\n   \n", "utf-8")
        assert load_dataset(path) == self.records()

    def test_empty_file_loads_empty(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        save_dataset([], path)
        assert load_dataset(path) == []

    def test_broken_json_names_the_line(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        save_dataset(self.records(), path)
        path.write_text(path.read_text("utf-8") + "{not json\n", "utf-8")
        with pytest.raises(MalformedRecord) as excinfo:
            load_dataset(path)
        assert excinfo.value.line_no == 3

    def test_missing_field_names_the_line(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"id": "a-1", "prompt": "a cat"}\n', "utf-8")
        with pytest.raises(MalformedRecord) as excinfo:
            load_dataset(path)
        assert excinfo.value.line_no == 1

    def test_invalid_record_names_the_line(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        good = self.records()[0].to_dict()
        bad = dict(good, id="a-3", num_objects=3)
        import json

        path.write_text(
            json.dumps(good) + "\n" + json.dumps(bad) + "\n", "utf-8"
        )
        with pytest.raises(MalformedRecord) as excinfo:
            load_dataset(path)
        assert excinfo.value.line_no == 2
