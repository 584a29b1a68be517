import json
from fractions import Fraction

import pytest

from recipelab import corpus as C


class TestParseIngredientLine:
    def test_quantity_unit_and_descriptors(self):
        line = C.parse_ingredient_line("1 cup shredded provolone cheese")
        assert line.name_phrase == "shredded provolone cheese"
        assert line.quantity == Fraction(1)
        assert line.unit == "cup"
        assert line.root_noun == "cheese"

    def test_bare_name(self):
        line = C.parse_ingredient_line("salt")
        assert line.name_phrase == "salt"
        assert line.quantity is None and line.unit is None
        assert line.root_noun == "salt"

    def test_comma_comment_dropped(self):
        line = C.parse_ingredient_line("2 tablespoons olive oil, divided")
        assert line.name_phrase == "olive oil"
        assert line.quantity == Fraction(2)
        assert line.unit == "tablespoons"
        assert line.root_noun == "oil"

    @pytest.mark.parametrize("text,quantity", [
        ("1/2 cup sugar", Fraction(1, 2)),
        ("1 1/2 cups milk", Fraction(3, 2)),
        ("2.5 pounds beef", Fraction(5, 2)),
        ("½ cup cream", Fraction(1, 2)),
        ("1-2 cloves garlic", Fraction(3, 2)),
        ("2 to 3 cups broth", Fraction(5, 2)),
    ])
    def test_quantity_forms(self, text, quantity):
        assert C.parse_ingredient_line(text).quantity == quantity

    def test_parenthetical_comment_removed(self):
        line = C.parse_ingredient_line("1 (14 ounce) can diced tomatoes, drained")
        assert line.name_phrase == "diced tomatoes"
        assert line.unit == "can"
        assert line.root_noun == "tomato"

    def test_unit_requires_quantity(self):
        line = C.parse_ingredient_line("cloves")
        assert line.unit is None
        assert line.name_phrase == "cloves"
        assert line.root_noun == "clove"

    def test_of_after_unit_consumed(self):
        line = C.parse_ingredient_line("2 cups of flour")
        assert line.name_phrase == "flour"

    def test_pure_quantity_rejected(self):
        with pytest.raises(C.EmptyAfterStripping):
            C.parse_ingredient_line("2 cups")
        with pytest.raises(C.EmptyAfterStripping):
            C.parse_ingredient_line("   ")

    def test_idempotent_on_name_phrase(self, bundled_records):
        for record in bundled_records[:60]:
            for line in record.ingredients:
                again = C.parse_ingredient_line(line.name_phrase)
                assert again.name_phrase == line.name_phrase
                assert again.root_noun == line.root_noun


class TestSplitSentences:
    def test_basic(self):
        assert C.split_sentences("Mix well. Serve over ice.") == ["Mix well.", "Serve over ice."]

    def test_decimal_guard(self):
        assert C.split_sentences("Bake at 350 F for 1.5 hours.") == ["Bake at 350 F for 1.5 hours."]

    def test_empty(self):
        assert C.split_sentences("") == []
        assert C.split_sentences("   ") == []

    def test_abbreviation_guard(self):
        out = C.split_sentences("Rest for approx. 5 minutes. Serve.")
        assert out == ["Rest for approx. 5 minutes.", "Serve."]

    def test_exclamation_and_question(self):
        out = C.split_sentences("Stir! Taste? Serve.")
        assert out == ["Stir!", "Taste?", "Serve."]

    def test_trailing_fragment_kept(self):
        assert C.split_sentences("Mix well. Serve") == ["Mix well.", "Serve"]

    def test_rejoin_is_stable(self, bundled_records):
        for record in bundled_records[:60]:
            joined = " ".join(record.steps)
            assert C.split_sentences(joined) == record.steps


def _raw(n_ingredients=3, n_sentences=3, n_words=30, title="Test Dish", extra_text=""):
    ingredients = [f"{i + 1} cups flour" for i in range(n_ingredients)]
    per = max(1, n_words // n_sentences)
    sentences = []
    used = 0
    for s in range(n_sentences):
        count = per if s < n_sentences - 1 else n_words - used
        sentences.append(" ".join(["stir"] * max(count, 1)) + ".")
        used += count
    text = " ".join(sentences) + extra_text
    return C.RawRecipe(source_id="t1", title=title, ingredient_lines=ingredients,
                       instruction_text=text)


class TestFilterRecipe:
    def test_accept(self):
        result = C.filter_recipe(_raw())
        assert isinstance(result, C.RecipeRecord)

    def test_too_few_ingredients_named_first(self):
        result = C.filter_recipe(_raw(n_ingredients=1, n_sentences=3, n_words=40))
        assert isinstance(result, C.RejectedRecipe)
        assert "ingredient" in result.reason

    def test_boundary_two_two_twenty_accepted(self):
        result = C.filter_recipe(_raw(n_ingredients=2, n_sentences=2, n_words=20))
        assert isinstance(result, C.RecipeRecord)
        assert len(result.ingredients) == 2 and len(result.steps) == 2

    def test_too_few_words(self):
        result = C.filter_recipe(_raw(n_ingredients=5, n_sentences=2, n_words=12))
        assert isinstance(result, C.RejectedRecipe)
        assert "word" in result.reason

    def test_denylist(self):
        result = C.filter_recipe(_raw(extra_text=" Nutrition facts: 100 calories."))
        assert isinstance(result, C.RejectedRecipe)
        assert "denylist" in result.reason

    def test_membership_order_independent(self):
        # permuting the raw records reorders but never changes the accepted set
        import random

        import recipelab

        raws = C.ingest(recipelab.bundled_corpus_path())
        shuffled = list(raws)
        random.Random(13).shuffle(shuffled)

        def accepted_ids(raw_list):
            return {r.id for r in map(C.filter_recipe, raw_list)
                    if isinstance(r, C.RecipeRecord)}

        assert accepted_ids(raws) == accepted_ids(shuffled)


class TestSplitCorpus:
    def _records(self, n):
        return [C.RecipeRecord(id=f"r{i}", title="t", ingredients=[], steps=[])
                for i in range(n)]

    def test_partition(self):
        records = self._records(100)
        split = C.split_corpus(records, seed=7, n_val=10, n_test=10)
        assert len(split.train) == 80
        assert len(split.validation) == 10 and len(split.test) == 10
        all_ids = split.train + split.validation + split.test
        assert sorted(all_ids) == sorted(r.id for r in records)
        assert not (set(split.train) & set(split.validation))
        assert not (set(split.train) & set(split.test))
        assert not (set(split.validation) & set(split.test))

    def test_deterministic(self):
        records = self._records(50)
        a = C.split_corpus(records, seed=3, n_val=5, n_test=5)
        b = C.split_corpus(list(reversed(records)), seed=3, n_val=5, n_test=5)
        assert a == b

    def test_insufficient(self):
        with pytest.raises(C.InsufficientCorpus):
            C.split_corpus(self._records(100), seed=1, n_val=60, n_test=50)

    def test_manifest_roundtrip(self, tmp_path):
        split = C.split_corpus(self._records(30), seed=9, n_val=3, n_test=3)
        path = tmp_path / "split.json"
        C.save_split(split, path)
        assert C.load_split(path) == split


class TestIngest:
    def _write(self, tmp_path, lines):
        path = tmp_path / "corpus.jsonl"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def test_well_formed(self, tmp_path):
        rows = [json.dumps({"id": f"x{i}", "title": "T", "ingredients": ["1 egg"],
                            "instructions": "Mix."}) for i in range(3)]
        assert len(C.ingest(self._write(tmp_path, rows))) == 3

    def test_missing_title(self, tmp_path):
        rows = [json.dumps({"id": "x0", "title": "T", "ingredients": [], "instructions": ""}),
                json.dumps({"id": "x1", "ingredients": [], "instructions": ""})]
        with pytest.raises(C.MalformedRecord) as err:
            C.ingest(self._write(tmp_path, rows))
        assert err.value.line_no == 2
        assert "title" in str(err.value)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        assert C.ingest(path) == []

    def test_bad_json(self, tmp_path):
        with pytest.raises(C.MalformedRecord):
            C.ingest(self._write(tmp_path, ["{not json"]))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            C.ingest(tmp_path / "nope.jsonl")


class TestRecordsPersistence:
    def test_roundtrip(self, bundled_records, tmp_path):
        path = tmp_path / "records.jsonl"
        C.save_records(bundled_records[:20], path)
        loaded = C.load_records(path)
        assert loaded == bundled_records[:20]


class TestBundledCorpusInvariants:
    def test_filter_invariants_hold(self, bundled_records):
        assert len(bundled_records) >= 200
        for record in bundled_records:
            assert len(record.ingredients) >= 2
            assert len(record.steps) >= 2
            assert sum(len(s.split()) for s in record.steps) >= 20
            for line in record.ingredients:
                assert line.name_phrase
                assert line.root_noun.islower()
