import pytest
from hypothesis import given, strategies as st

from recipelab import textnorm as tn
from recipelab.corpus import parse_ingredient_line


class TestWordTokenize:
    def test_punctuation_separated(self):
        stream = tn.word_tokenize("Mix the eggs, then stir.")
        assert list(stream.tokens) == ["mix", "the", "eggs", ",", "then", "stir", "."]

    def test_empty(self):
        assert len(tn.word_tokenize("")) == 0

    def test_decimals_kept_whole(self):
        assert list(tn.word_tokenize("1.5 cups").tokens) == ["1.5", "cups"]

    def test_offsets_reconstruct_source(self):
        text = "Whisk 2 Eggs; then FOLD gently."
        stream = tn.word_tokenize(text)
        for token, (start, end) in zip(stream.tokens, stream.spans):
            assert text[start:end].lower() == token

    def test_spans_strictly_increasing(self):
        stream = tn.word_tokenize("a b, c.d")
        flat = [x for span in stream.spans for x in span]
        assert flat == sorted(flat)

    @given(st.text(max_size=80))
    def test_offsets_always_slice_source(self, text):
        stream = tn.word_tokenize(text)
        assert len(stream.tokens) == len(stream.spans)
        last_end = 0
        for token, (start, end) in zip(stream.tokens, stream.spans):
            assert start >= last_end and end > start
            assert text[start:end].lower() == token
            last_end = end


class TestLemmatize:
    @pytest.mark.parametrize("word,lemma", [
        ("eggs", "egg"),
        ("tomatoes", "tomato"),
        ("molasses", "molasses"),
        ("berries", "berry"),
        ("leaves", "leaf"),
        ("dishes", "dish"),
        ("boxes", "box"),
        ("cloves", "clove"),
        ("glass", "glass"),
        ("salt", "salt"),
        ("hummus", "hummus"),
    ])
    def test_examples(self, word, lemma):
        assert tn.lemmatize(word) == lemma

    def test_idempotent_on_corpus(self, bundled_records):
        seen = set()
        for record in bundled_records:
            text = record.title + " " + " ".join(record.steps) + " " + "\n".join(
                l.original for l in record.ingredients)
            for token in tn.word_tokenize(text).tokens:
                if token.isalpha():
                    seen.add(token)
        for token in sorted(seen):
            once = tn.lemmatize(token)
            assert tn.lemmatize(once) == once, f"lemmatize not idempotent on {token!r}"

    def test_dictionary_entries_are_fixed_points(self, dictionary):
        for noun in dictionary.root_nouns:
            assert tn.lemmatize(noun) == noun


class TestRootNoun:
    def test_paper_example(self):
        assert tn.root_noun_of_phrase("shredded provolone cheese") == "cheese"

    def test_hyphenated_descriptor(self):
        assert tn.root_noun_of_phrase("all-purpose flour") == "flour"

    def test_single_token(self):
        assert tn.root_noun_of_phrase("egg") == "egg"

    def test_trailing_descriptor_skipped(self):
        assert tn.root_noun_of_phrase("parsley, chopped") == "parsley"
        assert tn.root_noun_of_phrase("salt and pepper to taste") == "pepper"

    def test_empty_raises(self):
        with pytest.raises(tn.EmptyPhrase):
            tn.root_noun_of_phrase("1 2 3 !")


class TestExtractIngredientNouns:
    def test_dictionary_intersection(self, dictionary):
        found = tn.extract_ingredient_nouns("Combine rum and pineapple juice.", dictionary)
        assert found == {"rum", "pineapple", "juice"}

    def test_no_hits(self, dictionary):
        assert tn.extract_ingredient_nouns("Preheat the very hot thing.", dictionary) == frozenset()

    def test_duplicates_collapse(self, dictionary):
        found = tn.extract_ingredient_nouns("Add salt. More salt. Extra salt!", dictionary)
        assert found == {"salt"}

    def test_subset_of_dictionary(self, dictionary, bundled_records):
        for record in bundled_records[:30]:
            nouns = tn.extract_ingredient_nouns(" ".join(record.steps), dictionary)
            assert nouns <= dictionary.root_nouns


class TestOverlapHighlights:
    def test_both_fields_highlighted(self, dictionary):
        lines = [parse_ingredient_line("2 ounces vodka"),
                 parse_ingredient_line("4 ounces orange juice")]
        generated = "Pour the vodka over ice and top with the orange juice."
        spans = tn.overlap_highlights(lines, generated, dictionary)
        by_field = {"ingredients": set(), "generated_text": set()}
        for span in spans:
            by_field[span.field].add(span.root_noun)
        assert by_field["ingredients"] == by_field["generated_text"] == {"vodka", "juice"}

    def test_disjoint_vocab_empty(self, dictionary):
        lines = [parse_ingredient_line("1 cup flour")]
        assert tn.overlap_highlights(lines, "Stir the soup well.", dictionary) == []

    def test_root_noun_matches_variant_phrase(self, dictionary):
        lines = [parse_ingredient_line("1 cup shredded provolone cheese")]
        spans = tn.overlap_highlights(lines, "Top with cheese and serve.", dictionary)
        assert {s.root_noun for s in spans} == {"cheese"}
        gen_spans = [s for s in spans if s.field == "generated_text"]
        assert gen_spans and all(s.root_noun == "cheese" for s in gen_spans)

    def test_span_slices_lemmatize_back(self, dictionary):
        lines = [parse_ingredient_line("2 eggs"), parse_ingredient_line("1 cup flour")]
        generated = "Beat the eggs into the flour."
        ing_text = tn.ingredients_field_text(lines)
        for span in tn.overlap_highlights(lines, generated, dictionary):
            source = ing_text if span.field == "ingredients" else generated
            assert tn.lemmatize(source[span.start : span.end].lower()) == span.root_noun


class TestIngredientDictionary:
    def test_comments_and_lemmatization(self):
        d = tn.IngredientDictionary.from_lines(["# heading", "Tomatoes  # plural", "basil", ""])
        assert d.root_nouns == {"tomato", "basil"}

    def test_empty_rejected(self):
        with pytest.raises(tn.EmptyDictionary):
            tn.IngredientDictionary.from_lines(["# nothing here"])

    def test_bundled_loads(self, dictionary):
        assert len(dictionary) > 400
        assert "cheese" in dictionary and "vodka" in dictionary
