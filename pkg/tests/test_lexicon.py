import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trendlex.lexicon import (
    CategoryRule, LabelMatrix, Lexicon, LexiconError, Pattern, label_corpus, label_document, load_lexicon,
)
from trendlex.normalize import NormalizedDoc, PhraseTable, StopwordSet, normalize_document
from trendlex.records import PaperRecord


def mini(*cats, phrases=(), stops=()):
    return Lexicon("t1", tuple(CategoryRule(n, tuple(Pattern(p) for p in ps)) for n, ps in cats),
                   PhraseTable.of(phrases), StopwordSet.of(stops))


MINI = mini(("A", [r"\bdiffusion\b"]), ("B", [r"\bsplatting\b"]))


def tokens(*ts):
    return NormalizedDoc("d", tuple(ts), {})


def record(i, text, year=2024, venue="cvpr"):
    return PaperRecord(f"r{i:03d}", venue, year, text, "", year == 2022)


def test_starter_has_35_categories(starter):
    assert len(starter.categories) == 35
    assert starter.summary()["categories"] == 35


def test_starter_ships_required_phrases(starter):
    for p in ["gaussian splatting", "neural radiance fields", "vision language model", "point cloud",
              "instruction tuning", "diffusion model"]:
        assert p in starter.phrase_table.phrases


def test_bad_regex_names_category():
    with pytest.raises(LexiconError, match="Broken"):
        load_lexicon("version: x\ncategories:\n  - {name: Broken, patterns: ['([']}\n")


def test_duplicate_category():
    text = "version: x\ncategories:\n  - {name: Diffusion, patterns: [a]}\n  - {name: Diffusion, patterns: [b]}\n"
    with pytest.raises(LexiconError, match="duplicate category"):
        load_lexicon(text)


def test_other_schema_errors():
    with pytest.raises(LexiconError, match="version"):
        load_lexicon("categories:\n  - {name: A, patterns: [a]}\n")
    with pytest.raises(LexiconError, match="unknown category"):
        load_lexicon("version: x\ncategories:\n  - {name: A, patterns: [a]}\n"
                     "facets:\n  - {name: f, within: Z, items: [{name: i, patterns: [a]}]}\n")
    with pytest.raises(LexiconError, match="collide"):
        load_lexicon("version: x\nphrases: [point cloud]\nstopwords: {general: [point_cloud]}\n"
                     "categories:\n  - {name: A, patterns: [a]}\n")
    with pytest.raises(LexiconError, match="no patterns"):
        load_lexicon("version: x\ncategories:\n  - {name: A, patterns: []}\n")


def test_multi_label_row():
    row = label_document(tokens("diffusion", "splatting"), MINI)
    assert row.labels == (True, True)


def test_no_match_row():
    assert label_document(tokens("optimization"), MINI).labels == (False, False)


def test_gaussian_splatting_end_to_end():
    lex = mini(("NeRF", [r"\bgaussian_splatting\b"]), phrases=["gaussian splatting"])
    doc = normalize_document(record(0, "Gaussian Splatting"), lex.phrase_table, lex.stopwords)
    assert doc.tokens == ("gaussian_splatting",)
    assert label_document(doc, lex).labels == (True,)


def test_token_boundaries_and_substring_flag():
    lex = Lexicon("t", (CategoryRule("Tok", (Pattern("splatting"),)),
                        CategoryRule("Sub", (Pattern("splat", substring=True),))))
    row = label_document(tokens("gaussian_splatting"), lex)
    assert row.labels == (False, True)


def test_column_sum():
    texts = ["diffusion models", "a diffusion prior", "graph networks", "optimization"]
    m = label_corpus([record(i, t) for i, t in enumerate(texts)], MINI)
    assert m.column_sum("A") == 2
    assert m.column_sum("B") == 0


def test_empty_corpus():
    m = label_corpus([], MINI)
    assert len(m) == 0 and m.cells.shape == (0, 2)
    assert m.to_csv() == "record_id,A,B\n"


def test_shuffled_input_same_matrix():
    recs = [record(i, t) for i, t in enumerate(["diffusion", "splatting here", "none", "diffusion splatting"] * 5)]
    shuffled = recs[:]
    random.Random(3).shuffle(shuffled)
    a, b = label_corpus(recs, MINI), label_corpus(shuffled, MINI)
    assert a.to_csv() == b.to_csv()
    assert a.details_jsonl() == b.details_jsonl()


def test_workers_do_not_change_output(hand_records, hand_lexicon):
    one = label_corpus(hand_records, hand_lexicon, workers=1)
    three = label_corpus(hand_records, hand_lexicon, workers=3)
    assert one.details_jsonl() == three.details_jsonl()


def test_details_roundtrip(hand_records, hand_lexicon):
    m = label_corpus(hand_records, hand_lexicon)
    back = LabelMatrix.from_details_jsonl(m.details_jsonl())
    assert back.to_csv() == m.to_csv()
    assert back.terms == m.terms
    np.testing.assert_array_equal(back.years, m.years)


def test_hand_labels_agree(hand_rows, hand_records, hand_lexicon):
    m = label_corpus(hand_records, hand_lexicon)
    for row in hand_rows:
        got = {c for c, v in m.row(row["id"]).items() if v}
        assert got == set(row["labels"]), row["id"]


# -- properties over random corpora ---------------------------------------------

VOCAB = ["diffusion", "splat", "splatting", "graph", "nerf", "robust", "x", "detect", "detection"]
PATTERNS = ["diffusion", "splat\\w*", "graph", "nerf", "robust", "detect(ion)?", "x", "gr.ph", "s.*g"]

docs = st.lists(st.lists(st.sampled_from(VOCAB), max_size=6), max_size=15)


def matched(lex, corpus, cat):
    m = label_corpus([record(i, " ".join(ws)) for i, ws in enumerate(corpus)], lex)
    return {rid for rid, v in zip(m.record_ids, m.column(cat)) if v}


@settings(max_examples=200)
@given(docs, st.lists(st.sampled_from(PATTERNS), min_size=1, max_size=3), st.sampled_from(PATTERNS))
def test_adding_pattern_is_monotone(corpus, base, extra):
    before = matched(mini(("C", base)), corpus, "C")
    after = matched(mini(("C", base + [extra])), corpus, "C")
    assert before <= after


@settings(max_examples=200)
@given(docs, st.lists(st.lists(st.sampled_from(PATTERNS), min_size=1, max_size=2), min_size=2, max_size=4),
       st.data())
def test_deleting_category_leaves_others(corpus, pattern_sets, data):
    lex = mini(*[(f"C{i}", ps) for i, ps in enumerate(pattern_sets)])
    drop = data.draw(st.sampled_from(lex.category_names()))
    recs = [record(i, " ".join(ws)) for i, ws in enumerate(corpus)]
    full, less = label_corpus(recs, lex), label_corpus(recs, lex.without_category(drop))
    for cat in less.categories:
        np.testing.assert_array_equal(full.column(cat), less.column(cat))


@settings(max_examples=200)
@given(docs, st.lists(st.lists(st.sampled_from(PATTERNS), min_size=1, max_size=2), min_size=1, max_size=4))
def test_bookkeeping_matches_cells(corpus, pattern_sets):
    lex = mini(*[(f"C{i}", ps) for i, ps in enumerate(pattern_sets)])
    m = label_corpus([record(i, " ".join(ws)) for i, ws in enumerate(corpus)], lex)
    for r, row_terms in enumerate(m.terms):
        for j, cat in enumerate(m.categories):
            occurrences = sum(row_terms.get(cat, {}).values())
            assert (occurrences > 0) == bool(m.cells[r, j])


def test_rows_can_exceed_one_label():
    lex = mini(("A", ["diffusion"]), ("B", ["diffusion"]), ("C", ["nerf"]))
    m = label_corpus([record(0, "diffusion nerf")], lex)
    assert m.cells[0].sum() == 3


@settings(max_examples=300)
@given(st.lists(st.sampled_from(VOCAB + ["a b", "graph detection", "Graph", "NeRF"]), max_size=12),
       st.lists(st.sampled_from(PATTERNS + ["x*", "graph detect\\w*", "a b", "NERF", "x|graph", "[gs]raph",
                                           "(?:nerf|x)s?", "detection?",
                                           "n?erf", "(?:gr|x)aph", "(?:3d_)?graph", "d?x*"]), min_size=1, max_size=4))
def test_padded_matcher_equals_lookbehind_scan(words, patterns):
    import re
    from collections import Counter
    from trendlex.lexicon import REGEX_FLAGS, match_terms

    text = " ".join(words)
    rule = CategoryRule("C", tuple(Pattern(p) for p in patterns))
    assert rule.regex.padded
    plain = re.compile("|".join(Pattern(p).wrapped() for p in patterns), REGEX_FLAGS)
    expect = dict(Counter(m.group(0).lower() for m in plain.finditer(text) if m.group(0)))
    assert match_terms(rule.regex, text) == expect
    assert match_terms(rule.regex, text, " " + text.lower()) == expect
