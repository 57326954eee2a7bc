import pytest
from hypothesis import given, settings, strategies as st

from trendlex.normalize import (
    NormalizedDoc, PhraseTable, PhraseTableError, StopwordSet, fold_text, normalize_document,
    normalize_text, protect_phrases,
)
from trendlex.records import PaperRecord

PHRASES = PhraseTable.of([
    "vision language", "vision language model", "gaussian splatting", "neural radiance fields",
    "state of the art", "point cloud", "large language model",
])
STOPS = StopwordSet.of(["the", "a", "of", "and", "we", "with"], ["method", "results"])
PROPERTY_RUNS = settings(max_examples=1000)


def doc(title, abstract="", table=PHRASES, stops=STOPS):
    return normalize_document(PaperRecord("r", "cvpr", 2024, title, abstract), table, stops)


def test_longest_match_wins():
    table = PhraseTable.of(["vision language", "vision language model"])
    assert protect_phrases(["vision", "language", "model"], table) == ["vision_language_model"]


def test_empty_table_is_identity():
    assert protect_phrases(["a", "b"], PhraseTable()) == ["a", "b"]


def test_single_nonoverlapping_match():
    table = PhraseTable.of(["gaussian splatting"])
    assert protect_phrases(["gaussian", "splatting", "gaussian"], table) == ["gaussian_splatting", "gaussian"]


def test_nerf_example():
    # fold -> "neural radiance fields (nerf) rock!"; punctuation -> spaces;
    # protect the 3-word phrase; drop the stopword "rock".
    d = normalize_document(
        PaperRecord("r", "cvpr", 2024, "Neural Radiance Fields (NeRF) rock!", ""),
        PhraseTable.of(["neural radiance fields"]),
        StopwordSet.of(["rock"]),
    )
    assert list(d.tokens) == ["neural_radiance_fields", "nerf"]
    assert d.term_counts == {"neural_radiance_fields": 1, "nerf": 1}


def test_empty_document():
    assert doc("", "").tokens == ()


def test_all_stopwords():
    d = normalize_document(PaperRecord("r", "cvpr", 2024, "The of and", ""), PhraseTable(),
                           StopwordSet.of(["the", "of", "and"]))
    assert d.tokens == ()


def test_hyphen_and_unicode_fold():
    assert doc("Vision-Language Models").tokens == ("vision_language", "models")
    assert doc("Ｇａｕｓｓｉａｎ Splatting").tokens == ("gaussian_splatting",)
    assert doc("Café Gödel").tokens == ("cafe", "godel")


def test_phrase_with_stopwords_survives():
    assert doc("the state of the art").tokens == ("state_of_the_art",)


def test_numbers_dropped():
    assert doc("top-1 accuracy 87.5 in 2024").tokens == ("top", "accuracy", "in")


def test_stray_underscores_split():
    assert doc("snake_case vision_language").tokens == ("snake", "case", "vision_language")


@pytest.mark.parametrize("bad", ["single", "has_underscore here", "a b c d e f g"])
def test_bad_phrases(bad):
    with pytest.raises(PhraseTableError):
        PhraseTable.of([bad])


def test_term_counts_are_token_multiset():
    d = doc("point cloud point cloud and a cloud")
    assert d.term_counts == {"point_cloud": 2, "cloud": 1}
    assert isinstance(d, NormalizedDoc)


# -- properties -------------------------------------------------------------------

PHRASE_WORDS = sorted({w for p in PHRASES.phrases for w in p.split()})
PLAIN = ["diffusion", "robust", "segmentation", "we", "the", "method", "2023", "x1", "nerf"]
SEPARATORS = st.sampled_from([" ", "  ", "-", ", ", " (", ") ", "/", ".\n"])


def recase(draw, word):
    flips = draw(st.lists(st.booleans(), min_size=len(word), max_size=len(word)))
    return "".join(c.upper() if f else c for c, f in zip(word, flips))


@st.composite
def word_texts(draw, vocab=PLAIN + PHRASE_WORDS):
    words = draw(st.lists(st.sampled_from(vocab), max_size=12))
    out = []
    for w in words:
        out.append(recase(draw, w))
        out.append(draw(SEPARATORS))
    return "".join(out)


def longest_phrase_at(words, i):
    best = None
    for p in PHRASES.phrases:
        ws = p.split()
        if words[i:i + len(ws)] == ws and (best is None or len(ws) > len(best)):
            best = ws
    return "_".join(best)


@PROPERTY_RUNS
@given(st.data())
def test_phrase_protection_soundness(data):
    prefix = data.draw(st.lists(st.sampled_from(["robust", "diffusion", "x1", "segmentation"]), max_size=5))
    phrase = data.draw(st.sampled_from(PHRASES.phrases)).split()
    suffix = data.draw(st.lists(st.sampled_from(PLAIN + PHRASE_WORDS), max_size=5))
    words = prefix + phrase + suffix
    text = "".join(recase(data.draw, w) + data.draw(SEPARATORS) for w in words)
    tokens = normalize_text(text, PHRASES, StopwordSet())
    assert tokens[len(prefix)] == longest_phrase_at(words, len(prefix))


@PROPERTY_RUNS
@given(word_texts())
def test_casefold_invariance(text):
    assert doc(text.upper()) == doc(text) == doc(text.lower())


@PROPERTY_RUNS
@given(st.one_of(word_texts(), st.text()))
def test_idempotent(text):
    first = normalize_text(text, PHRASES, STOPS)
    assert normalize_text(" ".join(first), PHRASES, STOPS) == first


@PROPERTY_RUNS
@given(st.one_of(word_texts(), st.text()))
def test_no_stopword_survives(text):
    tokens = normalize_text(text, PHRASES, STOPS)
    assert not any(t in STOPS for t in tokens)
    assert all(t and not any(c.isspace() for c in t) for t in tokens)


@given(st.text())
def test_fold_is_stable(text):
    assert fold_text(fold_text(text)) == fold_text(text)
