import hypothesis.strategies as st
import pytest
from hypothesis import given

from core.errors import ValidationError
from core.words import (EMPTY, Word, degree_class, enumerate_words, multidegree, multidegrees,
                        prefix_splits, suffix_splits, word, word_count)

letters = st.lists(st.integers(min_value=0, max_value=3), max_size=6)


def test_enumerate_words_graded_lex():
    words = enumerate_words(2, 2)
    assert [w.to_json() for w in words] == [[], [0], [1], [0, 0], [0, 1], [1, 0], [1, 1]]
    assert len(enumerate_words(3, 4)) == word_count(3, 4) == 1 + 3 + 9 + 27 + 81


def test_enumerate_words_rejects_bad_sizes():
    with pytest.raises(ValidationError):
        enumerate_words(0, 2)
    with pytest.raises(ValidationError):
        enumerate_words(2, -1)


def test_enumeration_matches_sort_order():
    words = enumerate_words(3, 3)
    assert words == sorted(words)


@given(letters, letters)
def test_reverse_is_antihomomorphism(a, b):
    x, y = Word(tuple(a)), Word(tuple(b))
    assert (x + y).reverse() == y.reverse() + x.reverse()
    assert x.reverse().reverse() == x


@given(letters.filter(bool))
def test_prefix_and_suffix_splits(a):
    gamma = Word(tuple(a))
    pre = prefix_splits(gamma)
    suf = suffix_splits(gamma)
    assert len(pre) == len(suf) == len(gamma)
    assert all(beta + alpha == gamma and len(beta) >= 1 for beta, alpha in pre)
    assert all(alpha + beta == gamma and len(beta) >= 1 for alpha, beta in suf)


def test_splits_reject_empty_word():
    with pytest.raises(ValidationError):
        prefix_splits(EMPTY)
    with pytest.raises(ValidationError):
        suffix_splits(EMPTY)


def test_prefix_splits_example():
    assert prefix_splits(word(0, 1)) == [(word(0), word(1)), (word(0, 1), EMPTY)]


def test_degree_class_members():
    cls = degree_class((2, 1))
    assert [w.to_json() for w in cls.members] == [[0, 0, 1], [0, 1, 0], [1, 0, 0]]
    assert cls.size == cls.multinomial() == 3
    assert degree_class((0, 0)).members == (EMPTY,)


@given(st.lists(st.integers(min_value=0, max_value=3), min_size=1, max_size=3))
def test_degree_class_size_is_multinomial(k):
    cls = degree_class(k)
    assert cls.size == cls.multinomial()
    assert all(multidegree(w, len(k)) == tuple(k) for w in cls.members)


def test_degree_class_rejects_negative():
    with pytest.raises(ValidationError):
        degree_class((1, -1))


def test_multidegrees_cover_every_word_once():
    n, m = 2, 4
    total = sum(degree_class(k).size for k in multidegrees(n, m))
    assert total == word_count(n, m)
    assert multidegrees(2, 1) == [(0, 0), (1, 0), (0, 1)]


def test_word_json_and_validation():
    assert Word.from_json([0, 2]).to_json() == [0, 2]
    assert str(word(0, 1)) == "g1g2"
    assert str(EMPTY) == "g0"
    with pytest.raises(ValidationError):
        Word.from_json([0, "1"])
    with pytest.raises(ValidationError):
        Word((-1,))
    with pytest.raises(ValidationError):
        word(0, 2).check_alphabet(2)
