import math

import hypothesis.strategies as st
import pytest
from hypothesis import given

from conftest import symbol_from_pairs
from core.errors import SymbolValidationError, ValidationError
from core.symbol import (FreeSymbol, compute_b, equivalence_test, gamma_constant, gauge, radius_test,
                         reverse_symbol, schwarz_constant)
from core.words import EMPTY, Word, enumerate_words, word


def series_inverse(f: FreeSymbol, m: int):
    """Independent oracle: sum_k f^k by noncommutative polynomial multiplication, cut at degree m"""
    result = {(): 1.0}
    power = {(): 1.0}
    for _ in range(m):
        nxt = {}
        for left, x in power.items():
            for w, a in f.coeffs.items():
                key = left + w.letters
                if len(key) <= m:
                    nxt[key] = nxt.get(key, 0.0) + x * a
        power = nxt
        for key, value in power.items():
            result[key] = result.get(key, 0.0) + value
    return result


@pytest.mark.parametrize("n", [2, 3])
def test_free_ball_b_is_one(n):
    b = compute_b(FreeSymbol.free_ball(n), 8)
    assert all(value == 1.0 for value in b.values.values())


def test_mixed_b_examples(mixed):
    b = compute_b(mixed, 2)
    assert b[EMPTY] == 1.0
    assert b[word(0)] == b[word(1)] == 1.0
    assert b[word(0, 1)] == 2.0
    assert b[word(1, 0)] == 1.0


def test_mixed_b_matches_series_inversion(mixed):
    b = compute_b(mixed, 6)
    oracle = series_inverse(mixed, 6)
    for w in enumerate_words(2, 6):
        expected = oracle.get(w.letters, 0.0)
        assert abs(b[w] - expected) <= 1e-12 * expected


def test_b_identities(mixed):
    b = compute_b(mixed, 6)
    assert b.prefix_residual(mixed) <= 1e-12
    assert b.suffix_residual(mixed) <= 1e-12
    assert b.check_submultiplicativity() <= 1e-12


def test_reverse_symbol_b_duality(mixed):
    flipped = reverse_symbol(mixed)
    assert flipped[word(1, 0)] == 1.0 and flipped[word(0, 1)] == 0.0
    assert reverse_symbol(flipped) == mixed
    b, bt = compute_b(mixed, 5), compute_b(flipped, 5)
    for w in enumerate_words(2, 5):
        assert bt[w] == pytest.approx(b[w.reverse()], rel=1e-14)


def test_b_table_rejects_words_beyond_degree(mixed):
    with pytest.raises(ValidationError):
        compute_b(mixed, 2)[word(0, 0, 0)]


def test_gamma_constant(ball2, mixed):
    assert gamma_constant(ball2, compute_b(ball2, 1)) == 2.0
    weighted = FreeSymbol.linear([0.3, 2.5])
    assert gamma_constant(weighted, compute_b(weighted, 1)) == pytest.approx(2.0)
    assert gamma_constant(mixed, compute_b(mixed, 2)) == 2.5


@given(st.lists(st.floats(min_value=0.01, max_value=5.0), min_size=1, max_size=3),
       st.floats(min_value=0.0, max_value=3.0))
def test_gamma_at_least_n(weights, extra):
    coeffs = {word(i): a for i, a in enumerate(weights)}
    if extra > 0:
        coeffs[word(0, 0)] = extra
    f = FreeSymbol(len(weights), coeffs)
    gamma = gamma_constant(f, compute_b(f, f.support_degree))
    assert gamma >= len(weights) * (1 - 1e-12)
    if extra == 0:
        assert gamma == pytest.approx(len(weights))


def test_schwarz_constant(ball2, shift_symbol, mixed):
    assert schwarz_constant(ball2, compute_b(ball2, 4), 3) == 1.0
    assert schwarz_constant(shift_symbol, compute_b(shift_symbol, 3), 2) == 1.0
    assert schwarz_constant(mixed, compute_b(mixed, 2), 1) >= math.sqrt(2) - 1e-15
    b = compute_b(mixed, 6)
    values = [schwarz_constant(mixed, b, m) for m in range(6)]
    assert values == sorted(values)


def test_symbol_validation():
    with pytest.raises(SymbolValidationError):
        FreeSymbol(2, {word(0): 1.0})
    with pytest.raises(SymbolValidationError):
        FreeSymbol(1, {word(0): 1.0, word(0, 0): -0.5})
    with pytest.raises(SymbolValidationError):
        FreeSymbol(1, {EMPTY: 0.5, word(0): 1.0})
    with pytest.raises(ValidationError):
        FreeSymbol(1, {word(0): 1.0, word(1): 1.0})


def test_symbol_json_round_trip_and_errors(mixed):
    data = mixed.to_json()
    assert FreeSymbol.from_json(data) == mixed
    assert FreeSymbol.from_json(data).fingerprint() == mixed.fingerprint()
    with pytest.raises(ValidationError, match="coeffs\\[1\\].word"):
        FreeSymbol.from_json({"n": 1, "coeffs": [{"word": [0], "a": 1}, {"word": [0], "a": 2}]})
    with pytest.raises(ValidationError, match="n"):
        FreeSymbol.from_json({"n": "2", "coeffs": []})


def test_gauge(mixed):
    assert gauge(mixed, [0.5, 0.5]) == pytest.approx(0.25 + 0.25 + 0.0625)
    with pytest.raises(ValidationError):
        gauge(mixed, [0.1])


def test_radius_test_examples(mixed):
    b = compute_b(mixed, 6)
    poly = {EMPTY: 1.0, word(0): 2.0, word(0, 1): -1.0}
    result = radius_test(poly, b, 6)
    assert result.rho[2:] == [0.0] * 4
    assert result.plausibly_holomorphic and result.heuristic

    growing = {w: b[w] * 2.0 ** len(w) for w in enumerate_words(2, 6)}
    result = radius_test(growing, b, 6)
    assert min(result.rho) >= 2.0 - 1e-12
    assert not result.plausibly_holomorphic

    assert radius_test({EMPTY: 1.0}, b, 4).rho == [0.0] * 4


def test_equivalence_test(mixed, ball2):
    same = equivalence_test(compute_b(mixed, 4), compute_b(mixed, 4))
    assert same.unitarily_equivalent and same.similarity_bound == 1.0
    other = equivalence_test(compute_b(mixed, 4), compute_b(ball2, 4))
    assert not other.unitarily_equivalent
    assert other.c1 == 1.0 and other.c2 > 1.0


def test_symbol_from_pairs():
    f = symbol_from_pairs(2, [((0,), 1.0), ((1,), 0.5)])
    assert f[Word((1,))] == 0.5 and f.is_linear
