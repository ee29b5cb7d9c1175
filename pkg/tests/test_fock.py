import numpy as np
import pytest

from config import Config
from core.errors import DimensionCapError, NotInDomainError, ValidationError
from core.fock import (basis_index, bohr_check, build_fock, defect_residual, eval_poly, hol_metric,
                       interior_norm, intertwiner_residual, similarity_intertwiner, wiener_check)
from core.symbol import reverse_symbol
from core.words import EMPTY, enumerate_words, word


def test_shift_is_unilateral(shift_symbol):
    F = build_fock(shift_symbol, 3)
    expected = np.diag(np.ones(3), -1)
    assert np.array_equal(F.W[0].toarray(), expected)
    assert F.dim == 4


def test_free_creation_weights(ball2):
    F = build_fock(ball2, 2)
    for Wi in F.W:
        assert set(Wi.data) == {1.0}


def test_mixed_weight_entry(mixed):
    F = build_fock(mixed, 2)
    entry = F.W[0][F.index(word(0, 1)), F.index(word(1))]
    assert entry == pytest.approx(1 / np.sqrt(2), abs=1e-15)


def test_basis_index_matches_enumeration():
    for n in (1, 2, 3):
        for position, w in enumerate(enumerate_words(n, 3)):
            assert basis_index(n, w) == position


def test_shift_structure(mixed):
    F = build_fock(mixed, 4)
    top = F.degrees == F.level
    for Wi in F.W + F.L:
        dense = Wi.toarray()
        assert np.all(dense[:, top] == 0)
        assert np.all(np.count_nonzero(dense, axis=0) <= 1)
    # pairwise orthogonal ranges
    assert np.abs((F.W[0].conj().T @ F.W[1]).toarray()).max() == 0


@pytest.mark.parametrize("name,m", [("ball2", 8), ("ball3", 5), ("mixed", 8), ("shift_symbol", 6)])
def test_defect_identity(request, name, m):
    F = build_fock(request.getfixturevalue(name), m)
    assert defect_residual(F) <= 1e-12


def test_reversal_conjugation(mixed):
    F = build_fock(mixed, 6)
    Ft = build_fock(reverse_symbol(mixed), 6)
    U = F.reversal_unitary()
    for Li, Wt in zip(F.L, Ft.W):
        assert np.abs((U.T @ Li @ U - Wt).toarray()).max() <= 1e-12


def test_left_and_right_shifts_commute_on_interior(mixed):
    F = build_fock(mixed, 5)
    low = F.degree_mask(F.level - 2)
    for Wi in F.W:
        for Lj in F.L:
            diff = (Wi @ Lj - Lj @ Wi).toarray()
            assert np.abs(diff[:, low]).max() <= 1e-12


def test_dimension_cap(ball2):
    with pytest.raises(DimensionCapError):
        build_fock(ball2, 10, dim_cap=100)
    with pytest.raises(ValidationError):
        build_fock(ball2, 0)


def test_eval_poly(mixed, shift_symbol):
    F = build_fock(mixed, 3)
    assert np.allclose(eval_poly(F, {EMPTY: 1.0}), np.eye(F.dim))
    column = eval_poly(F, {word(0, 1): 1.0}) @ F.vacuum()
    assert column[F.index(word(0, 1))] == pytest.approx(1 / np.sqrt(2))
    assert np.count_nonzero(column) == 1
    S = build_fock(shift_symbol, 3)
    assert np.allclose(eval_poly(S, {word(0): 1.0}) @ S.vacuum(), S.basis_vector(word(0)))
    with pytest.raises(ValidationError):
        eval_poly(F, {word(0, 0, 0, 0): 1.0})


def test_right_evaluation_uses_reversed_words(mixed):
    F = build_fock(mixed, 3)
    right = eval_poly(F, {word(0, 1): 1.0}, side='right')
    expected = F.word_operator(word(1, 0), 'right').toarray()
    assert np.allclose(right, expected)


def test_interior_norm(shift_symbol, mixed):
    S = build_fock(shift_symbol, 6)
    assert interior_norm(S, np.eye(S.dim), 3) == pytest.approx(1.0)
    assert interior_norm(S, S.W[0], S.level - 1) == pytest.approx(1.0)
    F = build_fock(mixed, 4)
    A = eval_poly(F, {word(0, 1): 1.0})
    norms = [interior_norm(F, A, d) for d in range(F.level + 1)]
    assert norms == sorted(norms)
    assert norms[-1] >= 1 / np.sqrt(2) - 1e-12
    with pytest.raises(ValidationError):
        interior_norm(F, A, F.level + 1)


def test_hol_metric(shift_symbol, mixed):
    S = build_fock(shift_symbol, 4)
    assert hol_metric(S, {EMPTY: 1.0}, {EMPTY: 0.0}, [0.5]) == pytest.approx(0.25)
    F = build_fock(mixed, 3)
    c1 = {word(0): 1.0, word(0, 1): 0.5j}
    c2 = {EMPTY: 0.2, word(1): -1.0}
    radii = [0.3, 0.6, 0.9]
    assert hol_metric(F, c1, c1, radii) == 0.0
    assert hol_metric(F, c1, c2, radii) == pytest.approx(hol_metric(F, c2, c1, radii))
    with pytest.raises(ValidationError):
        hol_metric(F, c1, c2, [0.5, 1.0])
    with pytest.raises(ValidationError):
        hol_metric(F, c1, c2, [0.6, 0.3])


def test_wiener_examples(shift_symbol, mixed):
    S = build_fock(shift_symbol, 6)
    report = wiener_check(S, {EMPTY: 0.5, word(0): 0.5}, 1.0)
    assert report.lhs == [pytest.approx(0.5, abs=1e-12)]
    assert report.margins[0] == pytest.approx(0.25, abs=1e-12)
    assert report.holds

    constant = wiener_check(S, {EMPTY: 0.7}, 1.0)
    assert constant.lhs == [] and constant.holds

    F = build_fock(mixed, 4)
    edge = wiener_check(F, {word(0, 1): np.sqrt(2)}, 1.0)
    assert edge.lhs[-1] == pytest.approx(1.0, abs=1e-12)
    assert edge.margins[-1] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValidationError):
        wiener_check(F, {EMPTY: 1.0}, 0.0)


def test_wiener_warns_on_small_bound(shift_symbol, caplog):
    S = build_fock(shift_symbol, 4)
    wiener_check(S, {word(0): 1.0}, 0.5)
    assert "normUB" in caplog.text


def test_bohr_examples(shift_symbol, ball2):
    S = build_fock(shift_symbol, 4)
    assert bohr_check(S, {word(0): 1.0}, [1 / 3], 1.0) == pytest.approx(2 / 3, abs=1e-12)
    assert bohr_check(S, {EMPTY: 1.0}, [0.0], 1.0) == pytest.approx(0.0, abs=1e-12)
    F = build_fock(ball2, 3)
    assert bohr_check(F, {word(0, 1): 1.0}, [0.2, 0.2], 1.0) == pytest.approx(0.96, abs=1e-12)
    with pytest.raises(NotInDomainError):
        bohr_check(F, {word(0, 1): 1.0}, [0.25, 0.25], 1.0)


def test_similarity_intertwiner(mixed, ball2):
    F, G = build_fock(mixed, 4), build_fock(ball2, 4)
    x = similarity_intertwiner(F, G)
    assert x[0] == 1.0
    assert intertwiner_residual(F, G) <= 1e-12


def test_weight_histogram(mixed):
    F = build_fock(mixed, 3)
    hist = F.weight_histogram(0, bins=4)
    assert sum(hist['counts']) == F.W[0].nnz
    assert len(hist['edges']) == 5
    assert Config.DIM_CAP >= F.dim
