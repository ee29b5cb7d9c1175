import numpy as np
import pytest

from conftest import random_pure_tuple
from core.errors import NotInDomainError, SubharmonicityError, ValidationError
from core.fock import build_fock
from core.words import EMPTY, enumerate_words, word
from engines.poisson import (beurling_factorize, build_poisson, defect_expansion_residual, defect_operator,
                             intertwine_residual, kk_bracket, kk_residual, poisson_transform,
                             poisson_transform_at_radius, transform_residual)
from engines.tuples import OperatorTuple, phi_apply


def test_poisson_identities_on_pure_members(ball2, pure_tuples):
    m = 10
    F = build_fock(ball2, m)
    for T in pure_tuples:
        P = build_poisson(ball2, T, F)
        assert kk_residual(P) <= 10 * 0.8 ** (m + 1)
        assert intertwine_residual(P, F, T) <= 1e-9
        for alpha in enumerate_words(2, 2):
            for beta in enumerate_words(2, 2):
                residual, bound = transform_residual(P, F, ball2, T, alpha, beta)
                assert residual <= bound + 1e-8


def test_kk_bracket_for_mixed_symbol(mixed, rng):
    T = random_pure_tuple(mixed, rng, 3, 0.7)
    F = build_fock(mixed, 6)
    P = build_poisson(mixed, T, F)
    gaps = kk_bracket(P, mixed, T)
    assert gaps['lower_gap'] >= -1e-10
    assert gaps['upper_gap'] >= -1e-10
    assert P.tail_bound <= 0.7 ** (6 // 2 + 1) + 1e-12


def test_defect_operator_squares_to_defect(mixed, rng):
    T = random_pure_tuple(mixed, rng, 3, 0.6)
    delta, basis, sing = defect_operator(mixed, T)
    assert np.allclose(delta @ delta, np.eye(3) - phi_apply(mixed, T, np.eye(3)))
    assert basis.shape[1] == sing.size == 3


def test_scalar_poisson_transform(shift_symbol):
    T = OperatorTuple([[[0.5]]])
    F = build_fock(shift_symbol, 30)
    P = build_poisson(shift_symbol, T, F)
    value = poisson_transform(P, F, word(0), EMPTY)
    assert value[0, 0] == pytest.approx(0.5, abs=1e-14)
    assert P.defect_rank == 1


def test_poisson_at_radius(ball2, rng):
    T = random_pure_tuple(ball2, rng, 2, 0.9)
    F = build_fock(ball2, 8)
    value = poisson_transform_at_radius(ball2, T, F, word(0), word(1), 0.5)
    expected = 0.25 * T[0] @ T[1].conj().T
    assert np.abs(value - expected).max() <= 1e-4
    with pytest.raises(ValidationError):
        poisson_transform_at_radius(ball2, T, F, word(0), word(1), 1.0)


def test_build_poisson_rejects_non_member(ball2):
    F = build_fock(ball2, 3)
    with pytest.raises(NotInDomainError):
        build_poisson(ball2, OperatorTuple.scalar_point([1.0, 0.5]), F)


def test_unitary_has_zero_defect(shift_symbol):
    F = build_fock(shift_symbol, 4)
    P = build_poisson(shift_symbol, OperatorTuple([[[1.0]]]), F)
    assert P.defect_rank == 0
    assert P.full_kernel().shape == (0, 1)


@pytest.mark.parametrize("name", ["ball2", "mixed"])
def test_defect_expansion(request, name):
    F = build_fock(request.getfixturevalue(name), 5)
    for d in range(F.level + 1):
        assert defect_expansion_residual(F, d) <= 1e-12


def test_beurling_factorization_of_model_range(ball2):
    F = build_fock(ball2, 5)
    h = 1
    K = np.zeros((F.dim, 2), dtype=complex)
    K[0, 0] = 1.0
    K[F.index(word(1)), 1] = 1.0
    # Y = sum over words of W_a P W_a*, built from a wandering subspace
    Y = np.zeros((F.dim, F.dim), dtype=complex)
    for alpha in enumerate_words(2, F.level):
        Wa = F.word_operator(alpha).toarray()
        block = Wa @ K
        Y += block @ block.conj().T
    factor = beurling_factorize(ball2, F, Y, h)
    assert factor.rank == F.dim
    assert factor.kernel.defect_rank == 2
    assert factor.factor_residual <= 1e-8
    assert factor.multianalytic_residual <= 1e-8


def test_beurling_rejects_non_subharmonic(ball2):
    F = build_fock(ball2, 3)
    Y = np.diag((F.level - F.degrees).astype(float))
    with pytest.raises(SubharmonicityError):
        beurling_factorize(ball2, F, Y, 1)
    with pytest.raises(ValidationError):
        beurling_factorize(ball2, F, np.eye(3), 1)
