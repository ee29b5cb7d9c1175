import numpy as np
import pytest

from core.errors import NotInDomainError, ValidationError
from core.fock import build_fock
from core.symbol import compute_b, gauge
from core.words import word
from engines.kernel import (PickProblem, PointStatus, corona_delta, eigen_residual, kernel_gram,
                            kernel_series, kernel_value, multiplier_eigen_residual, pick_feasible,
                            point_in_domain, random_interior_points, right_spectrum_witness,
                            schur_caratheodory_value, symmetric_basis, symmetric_compression_residual,
                            symmetric_z_residual, z_vector)


@pytest.fixture
def mixed_points(mixed, rng):
    return random_interior_points(mixed, 20, rng)


def test_random_points_hit_requested_gauges(mixed, rng):
    points = random_interior_points(mixed, 12, rng, max_gauge=0.5)
    assert len(points) == 12
    for lam in points:
        assert 0.05 - 1e-9 <= gauge(mixed, lam) <= 0.5 + 1e-9
    with pytest.raises(ValidationError):
        random_interior_points(mixed, 1, rng, max_gauge=1.0)


def test_point_status(shift_symbol):
    assert point_in_domain(shift_symbol, [0.5]).status is PointStatus.INTERIOR
    assert point_in_domain(shift_symbol, [1.0]).status is PointStatus.BOUNDARY
    assert point_in_domain(shift_symbol, [1.5]).status is PointStatus.EXTERIOR
    assert point_in_domain(shift_symbol, [0.5]).interior


def test_z_vector_eigen_and_norm_tails(mixed, mixed_points):
    F = build_fock(mixed, 10)
    for lam in mixed_points:
        z = z_vector(mixed, F, lam)
        assert eigen_residual(F, z.vector, lam) <= z.eigen_tail_bound + 1e-12
        assert -1e-12 <= z.closed_norm_sq - z.norm_sq <= z.tail_bound + 1e-10


def test_kernel_matches_truncated_series(mixed, mixed_points):
    F = build_fock(mixed, 10)
    for mu, lam in zip(mixed_points[:10], mixed_points[10:]):
        value, tail = kernel_series(mixed, F, mu, lam)
        assert abs(value - kernel_value(mixed, mu, lam)) <= tail + 1e-10


def test_kernel_gram_is_positive(mixed, mixed_points):
    G = kernel_gram(mixed, mixed_points[:8])
    assert np.allclose(G, G.conj().T)
    assert np.linalg.eigvalsh(G)[0] >= -1e-10 * np.trace(G).real


def test_kernel_rejects_exterior_points(shift_symbol):
    with pytest.raises(NotInDomainError):
        kernel_value(shift_symbol, [0.2], [1.2])
    with pytest.raises(NotInDomainError):
        z_vector(shift_symbol, build_fock(shift_symbol, 4), [1.0])


def test_classical_szego_kernel(shift_symbol):
    assert kernel_value(shift_symbol, [0.5], [0.5]) == pytest.approx(4 / 3)
    assert kernel_value(shift_symbol, [0.5j], [0.5]) == pytest.approx(1 / (1 - 0.25j))


def test_symmetric_basis_class_weights(ball2):
    entries = symmetric_basis(ball2, compute_b(ball2, 3), 3)
    by_k = {e.k: e for e in entries}
    assert len(entries) == 10
    assert by_k[(1, 1)].gamma_k == 2.0
    assert by_k[(2, 1)].gamma_k == 3.0
    w = by_k[(1, 1)].w_k
    assert np.count_nonzero(w) == 2
    assert np.allclose(w[np.nonzero(w)], 0.5)
    with pytest.raises(ValidationError):
        symmetric_basis(ball2, compute_b(ball2, 2), 3)


@pytest.mark.parametrize("name", ["ball2", "mixed"])
def test_symmetric_coordinates(request, name):
    f = request.getfixturevalue(name)
    F = build_fock(f, 6)
    entries = symmetric_basis(f, F.b, 6)
    lam = [0.3 + 0.1j, -0.2j]
    z = z_vector(f, F, lam)
    assert symmetric_z_residual(entries, z.vector, lam) <= 1e-13
    assert symmetric_compression_residual(F, entries, lam) <= z.eigen_tail_bound + 1e-12


def test_multiplier_eigenvectors(ball2):
    F = build_fock(ball2, 6)
    c = {word(): 0.2, word(0): 1.0, word(0, 1): 0.5j}
    assert multiplier_eigen_residual(ball2, F, c, [0.4, -0.3j]) <= 1e-12


def test_right_spectrum_witness(ball2):
    F = build_fock(ball2, 8)
    lam = [0.3, 0.4j]
    z = z_vector(ball2, F, lam)
    witness = right_spectrum_witness(ball2, F, lam)
    assert witness['rayleigh'] <= 2 * z.eigen_tail_bound ** 2 + 1e-12
    assert witness['min_eig'] <= witness['rayleigh'] + 1e-12


def test_pick_feasible_on_classical_problem(shift_symbol):
    verdict = pick_feasible(shift_symbol, PickProblem([[0.0], [0.5]], [0.0, 0.5]))
    assert verdict.feasible
    assert abs(verdict.min_eig) <= 1e-12


def test_pick_infeasible(shift_symbol):
    verdict = pick_feasible(shift_symbol, PickProblem([[0.0], [0.5]], [0.0, 0.9]))
    assert not verdict.feasible
    assert verdict.min_eig < -0.1


def test_pick_matrix_targets(ball2):
    nodes = [[0.1, 0.2], [0.3j, 0.0], [-0.2, 0.1]]
    targets = np.zeros((3, 2, 2))
    verdict = pick_feasible(ball2, PickProblem(nodes, targets))
    assert verdict.feasible
    assert verdict.pick.matrix.shape == (6, 6)
    assert verdict.pick.asymmetry <= 1e-14


def test_pick_problem_validation(shift_symbol, ball2):
    with pytest.raises(ValidationError):
        PickProblem([[0.1], [0.1]], [0.0, 0.5])
    with pytest.raises(ValidationError):
        PickProblem([[0.1], [0.2]], [0.0])
    with pytest.raises(ValidationError):
        pick_feasible(ball2, PickProblem([[0.1], [0.2]], [0.0, 0.1]))
    with pytest.raises(NotInDomainError):
        pick_feasible(shift_symbol, PickProblem([[0.1], [1.2]], [0.0, 0.1]))


def test_schur_caratheodory(ball2):
    F = build_fock(ball2, 4)
    assert schur_caratheodory_value(F, {word(0): 0.5}, 2) == pytest.approx(0.5)
    assert schur_caratheodory_value(F, {word(): 0.3}, 2) == pytest.approx(0.3)
    with pytest.raises(ValidationError):
        schur_caratheodory_value(F, {word(0): 0.5}, 5)
    with pytest.raises(ValidationError):
        schur_caratheodory_value(F, {word(0, 1, 0): 0.5}, 2)
    with pytest.raises(ValidationError):
        schur_caratheodory_value(F, {word(2): 1.0}, 2)


def test_corona_delta(ball2):
    F = build_fock(ball2, 5)
    assert corona_delta(F, [{word(): 1.0}]) == pytest.approx(1.0)
    assert corona_delta(F, [{word(0): 1.0}, {word(1): 1.0}]) == pytest.approx(0.0, abs=1e-12)
    assert corona_delta(F, [{word(): 0.5}, {word(0): 1.0}], d=2) == pytest.approx(0.25)
    with pytest.raises(ValidationError):
        corona_delta(F, [])


def test_corona_delta_for_complementary_pair(shift_symbol):
    F = build_fock(shift_symbol, 30)
    # minimizer is the geometric vector with ratio 1/2
    delta = corona_delta(F, [{word(0): 1.0}, {word(): 1.0, word(0): -1.0}])
    assert delta == pytest.approx(0.5, abs=1e-6)
