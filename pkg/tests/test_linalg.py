import numpy as np
import pytest

from cohvol.linalg import SingularChannelError, condition_number, hermitian_inner, right_pseudo_inverse

from oracles import inner_loop


def test_identity():
    assert np.allclose(right_pseudo_inverse(np.eye(3)), np.eye(3), atol=1e-15)


def test_single_row():
    assert np.allclose(right_pseudo_inverse(np.array([[1.0, 0.0]])), [[1.0], [0.0]])


def test_random_wide_product(rng):
    H = rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8))
    P = right_pseudo_inverse(H)
    assert P.shape == (8, 4)
    assert np.max(np.abs(H @ P - np.eye(4))) <= 1e-9


def test_ill_conditioned_but_valid(rng):
    for _ in range(20):
        U = int(rng.integers(1, 7))
        N = int(rng.integers(U, 2 * U + 1))
        A = rng.normal(size=(U, N)) + 1j * rng.normal(size=(U, N))
        u, _, vh = np.linalg.svd(A, full_matrices=False)
        H = (u * np.logspace(0, -6, U)) @ vh
        assert condition_number(H) == pytest.approx(1e6 if U > 1 else 1.0, rel=1e-6)
        assert np.max(np.abs(H @ right_pseudo_inverse(H) - np.eye(U))) <= 1e-9


def test_rank_deficient_raises():
    H = np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]])
    with pytest.raises(SingularChannelError) as info:
        right_pseudo_inverse(H)
    assert info.value.condition > 1e10


def test_tall_matrix_rejected():
    with pytest.raises(ValueError):
        right_pseudo_inverse(np.ones((3, 2)))


def test_inner_examples():
    assert hermitian_inner([1, 1j], [1, 1j]) == 2
    assert hermitian_inner([1, 0], [0, 1]) == 0


def test_inner_matches_loop(rng):
    a = rng.normal(size=17) + 1j * rng.normal(size=17)
    b = rng.normal(size=17) + 1j * rng.normal(size=17)
    assert abs(hermitian_inner(a, b) - inner_loop(a, b)) <= 1e-14 * max(1.0, abs(inner_loop(a, b)))
    assert hermitian_inner(b, a) == pytest.approx(np.conj(hermitian_inner(a, b)), abs=1e-14)


def test_inner_length_mismatch():
    with pytest.raises(ValueError):
        hermitian_inner([1, 2], [1, 2, 3])
