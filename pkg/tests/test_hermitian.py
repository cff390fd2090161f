import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cbimatrix import DomainError, EigenSpectrum, as_hermitian, eig_hermitian, herm_sqrt, logdet, make_rng
from cbimatrix.hermitian import (
    batch_logdet,
    batch_power,
    batch_sandwich,
    conjugate_diag,
    herm_inv_sqrt,
    is_pd,
    matrix_from_json,
    matrix_to_json,
    random_unitary,
)


def _pd(m, seed):
    rng = make_rng(seed)
    return conjugate_diag(rng.uniform(0.2, 3.0, m), random_unitary(m, rng))


def test_rejects_non_hermitian():
    with pytest.raises(DomainError):
        as_hermitian([[1, 2], [0, 1]])


def test_symmetrises_small_noise():
    A = np.array([[2.0, 1 + 1j], [1 - 1j + 1e-12, 3.0]])
    H, fix = as_hermitian(A, return_correction=True)
    assert np.allclose(H, H.conj().T, atol=0)
    assert 0 < fix < 1e-8


def test_eig_order_and_reconstruction():
    A = _pd(4, 1)
    sp, G = eig_hermitian(A)
    assert np.all(np.diff(sp.values) <= 0)
    assert np.allclose((G * sp.values) @ G.conj().T, A, atol=1e-12)


def test_spectrum_sorts_and_freezes():
    s = EigenSpectrum([0.1, 0.5, 0.3])
    assert list(s.values) == [0.5, 0.3, 0.1]
    with pytest.raises(ValueError):
        s.values[0] = 1.0
    with pytest.raises(DomainError):
        EigenSpectrum([1.0, np.nan])


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(0, 10_000))
def test_sqrt_squares_back(m, seed):
    A = _pd(m, seed)
    S = herm_sqrt(A)
    assert np.allclose(S @ S, A, atol=1e-11)
    assert np.allclose(herm_inv_sqrt(A) @ S, np.eye(m), atol=1e-11)
    assert logdet(A) == pytest.approx(np.log(np.linalg.det(A).real), abs=1e-11)


def test_pd_checks():
    assert is_pd(np.eye(3))
    assert not is_pd(np.diag([1.0, 0.0]))
    with pytest.raises(DomainError):
        herm_sqrt(np.diag([1.0, -1.0]))


def test_unitary():
    Q = random_unitary(4, make_rng(3))
    assert np.allclose(Q.conj().T @ Q, np.eye(4), atol=1e-13)


def test_batch_helpers_match_single():
    A = np.stack([_pd(3, s) for s in range(4)])
    R = batch_power(A, 0.5)
    for k in range(4):
        assert np.allclose(R[k], herm_sqrt(A[k]), atol=1e-12)
    B = batch_sandwich(R, np.broadcast_to(np.eye(3), A.shape))
    assert np.allclose(B, A, atol=1e-12)
    assert np.allclose(batch_logdet(A), [logdet(a) for a in A], atol=1e-12)


def test_json_round_trip():
    A = _pd(3, 5)
    assert np.array_equal(matrix_from_json(matrix_to_json(A)), A)
