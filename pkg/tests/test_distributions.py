import numpy as np
import pytest
from scipy import stats

from cbimatrix import DomainError, make_rng
from cbimatrix.distributions import (
    CGammaParams,
    batch_beta1_to_beta2,
    beta1_to_beta2,
    beta2_to_beta1,
    cbeta1_logpdf,
    cbeta2_logpdf,
    cgamma_logpdf,
    sample_cbeta1,
    sample_cbeta2,
    sample_cgamma,
)
from cbimatrix.hermitian import conjugate_diag, logdet, random_unitary


def _unit(m, seed):
    rng = make_rng(seed)
    return conjugate_diag(rng.uniform(0.05, 0.95, m), random_unitary(m, rng))


def test_param_validation():
    with pytest.raises(DomainError):
        CGammaParams(1.5, m=3)
    with pytest.raises(DomainError):
        CGammaParams(3.0, m=2, theta=np.diag([1.0, -1.0]))
    with pytest.raises(DomainError):
        sample_cbeta1(0.5, 2.0, 2, make_rng(0))


def test_shapes_and_determinism():
    p = CGammaParams(3.0, m=2)
    one = sample_cgamma(p, make_rng(1))
    assert one.shape == (2, 2)
    stack = sample_cgamma(p, make_rng(1), size=5)
    assert stack.shape == (5, 2, 2)
    assert np.array_equal(stack, sample_cgamma(p, make_rng(1), size=5))
    assert sample_cbeta1(2, 2, 2, make_rng(1), size=0).shape == (0, 2, 2)
    U, rej = sample_cbeta1(2, 2, 2, make_rng(1), size=10, return_rejected=True)
    assert rej == 0 and U.shape == (10, 2, 2)


def test_gamma_mean_with_scale():
    theta = np.array([[2.0, 0.5j], [-0.5j, 1.0]])
    A = sample_cgamma(CGammaParams(3.0, 2, theta), make_rng(2), size=40_000)
    assert np.allclose(A.mean(axis=0), 3.0 * theta, atol=0.05)


def test_beta_mean():
    U = sample_cbeta1(3.0, 2.0, 2, make_rng(3), size=40_000)
    assert np.allclose(U.mean(axis=0), 0.6 * np.eye(2), atol=0.01)


def test_scalar_laws():
    rng = make_rng(4)
    g = sample_cgamma(CGammaParams(2.5), rng, size=20_000)[:, 0, 0].real
    assert stats.kstest(g, stats.gamma(2.5).cdf).pvalue > 0.01
    b = sample_cbeta1(2.0, 3.0, 1, rng, size=20_000)[:, 0, 0].real
    assert stats.kstest(b, stats.beta(2.0, 3.0).cdf).pvalue > 0.01
    f = sample_cbeta2(2.0, 3.0, 1, rng, size=20_000)[:, 0, 0].real
    assert stats.kstest(f, stats.betaprime(2.0, 3.0).cdf).pvalue > 0.01


def test_scalar_densities():
    assert cgamma_logpdf([[1.7]], CGammaParams(2.5)) == pytest.approx(stats.gamma(2.5).logpdf(1.7))
    assert cbeta1_logpdf([[0.3]], 2.0, 3.5) == pytest.approx(stats.beta(2.0, 3.5).logpdf(0.3))
    assert cbeta2_logpdf([[0.8]], 2.0, 3.5) == pytest.approx(stats.betaprime(2.0, 3.5).logpdf(0.8))


@pytest.mark.parametrize("m", [2, 3])
def test_type_change_jacobian(m):
    # F = (I - U)^{-1} - I has dF = |I - U|^{-2m} dU
    a, b = m + 0.5, m + 1.0
    U = _unit(m, m)
    F = beta1_to_beta2(U)
    lhs = cbeta1_logpdf(U, a, b)
    rhs = cbeta2_logpdf(F, a, b) - 2 * m * logdet(np.eye(m) - U)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_maps_round_trip():
    U = _unit(3, 8)
    assert np.allclose(beta2_to_beta1(beta1_to_beta2(U)), U, atol=1e-12)
    stack = np.stack([_unit(3, s) for s in range(3)])
    assert np.allclose(batch_beta1_to_beta2(stack)[1], beta1_to_beta2(stack[1]), atol=1e-12)
    with pytest.raises(DomainError):
        beta1_to_beta2(np.eye(2))


def test_gamma_logpdf_with_scale():
    theta = np.diag([2.0, 0.5])
    A = np.array([[1.0, 0.2], [0.2, 0.7]])
    # scale change A = Theta^{1/2} A0 Theta^{1/2}, Jacobian |Theta|^m
    S = np.diag(np.sqrt([2.0, 0.5]))
    A0 = np.linalg.inv(S) @ A @ np.linalg.inv(S)
    lhs = cgamma_logpdf(A, CGammaParams(3.0, 2, theta))
    rhs = cgamma_logpdf(A0, CGammaParams(3.0, 2)) - 2 * logdet(theta)
    assert lhs == pytest.approx(rhs, abs=1e-12)
