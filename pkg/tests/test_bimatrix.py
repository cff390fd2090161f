import math

import numpy as np
import pytest
from scipy.special import betaln, hyp2f1

from cbimatrix import BimatrixParams, DomainError, make_rng
from cbimatrix.bimatrix import (
    bgb1_logpdf,
    bgb1_logpdf_series,
    bgb1_pdf_m1,
    bgb2_logpdf,
    bgb2_pdf_m1,
    det_identity_check,
    det_moment,
    det_moment_mc,
    det_moment_quad_m1,
    inverse_pair_logpdf,
    joint_eig_logpdf,
    joint_eig_pdf_batch,
    product_spectrum,
    sample_bgb1,
    sample_bgb2,
    sample_z,
    sharded_bgb1,
    z_det_moment,
    z_logpdf,
    z_pdf_m1,
)
from cbimatrix.hermitian import conjugate_diag, random_unitary
from cbimatrix.verify import random_unit_pair

P1 = BimatrixParams(2.0, 3.0, 4.0)
P2 = BimatrixParams(3.0, 3.0, 3.0, m=2)


def test_sampler_structure():
    s = sample_bgb1(P2, make_rng(1), size=6)
    assert len(s) == 6 and s.first.shape == (6, 2, 2)
    for U in np.concatenate([s.first, s.second]):
        w = np.linalg.eigvalsh(U)
        assert 0 < w[0] and w[-1] < 1
    single = sample_bgb1(P2, make_rng(1))
    assert single.first.shape == (2, 2)
    assert np.isfinite(single.logpdf())
    t2 = sample_bgb2(P2, make_rng(2))
    assert t2.kind == "II" and np.isfinite(t2.logpdf())


def test_shards_are_deterministic():
    a = sharded_bgb1(P2, 10, seed=5, shards=3)
    b = sharded_bgb1(P2, 10, seed=5, shards=3)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert a[0].shape == (10, 2, 2)


def test_scalar_density_matches_matrix_form():
    for u1, u2 in [(0.2, 0.7), (0.9, 0.1)]:
        assert bgb1_logpdf([[u1]], [[u2]], P1) == pytest.approx(math.log(bgb1_pdf_m1(u1, u2, P1)), abs=1e-12)


def test_type_ii_scalar_change_of_variables():
    u1, u2 = 0.35, 0.6
    f1, f2 = u1 / (1 - u1), u2 / (1 - u2)
    # the shared denominator makes u_i = f_i / (1 + f_i) the scalar map
    expect = bgb2_pdf_m1(f1, f2, P1) / ((1 - u1) ** 2 * (1 - u2) ** 2)
    assert bgb1_pdf_m1(u1, u2, P1) == pytest.approx(expect, rel=1e-12)
    assert bgb2_logpdf([[f1]], [[f2]], P1) == pytest.approx(math.log(bgb2_pdf_m1(f1, f2, P1)), abs=1e-12)


@pytest.mark.parametrize("m", [2, 3])
def test_series_equals_closed(m):
    p = BimatrixParams(m + 0.5, m + 1.0, m + 0.25, m)
    rng = make_rng(10 + m)
    for _ in range(3):
        U1, U2 = random_unit_pair(m, rng, 0.05, 0.8)
        sv = bgb1_logpdf_series(U1, U2, p)
        assert sv.converged
        assert sv.value == pytest.approx(bgb1_logpdf(U1, U2, p), abs=1e-9)


def test_det_identity():
    rng = make_rng(3)
    for m in (1, 2, 4):
        F1 = conjugate_diag(rng.uniform(0, 5, m), random_unitary(m, rng))
        F2 = conjugate_diag(rng.uniform(0, 5, m), random_unitary(m, rng))
        assert det_identity_check(F1, F2) < 1e-10
    with pytest.raises(DomainError):
        det_identity_check(-np.eye(2), np.eye(2))


def test_product_spectrum_domain():
    U = np.diag([0.5, 0.2])
    assert np.allclose(product_spectrum(U, U), [0.25, 0.04])
    with pytest.raises(DomainError):
        bgb1_logpdf(np.eye(2), U, P2)


def test_moments_m1():
    sv = det_moment(P1, 1, 2)
    assert sv.value == pytest.approx(det_moment_quad_m1(P1, 1, 2), rel=1e-8)
    assert det_moment(P1, 0, 0).value == 1.0
    with pytest.raises(DomainError):
        det_moment(P2, -2.5, 0)


def test_moment_mc_m2():
    sv = det_moment(P2, 1, 0)
    # E|U1| for U1 ~ CBI_2(3, 3): prod_j (a - j + 1) / (a + c - j + 1)
    assert sv.value == pytest.approx(3 / 6 * 2 / 5, rel=1e-8)
    est = det_moment_mc(P2, 1, 1, N=20_000, seed=8)
    assert est.z_score(det_moment(P2, 1, 1).value) < 4


def test_z_density_m1():
    p = BimatrixParams(2.0, 2.5, 3.0)
    a, b, c = p.a, p.b, p.c
    for z in (0.1, 0.5, 0.9):
        lb = betaln(a + c, b + c) - (betaln(a, b) + math.lgamma(c) + math.lgamma(a + b) - math.lgamma(a + b + c))
        expect = math.exp(lb) * z ** (a - 1) * (1 - z) ** (c - 1) * hyp2f1(a + c, a + c, a + b + 2 * c, 1 - z)
        assert z_pdf_m1(z, p)[0] == pytest.approx(expect, rel=1e-9)
        assert z_logpdf([[z]], p).value == pytest.approx(math.log(expect), abs=1e-9)
    assert z_pdf_m1([0.0, 1.0], p).tolist() == [0.0, 0.0]


def test_z_moments_m2():
    assert z_det_moment(P2, 0.0).value == pytest.approx(1.0, abs=1e-7)
    # |Z| = |U1| |U2|
    assert z_det_moment(P2, 1.0).value == pytest.approx(det_moment(P2, 1, 1).value, rel=1e-7)
    Z = sample_z(P2, 5, seed=1)
    assert Z.shape == (5, 2, 2)


def test_inverse_pair():
    rng = make_rng(6)
    U1, U2 = random_unit_pair(2, rng)
    V1, V2 = np.linalg.inv(U1), np.linalg.inv(U2)
    jac = 4 * (np.log(np.linalg.det(V1).real) + np.log(np.linalg.det(V2).real))
    assert inverse_pair_logpdf(V1, V2, P2) + jac == pytest.approx(bgb1_logpdf(U1, U2, P2), abs=1e-10)
    with pytest.raises(DomainError):
        inverse_pair_logpdf(np.diag([2.0, 0.5]), V2, P2)


def test_eig_density_m1_collapse():
    assert joint_eig_logpdf([0.3], [0.6], P1).value == pytest.approx(
        math.log(bgb1_pdf_m1(0.3, 0.6, P1)), abs=1e-10)


@pytest.mark.parametrize("m", [2, 3])
def test_eig_series_vs_determinant(m):
    p = BimatrixParams(m + 1.0, m + 0.5, m + 2.0, m)
    lam = np.sort(make_rng(m).uniform(0.1, 0.9, m))[::-1]
    delta = np.sort(make_rng(m + 10).uniform(0.1, 0.9, m))[::-1]
    ser = joint_eig_logpdf(lam, delta, p)
    det = joint_eig_logpdf(lam, delta, p, method="determinant")
    assert ser.converged
    assert ser.value == pytest.approx(det.value, abs=1e-9)
    batch = joint_eig_pdf_batch(lam[None], delta[None], p)[0]
    assert math.log(batch) == pytest.approx(det.value, abs=1e-10)


def test_eig_argument_checks():
    with pytest.raises(DomainError):
        joint_eig_logpdf([0.3, 0.6], [0.6, 0.2], P2)
    with pytest.raises(DomainError):
        joint_eig_logpdf([0.5, 0.5], [0.6, 0.2], P2)
    with pytest.raises(DomainError):
        joint_eig_logpdf([0.6, 0.3], [0.6, 0.2], P2, method="magic")
