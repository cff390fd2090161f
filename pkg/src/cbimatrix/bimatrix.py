"""Complex bimatrix variate generalised beta distributions.

Type I pairs are ``U_i = (A_i + C)^{-1/2} A_i (A_i + C)^{-1/2}`` and type II
pairs are ``F_i = C^{-1/2} A_i C^{-1/2}``, built from independent
``A ~ CG(a, I)``, ``B ~ CG(b, I)`` and a shared ``C ~ CG(c, I)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .distributions import _bartlett, _sample, batch_beta1_to_beta2
from .errors import DomainError
from .hermitian import (
    _require_pd,
    as_hermitian,
    batch_power,
    batch_sandwich,
    herm_sqrt,
)
from .matfun import (
    BimatrixParams,
    SeriesValue,
    TruncationPolicy,
    degree_ladder,
    hyp_pfq,
    identity_policy,
    mv_beta,
    mv_beta_star,
    mv_gamma,
)
from .mc import MCEstimate
from .partitions import log_ghc_table, partition_table, schur_table
from .rng import make_rng, shard_sizes

# Series away from the identity: generous cap, per-point early stop.
SERIES_POLICY = TruncationPolicy(max_degree=400, tail_tol=1e-12)


@dataclass(frozen=True)
class BimatrixSample:
    """A type I pair ``(U1, U2)`` or a type II pair ``(F1, F2)``.

    The arrays are single ``m x m`` matrices or stacks of them.
    """

    first: np.ndarray
    second: np.ndarray
    params: BimatrixParams
    kind: str = "I"
    rejected: int = 0

    def __len__(self):
        return 1 if self.first.ndim == 2 else self.first.shape[0]

    def logpdf(self) -> float:
        if self.kind == "I":
            return bgb1_logpdf(self.first, self.second, self.params)
        return bgb2_logpdf(self.first, self.second, self.params)


# -- sampling ---------------------------------------------------------------------

def _draw_pair(p: BimatrixParams, rng, size, kind: str):
    n = 1 if size is None else int(size)

    def draw(k):
        A = _bartlett(p.a, p.m, k, rng)
        B = _bartlett(p.b, p.m, k, rng)
        C = _bartlett(p.c, p.m, k, rng)
        if kind == "I":
            return (batch_sandwich(batch_power(A + C, -0.5), A),
                    batch_sandwich(batch_power(B + C, -0.5), B))
        R = batch_power(C, -0.5)
        return batch_sandwich(R, A), batch_sandwich(R, B)

    (X1, X2), rejected = _sample(draw, n, p.m, 2, kind == "I", size, True)
    return BimatrixSample(X1, X2, p, kind, rejected)


def sample_bgb1(p: BimatrixParams, rng: np.random.Generator, size: int | None = None) -> BimatrixSample:
    """Draw ``(U1, U2)``; marginally ``U1 ~ CBI(a, c)`` and ``U2 ~ CBI(b, c)``."""
    return _draw_pair(p, rng, size, "I")


def sample_bgb2(p: BimatrixParams, rng: np.random.Generator, size: int | None = None) -> BimatrixSample:
    return _draw_pair(p, rng, size, "II")


def sharded_bgb1(p: BimatrixParams, n: int, seed: int, shards: int = 1):
    """``n`` type I draws split over ``shards`` sub-streams of ``seed``."""
    parts = [sample_bgb1(p, make_rng(seed, k), size=s) for k, s in enumerate(shard_sizes(n, shards))]
    U1 = np.concatenate([s.first for s in parts])
    U2 = np.concatenate([s.second for s in parts])
    return U1, U2


# -- closed-form densities --------------------------------------------------------

def _pair_eigs(U1, U2, p: BimatrixParams):
    U1, U2 = as_hermitian(U1), as_hermitian(U2)
    if U1.shape != (p.m, p.m) or U2.shape != (p.m, p.m):
        raise DomainError(f"expected two {p.m}x{p.m} matrices")
    w1, w2 = np.linalg.eigvalsh(U1), np.linalg.eigvalsh(U2)
    for w, name in ((w1, "U1"), (w2, "U2")):
        _require_pd(w, name)
        _require_pd(1.0 - w, f"I - {name}")
    return U1, U2, w1, w2


def product_spectrum(U1, U2) -> np.ndarray:
    """Eigenvalues of ``U1 U2`` via the Hermitian ``U1^{1/2} U2 U1^{1/2}``."""
    S = herm_sqrt(U1)
    w = np.linalg.eigvalsh(S @ as_hermitian(U2) @ S)[::-1]
    if not (w[-1] > 0 and w[0] < 1):
        raise DomainError(f"eigenvalues of U1 U2 must lie in (0, 1), got [{w[-1]:.3g}, {w[0]:.3g}]")
    return w


def _bgb1_kernel(p: BimatrixParams, w1, w2) -> float:
    m = p.m
    return float(
        -mv_beta_star(p)
        + (p.a - m) * np.sum(np.log(w1)) + (p.b - m) * np.sum(np.log(w2))
        + (p.b + p.c - m) * np.sum(np.log1p(-w1)) + (p.a + p.c - m) * np.sum(np.log1p(-w2))
    )


def bgb1_logpdf(U1, U2, p: BimatrixParams) -> float:
    """Joint log-density of a type I pair."""
    U1, U2, w1, w2 = _pair_eigs(U1, U2, p)
    w = product_spectrum(U1, U2)
    return _bgb1_kernel(p, w1, w2) - (p.a + p.b + p.c) * float(np.sum(np.log1p(-w)))


def bgb1_logpdf_series(U1, U2, p: BimatrixParams, policy: TruncationPolicy = SERIES_POLICY) -> SeriesValue:
    """Log-density from the mixture form: beta kernels times
    ``sum_tau [a+b+c]_tau C_tau(U1 U2) / t!``."""
    U1, U2, w1, w2 = _pair_eigs(U1, U2, p)
    s = hyp_pfq([p.a + p.b + p.c], [], product_spectrum(U1, U2), policy)
    return SeriesValue(_bgb1_kernel(p, w1, w2) + math.log(s.value), s.degree_reached,
                       s.last_layer_mag, s.converged, s.layers)


def bgb2_logpdf(F1, F2, p: BimatrixParams) -> float:
    F1, F2 = as_hermitian(F1), as_hermitian(F2)
    if F1.shape != (p.m, p.m) or F2.shape != (p.m, p.m):
        raise DomainError(f"expected two {p.m}x{p.m} matrices")
    w1, w2 = np.linalg.eigvalsh(F1), np.linalg.eigvalsh(F2)
    _require_pd(w1, "F1")
    _require_pd(w2, "F2")
    w = np.linalg.eigvalsh(np.eye(p.m) + F1 + F2)
    m = p.m
    return float(
        -mv_beta_star(p) + (p.a - m) * np.sum(np.log(w1)) + (p.b - m) * np.sum(np.log(w2))
        - (p.a + p.b + p.c) * np.sum(np.log(w))
    )


def det_identity_check(F1, F2) -> float:
    """Absolute log-scale gap in
    ``|I+F1| |I+F2| |I - (I+F1)^{-1} F1 F2 (I+F2)^{-1}| = |I+F1+F2|``."""
    F1, F2 = as_hermitian(F1), as_hermitian(F2)
    for F, name in ((F1, "F1"), (F2, "F2")):
        if np.any(np.linalg.eigvalsh(F) < 0):
            raise DomainError(f"{name} must be positive semidefinite")
    I = np.eye(F1.shape[0])
    M = I - np.linalg.solve(I + F1, F1) @ F2 @ np.linalg.inv(I + F2)
    _, ld = np.linalg.slogdet(M)
    lhs = np.linalg.slogdet(I + F1)[1] + np.linalg.slogdet(I + F2)[1] + ld
    return float(abs(lhs - np.linalg.slogdet(I + F1 + F2)[1]))


# -- vectorised scalar (m = 1) densities, used by the quadrature oracles ---------

def bgb1_pdf_m1(u1, u2, p: BimatrixParams):
    a, b, c = p.a, p.b, p.c
    u1, u2 = np.asarray(u1, dtype=float), np.asarray(u2, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = (-mv_beta_star(p) + (a - 1) * np.log(u1) + (b - 1) * np.log(u2)
              + (b + c - 1) * np.log1p(-u1) + (a + c - 1) * np.log1p(-u2)
              - (a + b + c) * np.log1p(-u1 * u2))
        return np.exp(lg)


def bgb2_pdf_m1(f1, f2, p: BimatrixParams):
    a, b, c = p.a, p.b, p.c
    f1, f2 = np.asarray(f1, dtype=float), np.asarray(f2, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = (-mv_beta_star(p) + (a - 1) * np.log(f1) + (b - 1) * np.log(f2)
              - (a + b + c) * np.log1p(f1 + f2))
        return np.exp(lg)


def _unit_square(fn, x: float = 1.0, y: float = 1.0, tol: float = 1e-10) -> float:
    val, _ = integrate.dblquad(lambda v, u: fn(u, v), 0.0, x, 0.0, y, epsabs=tol, epsrel=tol)
    return float(val)


def bgb1_mass_m1(p: BimatrixParams) -> float:
    """Quadrature of the scalar type I density over the unit square."""
    return _unit_square(lambda u, v: bgb1_pdf_m1(u, v, p))


def bgb2_mass_m1(p: BimatrixParams) -> float:
    """Type II mass on the unit square after ``f = u / (1 - u)`` per axis."""
    def fn(u, v):
        if u >= 1.0 or v >= 1.0:
            return 0.0
        return bgb2_pdf_m1(u / (1 - u), v / (1 - v), p) / ((1 - u) ** 2 * (1 - v) ** 2)
    return _unit_square(fn)


def det_moment_quad_m1(p: BimatrixParams, r: float, s: float) -> float:
    return _unit_square(lambda u, v: u ** r * v ** s * bgb1_pdf_m1(u, v, p))


# -- determinant moments ------------------------------------------------------------

def _check_m_policy(p: BimatrixParams, policy):
    return identity_policy(p.m) if policy is None else policy


def det_moment(p: BimatrixParams, r: float, s: float, policy: TruncationPolicy | None = None) -> SeriesValue:
    """``E(|U1|^r |U2|^s)`` as a constant times ``3F2(...; I_m)``."""
    m = p.m
    if not (p.a + r > m - 1 and p.b + s > m - 1):
        raise DomainError(f"need a + r > m - 1 and b + s > m - 1 (a+r={p.a + r}, b+s={p.b + s})")
    if r == 0 and s == 0:
        return SeriesValue(1.0, 0, 0.0, True, (1.0,))
    A = p.a + p.b + p.c
    log_const = mv_beta(p.a + r, p.b + p.c, m) + mv_beta(p.b + s, p.a + p.c, m) - mv_beta_star(p)
    sv = hyp_pfq([p.a + r, p.b + s, A], [A + r, A + s], np.ones(m), _check_m_policy(p, policy))
    return _scaled(sv, log_const)


def _scaled(sv: SeriesValue, log_const: float) -> SeriesValue:
    k = math.exp(log_const)
    err = None if sv.extrapolation_error is None else sv.extrapolation_error * k
    return SeriesValue(sv.value * k, sv.degree_reached, sv.last_layer_mag * k, sv.converged,
                       tuple(v * k for v in sv.layers), extrapolation_error=err)


def det_moment_mc(p: BimatrixParams, r: float, s: float, N: int, seed: int, shards: int = 1) -> MCEstimate:
    """Sample mean of ``|U1|^r |U2|^s`` over ``N`` type I draws."""
    if r == 0 and s == 0:
        return MCEstimate(1.0, 0.0, int(N), seed, shards)
    U1, U2 = sharded_bgb1(p, N, seed, shards)
    ld1 = np.sum(np.log(np.linalg.eigvalsh(U1)), axis=-1)
    ld2 = np.sum(np.log(np.linalg.eigvalsh(U2)), axis=-1)
    return MCEstimate.from_values(np.exp(r * ld1 + s * ld2), seed, shards)


# -- product Z = U2^{1/2} U1 U2^{1/2} ----------------------------------------------

def z_logpdf(Z, p: BimatrixParams, policy: TruncationPolicy = SERIES_POLICY) -> SeriesValue:
    """Log-density of ``Z``; the value field holds the log-density."""
    Z = as_hermitian(Z)
    m = p.m
    if Z.shape != (m, m):
        raise DomainError(f"expected a {m}x{m} matrix")
    w = np.linalg.eigvalsh(Z)
    _require_pd(w, "Z")
    _require_pd(1.0 - w, "I - Z")
    a, b, c = p.a, p.b, p.c
    log_const = mv_beta(a + c, b + c, m) - mv_beta_star(p)
    sv = hyp_pfq([a + c, a + c], [a + b + 2 * c], (1.0 - w)[::-1], policy)
    value = (log_const + (a - m) * float(np.sum(np.log(w))) + (c - m) * float(np.sum(np.log1p(-w)))
             + math.log(sv.value))
    return SeriesValue(value, sv.degree_reached, sv.last_layer_mag, sv.converged, sv.layers)


def z_pdf_m1(z, p: BimatrixParams, policy: TruncationPolicy | None = None) -> np.ndarray:
    """Vectorised scalar ``Z`` density (m = 1)."""
    from .matfun import hyp_pfq_batch

    if p.m != 1:
        raise DomainError("z_pdf_m1 needs m = 1")
    policy = policy or TruncationPolicy(max_degree=20_000, tail_tol=1e-13)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    a, b, c = p.a, p.b, p.c
    out = np.zeros(z.shape)
    inside = (z > 0) & (z < 1)
    if inside.any():
        vals, _ = hyp_pfq_batch([a + c, a + c], [a + b + 2 * c], (1.0 - z[inside])[:, None], policy)
        out[inside] = np.exp(mv_beta(a + c, b + c, 1) - mv_beta_star(p)
                             + (a - 1) * np.log(z[inside]) + (c - 1) * np.log1p(-z[inside])) * vals
    return out


def z_det_moment(p: BimatrixParams, r: float, policy: TruncationPolicy | None = None) -> SeriesValue:
    """``E|Z|^r`` as a constant times ``3F2(c, a+c, a+c; a+c+r, a+b+2c; I_m)``."""
    m = p.m
    if not p.a + r > m - 1:
        raise DomainError(f"need a + r > m - 1 (a + r = {p.a + r})")
    a, b, c = p.a, p.b, p.c
    log_const = mv_beta(a + c, b + c, m) + mv_beta(a + r, c, m) - mv_beta_star(p)
    sv = hyp_pfq([c, a + c, a + c], [a + c + r, a + b + 2 * c], np.ones(m), _check_m_policy(p, policy))
    return _scaled(sv, log_const)


def z_det_moment_mc(p: BimatrixParams, r: float, N: int, seed: int, shards: int = 1) -> MCEstimate:
    U1, U2 = sharded_bgb1(p, N, seed, shards)
    ld = np.sum(np.log(np.linalg.eigvalsh(U1)), axis=-1) + np.sum(np.log(np.linalg.eigvalsh(U2)), axis=-1)
    return MCEstimate.from_values(np.exp(r * ld), seed, shards)


def sample_z(p: BimatrixParams, N: int, seed: int, shards: int = 1) -> np.ndarray:
    U1, U2 = sharded_bgb1(p, N, seed, shards)
    S = batch_power(U2, 0.5)
    return batch_sandwich(S, U1)


# -- inverse pair -------------------------------------------------------------------

def inverse_pair_logpdf(V1, V2, p: BimatrixParams) -> float:
    """Log-density of ``(U1^{-1}, U2^{-1})`` on ``V1 > I``, ``V2 > I``."""
    V1, V2 = as_hermitian(V1), as_hermitian(V2)
    m = p.m
    if V1.shape != (m, m) or V2.shape != (m, m):
        raise DomainError(f"expected two {m}x{m} matrices")
    logdets = []
    for V, name in ((V1, "V1"), (V2, "V2")):
        w = np.linalg.eigvalsh(V)
        _require_pd(w - 1.0, f"{name} - I")
        logdets.append(float(np.sum(np.log(w))))
    return bgb1_logpdf(np.linalg.inv(V1), np.linalg.inv(V2), p) - 2 * m * sum(logdets)


def inverse_pair_pdf_m1(v1, v2, p: BimatrixParams):
    v1, v2 = np.asarray(v1, dtype=float), np.asarray(v2, dtype=float)
    return bgb1_pdf_m1(1.0 / v1, 1.0 / v2, p) / (v1 * v2) ** 2


# -- joint eigenvalue density ---------------------------------------------------------

def _eig_args(lam, delta, p: BimatrixParams):
    lam = np.asarray(lam, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if lam.shape[-1] != p.m or delta.shape[-1] != p.m or lam.shape != delta.shape:
        raise DomainError(f"expected two spectra of length m = {p.m}")
    for v, name in ((lam, "lambda"), (delta, "delta")):
        if not (np.all(v > 0) and np.all(v < 1)):
            raise DomainError(f"{name} must lie strictly inside (0, 1)")
        if p.m > 1 and not np.all(np.diff(v, axis=-1) < 0):
            raise DomainError(f"{name} must be strictly decreasing (ties are rejected)")
    return lam, delta


def _log_vandermonde(x: np.ndarray) -> np.ndarray:
    i, j = np.triu_indices(x.shape[-1], 1)
    return np.sum(np.log(np.abs(x[..., i] - x[..., j])), axis=-1)


def _eig_log_prefactor(lam, delta, p: BimatrixParams) -> np.ndarray:
    m = p.m
    log_c = 2 * m * (m - 1) * math.log(math.pi) - 2 * mv_gamma(m, m) - mv_beta_star(p)
    return (log_c
            + (p.a - m) * np.sum(np.log(lam), axis=-1) + (p.b + p.c - m) * np.sum(np.log1p(-lam), axis=-1)
            + (p.b - m) * np.sum(np.log(delta), axis=-1) + (p.a + p.c - m) * np.sum(np.log1p(-delta), axis=-1))


def _eig_series_fixed(lam, delta, A: float, T: int, tol: float):
    n_pts, m = lam.shape
    parts, weights, offsets, _ = partition_table(T, m)
    _, log_coef = log_ghc_table(A, parts)
    _, log_m = log_ghc_table(float(m), parts)
    log_coef = log_coef - log_m
    r1, r2 = lam.max(axis=1), delta.max(axis=1)
    s1 = schur_table(lam / r1[:, None], T)
    s2 = schur_table(delta / r2[:, None], T)
    log_rho = np.log(r1 * r2)
    terms = np.exp(log_coef[None, :] + weights[None, :] * log_rho[:, None]) * s1 * s2
    signed = np.add.reduceat(terms, offsets[:-1], axis=1)
    absolute = np.add.reduceat(np.abs(terms), offsets[:-1], axis=1)
    partial = np.cumsum(signed, axis=1)
    small = absolute <= tol * np.maximum(1.0, np.abs(partial))
    both = small[:, 1:] & small[:, :-1]
    done = both.any(axis=1)
    stop = np.where(done, np.argmax(both, axis=1) + 1, T)
    rows = np.arange(n_pts)
    return partial[rows, stop], stop, absolute[rows, stop], done


def eig_series(lam, delta, A: float, policy: TruncationPolicy = SERIES_POLICY):
    """``sum_kappa [A]_kappa C(lam) C(delta) / (k! C(I))`` for rows of spectra.

    Uses ``C(x) C(y) / (k! C(I)) = s(x) s(y) / [m]_kappa`` with Schur
    polynomials ``s``.  Returns ``(values, degree, last_layer, converged)``.
    """
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    delta = np.atleast_2d(np.asarray(delta, dtype=float))
    n_pts = lam.shape[0]
    out = [np.zeros(n_pts), np.zeros(n_pts, dtype=int), np.zeros(n_pts), np.zeros(n_pts, dtype=bool)]
    pending = np.arange(n_pts)
    for T in degree_ladder(policy.max_degree):
        res = _eig_series_fixed(lam[pending], delta[pending], A, T, policy.tail_tol)
        for arr, val in zip(out, res):
            arr[pending] = val
        pending = pending[~res[3]]
        if pending.size == 0:
            break
    return tuple(out)


def eig_series_closed(lam, delta, A: float) -> np.ndarray:
    """Log of ``V(lam) V(delta)`` times the same series, from the determinant
    ``prod_i (m-i)!/Gamma(A-i+1) * Gamma(A-m+1)^m * det[(1 - lam_i delta_j)^{-(A-m+1)}]``.

    The Vandermonde factors are multiplied in (not divided out), so the
    result is well conditioned near ties.  Rows must be sorted decreasing.
    """
    lam = np.atleast_2d(lam)
    delta = np.atleast_2d(delta)
    m = lam.shape[1]
    i = np.arange(1, m + 1)
    log_k = float(np.sum(gammaln(m - i + 1) - gammaln(A - i + 1)) + m * gammaln(A - m + 1))
    M = (1.0 - lam[:, :, None] * delta[:, None, :]) ** (-(A - m + 1))
    sign, logdet = np.linalg.slogdet(M)
    with np.errstate(divide="ignore"):
        return np.where(sign > 0, log_k + logdet, -np.inf)


def joint_eig_logpdf(lam, delta, p: BimatrixParams, policy: TruncationPolicy = SERIES_POLICY,
                     method: str = "series") -> SeriesValue:
    """Log joint density of the eigenvalues of ``U1`` (``lam``) and ``U2`` (``delta``).

    ``method="series"`` sums the zonal series; ``method="determinant"`` uses
    the closed determinant form of the same series.
    """
    lam, delta = _eig_args(lam, delta, p)
    pre = float(_eig_log_prefactor(lam, delta, p))
    A = p.a + p.b + p.c
    if method == "determinant":
        val = pre + float(eig_series_closed(lam, delta, A)[0]) + float(_log_vandermonde(lam) + _log_vandermonde(delta))
        return SeriesValue(val, 0, 0.0, True)
    if method != "series":
        raise DomainError(f"unknown method {method!r}")
    vals, stop, last, done = eig_series(lam, delta, A, policy)
    val = pre + 2 * float(_log_vandermonde(lam) + _log_vandermonde(delta)) + math.log(vals[0])
    return SeriesValue(val, int(stop[0]), float(last[0]), bool(done[0]))


def joint_eig_pdf_batch(lam, delta, p: BimatrixParams) -> np.ndarray:
    """Vectorised joint eigenvalue density (determinant form), no validation.

    Symmetric in the order of each spectrum, so it may be integrated over
    boxes and divided by ``(m!)^2``.
    """
    lam = np.atleast_2d(lam)
    delta = np.atleast_2d(delta)
    A = p.a + p.b + p.c
    pre = _eig_log_prefactor(lam, delta, p)
    i, j = np.triu_indices(p.m, 1)
    vl = np.prod(lam[:, i] - lam[:, j], axis=1)
    vd = np.prod(delta[:, i] - delta[:, j], axis=1)
    M = (1.0 - lam[:, :, None] * delta[:, None, :]) ** (-(A - p.m + 1))
    m = p.m
    k = np.arange(1, m + 1)
    log_k = float(np.sum(gammaln(m - k + 1) - gammaln(A - k + 1)) + m * gammaln(A - m + 1))
    return np.exp(pre + log_k) * vl * vd * np.linalg.det(M)
