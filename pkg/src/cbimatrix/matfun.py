"""Multivariate gamma/beta constants and hypergeometric functions of a
Hermitian matrix argument.

All constants are returned on the log scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DivergenceError, DomainError
from .hermitian import EigenSpectrum, as_hermitian
from .partitions import Partition, log_ghc_table, partition_table, schur_table

LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class TruncationPolicy:
    """Degree cap and tail tolerance for layered series.

    ``extrapolate`` only affects ``p = q + 1`` series at the identity, whose
    terms decay algebraically: the partial sums at degrees ``T/32, ..., T``
    are extrapolated in powers of ``1/T`` (see :func:`hyp_pfq`).
    """

    max_degree: int = 40
    tail_tol: float = 1e-10
    extrapolate: bool = False

    def __post_init__(self):
        if int(self.max_degree) < 1:
            raise DomainError("max_degree must be >= 1")
        if not self.tail_tol > 0:
            raise DomainError("tail_tol must be positive")


DEFAULT_POLICY = TruncationPolicy()
# Ladder tops for identity arguments, sized so one evaluation stays under a second.
_IDENTITY_TOP = {1: 8192, 2: 1280, 3: 256}


def identity_policy(m: int, tail_tol: float = 1e-10) -> TruncationPolicy:
    """Policy used for series evaluated at ``I_m``."""
    return TruncationPolicy(_IDENTITY_TOP.get(int(m), 128), tail_tol, extrapolate=True)


@dataclass(frozen=True)
class SeriesValue:
    value: float
    degree_reached: int
    last_layer_mag: float
    converged: bool
    layers: tuple = field(default=(), repr=False, compare=False)
    extrapolation_error: float | None = None

    def to_dict(self) -> dict:
        out = {
            "value": self.value,
            "degree_reached": self.degree_reached,
            "last_layer_mag": self.last_layer_mag,
            "converged": self.converged,
        }
        if self.extrapolation_error is not None:
            out["extrapolation_error"] = self.extrapolation_error
        return out


@dataclass(frozen=True)
class BimatrixParams:
    a: float
    b: float
    c: float
    m: int = 1

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")
        for name in ("a", "b", "c"):
            value = getattr(self, name)
            if not value > self.m - 1:
                raise DomainError(f"{name} = {value} must exceed m - 1 = {self.m - 1}")


def mv_gamma(a: float, m: int) -> float:
    """log of ``pi^{m(m-1)/2} prod_{j=1}^m Gamma(a - j + 1)``."""
    if not a > m - 1:
        raise DomainError(f"multivariate gamma needs a > m - 1 (a={a}, m={m})")
    return 0.5 * m * (m - 1) * LOG_PI + sum(math.lgamma(a - j) for j in range(m))


def mv_beta(a: float, b: float, m: int) -> float:
    return mv_gamma(a, m) + mv_gamma(b, m) - mv_gamma(a + b, m)


def mv_beta_star(p: BimatrixParams) -> float:
    """log of ``CG_m[a] CG_m[b] CG_m[c] / CG_m[a+b+c]``."""
    return mv_gamma(p.a, p.m) + mv_gamma(p.b, p.m) + mv_gamma(p.c, p.m) - mv_gamma(p.a + p.b + p.c, p.m)


def vol_stiefel(m: int, n: int) -> float:
    """log volume ``2^m pi^{mn} / CG_m[n]`` of the complex Stiefel manifold."""
    if m < 1 or n < m:
        raise DomainError(f"Stiefel manifold needs 1 <= m <= n (m={m}, n={n})")
    return m * math.log(2.0) + m * n * LOG_PI - mv_gamma(n, m)


# -- hypergeometric series ----------------------------------------------------------

def _spectrum_of(X) -> np.ndarray:
    if isinstance(X, EigenSpectrum):
        return X.values
    arr = np.asarray(X)
    if arr.ndim == 1:
        return arr.astype(float)
    return np.linalg.eigvalsh(as_hermitian(arr))[::-1]


def _coefficients(num, den, parts, log_hooks):
    """Sign and log of ``prod [a]/prod [b] / H`` per partition, plus the
    index of the first partition whose denominator coefficient vanishes."""
    sign = np.ones(parts.shape[0])
    logc = -np.asarray(log_hooks, dtype=float).copy()
    for a in num:
        s, la = log_ghc_table(a, parts)
        sign *= s
        logc += la
    first_pole = None
    for b in den:
        s, lb = log_ghc_table(b, parts)
        zero = s == 0
        if zero.any():
            k = int(np.flatnonzero(zero)[0])
            first_pole = k if first_pole is None else min(first_pole, k)
        sign *= np.where(zero, 1.0, s)
        logc -= np.where(zero, 0.0, lb)
    return sign, logc, first_pole


class _Series:
    """Layered evaluation of ``sum_tau coef(tau) C_tau(X)/|tau|!`` for a batch
    of spectra sharing the same number of variables."""

    def __init__(self, num, den, spectra: np.ndarray, T: int):
        self.num = [float(v) for v in num]
        self.den = [float(v) for v in den]
        x = np.atleast_2d(np.asarray(spectra, dtype=float))
        self.n = x.shape[1]
        self.T = int(T)
        self.parts, self.weights, self.offsets, log_h = partition_table(self.T, self.n)
        self.sign, self.logc, self.first_pole = _coefficients(self.num, self.den, self.parts, log_h)
        self.log_hooks = log_h
        rho = np.max(np.abs(x), axis=1)
        self.rho = rho
        with np.errstate(divide="ignore", invalid="ignore"):
            self.xhat = np.where(rho[:, None] > 0, x / np.where(rho > 0, rho, 1.0)[:, None], 0.0)
            self.log_rho = np.log(rho)
        self.scalar = np.ptp(self.xhat, axis=1) == 0
        self._shat = None
        if self.scalar.any():
            s, lm = log_ghc_table(float(self.n), self.parts)
            self.log_identity = lm - log_h  # log s_tau(1^n)

    def layers(self, t0: int, t1: int):
        """Signed and absolute layer sums for degrees ``t0 <= t < t1``."""
        lo, hi = self.offsets[t0], self.offsets[t1]
        if self.first_pole is not None and self.first_pole < hi:
            tau = Partition(self.parts[self.first_pole])
            raise DomainError(f"denominator coefficient vanishes at partition {tuple(tau)}")
        w = self.weights[lo:hi]
        n_pts = self.xhat.shape[0]
        terms = np.zeros((n_pts, hi - lo))
        with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
            log_scale = self.logc[lo:hi][None, :] + w[None, :] * self.log_rho[:, None]
            general = ~self.scalar & (self.rho > 0)
            if general.any():
                if self._shat is None:
                    self._shat = schur_table(self.xhat[general], self.T)
                terms[general] = self.sign[lo:hi] * np.exp(log_scale[general]) * self._shat[:, lo:hi]
            scalar = self.scalar & (self.rho > 0)
            if scalar.any():
                sgn = np.where(self.xhat[scalar, :1] < 0, (-1.0) ** w[None, :], 1.0)
                terms[scalar] = (
                    self.sign[lo:hi] * sgn * np.exp(log_scale[scalar] + self.log_identity[lo:hi])
                )
        zero_rows = self.rho == 0
        if zero_rows.any():
            terms[zero_rows] = np.where(w == 0, 1.0, 0.0)
        bounds = self.offsets[t0:t1 + 1] - lo
        signed = np.zeros((n_pts, t1 - t0))
        absolute = np.zeros((n_pts, t1 - t0))
        for k in range(t1 - t0):
            block = terms[:, bounds[k]:bounds[k + 1]]
            if block.shape[1]:
                signed[:, k] = np.sum(block, axis=1)
                absolute[:, k] = np.sum(np.abs(block), axis=1)
        return signed, absolute


def _growing(absolute: np.ndarray, upto: int) -> np.ndarray:
    """Rows whose layer magnitudes grow for 3 consecutive degrees past degree 5."""
    if upto < 9:
        return np.zeros(absolute.shape[0], dtype=bool)
    d = np.diff(absolute[:, 5:upto + 1], axis=1) > 0
    run = d[:, :-2] & d[:, 1:-1] & d[:, 2:]
    return np.any(run, axis=1) | ~np.all(np.isfinite(absolute[:, :upto + 1]), axis=1)


def _evaluate_fixed(num, den, spectra: np.ndarray, T: int, tol: float, chunk: int = 10):
    series = _Series(num, den, spectra, T)
    n_pts = spectra.shape[0]
    signed = np.zeros((n_pts, T + 1))
    absolute = np.zeros((n_pts, T + 1))
    p, q = len(series.num), len(series.den)
    check_div = (p > q + 1) | ((p == q + 1) & (series.rho > 1.0))
    if p == q + 1:
        # On the unit sphere the sum converges when the parameter excess beats n - 1.
        edge = series.rho == 1.0
        if edge.any() and _excess(series.num, series.den) <= series.n - 1:
            raise DivergenceError(
                f"series diverges at spectral radius 1: parameter excess "
                f"{_excess(series.num, series.den):.4g} <= {series.n - 1}"
            )
    done = np.zeros(n_pts, dtype=bool)
    stop = np.full(n_pts, T)
    t = 0
    while t <= T:
        t1 = min(T + 1, t + chunk)
        s, a = series.layers(t, t1)
        signed[:, t:t1] = s
        absolute[:, t:t1] = a
        partial = np.cumsum(signed[:, :t1], axis=1)
        if check_div.any():
            bad = check_div & _growing(absolute, t1 - 1)
            if bad.any():
                raise DivergenceError(
                    "series diverges: layer magnitudes keep growing with spectral radius "
                    f"{float(series.rho[bad][0]):.4g} >= 1"
                )
        small = absolute[:, :t1] <= tol * np.maximum(1.0, np.abs(partial))
        both = small[:, 1:] & small[:, :-1]
        for r in np.flatnonzero(~done):
            hits = np.flatnonzero(both[r])
            if hits.size:
                done[r] = True
                stop[r] = hits[0] + 1
        if done.all():
            break
        t = t1
    value = np.array([signed[r, :stop[r] + 1].sum() for r in range(n_pts)])
    last = absolute[np.arange(n_pts), stop]
    return value, stop, last, done, signed


def degree_ladder(max_degree: int, start: int = 40):
    """Degrees tried in turn: ``start, 2 start, ...`` capped at ``max_degree``."""
    T = min(int(max_degree), start)
    while True:
        yield T
        if T >= max_degree:
            return
        T = min(2 * T, int(max_degree))


def _evaluate(num, den, spectra: np.ndarray, policy: TruncationPolicy):
    """Sum each row's series, doubling the degree cap only for rows that
    have not converged yet (bounds memory for large ``max_degree``)."""
    n_pts = spectra.shape[0]
    value = np.zeros(n_pts)
    stop = np.zeros(n_pts, dtype=int)
    last = np.zeros(n_pts)
    done = np.zeros(n_pts, dtype=bool)
    layers = [None] * n_pts
    pending = np.arange(n_pts)
    for T in degree_ladder(policy.max_degree):
        v, st, la, dn, sg = _evaluate_fixed(num, den, spectra[pending], T, policy.tail_tol)
        value[pending], stop[pending], last[pending], done[pending] = v, st, la, dn
        for k, r in enumerate(pending):
            layers[r] = sg[k]
        pending = pending[~dn]
        if pending.size == 0:
            break
    return value, stop, last, done, layers


def _excess(num, den) -> float:
    return float(sum(den) - sum(num))


def _richardson(partial: np.ndarray, degrees: np.ndarray, power: float, terms: int):
    """Limit of ``S(T) = S + sum_j c_j T^-(power + j)`` fitted to the last points."""
    T = np.asarray(degrees[-(terms + 1):], dtype=float)
    A = np.column_stack([np.ones_like(T)] + [T ** -(power + j) for j in range(terms)])
    return float(np.linalg.solve(A, partial[-(terms + 1):])[0])


def _identity_extrapolated(num, den, n: int, policy: TruncationPolicy) -> SeriesValue:
    T = max(64, policy.max_degree // 32 * 32)
    series = _Series(num, den, np.ones((1, n)), T)
    signed, absolute = series.layers(0, T + 1)
    partial = np.cumsum(signed[0])
    ladder = np.array([T >> k for k in range(5, -1, -1)])
    power = _excess(num, den) - (n - 1)
    best = _richardson(partial[ladder], ladder, power, 5)
    err = abs(best - _richardson(partial[ladder], ladder, power, 4))
    return SeriesValue(
        best, T, float(absolute[0, T]), bool(err <= policy.tail_tol * max(1.0, abs(best))),
        tuple(signed[0]), extrapolation_error=err,
    )


def hyp_pfq(num, den, X, policy: TruncationPolicy = DEFAULT_POLICY) -> SeriesValue:
    """``pFq(num; den; X)`` summed by total degree with truncation diagnostics.

    ``X`` is a Hermitian matrix, an :class:`EigenSpectrum` or a 1-D array of
    eigenvalues.  The sum stops at the first degree where two consecutive
    layers are below ``tail_tol * max(1, |value|)``; otherwise at
    ``policy.max_degree`` with ``converged=False``.  Divergence detection for
    ``p > q`` is heuristic: three consecutive growing layers past degree 5.

    With ``policy.extrapolate`` and ``X = I`` (``p = q + 1``) the value is a
    Richardson limit of partial sums on a doubling ladder of degrees, and
    ``converged`` reflects the spread between the last two extrapolants,
    reported as ``extrapolation_error``.
    """
    x = _spectrum_of(X)
    x = x[x != 0]
    if x.size == 0:
        return SeriesValue(1.0, 0, 0.0, True, (1.0,))
    if policy.extrapolate and len(num) == len(den) + 1 and np.all(x == 1.0):
        if _excess(num, den) <= x.size - 1:
            raise DivergenceError(
                f"series diverges at the identity: parameter excess {_excess(num, den):.4g} <= {x.size - 1}"
            )
        return _identity_extrapolated(num, den, x.size, policy)
    value, stop, last, done, layers = _evaluate(num, den, x[None, :], policy)
    k = int(stop[0])
    return SeriesValue(float(value[0]), k, float(last[0]), bool(done[0]), tuple(layers[0][:k + 1]))


def hyp_pfq_batch(num, den, spectra, policy: TruncationPolicy = DEFAULT_POLICY):
    """Vectorised :func:`hyp_pfq` over rows of eigenvalues (equal length).

    Returns ``(values, converged)`` arrays.
    """
    spectra = np.atleast_2d(np.asarray(spectra, dtype=float))
    if spectra.shape[0] == 0:
        return np.zeros(0), np.zeros(0, dtype=bool)
    value, _, _, done, _ = _evaluate(num, den, spectra, policy)
    return value, done


def euler_lift_estimate(num, den, a: float, c: float, X, N: int, seed: int,
                        policy: TruncationPolicy = DEFAULT_POLICY):
    """Monte Carlo estimate of ``p+1Fq+1(a, num; c, den; X)``.

    Averages ``pFq(num; den; XY)`` over ``Y ~ CBI_m(a, c - a)``; the spectrum
    of ``XY`` is taken from the Hermitian ``Y^{1/2} X Y^{1/2}``.
    """
    from .distributions import sample_cbeta1
    from .hermitian import batch_power, batch_sandwich
    from .mc import MCEstimate
    from .rng import make_rng

    Xh = as_hermitian(np.atleast_2d(np.asarray(X, dtype=complex)))
    m = Xh.shape[0]
    if not (a > m - 1 and c - a > m - 1):
        raise DomainError(f"need a > m - 1 and c - a > m - 1 (a={a}, c={c}, m={m})")
    if N <= 0:
        return MCEstimate(float("nan"), float("nan"), 0, seed)
    if not np.any(Xh):
        return MCEstimate(1.0, 0.0, int(N), seed)
    Y = sample_cbeta1(a, c - a, m, make_rng(seed), size=N)
    R = batch_power(Y, 0.5)
    W = batch_sandwich(R, np.broadcast_to(Xh, Y.shape))
    spectra = np.linalg.eigvalsh(W)[:, ::-1]
    values = np.empty(N)
    step = 20_000
    for start in range(0, N, step):
        values[start:start + step], _ = hyp_pfq_batch(num, den, spectra[start:start + step], policy)
    return MCEstimate.from_values(values, seed)
