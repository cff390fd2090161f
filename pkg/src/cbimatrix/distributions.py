"""Complex matrix variate gamma and beta (type I and II) distributions.

Samplers draw stacks with ``size`` leading entries (or a single matrix when
``size`` is None).  Matrix gammas use the triangular construction

    A = Theta^{1/2} T T^H Theta^{1/2},

with ``T`` lower triangular, ``t_jj = sqrt(Gamma(a - j + 1))`` and standard
complex normal entries below the diagonal.  For a stack of ``n`` draws the
generator is consumed as: an ``(n, m)`` block of gamma variates (diagonal,
shapes ``a, a-1, ...``), then an ``(n, k, 2)`` block of normals holding the
real and imaginary parts of the strictly lower triangle in row-major order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hermitian import (
    _require_pd,
    as_hermitian,
    batch_hermitize,
    batch_power,
    batch_sandwich,
    herm_sqrt,
)
from .matfun import mv_beta, mv_gamma

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class CGammaParams:
    a: float
    m: int = 1
    theta: np.ndarray | None = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")
        if not self.a > self.m - 1:
            raise DomainError(f"shape a = {self.a} must exceed m - 1 = {self.m - 1}")
        if self.theta is not None:
            th = as_hermitian(self.theta)
            if th.shape != (self.m, self.m):
                raise DomainError(f"theta must be {self.m}x{self.m}")
            _require_pd(np.linalg.eigvalsh(th), "theta")
            object.__setattr__(self, "theta", th)


def _check_shapes(m: int, *shapes: float):
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    for s in shapes:
        if not s > m - 1:
            raise DomainError(f"shape parameter {s} must exceed m - 1 = {m - 1}")


def _bartlett(a: float, m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` draws of ``T T^H`` with identity scale."""
    T = np.zeros((n, m, m), dtype=complex)
    diag = rng.standard_gamma(a - np.arange(m), size=(n, m))
    idx = np.arange(m)
    T[:, idx, idx] = np.sqrt(diag)
    rows, cols = np.tril_indices(m, -1)
    if rows.size:
        z = rng.standard_normal((n, rows.size, 2))
        T[:, rows, cols] = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
    return batch_hermitize(T @ np.conj(np.swapaxes(T, -1, -2)))


def _on_boundary(values: np.ndarray, upper: bool) -> np.ndarray:
    """Rows whose eigenvalues come within BOUNDARY_TOL of 0 (or of 1)."""
    bad = np.min(values, axis=-1) <= BOUNDARY_TOL
    if upper:
        bad |= np.max(values, axis=-1) >= 1.0 - BOUNDARY_TOL
    return bad


def _redraw(draw, n: int, upper: bool):
    """Call ``draw(k)`` (returning a tuple of stacks) until no draw touches the
    boundary; rejected rows are replaced in place.  Returns (stacks, count)."""
    out = draw(n)

    def bad_rows(stacks):
        bad = np.zeros(stacks[0].shape[0], dtype=bool)
        for arr in stacks:
            bad |= _on_boundary(np.linalg.eigvalsh(arr), upper)
        return bad

    rejected = 0
    idx = np.flatnonzero(bad_rows(out))
    while idx.size:
        rejected += idx.size
        fresh = draw(idx.size)
        for arr, new in zip(out, fresh):
            arr[idx] = new
        idx = idx[bad_rows(fresh)]
    return out, rejected


def _sample(draw, n: int, m: int, k: int, upper: bool, size, return_rejected):
    if n:
        out, rejected = _redraw(draw, n, upper)
    else:
        out, rejected = tuple(np.zeros((0, m, m), dtype=complex) for _ in range(k)), 0
    if size is None:
        out = tuple(o[0] for o in out)
    out = out if k > 1 else out[0]
    return (out, rejected) if return_rejected else out


def sample_cgamma(p: CGammaParams, rng: np.random.Generator, size: int | None = None,
                  return_rejected: bool = False):
    """Draws from the complex matrix gamma law ``CG_m(a, Theta)``."""
    n = 1 if size is None else int(size)

    def draw(k):
        A = _bartlett(p.a, p.m, k, rng)
        if p.theta is not None:
            A = batch_sandwich(herm_sqrt(p.theta), A)
        return (A,)

    return _sample(draw, n, p.m, 1, False, size, return_rejected)


def cgamma_logpdf(A, p: CGammaParams) -> float:
    """``-log CG_m[a] - a logdet Theta + (a - m) logdet A - tr(Theta^{-1} A)``."""
    A = as_hermitian(A)
    if A.shape != (p.m, p.m):
        raise DomainError(f"expected a {p.m}x{p.m} matrix")
    w = np.linalg.eigvalsh(A)
    _require_pd(w, "A")
    out = -mv_gamma(p.a, p.m) + (p.a - p.m) * float(np.sum(np.log(w)))
    if p.theta is None:
        return out - float(np.sum(w))
    wt = np.linalg.eigvalsh(p.theta)
    return out - p.a * float(np.sum(np.log(wt))) - float(np.real(np.trace(np.linalg.solve(p.theta, A))))


def sample_cbeta1(a: float, b: float, m: int, rng: np.random.Generator, size: int | None = None,
                  return_rejected: bool = False):
    """``U = (A+B)^{-1/2} A (A+B)^{-1/2}`` with ``A ~ CG(a, I)``, ``B ~ CG(b, I)``."""
    _check_shapes(m, a, b)
    n = 1 if size is None else int(size)

    def draw(k):
        A = _bartlett(a, m, k, rng)
        B = _bartlett(b, m, k, rng)
        return (batch_sandwich(batch_power(A + B, -0.5), A),)

    return _sample(draw, n, m, 1, True, size, return_rejected)


def sample_cbeta2(a: float, b: float, m: int, rng: np.random.Generator, size: int | None = None,
                  return_rejected: bool = False):
    """``F = B^{-1/2} A B^{-1/2}`` with ``A ~ CG(a, I)``, ``B ~ CG(b, I)``."""
    _check_shapes(m, a, b)
    n = 1 if size is None else int(size)

    def draw(k):
        A = _bartlett(a, m, k, rng)
        B = _bartlett(b, m, k, rng)
        return (batch_sandwich(batch_power(B, -0.5), A),)

    return _sample(draw, n, m, 1, False, size, return_rejected)


def _unit_interval_eigs(U) -> tuple[np.ndarray, int]:
    U = as_hermitian(U)
    w = np.linalg.eigvalsh(U)
    _require_pd(w, "U")
    _require_pd(1.0 - w, "I - U")
    return w, U.shape[0]


def cbeta1_logpdf(U, a: float, b: float) -> float:
    w, m = _unit_interval_eigs(U)
    _check_shapes(m, a, b)
    return float(-mv_beta(a, b, m) + (a - m) * np.sum(np.log(w)) + (b - m) * np.sum(np.log1p(-w)))


def cbeta2_logpdf(F, a: float, b: float) -> float:
    F = as_hermitian(F)
    m = F.shape[0]
    _check_shapes(m, a, b)
    w = np.linalg.eigvalsh(F)
    _require_pd(w, "F")
    return float(-mv_beta(a, b, m) + (a - m) * np.sum(np.log(w)) - (a + b) * np.sum(np.log1p(w)))


def beta1_to_beta2(U) -> np.ndarray:
    """``(I - U)^{-1} - I``, computed on the eigenvalues ``u / (1 - u)``."""
    U = as_hermitian(U)
    w, G = np.linalg.eigh(U)
    _require_pd(w, "U")
    _require_pd(1.0 - w, "I - U")
    F = (G * (w / (1.0 - w))) @ G.conj().T
    return 0.5 * (F + F.conj().T)


def beta2_to_beta1(F) -> np.ndarray:
    """Inverse of :func:`beta1_to_beta2`: ``I - (I + F)^{-1}``."""
    F = as_hermitian(F)
    w, G = np.linalg.eigh(F)
    _require_pd(w, "F")
    U = (G * (w / (1.0 + w))) @ G.conj().T
    return 0.5 * (U + U.conj().T)


def batch_beta1_to_beta2(U: np.ndarray) -> np.ndarray:
    w, G = np.linalg.eigh(U)
    return batch_hermitize((G * (w / (1.0 - w))[..., None, :]) @ np.conj(np.swapaxes(G, -1, -2)))
