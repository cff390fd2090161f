"""Partitions, generalised hypergeometric coefficients and complex zonal
polynomials.

The complex zonal polynomial of a partition ``k`` of ``t`` is
``C_k(X) = f_k * s_k(x)`` where ``s_k`` is the Schur polynomial of the
eigenvalues ``x`` and ``f_k = t! / H_k`` counts standard Young tableaux
(``H_k`` is the hook product).  With this normalisation
``sum_{k |- t} C_k(X) = (tr X)^t``.

Schur polynomials are evaluated from the branching rule over a table of
all partitions up to a given weight; two-variable spectra use the closed
form ``(x1 x2)^k2 h_{k1-k2}(x1, x2)``.  The bialternant and Jacobi-Trudi
determinants are kept as independent routes for cross-checking.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, gammasgn

from .hermitian import EigenSpectrum

class Partition(tuple):
    """Non-increasing tuple of positive integers."""

    def __new__(cls, parts=()):
        parts = tuple(int(p) for p in parts)
        parts = tuple(p for p in parts if p != 0)
        if any(p < 0 for p in parts):
            raise ValueError(f"partition parts must be non-negative: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"partition parts must be non-increasing: {parts}")
        return super().__new__(cls, parts)

    @property
    def weight(self) -> int:
        return sum(self)

    @property
    def length(self) -> int:
        return len(self)

    def conjugate(self) -> "Partition":
        if not self:
            return Partition()
        return Partition(sum(1 for p in self if p > j) for j in range(self[0]))

    def __repr__(self):
        return f"Partition{tuple(self)!r}"


def parse_partition(text: str) -> Partition:
    text = text.strip().strip("()")
    if not text:
        return Partition()
    return Partition(int(p) for p in text.replace(" ", "").split(",") if p)


@lru_cache(maxsize=None)
def _partitions(t: int, m: int, largest: int) -> tuple:
    if t == 0:
        return ((),)
    if m == 0:
        return ()
    out = []
    for first in range(min(t, largest), 0, -1):
        for rest in _partitions(t - first, m - 1, first):
            out.append((first,) + rest)
    return tuple(out)


def enumerate_partitions(t: int, m: int) -> list[Partition]:
    """Partitions of ``t`` with at most ``m`` parts, reverse-lexicographic."""
    if t < 0 or m < 1:
        raise ValueError("need t >= 0 and m >= 1")
    return [Partition(p) for p in _partitions(int(t), int(m), int(t))]


def hook_lengths(tau) -> list[int]:
    tau = Partition(tau)
    conj = tau.conjugate()
    return [tau[i] - j + conj[j] - i - 1 for i in range(len(tau)) for j in range(tau[i])]


@lru_cache(maxsize=None)
def log_hook_product(tau: tuple) -> float:
    return float(sum(math.log(h) for h in hook_lengths(tau)))


@lru_cache(maxsize=None)
def num_standard_tableaux(tau: tuple) -> int:
    """``f_tau`` by the hook-length formula (exact integer)."""
    n = sum(tau)
    prod = 1
    for h in hook_lengths(tau):
        prod *= h
    return math.factorial(n) // prod


def ghc(a: float, tau) -> float:
    """Generalised hypergeometric coefficient ``[a]_tau = prod_j (a-j+1)_{t_j}``."""
    value = 1.0
    for j, part in enumerate(Partition(tau)):
        start = a - j
        for k in range(part):
            value *= start + k
    return value


# -- vectorised tables used by the series code ------------------------------

def log_poch(x: float, n: np.ndarray):
    """Sign and log-magnitude of the rising factorial ``(x)_n``.

    ``n`` is a non-negative integer array; vanishing entries get sign 0 and
    log-magnitude ``-inf``.
    """
    n = np.asarray(n, dtype=np.int64)
    x = float(x)
    if x > 0:
        return np.ones(n.shape), gammaln(x + n) - gammaln(x)
    if x == round(x):
        k = int(-x)  # factors x, x+1, ..., 0 hits zero at step k
        sign = np.where(n % 2 == 0, 1.0, -1.0)
        safe = np.minimum(n, k)
        logabs = gammaln(1 - x) - gammaln(1 - x - safe)
        zero = n > k
        return np.where(zero, 0.0, sign), np.where(zero, -np.inf, logabs)
    sign = gammasgn(x + n) * gammasgn(x)
    return sign, gammaln(x + n) - gammaln(x)


def log_ghc_table(a: float, parts: np.ndarray):
    """Sign and log ``|[a]_tau|`` for every row of a partition table."""
    parts = np.asarray(parts)
    sign = np.ones(parts.shape[0])
    logabs = np.zeros(parts.shape[0])
    for j in range(parts.shape[1]):
        s, la = log_poch(a - j, parts[:, j])
        sign = sign * s
        logabs = logabs + la
    return sign, logabs


@lru_cache(maxsize=32)
def partition_table(T: int, m: int):
    """All partitions of weight <= T with at most m parts.

    Returns ``(parts, weights, offsets, log_hooks)`` where ``parts`` is an
    ``(P, m)`` int array sorted by weight then reverse-lexicographically,
    and ``offsets[t]:offsets[t+1]`` is the block of weight ``t``.
    """
    rows = np.arange(T // m + 1, dtype=np.int64)[:, None]
    for i in range(m - 1, 0, -1):
        # prepend column i-1: value v >= current first, total fits when
        # columns 0..i-1 all take at least v
        rest = rows.sum(axis=1)
        first = rows[:, 0]
        cap = (T - rest) // i
        count = np.maximum(cap - first + 1, 0)
        idx = np.repeat(np.arange(rows.shape[0]), count)
        offs = np.arange(idx.size) - np.repeat(np.cumsum(count) - count, count)
        vals = first[idx] + offs
        rows = np.column_stack([vals, rows[idx]])
    weights = rows.sum(axis=1)
    keys = [-rows[:, j] for j in range(m - 1, -1, -1)] + [weights]
    order = np.lexsort(keys)
    parts = np.ascontiguousarray(rows[order])
    weights = weights[order]
    offsets = np.searchsorted(weights, np.arange(T + 2))
    # H = prod_i l_i! / prod_{i<j} (l_i - l_j) with shifted parts l_i = k_i + m - 1 - i
    shifted = parts + (m - 1 - np.arange(m))
    log_h = gammaln(shifted + 1.0).sum(axis=1)
    for i in range(m):
        for j in range(i + 1, m):
            log_h -= np.log(shifted[:, i] - shifted[:, j])
    for arr in (parts, weights, offsets, log_h):
        arr.setflags(write=False)
    return parts, weights, offsets, log_h


# -- Schur polynomial evaluation ------------------------------------------------

def _complete_homogeneous(x: np.ndarray, kmax: int) -> np.ndarray:
    """``h_k(x)`` for k = 0..kmax, rows of ``x`` are separate spectra."""
    n_pts, n = x.shape
    h = np.zeros((n_pts, kmax + 1))
    h[:, 0] = 1.0
    for i in range(n):
        xi = x[:, i]
        for k in range(1, kmax + 1):
            h[:, k] = h[:, k] + xi * h[:, k - 1]
    return h


def schur_jacobi_trudi(parts: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``det(h_{k_i - i + j})`` for each row of ``x`` and each partition row."""
    parts = np.asarray(parts, dtype=np.int64)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n_pts = x.shape[0]
    ell = parts.shape[1]
    kmax = int(parts[:, 0].max()) + ell if parts.size else ell
    h = _complete_homogeneous(x, kmax)
    hpad = np.concatenate([np.zeros((n_pts, ell)), h], axis=1)  # hpad[:, ell + k] = h_k
    i = np.arange(ell)
    idx = parts[:, :, None] - i[None, :, None] + i[None, None, :]
    idx = np.where(idx < 0, -1, idx) + ell  # negative degrees hit a zero column
    return np.linalg.det(hpad[:, idx])


def schur_bialternant(parts: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``det(x_i^{k_j + n - j}) / det(x_i^{n - j})``; singular for repeated eigenvalues."""
    parts = np.asarray(parts, dtype=np.int64)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[1]
    if parts.shape[1] < n:
        parts = np.pad(parts, ((0, 0), (0, n - parts.shape[1])))
    exps = parts + (n - 1 - np.arange(n))
    num = np.linalg.det(x[:, None, :, None] ** exps[None, :, None, :])
    vand = np.ones(x.shape[0])
    for i in range(n):
        for j in range(i + 1, n):
            vand = vand * (x[:, i] - x[:, j])
    return num / vand[:, None]


def _keys(parts: np.ndarray, base: int) -> np.ndarray:
    key = np.zeros(parts.shape[0], dtype=np.int64)
    for j in range(parts.shape[1]):
        key = key * base + parts[:, j]
    return key


@lru_cache(maxsize=16)
def _row_recursion(T: int, n: int):
    """Index maps for the branching recursion on ``partition_table(T, n)``.

    ``base[k]`` locates ``(k_1, ..., k_{n-1})`` in the ``(n-1)``-variable
    table and ``dec[i][k]`` locates ``k - e_i`` (row ``i`` shortened by one),
    or is ``-1`` when that is not a partition.
    """
    K, _, offsets, _ = partition_table(T, n)
    M = partition_table(T, n - 1)[0]
    base = T + 1
    kkeys = _keys(K, base)
    korder = np.argsort(kkeys)
    mkeys = _keys(M, base)
    morder = np.argsort(mkeys)
    base_idx = morder[np.searchsorted(mkeys, _keys(K[:, :n - 1], base), sorter=morder)]
    dec = []
    nxt = np.column_stack([K[:, 1:], np.zeros(K.shape[0], dtype=K.dtype)])
    for i in range(n - 1):
        ok = K[:, i] - 1 >= nxt[:, i]
        shorter = K[ok].copy()
        shorter[:, i] -= 1
        d = np.full(K.shape[0], -1, dtype=np.int64)
        d[ok] = korder[np.searchsorted(kkeys, _keys(shorter, base), sorter=korder)]
        dec.append(d)
    return base_idx, dec, offsets


def schur_table(x: np.ndarray, T: int, max_cells: int = 20_000_000) -> np.ndarray:
    """Schur polynomials of every partition in ``partition_table(T, n)``.

    ``x`` is ``(N, n)``; returns ``(N, P)``.  Uses the branching rule
    ``s_k(x_1..x_n) = sum_{mu < k} x_n^{|k|-|mu|} s_mu(x_1..x_{n-1})`` with
    the interlacing sum done one row at a time: if ``R_i(k)`` leaves rows
    ``i..n-1`` of ``mu`` free, then ``R_i(k) = R_{i+1}(k) + x_n R_i(k - e_i)``.
    The cost is ``O(n P)`` per spectrum and, for same-sign spectra, every
    added term has the same sign.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n_pts, n = x.shape
    parts = partition_table(T, n)[0]
    if n == 1:
        return x[:, :1] ** parts[None, :, 0]
    if n == 2:
        d = parts[:, 0] - parts[:, 1]
        h = _complete_homogeneous(x, T)
        return (x[:, 0] * x[:, 1])[:, None] ** parts[None, :, 1] * h[:, d]
    base_idx, dec, offsets = _row_recursion(T, n)
    step = max(1, max_cells // max(1, parts.shape[0]))
    out = np.empty((n_pts, parts.shape[0]))
    for lo in range(0, n_pts, step):
        xs = x[lo:lo + step]
        t = xs[:, n - 1:n]
        R = schur_table(xs[:, :n - 1], T, max_cells)[:, base_idx] * t ** parts[None, :, n - 1]
        for i in range(n - 2, -1, -1):
            d = dec[i]
            for w in range(1, T + 1):
                sl = np.arange(offsets[w], offsets[w + 1])
                dd = d[sl]
                ok = dd >= 0
                if ok.any():
                    R[:, sl[ok]] += t * R[:, dd[ok]]
        out[lo:lo + step] = R
    return out


def schur_batch(parts: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Schur polynomials ``s_tau(x_row)`` for every spectrum row and partition.

    ``parts`` is ``(P, L)`` zero padded, ``x`` is ``(N, n)``. Returns ``(N, P)``.
    Partitions with more than ``n`` nonzero parts give 0.
    """
    parts = np.atleast_2d(np.asarray(parts, dtype=np.int64))
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n_pts, n = x.shape
    out = np.zeros((n_pts, parts.shape[0]))
    if parts.shape[0] == 0:
        return out
    if parts.shape[1] > n:
        keep = ~np.any(parts[:, n:] != 0, axis=1)
        parts_n = parts[:, :n]
    else:
        keep = np.ones(parts.shape[0], dtype=bool)
        parts_n = np.pad(parts, ((0, 0), (0, n - parts.shape[1])))
    if not keep.any():
        return out
    T = int(parts_n[keep].sum(axis=1).max())
    table = partition_table(T, n)[0]
    base = T + 1
    tkeys = _keys(table, base)
    order = np.argsort(tkeys)
    rows = order[np.searchsorted(tkeys, _keys(parts_n[keep], base), sorter=order)]
    out[:, keep] = schur_table(x, T)[:, rows]
    return out


def _spectrum(eigs) -> np.ndarray:
    if isinstance(eigs, EigenSpectrum):
        return eigs.values
    return np.asarray(eigs, dtype=float).reshape(-1)


def schur(tau, eigs) -> float:
    tau = Partition(tau)
    x = _spectrum(eigs)
    x = x[x != 0]
    if len(tau) > x.size:
        return 0.0
    if not tau:
        return 1.0
    scale = float(np.max(np.abs(x)))
    row = np.array([tuple(tau) + (0,) * (x.size - len(tau))])
    return float(schur_batch(row, x[None, :] / scale)[0, 0]) * scale ** tau.weight


def zonal_C(tau, eigs) -> float:
    """Complex zonal polynomial ``C_tau`` at a spectrum."""
    tau = Partition(tau)
    s = schur(tau, eigs)
    if s == 0.0:
        return 0.0
    return float(num_standard_tableaux(tuple(tau))) * s


def log_zonal_at_identity(tau, m: int) -> float:
    """``log C_tau(I_m)`` (``-inf`` when tau has more than m parts)."""
    tau = Partition(tau)
    if len(tau) > m:
        return -math.inf
    t = tau.weight
    log_contents = sum(math.log(m + j - i) for i in range(len(tau)) for j in range(tau[i]))
    return math.lgamma(t + 1) + log_contents - 2.0 * log_hook_product(tuple(tau))


def zonal_at_identity(tau, m: int) -> float:
    """``C_tau(I_m) = t! prod (m + c(box)) / H_tau^2`` (contents ``c = j - i``)."""
    value = log_zonal_at_identity(tau, m)
    return 0.0 if value == -math.inf else math.exp(value)
