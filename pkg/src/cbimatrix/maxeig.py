"""Joint law of the largest eigenvalues of a type I bimatrix pair.

``P(U1 < D1, U2 < D2)`` is estimated by Monte Carlo for any ``m``; at
``m = 1`` a 2D quadrature of the scalar density serves as the oracle, and
for small ``m`` a tensor Gauss-Legendre rule over the joint eigenvalue
density gives a deterministic value of ``P(lmax < x, dmax < y)``.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .bimatrix import _unit_square, bgb1_pdf_m1, joint_eig_pdf_batch, sharded_bgb1
from .errors import DomainError
from .hermitian import _require_pd, as_hermitian
from .matfun import BimatrixParams
from .mc import MCEstimate

TIE_TOL = 1e-14


def _check_threshold(D, m: int, name: str) -> np.ndarray:
    D = as_hermitian(D)
    if D.shape != (m, m):
        raise DomainError(f"{name} must be {m}x{m}")
    w = np.linalg.eigvalsh(D)
    _require_pd(w, name)
    if w[-1] > 1.0 + 1e-12:
        raise DomainError(f"{name} must satisfy {name} <= I (largest eigenvalue {w[-1]:.6g})")
    return D


def _below(D: np.ndarray, U: np.ndarray):
    """Per draw: is ``D - U`` PD (strict), and is it a boundary tie."""
    low = np.linalg.eigvalsh(D[None] - U)[:, 0]
    tie = np.abs(low) < TIE_TOL
    return (low > 0) & ~tie, tie


def rect_prob_mc(p: BimatrixParams, d1, d2, N: int, seed: int, shards: int = 1) -> MCEstimate:
    """Fraction of ``N`` type I draws with ``U1 < D1`` and ``U2 < D2``."""
    D1 = _check_threshold(d1, p.m, "D1")
    D2 = _check_threshold(d2, p.m, "D2")
    if N <= 0:
        raise DomainError("N must be positive")
    U1, U2 = sharded_bgb1(p, N, seed, shards)
    in1, tie1 = _below(D1, U1)
    in2, tie2 = _below(D2, U2)
    est = MCEstimate.from_proportion(int(np.sum(in1 & in2)), N, seed, shards)
    return MCEstimate(est.mean, est.std_error, est.n, est.seed, est.shards,
                      {"boundary_ties": int(np.sum(tie1 | tie2))})


def maxeig_cdf_grid(p: BimatrixParams, xs, ys, N: int, seed: int, shards: int = 1) -> list[list[MCEstimate]]:
    """``P(lmax < x, dmax < y)`` on a grid, all cells from one set of draws.

    Each cell equals ``maxeig_cdf_mc`` at the same seed.
    """
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    for v in xs + ys:
        if not 0 < v <= 1:
            raise DomainError(f"thresholds must lie in (0, 1], got {v}")
    if N <= 0:
        raise DomainError("N must be positive")
    U1, U2 = sharded_bgb1(p, N, seed, shards)
    l1 = np.linalg.eigvalsh(U1)[:, -1]
    l2 = np.linalg.eigvalsh(U2)[:, -1]
    out = []
    for x in xs:
        row = []
        for y in ys:
            g1, g2 = x - l1, y - l2
            hit = (g1 >= TIE_TOL) & (g2 >= TIE_TOL)
            ties = int(np.sum((np.abs(g1) < TIE_TOL) | (np.abs(g2) < TIE_TOL)))
            est = MCEstimate.from_proportion(int(np.sum(hit)), N, seed, shards)
            row.append(MCEstimate(est.mean, est.std_error, N, seed, shards, {"boundary_ties": ties}))
        out.append(row)
    return out


def maxeig_cdf_mc(p: BimatrixParams, x: float, y: float, N: int, seed: int, shards: int = 1) -> MCEstimate:
    """``P(lmax < x, dmax < y)``: rect_prob_mc at ``D1 = xI``, ``D2 = yI``."""
    if not (0 < x <= 1 and 0 < y <= 1):
        raise DomainError(f"thresholds must lie in (0, 1], got ({x}, {y})")
    I = np.eye(p.m)
    return rect_prob_mc(p, x * I, y * I, N, seed, shards)


def rect_prob_quad_m1(p: BimatrixParams, x: float, y: float, tol: float = 1e-10) -> float:
    """Adaptive 2D quadrature of the scalar density over ``(0,x) x (0,y)``."""
    if p.m != 1:
        raise DomainError("the quadrature oracle needs m = 1")
    if not (0 < x <= 1 and 0 < y <= 1):
        raise DomainError(f"thresholds must lie in (0, 1], got ({x}, {y})")
    return _unit_square(lambda u, v: bgb1_pdf_m1(u, v, p), x, y, tol)


def maxeig_cdf_gl(p: BimatrixParams, x: float, y: float, nodes: int = 24) -> float:
    """``P(lmax < x, dmax < y)`` by tensor Gauss-Legendre over the box
    ``(0,x)^m x (0,y)^m`` of the joint eigenvalue density (determinant form).

    The density is symmetric in each spectrum, so the box integral is
    divided by ``(m!)^2``.  Cost grows as ``nodes^(2m)``; meant for m <= 2.
    """
    if not (0 < x <= 1 and 0 < y <= 1):
        raise DomainError(f"thresholds must lie in (0, 1], got ({x}, {y})")
    m = p.m
    g, w = np.polynomial.legendre.leggauss(nodes)
    gx, wx = 0.5 * x * (g + 1), 0.5 * x * w
    gy, wy = 0.5 * y * (g + 1), 0.5 * y * w
    lam = np.array(list(itertools.product(gx, repeat=m)))
    lw = np.prod(np.array(list(itertools.product(wx, repeat=m))), axis=1)
    dl = np.array(list(itertools.product(gy, repeat=m)))
    dw = np.prod(np.array(list(itertools.product(wy, repeat=m))), axis=1)
    total = 0.0
    for k in range(lam.shape[0]):
        L = np.broadcast_to(lam[k], dl.shape)
        f = joint_eig_pdf_batch(L, dl, p)
        total += lw[k] * float(np.dot(dw, np.nan_to_num(f)))
    return total / math.factorial(m) ** 2
