"""Hermitian matrix helpers: validation, square roots, spectra, determinants.

Matrices are plain ``numpy`` complex arrays. Functions whose name starts with
``batch_`` operate on stacks of shape ``(..., m, m)`` and skip validation;
they are used by the samplers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError

ASYMMETRY_TOL = 1e-8
ABS_FLOOR = 1e-14
PD_RATIO = 1e-10


@dataclass(frozen=True)
class EigenSpectrum:
    """Real eigenvalues sorted non-increasing."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise DomainError("spectrum contains non-finite values")
        if np.any(np.diff(v) > 0):
            v = np.sort(v)[::-1]
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


def _scale(A: np.ndarray) -> float:
    return max(float(np.max(np.abs(A))) if A.size else 0.0, ABS_FLOOR)


def as_hermitian(A, return_correction: bool = False):
    """Validate ``A`` as Hermitian and return its exact symmetrisation.

    Inputs whose relative asymmetry exceeds 1e-8 are rejected. With
    ``return_correction`` the size of the applied fix is returned too.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    diff = float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0
    rel = diff / _scale(A)
    if rel > ASYMMETRY_TOL:
        raise DomainError(f"matrix is not Hermitian (relative asymmetry {rel:.3e})")
    H = 0.5 * (A + A.conj().T)
    if return_correction:
        return H, rel
    return H


def eig_hermitian(A) -> tuple[EigenSpectrum, np.ndarray]:
    """Eigendecomposition ``A = G diag(values) G^H`` with values non-increasing."""
    H = as_hermitian(A)
    w, G = np.linalg.eigh(H)
    return EigenSpectrum(w[::-1].copy()), G[:, ::-1].copy()


def eigvals(A) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, non-increasing."""
    return np.linalg.eigvalsh(as_hermitian(A))[::-1]


def _require_pd(w: np.ndarray, what: str = "matrix"):
    top = max(float(np.max(np.abs(w))), ABS_FLOOR)
    low = float(np.min(w))
    if low <= PD_RATIO * top:
        raise DomainError(f"{what} is not positive definite (eigenvalue {low:.6g})")


def is_pd(A) -> bool:
    w = np.linalg.eigvalsh(as_hermitian(A))
    return bool(w[0] > PD_RATIO * max(float(np.max(np.abs(w))), ABS_FLOOR))


def herm_sqrt(A) -> np.ndarray:
    """Hermitian positive definite square root of a PD matrix."""
    H = as_hermitian(A)
    w, G = np.linalg.eigh(H)
    _require_pd(w)
    S = (G * np.sqrt(w)) @ G.conj().T
    return 0.5 * (S + S.conj().T)


def herm_inv_sqrt(A) -> np.ndarray:
    H = as_hermitian(A)
    w, G = np.linalg.eigh(H)
    _require_pd(w)
    S = (G / np.sqrt(w)) @ G.conj().T
    return 0.5 * (S + S.conj().T)


def logdet(A) -> float:
    """Log-determinant of a PD Hermitian matrix (sum of log eigenvalues)."""
    w = np.linalg.eigvalsh(as_hermitian(A))
    _require_pd(w)
    return float(np.sum(np.log(w)))


def random_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary via QR of a complex Ginibre matrix with phase fix."""
    Z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def conjugate_diag(values, Q: np.ndarray) -> np.ndarray:
    """``Q diag(values) Q^H`` as an exactly Hermitian array."""
    H = (Q * np.asarray(values, dtype=float)) @ Q.conj().T
    return 0.5 * (H + H.conj().T)


# -- batched helpers (no validation) ---------------------------------------

def batch_hermitize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))


def batch_power(A: np.ndarray, p: float) -> np.ndarray:
    """``A^p`` for a stack of PD Hermitian matrices via eigh."""
    w, G = np.linalg.eigh(A)
    return batch_hermitize((G * w[..., None, :] ** p) @ np.conj(np.swapaxes(G, -1, -2)))


def batch_sandwich(S: np.ndarray, A: np.ndarray) -> np.ndarray:
    """``S A S`` for Hermitian ``S``, re-symmetrised."""
    return batch_hermitize(S @ A @ S)


def batch_logdet(A: np.ndarray) -> np.ndarray:
    """Log-determinants of a stack of PD Hermitian matrices; nan where not PD."""
    w = np.linalg.eigvalsh(A)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sum(np.log(w), axis=-1)
    return np.where(np.min(w, axis=-1) > 0, out, np.nan)


# -- JSON interchange --------------------------------------------------------

def matrix_to_json(A) -> dict:
    A = np.asarray(A, dtype=complex)
    return {"dim": int(A.shape[0]), "re": A.real.tolist(), "im": A.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    """Read ``{"dim", "re", "im"}`` (dict, JSON text or path) and validate.

    A bare nested list is read as a real matrix.
    """
    if isinstance(obj, Path) or (isinstance(obj, str) and not obj.lstrip().startswith(("{", "["))):
        obj = json.loads(Path(obj).read_text())
    elif isinstance(obj, str):
        obj = json.loads(obj)
    if isinstance(obj, list):
        obj = {"dim": len(obj), "re": obj}
    try:
        m = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros((m, m))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed matrix object: {exc}") from None
    if re.shape != (m, m) or im.shape != (m, m):
        raise DomainError(f"matrix arrays must be {m}x{m}")
    return as_hermitian(re + 1j * im)
