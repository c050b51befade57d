"""Dense linear algebra on small Hermitian matrices.

All fibre matrices live in an orthonormal frame, so "Hermitian" means plain
conjugate-transpose symmetry. Functions accept a single matrix or a stack of
matrices with shape ``(..., n, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, DomainError, NotHermitian, ShapeMismatch

HERMITICITY_TOL = 1e-10
POSDEF_TOL = 1e-12
MAX_ORDER = 64


@dataclass(frozen=True)
class HermEig:
    eigenvalues: np.ndarray
    basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues[..., None, :]) @ dagger(self.basis)


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def as_cmatrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite complex square matrix (or stack of them)."""
    m = np.asarray(a, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ShapeMismatch(f"{name} must be square, got shape {m.shape}")
    if m.shape[-1] > MAX_ORDER:
        raise ShapeMismatch(f"{name} has order {m.shape[-1]} > {MAX_ORDER}")
    if not np.all(np.isfinite(m)):
        raise ShapeMismatch(f"{name} has non-finite entries")
    return m


def hermiticity_residual(m: np.ndarray) -> float:
    """Largest ||M - M^dag|| / max(||M||, 1) over a stack (Frobenius)."""
    diff = np.linalg.norm(m - dagger(m), axis=(-2, -1))
    scale = np.maximum(np.linalg.norm(m, axis=(-2, -1)), 1.0)
    return float(np.max(diff / scale))


def _check_hermitian(m: np.ndarray) -> None:
    res = hermiticity_residual(m)
    if res > HERMITICITY_TOL:
        raise NotHermitian(f"matrix is not Hermitian (relative residual {res:.3e})")


def herm_eig(m) -> HermEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    m = as_cmatrix(m)
    _check_hermitian(m)
    h = 0.5 * (m + dagger(m))
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return HermEig(w, v)


def matfun(m, f) -> np.ndarray:
    """Apply a real scalar function to a Hermitian matrix via its spectrum.

    ``f`` is called once on the array of eigenvalues and must return an array
    of the same shape. Non-finite results raise :class:`DomainError`.
    """
    eig = herm_eig(m)
    with np.errstate(all="ignore"):
        fw = np.asarray(f(eig.eigenvalues))
    if fw.shape != eig.eigenvalues.shape:
        fw = np.broadcast_to(fw, eig.eigenvalues.shape)
    if not np.all(np.isfinite(fw)):
        bad = eig.eigenvalues[~np.isfinite(fw)]
        raise DomainError(f"function undefined at eigenvalue(s) {bad.ravel()[:4]}")
    return (eig.basis * fw[..., None, :]) @ dagger(eig.basis)


def min_eigenvalue(m) -> float | np.ndarray:
    eig = herm_eig(m)
    lo = eig.eigenvalues[..., 0]
    return float(lo) if np.ndim(lo) == 0 else lo


def is_positive_definite(m, tol: float = POSDEF_TOL) -> bool:
    return bool(np.all(min_eigenvalue(m) > tol))


def projector_onto(cols: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the span of orthonormal columns."""
    return cols @ dagger(cols)


def range_basis(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the range of a Hermitian projector."""
    w, v = np.linalg.eigh(0.5 * (p + dagger(p)))
    return v[:, w > 0.5]
