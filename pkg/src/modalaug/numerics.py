"""Dense linear-algebra kernels behind stable, testable contracts.

Three operations are needed downstream: a thin SVD, a general complex
eigendecomposition, and minimum-norm linear least squares. They are
delegated to LAPACK via numpy; the contracts (orthonormality, residual
bounds, cutoff behaviour) are what the rest of the package relies on and
what the tests pin down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

LSTSQ_CUTOFF = 1e-12


@dataclass(frozen=True)
class ThinSvd:
    """a = u @ diag(s) @ vt with orthonormal u columns and vt rows."""

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray


@dataclass(frozen=True)
class EigenPairs:
    """Eigenvalues and matching unit-norm eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


def thin_svd(a: np.ndarray) -> ThinSvd:
    """Thin SVD of a real or complex matrix, rank r = min(J, K)."""
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return ThinSvd(u=u, s=s, vt=vt)


def eig(a: np.ndarray) -> EigenPairs:
    """Eigendecomposition of a square matrix; vectors normalized to unit 2-norm.

    No eigenvalue ordering is guaranteed; callers sort.
    """
    if a.shape[0] != a.shape[1]:
        raise NumericalError(f"eig requires a square matrix, got {a.shape}")
    try:
        values, vectors = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc
    norms = np.linalg.norm(vectors, axis=0)
    norms[norms == 0] = 1.0
    return EigenPairs(values=values, vectors=vectors / norms)


def lstsq(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm minimizer of ||a x - b||_F.

    Singular values below LSTSQ_CUTOFF times the largest are treated as
    zero, so rank deficiency is handled rather than raised.
    """
    try:
        x, _, _, _ = np.linalg.lstsq(a, b, rcond=LSTSQ_CUTOFF)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"least-squares solve failed: {exc}") from exc
    return x
