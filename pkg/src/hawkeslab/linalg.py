"""Small dense linear-algebra kernels used by the moment engine and samplers.

Models here are tiny (d of a few), so everything is delegated to the mature
LAPACK-backed routines in numpy/scipy behind thin wrappers that pin down the
contracts this package relies on: tolerance guarantees, condition guards,
and PSD handling for Cholesky.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .errors import SingularMatrixError, IndefiniteMatrixError

_COND_LIMIT = 1e12
_SYM_TOL = 1e-10
_JITTER = 1e-12


def _square(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


def spectral_radius(M) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    M = _square(M)
    if M.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def eigenvalues(M) -> np.ndarray:
    """Eigenvalues of a square matrix, sorted by (real, imag) for determinism."""
    ev = np.linalg.eigvals(_square(M))
    return ev[np.lexsort((ev.imag, ev.real))]


def mat_exp(M, t: float = 1.0) -> np.ndarray:
    """Matrix exponential exp(t M) (scaling-and-squaring, Pade degree 13).

    Large decaying arguments are fine (the result underflows toward 0);
    raises OverflowError when the result itself is not representable.
    """
    M = _square(M)
    tM = t * M
    if not np.isfinite(tM).all():
        raise OverflowError("matrix exponential argument is not finite")
    out = scipy.linalg.expm(tM)
    if not np.isfinite(out).all():
        raise OverflowError("matrix exponential overflowed")
    return out


def _check_cond(M, what):
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularMatrixError(f"{what}: matrix is singular or ill-conditioned",
                                  cond=float(cond))
    return cond


def inverse(M) -> np.ndarray:
    """Matrix inverse with a condition guard (raises SingularMatrixError)."""
    M = _square(M)
    _check_cond(M, "inverse")
    return np.linalg.inv(M)


def solve(M, b) -> np.ndarray:
    """Solve M x = b with the same condition guard as :func:`inverse`."""
    M = _square(M)
    _check_cond(M, "solve")
    return np.linalg.solve(M, np.asarray(b, dtype=float))


def cholesky(S) -> np.ndarray:
    """Lower-triangular L with L L^T = S for symmetric PSD S.

    Singular-but-PSD inputs get a diagonal jitter of 1e-12 (with a warning);
    indefinite inputs raise IndefiniteMatrixError.
    """
    S = _square(S)
    scale = max(1.0, float(np.max(np.abs(S))) if S.size else 1.0)
    if np.max(np.abs(S - S.T), initial=0.0) > _SYM_TOL * scale:
        raise IndefiniteMatrixError("cholesky requires a symmetric matrix")
    S = 0.5 * (S + S.T)
    if S.size and np.min(np.linalg.eigvalsh(S)) < -_SYM_TOL * scale:
        raise IndefiniteMatrixError("matrix is not positive semidefinite")
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        warnings.warn(
            "PSD matrix is numerically singular; applying 1e-12 diagonal jitter",
            RuntimeWarning,
            stacklevel=2,
        )
        try:
            return np.linalg.cholesky(S + _JITTER * scale * np.eye(S.shape[0]))
        except np.linalg.LinAlgError as e:
            raise IndefiniteMatrixError(
                "matrix is not positive semidefinite even after jitter"
            ) from e


def operator_norm(M) -> float:
    """Largest singular value; accepts rectangular input."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("operator_norm expects a 2-D array")
    if M.size == 0 or not M.any():
        return 0.0
    return float(np.linalg.norm(M, 2))
