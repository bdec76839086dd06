"""Matrix operators used by the solvers.

Dense matrices are plain two-dimensional ``float64`` numpy arrays. The
functions here are pure and keep no state between calls.
"""

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import FactorizationError, InvalidInputError, RankDeficientError

#: Singular values below ``RANK_RTOL * sigma_1`` count as zero.
RANK_RTOL = 1e-12

#: Gram-Schmidt pivots below ``PIVOT_RTOL * ||A||_F`` signal rank deficiency.
PIVOT_RTOL = 1e-12


class SvdFactors(NamedTuple):
    """Thin SVD ``A = u @ diag(sigma) @ v.T``."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


class Norms(NamedTuple):
    frobenius: float
    nuclear: float
    l1: float
    linf: float
    spectral: float


def as_matrix(A, name="matrix"):
    """Return `A` as a finite 2-D float64 array, raising on bad input."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got ndim={A.ndim}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} contains NaN or Inf entries")
    return A


def shrink(a, tau):
    r"""Soft-thresholding :math:`\mathrm{sgn}(a)\max(|a|-\tau, 0)`.

    Accepts scalars or arrays (`tau` broadcasts against `a`); scalars come
    back as ``float``.
    """
    if np.any(np.asarray(tau) < 0):
        raise InvalidInputError(f"threshold must be non-negative, got {tau}")
    out = np.sign(a) * np.maximum(np.abs(a) - tau, 0.0)
    if np.ndim(out) == 0:
        return float(out)
    return out


def shrink_matrix(A, tau):
    """Element-wise :func:`shrink` of a matrix."""
    return shrink(np.asarray(A, dtype=np.float64), tau)


def svd(A):
    """Thin singular value decomposition.

    LAPACK ``gesdd`` is tried first; on its (rare) convergence failure the
    slower QR-iteration driver ``gesvd`` is used before giving up.

    Raises
    ------
    FactorizationError
        If both drivers fail.
    """
    A = as_matrix(A)
    if A.size == 0:
        k = min(A.shape)
        return SvdFactors(np.zeros((A.shape[0], k)), np.zeros(k), np.zeros((A.shape[1], k)))
    try:
        u, s, vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError:
        try:
            u, s, vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise FactorizationError(f"SVD failed on {A.shape[0]}x{A.shape[1]} matrix") from exc
    return SvdFactors(u, s, vt.T)


def svt(A, tau):
    """Singular value thresholding, the proximal map of ``tau * ||.||_*``."""
    if tau < 0:
        raise InvalidInputError(f"threshold must be non-negative, got {tau}")
    u, s, v = svd(A)
    s = np.maximum(s - tau, 0.0)
    keep = s > 0
    return (u[:, keep] * s[keep]) @ v[:, keep].T


def rank(A, rtol=RANK_RTOL):
    """Numerical rank: singular values strictly above ``rtol * sigma_1``."""
    s = svd(A).sigma
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def orthonormalize(A):
    """Orthonormal basis for the column span of `A` by modified Gram-Schmidt.

    Each column is orthogonalized twice against the previous ones, which
    keeps ``Q.T @ Q`` at machine precision even for ill-conditioned input.

    Parameters
    ----------
    A : (n, d) array_like
        Full column rank, ``d <= n``.

    Returns
    -------
    Q : (n, d) ndarray
        Columns are orthonormal and span the same space as `A`.

    Raises
    ------
    RankDeficientError
        When a column is (numerically) in the span of the preceding ones.
    """
    A = as_matrix(A)
    n, d = A.shape
    if d > n:
        raise RankDeficientError(f"{d} columns cannot be independent in dimension {n}")
    scale = np.linalg.norm(A)
    if scale == 0 and d > 0:
        raise RankDeficientError("zero matrix has no column span")
    Q = A.copy()
    for j in range(d):
        q = Q[:, j]
        for _ in range(2):
            for i in range(j):
                q -= (Q[:, i] @ q) * Q[:, i]
        pivot = np.linalg.norm(q)
        if pivot < PIVOT_RTOL * scale:
            raise RankDeficientError(f"column {j} is linearly dependent on columns 0..{j - 1}")
        Q[:, j] = q / pivot
    return Q


def norms(A):
    """Frobenius, nuclear, entrywise l1, max-absolute and spectral norms."""
    A = as_matrix(A)
    s = svd(A).sigma
    return Norms(
        frobenius=float(np.linalg.norm(A)),
        nuclear=float(s.sum()),
        l1=float(np.abs(A).sum()),
        linf=float(np.abs(A).max()) if A.size else 0.0,
        spectral=float(s[0]) if s.size else 0.0,
    )


def nuclear_norm(A):
    return float(svd(A).sigma.sum())


def spectral_norm(A):
    s = svd(A).sigma
    return float(s[0]) if s.size else 0.0
