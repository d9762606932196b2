"""Thin wrappers around dense linear algebra with explicit tolerance contracts.

All routines accept anything convertible to a 2-D complex array and refuse
non-finite input. Rank decisions are always made relative to the largest
singular value so the same tolerance works across scales.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolationError, NumericalError

DEFAULT_RANK_TOL = 1e-10
DEFAULT_HERMITIAN_TOL = 1e-10


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return `a` as a 2-D complex128 array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise ContractViolationError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ContractViolationError(f"{name} contains non-finite entries")
    return arr


def svd_reduced(a, rank_tol: float = DEFAULT_RANK_TOL):
    """Reduced SVD truncated at the numerical rank.

    Returns (u, s, v) with a ~= u @ diag(s) @ v.conj().T, singular values
    sorted descending, and only values above rank_tol * s_max kept.
    """
    arr = as_complex_matrix(a)
    if arr.size == 0:
        raise ContractViolationError("svd_reduced needs a non-empty matrix")
    try:
        u, s, vh = np.linalg.svd(arr, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    s_max = s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > rank_tol * s_max))
    return u[:, :rank], s[:rank], vh[:rank].conj().T


def eig_hermitian(a, herm_tol: float = DEFAULT_HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The input must be Hermitian within herm_tol (Frobenius norm of the
    anti-Hermitian part, relative to the matrix norm with an absolute
    floor of 1); it is symmetrized before factorization so the output is
    exactly consistent with a Hermitian operator.
    """
    arr = as_complex_matrix(a)
    if arr.shape[0] != arr.shape[1]:
        raise ContractViolationError(f"expected square matrix, got {arr.shape}")
    deviation = np.linalg.norm(arr - arr.conj().T)
    if deviation > herm_tol * max(1.0, np.linalg.norm(arr)):
        raise ContractViolationError(
            f"matrix is not Hermitian within tolerance (deviation {deviation:.3e})"
        )
    sym = 0.5 * (arr + arr.conj().T)
    try:
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def null_space_basis(a, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the columns of `a`.

    Returns b with a.conj().T @ b == 0 and b.conj().T @ b == I; the number of
    columns is rows(a) minus the numerical rank of `a` at tolerance tol.
    """
    arr = as_complex_matrix(a)
    if arr.shape[1] == 0:
        return np.eye(arr.shape[0], dtype=np.complex128)
    try:
        u, s, _ = np.linalg.svd(arr, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    s_max = s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > tol * s_max))
    return u[:, rank:]
