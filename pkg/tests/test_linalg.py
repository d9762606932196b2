"""Contracts of the dense linear-algebra wrappers."""

import numpy as np
import pytest

from ddamsim.errors import ContractViolationError
from ddamsim.linalg import (
    as_complex_matrix,
    eig_hermitian,
    null_space_basis,
    svd_reduced,
)


def _random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_as_complex_matrix_rejects_bad_input():
    with pytest.raises(ContractViolationError):
        as_complex_matrix(np.zeros(3))
    with pytest.raises(ContractViolationError):
        as_complex_matrix(np.array([[1.0, np.nan], [0.0, 1.0]]))
    with pytest.raises(ContractViolationError):
        as_complex_matrix(np.array([[np.inf + 0j, 0j], [0j, 0j]]))


def test_as_complex_matrix_accepts_noncontiguous_views():
    rng = np.random.default_rng(3)
    big = _random_complex(rng, (6, 6))
    view = big[::2, ::2]
    out = as_complex_matrix(view)
    assert np.array_equal(out, view)


def test_svd_reduced_reconstructs_and_sorts():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = _random_complex(rng, (5, 3))
        u, s, v = svd_reduced(a)
        assert np.all(np.diff(s) <= 0), "singular values must be non-increasing"
        recon = u @ np.diag(s) @ v.conj().T
        assert np.linalg.norm(recon - a) <= 1e-12 * np.linalg.norm(a)
        assert np.allclose(u.conj().T @ u, np.eye(s.size), atol=1e-12)
        assert np.allclose(v.conj().T @ v, np.eye(s.size), atol=1e-12)


def test_svd_reduced_truncates_at_numerical_rank():
    rng = np.random.default_rng(1)
    left = _random_complex(rng, (6, 2))
    right = _random_complex(rng, (4, 2))
    a = left @ right.conj().T
    u, s, v = svd_reduced(a)
    assert s.size == 2, f"rank-2 product reported rank {s.size}"
    assert u.shape == (6, 2) and v.shape == (4, 2)


def test_svd_reduced_rejects_empty():
    with pytest.raises(ContractViolationError):
        svd_reduced(np.zeros((0, 3)))


def test_eig_hermitian_decomposition():
    rng = np.random.default_rng(2)
    for _ in range(20):
        b = _random_complex(rng, (5, 5))
        a = b + b.conj().T
        vals, vecs = eig_hermitian(a)
        assert np.all(np.diff(vals) <= 1e-12), "eigenvalues must be descending"
        assert np.max(np.abs(a @ vecs - vecs * vals[None, :])) <= 1e-10
        assert np.allclose(vecs.conj().T @ vecs, np.eye(5), atol=1e-10)


def test_eig_hermitian_rejects_non_hermitian():
    a = np.array([[1.0, 2.0], [0.0, 1.0]], dtype=np.complex128)
    with pytest.raises(ContractViolationError):
        eig_hermitian(a)
    with pytest.raises(ContractViolationError):
        eig_hermitian(np.zeros((2, 3)))


def test_null_space_basis_contract():
    rng = np.random.default_rng(4)
    for _ in range(20):
        a = _random_complex(rng, (6, 3))
        b = null_space_basis(a)
        assert b.shape == (6, 3), "rows minus rank columns expected"
        assert np.max(np.abs(a.conj().T @ b)) <= 1e-12 * np.linalg.norm(a)
        assert np.allclose(b.conj().T @ b, np.eye(3), atol=1e-12)


def test_null_space_basis_rank_deficient_input():
    rng = np.random.default_rng(5)
    col = _random_complex(rng, (5, 1))
    a = np.concatenate([col, 2.0 * col, -1j * col], axis=1)  # rank 1
    b = null_space_basis(a)
    assert b.shape == (5, 4)
    assert np.max(np.abs(a.conj().T @ b)) <= 1e-12 * np.linalg.norm(a)


def test_null_space_basis_empty_input_is_identity():
    b = null_space_basis(np.zeros((4, 0)))
    assert np.array_equal(b, np.eye(4, dtype=np.complex128))
