"""Unit tests for symmetric tensor and Dicke basis utilities."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cssep.tensors import (SymTensor, canonical_index, dicke, dicke_basis,
                           kron_power, project_periodic, project_symmetric,
                           sym2_basis, sym2_dim)

from helpers import product_mixture


def test_canonical_index_sorts_and_validates():
    """Multi-indices are canonicalized to nondecreasing order."""
    assert canonical_index((2, 0, 1), 3) == (0, 1, 2)
    assert canonical_index((1, 1), 2) == (1, 1)
    with pytest.raises(ValueError):
        canonical_index((0, 3), 3)
    with pytest.raises(ValueError):
        canonical_index((-1, 0), 3)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_kron_power_matches_explicit_kron(d):
    """kron_power agrees with repeated np.kron."""
    rng = np.random.default_rng(0)
    x = rng.standard_normal(3)
    expected = x
    for _ in range(d - 1):
        expected = np.kron(expected, x)
    assert_allclose(kron_power(x, d), expected, atol=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_dicke_vectors_orthonormal(d):
    """The d+1 Dicke vectors form an orthonormal family."""
    B = dicke_basis(d)
    assert B.shape == (2 ** d, d + 1)
    assert_allclose(B.T @ B, np.eye(d + 1), atol=1e-14)


def test_dicke_support_counts_zeros():
    """dicke(d, k) is uniform over bitstrings with exactly k zeros."""
    d, k = 4, 1
    v = dicke(d, k)
    support = np.nonzero(v)[0]
    assert len(support) == math.comb(d, k)
    for idx in support:
        bits = [(idx >> (d - 1 - p)) & 1 for p in range(d)]
        assert bits.count(0) == k
    assert_allclose(v[support], 1.0 / math.sqrt(math.comb(d, k)), atol=1e-14)
    with pytest.raises(ValueError):
        dicke(3, 4)


def test_all_zeros_is_the_last_dicke_vector():
    """|0...0> carries Dicke index d."""
    d = 3
    v = dicke(d, d)
    expected = np.zeros(2 ** d)
    expected[0] = 1.0
    assert_allclose(v, expected, atol=1e-14)


@pytest.mark.parametrize("d,N", [(2, 3), (3, 2), (4, 2)])
def test_project_symmetric_idempotent_and_fixes_products(d, N):
    """The symmetric projection is idempotent and fixes product powers."""
    rng = np.random.default_rng(1)
    v = rng.standard_normal(N ** d)
    p = project_symmetric(v, d, N)
    assert_allclose(project_symmetric(p, d, N), p, atol=1e-12)
    assert np.linalg.norm(p) <= np.linalg.norm(v) + 1e-12
    x = rng.standard_normal(N)
    w = kron_power(x, d)
    assert_allclose(project_symmetric(w, d, N), w, atol=1e-12)


def test_cyclic_subspace_contains_symmetric_but_not_conversely():
    """Cyclic averaging fixes a cyclic-invariant vector that is not symmetric."""
    rng = np.random.default_rng(2)
    N, d = 2, 4
    raw = rng.standard_normal(N ** d)
    v = project_periodic(raw, d, N)
    assert_allclose(project_periodic(v, d, N), v, atol=1e-12)
    assert np.linalg.norm(project_symmetric(v, d, N) - v) > 1e-3
    w = project_symmetric(raw, d, N)
    assert_allclose(project_periodic(w, d, N), w, atol=1e-12)


def test_sym2_basis_orthonormal_and_symmetric():
    """Columns of the bipartite symmetric basis are orthonormal symmetric mats."""
    N = 4
    B = sym2_basis(N)
    assert B.shape == (N * N, sym2_dim(N))
    assert_allclose(B.T @ B, np.eye(sym2_dim(N)), atol=1e-14)
    for k in range(B.shape[1]):
        m = B[:, k].reshape(N, N)
        assert_allclose(m, m.T, atol=1e-14)


def test_symtensor_roundtrip_on_product_mixture():
    """from_dense followed by to_dense reproduces a symmetric-tensor matrix."""
    rng = np.random.default_rng(3)
    rho, _ = product_mixture(rng, 2, 3, 4)
    t = SymTensor.from_dense(rho.matrix, 2, 3)
    assert_allclose(t.to_dense(), rho.matrix, atol=1e-12)


def test_symtensor_entry_access_is_permutation_invariant():
    """Reading any permutation of a stored index returns the same value."""
    t = SymTensor(4, 3, {})
    t[(2, 0, 1, 0)] = 1.5
    assert t[(0, 0, 1, 2)] == 1.5
    assert t[(1, 0, 2, 0)] == 1.5
    assert t[(0, 1, 0, 2)] == 1.5


def test_dense_reconstruction_size_gate():
    """to_dense refuses tensors beyond the dense size limit."""
    t = SymTensor(26, 2, {})
    with pytest.raises(ValueError):
        t.to_dense()
