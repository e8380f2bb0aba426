"""Unit tests for direct-sum detection and recursive decomposition."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cssep import DensityMatrix, kron_power
from cssep.reducibility import decompose_direct_sum, find_reduction
from cssep.states import is_cs, rank_of

from helpers import planted_direct_sum, product_mixture


@pytest.mark.parametrize("parties", [2, 3])
def test_planted_two_block_split_is_found(parties):
    """A mixture supported on two orthogonal local subspaces splits."""
    rng = np.random.default_rng(0)
    rho, _ = planted_direct_sum(rng, parties, (2, 2), (3, 3))
    red = find_reduction(rho)
    assert red is not None
    assert len(red.components) >= 2
    assert_allclose(red.reconstruct(parties), rho.matrix,
                    atol=1e-9 * max(1.0, np.abs(rho.matrix).max()))
    for comp in red.components:
        ok, _ = is_cs(comp)
        assert ok


def test_component_ranks_add_up():
    """Any accepted split partitions the rank among its components."""
    rng = np.random.default_rng(1)
    rho, _ = planted_direct_sum(rng, 2, (2, 3), (3, 4))
    red = find_reduction(rho)
    assert red is not None
    assert sum(rank_of(c) for c in red.components) == rank_of(rho)


def test_generic_overcomplete_mixture_is_irreducible():
    """Mixtures with more terms than levels admit no direct-sum split."""
    rng = np.random.default_rng(2)
    rho, _ = product_mixture(rng, 2, 3, 6, supported=True)
    assert find_reduction(rho) is None


def test_oblique_splits_are_accepted_only_when_sound():
    """Basis-count mixtures may split obliquely; the split must be lossless."""
    for seed in range(6):
        rng = np.random.default_rng(seed)
        rho, _ = product_mixture(rng, 2, 4, 4, supported=True)
        red = find_reduction(rho)
        if red is None:
            continue
        assert_allclose(red.reconstruct(2), rho.matrix,
                        atol=1e-8 * max(1.0, np.abs(rho.matrix).max()))
        assert sum(rank_of(c) for c in red.components) == rank_of(rho)


def test_three_block_recursive_decomposition():
    """Recursive splitting reaches irreducible parts and reconstructs."""
    rng = np.random.default_rng(3)
    rho, _ = planted_direct_sum(rng, 2, (2, 2, 2), (3, 3, 3))
    parts = decompose_direct_sum(rho)
    assert len(parts) >= 3
    back = np.zeros_like(rho.matrix)
    for E, piece in parts:
        Ed = kron_power(E, 2)
        back = back + Ed @ piece.matrix @ Ed.T
    assert_allclose(back, rho.matrix,
                    atol=1e-9 * max(1.0, np.abs(rho.matrix).max()))


def test_irreducible_state_decomposes_to_itself():
    """An irreducible state comes back as a single identity-embedded part."""
    rng = np.random.default_rng(4)
    rho, _ = product_mixture(rng, 2, 3, 5, supported=True)
    parts = decompose_direct_sum(rho)
    assert len(parts) == 1
    E, piece = parts[0]
    assert_allclose(E, np.eye(3), atol=1e-14)
    assert piece is rho


def test_reduction_requires_complete_symmetry():
    """Non-symmetric input is rejected up front."""
    v = np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2.0)
    rho = DensityMatrix(np.outer(v, v), (2, 2))
    with pytest.raises(ValueError):
        find_reduction(rho)


def test_noise_contaminated_oblique_frames_are_rejected():
    """Splits whose components carry junk rank directions return None."""
    # regression: five products on five levels once produced a component
    # with a spurious eigenvalue escaping the symmetric subspace
    rng = np.random.default_rng(1053)
    mat = np.zeros((25, 25))
    for _ in range(5):
        x = rng.standard_normal(5)
        x /= np.linalg.norm(x)
        w = kron_power(x, 2)
        mat += rng.uniform(0.2, 1.0) * np.outer(w, w)
    rho = DensityMatrix(mat, (5, 5))
    red = find_reduction(rho)
    if red is not None:
        assert sum(rank_of(c) for c in red.components) == rank_of(rho)
